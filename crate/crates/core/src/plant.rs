//! Rotational inverted pendulum: physical parameters, derived coefficients,
//! continuous dynamics and a fixed-step RK4 integrator.
//!
//! State ordering is `(θ, θ̇, α, α̇)` where θ is the horizontal arm angle and
//! α the pendulum angle. With `a3 > 0` the `a3·sin α` term destabilises
//! `α = 0`, so `α = 0` is the upright equilibrium and `α = π` hangs down.

use std::f64::consts::PI;

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("invalid plant parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),
    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },
    #[error("integration step must be positive, got {0}")]
    NonPositiveStep(f64),
}

/// Physical constants of the pendulum rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    /// Pendulum mass (kg).
    pub m1: f64,
    /// Arm/pendulum coupling coefficient.
    pub k1: f64,
    /// Arm dynamic coefficient (1/s).
    pub a_p: f64,
    /// Pendulum inertia (kg·m²).
    pub j1: f64,
    /// Gravity (m/s²).
    pub g: f64,
    /// Pendulum length (m).
    pub l1: f64,
    /// Pendulum damping coefficient.
    pub c1: f64,
    /// Input gain.
    pub k_p: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            m1: 0.0861,
            k1: 0.0019,
            a_p: 33.04,
            j1: 0.0010,
            g: 9.8066,
            l1: 0.113,
            c1: 0.0029,
            k_p: 74.89,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let positive = [
            ("m1", self.m1),
            ("j1", self.j1),
            ("g", self.g),
            ("l1", self.l1),
            ("k_p", self.k_p),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PlantError::InvalidParameter {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        for (name, value) in [("c1", self.c1), ("k1", self.k1), ("a_p", self.a_p)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(PlantError::InvalidParameter {
                    name,
                    value,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }
}

/// Coefficients of the state-space form
///
/// ```text
/// ẋ1 = x2
/// ẋ2 = a1·x2 + b1·u
/// ẋ3 = x4
/// ẋ4 = a2·x2 + a3·sin(x3) + a4·x4 + b2·u
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffSet {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
}

impl CoeffSet {
    /// Multiplies each coefficient by the matching factor. Used to build a
    /// deliberately wrong controller model.
    pub fn scaled(&self, factors: &CoeffSet) -> CoeffSet {
        CoeffSet {
            a1: self.a1 * factors.a1,
            a2: self.a2 * factors.a2,
            a3: self.a3 * factors.a3,
            a4: self.a4 * factors.a4,
            b1: self.b1 * factors.b1,
            b2: self.b2 * factors.b2,
        }
    }

    /// All-ones factors.
    pub fn unit() -> CoeffSet {
        CoeffSet {
            a1: 1.0,
            a2: 1.0,
            a3: 1.0,
            a4: 1.0,
            b1: 1.0,
            b2: 1.0,
        }
    }

    /// Drift of the pendulum acceleration, `a2·x2 + a3·sin x3 + a4·x4`.
    pub fn drift(&self, x: &Vector4<f64>) -> f64 {
        self.a2 * x[1] + self.a3 * x[2].sin() + self.a4 * x[3]
    }

    /// Input gain of the pendulum acceleration.
    pub fn input_gain(&self) -> f64 {
        self.b2
    }
}

pub fn derive_coefficients(params: &PlantParams) -> Result<CoeffSet, PlantError> {
    params.validate()?;
    let PlantParams {
        m1,
        k1,
        a_p,
        j1,
        g,
        l1,
        c1,
        k_p,
    } = *params;
    Ok(CoeffSet {
        a1: -a_p,
        a2: -k1 * a_p / j1,
        a3: m1 * g * l1 / j1,
        a4: -c1 / j1,
        b1: k_p,
        b2: k1 * k_p / j1,
    })
}

/// Pendulum state `(θ, θ̇, α, α̇)`. Angles are never wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState(pub Vector4<f64>);

impl PlantState {
    pub fn new(theta: f64, theta_dot: f64, alpha: f64, alpha_dot: f64) -> Self {
        Self(Vector4::new(theta, theta_dot, alpha, alpha_dot))
    }

    pub fn zeros() -> Self {
        Self(Vector4::zeros())
    }

    pub fn theta(&self) -> f64 {
        self.0[0]
    }

    pub fn theta_dot(&self) -> f64 {
        self.0[1]
    }

    pub fn alpha(&self) -> f64 {
        self.0[2]
    }

    pub fn alpha_dot(&self) -> f64 {
        self.0[3]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Measured output `y = α`.
pub fn output(state: &PlantState) -> f64 {
    state.alpha()
}

/// State derivative. The disturbance `d` is matched: it enters the pendulum
/// equation through the same gain as the control input.
pub fn dynamics(state: &PlantState, u: f64, coeffs: &CoeffSet, d: f64) -> Vector4<f64> {
    let x = &state.0;
    Vector4::new(
        x[1],
        coeffs.a1 * x[1] + coeffs.b1 * u,
        x[3],
        coeffs.drift(x) + coeffs.b2 * (u + d),
    )
}

/// One classical RK4 step of `ẋ = f(t, x)`.
pub fn rk4_step<F>(f: F, t: f64, x: &Vector4<f64>, h: f64) -> Vector4<f64>
where
    F: Fn(f64, &Vector4<f64>) -> Vector4<f64>,
{
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, &(x + k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(x + k2 * (0.5 * h)));
    let k4 = f(t + h, &(x + k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Advances the plant by `dt` with `u` held constant over the step.
pub fn step(
    state: &PlantState,
    u: f64,
    dt: f64,
    coeffs: &CoeffSet,
    disturbance: &Disturbance,
    t: f64,
) -> Result<PlantState, PlantError> {
    if !(dt > 0.0) {
        return Err(PlantError::NonPositiveStep(dt));
    }
    let next = rk4_step(
        |tau, x| dynamics(&PlantState(*x), u, coeffs, disturbance.value(tau)),
        t,
        &state.0,
        dt,
    );
    let next = PlantState(next);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(PlantError::Divergence { t: t + dt })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisturbanceKind {
    #[default]
    None,
    Constant,
    Sinusoid,
    BandLimitedNoise,
}

impl DisturbanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DisturbanceKind::None => "none",
            DisturbanceKind::Constant => "constant",
            DisturbanceKind::Sinusoid => "sinusoid",
            DisturbanceKind::BandLimitedNoise => "noise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(DisturbanceKind::None),
            "constant" => Some(DisturbanceKind::Constant),
            "sinusoid" => Some(DisturbanceKind::Sinusoid),
            "noise" | "band-limited-noise" => Some(DisturbanceKind::BandLimitedNoise),
            _ => None,
        }
    }
}

/// Additive disturbance on the control channel.
///
/// For noise, `frequency` is the band edge in Hz and `amplitude` the RMS level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    pub amplitude: f64,
    pub frequency: f64,
    pub seed: u64,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            kind: DisturbanceKind::None,
            amplitude: 0.0,
            frequency: 1.0,
            seed: 0,
        }
    }
}

const NOISE_TONES: usize = 32;

/// Evaluable disturbance signal built from a [`DisturbanceSpec`].
///
/// Band-limited noise is a sum of tones with seeded random frequencies and
/// phases, so it can be evaluated at any time and is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    spec: DisturbanceSpec,
    tones: Vec<(f64, f64)>,
}

impl Disturbance {
    pub fn none() -> Self {
        Self {
            spec: DisturbanceSpec::default(),
            tones: Vec::new(),
        }
    }

    pub fn new(spec: DisturbanceSpec) -> Result<Self, PlantError> {
        if !(spec.amplitude.is_finite() && spec.amplitude >= 0.0) {
            return Err(PlantError::InvalidDisturbance(format!(
                "amplitude must be finite and >= 0, got {}",
                spec.amplitude
            )));
        }
        let needs_frequency = matches!(spec.kind, DisturbanceKind::Sinusoid | DisturbanceKind::BandLimitedNoise);
        if needs_frequency && !(spec.frequency.is_finite() && spec.frequency > 0.0) {
            return Err(PlantError::InvalidDisturbance(format!(
                "frequency must be positive, got {}",
                spec.frequency
            )));
        }
        let tones = if spec.kind == DisturbanceKind::BandLimitedNoise {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            (0..NOISE_TONES)
                .map(|_| {
                    let f = spec.frequency * rng.random_range(0.0..1.0f64).max(1e-3);
                    let phase = rng.random_range(0.0..2.0 * PI);
                    (2.0 * PI * f, phase)
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self { spec, tones })
    }

    pub fn spec(&self) -> &DisturbanceSpec {
        &self.spec
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = &self.spec;
        match s.kind {
            DisturbanceKind::None => 0.0,
            DisturbanceKind::Constant => s.amplitude,
            DisturbanceKind::Sinusoid => s.amplitude * (2.0 * PI * s.frequency * t).sin(),
            DisturbanceKind::BandLimitedNoise => {
                // RMS of a sum of n unit tones is sqrt(n/2).
                let scale = s.amplitude / (self.tones.len() as f64 / 2.0).sqrt();
                scale * self.tones.iter().map(|(w, p)| (w * t + p).sin()).sum::<f64>()
            }
        }
    }

    /// Value a controller may assume for time `t`. Noise is unpredictable
    /// and forecast as zero.
    pub fn forecast(&self, t: f64) -> f64 {
        match self.spec.kind {
            DisturbanceKind::BandLimitedNoise => 0.0,
            _ => self.value(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table() -> CoeffSet {
        derive_coefficients(&PlantParams::default()).unwrap()
    }

    #[test]
    fn coefficients_from_table_values() {
        let c = table();
        assert_eq!(c.b1, 74.89);
        assert_relative_eq!(c.a4, -2.9, max_relative = 1e-12);
        assert_relative_eq!(c.a3, 0.0861 * 9.8066 * 0.113 / 0.0010, max_relative = 1e-12);
        assert!((c.a3 - 95.411).abs() < 1e-3);
        assert_relative_eq!(c.a1, -33.04, max_relative = 1e-12);
        assert_relative_eq!(c.a2, -62.776, max_relative = 1e-12);
        assert_relative_eq!(c.b2, 0.0019 * 74.89 / 0.0010, max_relative = 1e-12);
    }

    #[test]
    fn rejects_zero_inertia() {
        let p = PlantParams {
            j1: 0.0,
            ..PlantParams::default()
        };
        assert!(matches!(
            derive_coefficients(&p),
            Err(PlantError::InvalidParameter { name: "j1", .. })
        ));
    }

    #[test]
    fn dynamics_examples() {
        let c = table();
        assert_eq!(dynamics(&PlantState::zeros(), 0.0, &c, 0.0), Vector4::zeros());
        let d = dynamics(&PlantState::new(0.0, 1.0, 0.0, 0.0), 0.0, &c, 0.0);
        assert_eq!(d[0], 1.0);
        assert_relative_eq!(d[1], -33.04, max_relative = 1e-12);
        assert_eq!(d[2], 0.0);
        assert_relative_eq!(d[3], -62.776, max_relative = 1e-12);
        let d = dynamics(&PlantState::new(0.0, 0.0, PI, 0.0), 0.0, &c, 0.0);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn disturbance_is_matched() {
        let c = table();
        let s = PlantState::new(0.1, 0.2, 0.3, 0.4);
        let a = dynamics(&s, 0.5, &c, 0.25);
        let b = dynamics(&s, 0.75, &c, 0.0);
        // d only enters the pendulum channel
        assert_eq!(a[3], b[3]);
        assert!(a[1] != b[1]);
    }

    #[test]
    fn output_projects_alpha() {
        assert_eq!(output(&PlantState::zeros()), 0.0);
        assert_eq!(output(&PlantState::new(1.0, 2.0, 3.0, 4.0)), 3.0);
        assert_eq!(output(&PlantState::new(0.0, 0.0, 0.3, 0.0)), 0.3);
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let c = table();
        let s = step(&PlantState::zeros(), 0.0, 1e-3, &c, &Disturbance::none(), 0.0).unwrap();
        assert_eq!(s, PlantState::zeros());
    }

    #[test]
    fn single_step_matches_exponential() {
        let c = table();
        let dt = 1e-3;
        let s = step(
            &PlantState::new(0.0, 1.0, 0.0, 0.0),
            0.0,
            dt,
            &c,
            &Disturbance::none(),
            0.0,
        )
        .unwrap();
        // RK4 on a linear ODE reproduces the 4th-order Taylor polynomial of
        // exp(λh); its distance to exp(λh) is the local error (λh)⁵/120.
        let z = c.a1 * dt;
        let taylor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((s.theta_dot() - taylor).abs() <= 1e-15);
        let local = (s.theta_dot() - z.exp()).abs();
        assert!(local <= 1.01 * z.abs().powi(5) / 120.0, "{local}");
        // θ(h) = (e^{λh} − 1)/λ, to the same order
        let theta_exact = z.exp_m1() / c.a1;
        assert!((s.theta() - theta_exact).abs() <= 1.01 * dt * z.powi(4) / 120.0);
    }

    #[test]
    fn rejects_bad_step() {
        let c = table();
        let r = step(&PlantState::zeros(), 0.0, 0.0, &c, &Disturbance::none(), 0.0);
        assert!(matches!(r, Err(PlantError::NonPositiveStep(_))));
        let r = step(
            &PlantState::new(f64::NAN, 0.0, 0.0, 0.0),
            0.0,
            1e-3,
            &c,
            &Disturbance::none(),
            0.0,
        );
        assert!(matches!(r, Err(PlantError::Divergence { .. })));
    }

    #[test]
    fn disturbance_kinds() {
        let none = Disturbance::new(DisturbanceSpec::default()).unwrap();
        assert_eq!(none.value(1.3), 0.0);
        let konst = Disturbance::new(DisturbanceSpec {
            kind: DisturbanceKind::Constant,
            amplitude: 0.2,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(konst.value(7.0), 0.2);
        assert_eq!(konst.forecast(7.0), 0.2);

        let noise_spec = DisturbanceSpec {
            kind: DisturbanceKind::BandLimitedNoise,
            amplitude: 0.1,
            frequency: 5.0,
            seed: 42,
        };
        let a = Disturbance::new(noise_spec).unwrap();
        let b = Disturbance::new(noise_spec).unwrap();
        assert_eq!(a.value(0.123).to_bits(), b.value(0.123).to_bits());
        assert_eq!(a.forecast(0.123), 0.0);
        let other = Disturbance::new(DisturbanceSpec { seed: 43, ..noise_spec }).unwrap();
        assert!(a.value(0.5) != other.value(0.5));

        assert!(Disturbance::new(DisturbanceSpec {
            amplitude: -1.0,
            ..Default::default()
        })
        .is_err());
    }
}
