//! Output references for the pendulum angle.
//!
//! A reference gives `y_ref(t)` together with its first three derivatives.

use std::f64::consts::PI;

use crate::linalg::Vec4;

/// Length of the smoothing window of a step reference (s).
pub const STEP_RISE_TIME: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ReferenceSpec {
    #[default]
    Zero,
    /// Smooth step from 0 to `amplitude` starting at `time`, settled after
    /// [`STEP_RISE_TIME`].
    Step { amplitude: f64, time: f64 },
    /// `amplitude · sin(2π · frequency · t)`.
    Sinusoid { amplitude: f64, frequency: f64 },
}

impl ReferenceSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ReferenceSpec::Zero => "zero",
            ReferenceSpec::Step { .. } => "step",
            ReferenceSpec::Sinusoid { .. } => "sinusoid",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            ReferenceSpec::Zero => Ok(()),
            ReferenceSpec::Step { amplitude, time } => {
                if !amplitude.is_finite() || !(time.is_finite() && time >= 0.0) {
                    return Err("step reference needs a finite amplitude and a time ≥ 0".into());
                }
                Ok(())
            }
            ReferenceSpec::Sinusoid { amplitude, frequency } => {
                if !amplitude.is_finite() || !(frequency.is_finite() && frequency > 0.0) {
                    return Err("sinusoid reference needs a finite amplitude and a frequency > 0".into());
                }
                Ok(())
            }
        }
    }
}

/// `(y_ref, ẏ_ref, ÿ_ref, y_ref⁽³⁾)` at time `t`.
pub fn reference_trajectory(spec: &ReferenceSpec, t: f64) -> [f64; 4] {
    match *spec {
        ReferenceSpec::Zero => [0.0; 4],
        ReferenceSpec::Step { amplitude, time } => {
            let tau = (t - time) / STEP_RISE_TIME;
            if tau <= 0.0 {
                return [0.0; 4];
            }
            if tau >= 1.0 {
                return [amplitude, 0.0, 0.0, 0.0];
            }
            let s = smoothstep(tau);
            let k = amplitude;
            let h = STEP_RISE_TIME;
            [k * s[0], k * s[1] / h, k * s[2] / (h * h), k * s[3] / (h * h * h)]
        }
        ReferenceSpec::Sinusoid { amplitude, frequency } => {
            let w = 2.0 * PI * frequency;
            let (s, c) = (w * t).sin_cos();
            [
                amplitude * s,
                amplitude * w * c,
                -amplitude * w * w * s,
                -amplitude * w * w * w * c,
            ]
        }
    }
}

/// `35τ⁴ − 84τ⁵ + 70τ⁶ − 20τ⁷` and its first three derivatives: the lowest
/// degree polynomial rising from 0 to 1 with zero velocity, acceleration and
/// jerk at both ends.
fn smoothstep(tau: f64) -> [f64; 4] {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    [
        t4 * (35.0 - 84.0 * tau + 70.0 * t2 - 20.0 * t3),
        t3 * (140.0 - 420.0 * tau + 420.0 * t2 - 140.0 * t3),
        t2 * (420.0 - 1680.0 * tau + 2100.0 * t2 - 840.0 * t3),
        tau * (840.0 - 5040.0 * tau + 8400.0 * t2 - 4200.0 * t3),
    ]
}

/// `x_ref = (0, 0, y_ref, ẏ_ref)`: the pendulum pair follows the output
/// reference and the arm channels are held at zero.
pub fn output_state(spec: &ReferenceSpec, t: f64) -> Vec4 {
    let [y, dy, _, _] = reference_trajectory(spec, t);
    Vec4::new(0.0, 0.0, y, dy)
}
