//! Mamdani-style fuzzy approximators `f̂(X) = θ_fᵀ ε(X)` and `ĝ(X) = θ_gᵀ ε(X)`
//! over the four pendulum states, plus the Lyapunov-gradient adaptation law.
//!
//! Every state variable carries a list of Gaussian membership functions. The
//! rule base is the full grid of their combinations; rule `(l1, l2, l3, l4)`
//! sits at flat index `((l1·P2 + l2)·P3 + l3)·P4 + l4`, i.e. lexicographic
//! order with the last state varying fastest. `ε(X)` holds the product
//! firing strengths normalised to sum to one.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{Mat4, Vec4};
use crate::plant::PlantState;

/// Largest number of membership functions allowed on one state variable.
pub const MAX_MFS_PER_STATE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("membership function width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("state {state}: membership function count must be in 1..={MAX_MFS_PER_STATE}, got {count}")]
    InvalidCount { state: usize, count: usize },
    #[error("state {state}: range [{lo}, {hi}] is empty or inverted")]
    InvalidRange { state: usize, lo: f64, hi: f64 },
    #[error("parameter vector length {got} does not match the rule grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("degenerate firing: no rule fires for the given state")]
    DegenerateFiring,
    #[error("parameter blow-up: |θ| = {value} exceeds {bound}")]
    ParameterBlowUp { value: f64, bound: f64 },
    #[error("adaptation step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("least-squares fit failed: {0}")]
    Fit(String),
    #[error("malformed snapshot at line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMF {
    pub center: f64,
    pub width: f64,
}

impl GaussianMF {
    pub fn new(center: f64, width: f64) -> Result<Self, FuzzyError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(FuzzyError::InvalidWidth(width));
        }
        Ok(Self { center, width })
    }

    /// `exp(−½((x − c)/σ)²)`.
    pub fn membership(&self, x: f64) -> f64 {
        (self.exponent(x)).exp()
    }

    fn exponent(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        -0.5 * z * z
    }
}

pub fn membership(mf: &GaussianMF, x: f64) -> f64 {
    mf.membership(x)
}

/// Normalised rule firing strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector(pub Vec<f64>);

impl BasisVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(e, t)| e * t).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyModel {
    mfs: [Vec<GaussianMF>; 4],
    pub theta_f: Vec<f64>,
    pub theta_g: Vec<f64>,
    pub g_floor: f64,
}

/// Per-state membership values shifted so the largest is exactly one.
/// Shifting by a common factor leaves the normalised basis unchanged and
/// keeps the normaliser away from underflow for any finite input.
struct Firing {
    w: [[f64; MAX_MFS_PER_STATE]; 4],
    sums: [f64; 4],
}

impl FuzzyModel {
    pub fn new(
        mfs: [Vec<GaussianMF>; 4],
        theta_f: Vec<f64>,
        theta_g: Vec<f64>,
        g_floor: f64,
    ) -> Result<Self, FuzzyError> {
        for (state, list) in mfs.iter().enumerate() {
            if list.is_empty() || list.len() > MAX_MFS_PER_STATE {
                return Err(FuzzyError::InvalidCount {
                    state,
                    count: list.len(),
                });
            }
        }
        let n: usize = mfs.iter().map(Vec::len).product();
        for v in [&theta_f, &theta_g] {
            if v.len() != n {
                return Err(FuzzyError::LengthMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            mfs,
            theta_f,
            theta_g,
            g_floor,
        })
    }

    pub fn membership_functions(&self) -> &[Vec<GaussianMF>; 4] {
        &self.mfs
    }

    pub fn counts(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|i| self.mfs[i].len())
    }

    pub fn grid_size(&self) -> usize {
        self.counts().iter().product()
    }

    fn firing(&self, x: &PlantState) -> Result<Firing, FuzzyError> {
        let mut w = [[0.0; MAX_MFS_PER_STATE]; 4];
        let mut sums = [0.0; 4];
        for (i, list) in self.mfs.iter().enumerate() {
            let xi = x.0[i];
            let mut top = f64::NEG_INFINITY;
            for (k, mf) in list.iter().enumerate() {
                w[i][k] = mf.exponent(xi);
                top = top.max(w[i][k]);
            }
            if !top.is_finite() {
                return Err(FuzzyError::DegenerateFiring);
            }
            for v in w[i][..list.len()].iter_mut() {
                *v = (*v - top).exp();
                sums[i] += *v;
            }
            if !(sums[i] > 0.0) {
                return Err(FuzzyError::DegenerateFiring);
            }
        }
        Ok(Firing { w, sums })
    }

    /// Normalised firing strengths `ε(X)` in rule order.
    pub fn basis(&self, x: &PlantState) -> Result<BasisVector, FuzzyError> {
        let firing = self.firing(x)?;
        let [n0, n1, n2, n3] = self.counts();
        let w = &firing.w;
        let mut raw = Vec::with_capacity(n0 * n1 * n2 * n3);
        for a in 0..n0 {
            for b in 0..n1 {
                let ab = w[0][a] * w[1][b];
                for c in 0..n2 {
                    let abc = ab * w[2][c];
                    raw.extend(w[3][..n3].iter().map(|wd| abc * wd));
                }
            }
        }
        let total: f64 = raw.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(FuzzyError::DegenerateFiring);
        }
        raw.iter_mut().for_each(|v| *v /= total);
        Ok(BasisVector(raw))
    }

    /// `(f̂(X), ĝ(X))` in one pass, with `ĝ` clamped below at `g_floor`.
    /// Returns NaNs when the firing is degenerate (non-finite input).
    pub fn estimate(&self, x: &PlantState) -> (f64, f64) {
        let Ok(firing) = self.firing(x) else {
            return (f64::NAN, f64::NAN);
        };
        let [n0, n1, n2, n3] = self.counts();
        let w = &firing.w;
        let (mut f, mut g) = (0.0, 0.0);
        let mut idx = 0;
        for a in 0..n0 {
            for b in 0..n1 {
                let ab = w[0][a] * w[1][b];
                for c in 0..n2 {
                    let abc = ab * w[2][c];
                    for wd in &w[3][..n3] {
                        let e = abc * wd;
                        f += self.theta_f[idx] * e;
                        g += self.theta_g[idx] * e;
                        idx += 1;
                    }
                }
            }
        }
        // the rule-sum normaliser factorises into per-state sums
        let total: f64 = firing.sums.iter().product();
        (f / total, (g / total).max(self.g_floor))
    }

    pub fn f_hat(&self, x: &PlantState) -> f64 {
        self.estimate(x).0
    }

    pub fn g_hat(&self, x: &PlantState) -> f64 {
        self.estimate(x).1
    }

    /// Least-squares fit of `θ_f`, `θ_g` to target functions on the given
    /// samples. A tiny ridge term keeps rules without sample support at zero.
    pub fn fit<F, G>(&self, samples: &[PlantState], f: F, g: G) -> Result<FuzzyModel, FuzzyError>
    where
        F: Fn(&PlantState) -> f64,
        G: Fn(&PlantState) -> f64,
    {
        let n = self.grid_size();
        let mut gram = DMatrix::<f64>::zeros(n, n);
        let mut rhs_f = DVector::<f64>::zeros(n);
        let mut rhs_g = DVector::<f64>::zeros(n);
        for s in samples {
            let e = DVector::from_vec(self.basis(s)?.0);
            gram.ger(1.0, &e, &e, 1.0);
            rhs_f.axpy(f(s), &e, 1.0);
            rhs_g.axpy(g(s), &e, 1.0);
        }
        let ridge = 1e-12 * gram.trace().max(1.0) / n as f64;
        for i in 0..n {
            gram[(i, i)] += ridge;
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| FuzzyError::Fit("normal equations not positive definite".into()))?;
        let mut out = self.clone();
        out.theta_f = chol.solve(&rhs_f).as_slice().to_vec();
        out.theta_g = chol.solve(&rhs_g).as_slice().to_vec();
        Ok(out)
    }

    /// Flat text snapshot, one value per line:
    ///
    /// 1. the four membership-function counts `P1..P4`;
    /// 2. for each state in order, each MF's center then width;
    /// 3. `g_floor`;
    /// 4. the `ΠPi` entries of `θ_f` in rule order;
    /// 5. the `ΠPi` entries of `θ_g` in rule order.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        for c in self.counts() {
            let _ = writeln!(out, "{c}");
        }
        for list in &self.mfs {
            for mf in list {
                let _ = writeln!(out, "{}", mf.center);
                let _ = writeln!(out, "{}", mf.width);
            }
        }
        let _ = writeln!(out, "{}", self.g_floor);
        for v in self.theta_f.iter().chain(&self.theta_g) {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<FuzzyModel, FuzzyError> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, f64), FuzzyError> {
            let (i, l) = lines.next().ok_or(FuzzyError::Snapshot {
                line: 0,
                reason: format!("unexpected end of input, expected {what}"),
            })?;
            l.trim()
                .parse::<f64>()
                .map(|v| (i + 1, v))
                .map_err(|e| FuzzyError::Snapshot {
                    line: i + 1,
                    reason: e.to_string(),
                })
        };
        let mut counts = [0usize; 4];
        for c in counts.iter_mut() {
            let (line, v) = next("count")?;
            if v.fract() != 0.0 || v < 1.0 || v > MAX_MFS_PER_STATE as f64 {
                return Err(FuzzyError::Snapshot {
                    line,
                    reason: format!("invalid count {v}"),
                });
            }
            *c = v as usize;
        }
        let mut mfs: [Vec<GaussianMF>; 4] = Default::default();
        for (i, list) in mfs.iter_mut().enumerate() {
            for _ in 0..counts[i] {
                let (_, center) = next("center")?;
                let (_, width) = next("width")?;
                list.push(GaussianMF::new(center, width)?);
            }
        }
        let (_, g_floor) = next("g_floor")?;
        let n: usize = counts.iter().product();
        let mut theta_f = Vec::with_capacity(n);
        for _ in 0..n {
            theta_f.push(next("theta_f")?.1);
        }
        let mut theta_g = Vec::with_capacity(n);
        for _ in 0..n {
            theta_g.push(next("theta_g")?.1);
        }
        FuzzyModel::new(mfs, theta_f, theta_g, g_floor)
    }
}

pub fn basis(model: &FuzzyModel, x: &PlantState) -> Result<BasisVector, FuzzyError> {
    model.basis(x)
}

pub fn f_hat(model: &FuzzyModel, x: &PlantState) -> f64 {
    model.f_hat(x)
}

pub fn g_hat(model: &FuzzyModel, x: &PlantState) -> f64 {
    model.g_hat(x)
}

/// Default lower clamp on `ĝ`.
pub const DEFAULT_G_FLOOR: f64 = 1.0;

/// Builds an evenly spaced rule grid. Adjacent membership functions cross at
/// `exp(−¼)` (width = spacing/√2). A single function sits at the middle of
/// its range with width equal to the range length. Parameters start at zero.
pub fn build_rule_grid(counts: [usize; 4], ranges: [(f64, f64); 4]) -> Result<FuzzyModel, FuzzyError> {
    let mut mfs: [Vec<GaussianMF>; 4] = Default::default();
    for (state, ((&count, &(lo, hi)), list)) in counts.iter().zip(&ranges).zip(mfs.iter_mut()).enumerate() {
        if count == 0 || count > MAX_MFS_PER_STATE {
            return Err(FuzzyError::InvalidCount { state, count });
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(FuzzyError::InvalidRange { state, lo, hi });
        }
        if count == 1 {
            list.push(GaussianMF::new(0.5 * (lo + hi), hi - lo)?);
        } else {
            let spacing = (hi - lo) / (count - 1) as f64;
            let width = spacing / std::f64::consts::SQRT_2;
            for k in 0..count {
                list.push(GaussianMF::new(lo + spacing * k as f64, width)?);
            }
        }
    }
    let n = counts.iter().product();
    FuzzyModel::new(mfs, vec![0.0; n], vec![0.0; n], DEFAULT_G_FLOOR)
}

/// Lyapunov-gradient adaptation
///
/// ```text
/// θ̇_f = −γ · eᵀPb · ε(X)
/// θ̇_g = −γ · eᵀPb · ε(X) · u
/// ```
///
/// integrated with forward Euler. The same basis serves both channels.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationLaw {
    pub p: Mat4,
    pub b: Vec4,
    pub gain: f64,
    pub bound: f64,
}

impl AdaptationLaw {
    pub fn new(p: Mat4, b: Vec4) -> Self {
        Self {
            p,
            b,
            gain: 1.0,
            bound: 1e6,
        }
    }

    /// Scalar `eᵀPb` shared by both laws.
    pub fn error_signal(&self, e: &Vec4) -> f64 {
        e.dot(&(self.p * self.b))
    }

    pub fn adapt(
        &self,
        model: &FuzzyModel,
        e: &Vec4,
        x: &PlantState,
        u: f64,
        dt: f64,
    ) -> Result<FuzzyModel, FuzzyError> {
        if !(dt > 0.0) {
            return Err(FuzzyError::NonPositiveStep(dt));
        }
        let mut out = model.clone();
        let s = self.error_signal(e);
        if s == 0.0 {
            return Ok(out);
        }
        let eps = model.basis(x)?;
        let kf = -self.gain * s * dt;
        let kg = kf * u;
        for ((tf, tg), e) in out.theta_f.iter_mut().zip(out.theta_g.iter_mut()).zip(eps.values()) {
            *tf += kf * e;
            *tg += kg * e;
        }
        let worst = out.theta_f.iter().chain(&out.theta_g).fold(0.0f64, |m, v| {
            if v.is_nan() {
                f64::INFINITY
            } else {
                m.max(v.abs())
            }
        });
        if worst > self.bound {
            return Err(FuzzyError::ParameterBlowUp {
                value: worst,
                bound: self.bound,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn singleton_grid() -> FuzzyModel {
        build_rule_grid([1, 1, 1, 1], [(-1.0, 1.0); 4]).unwrap()
    }

    #[test]
    fn gaussian_values() {
        let mf = GaussianMF::new(1.0, 0.5).unwrap();
        assert_eq!(membership(&mf, 1.0), 1.0);
        assert_relative_eq!(membership(&mf, 1.5), (-0.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(membership(&mf, 1.5), 0.6065, max_relative = 1e-4);
        assert_eq!(membership(&mf, 0.5), membership(&mf, 1.5));
        assert!(GaussianMF::new(0.0, 0.0).is_err());
        assert!(GaussianMF::new(0.0, -1.0).is_err());
    }

    #[test]
    fn grid_sizes() {
        let ranges = [(-1.0, 1.0); 4];
        assert_eq!(build_rule_grid([1, 1, 1, 1], ranges).unwrap().grid_size(), 1);
        assert_eq!(build_rule_grid([3, 3, 3, 3], ranges).unwrap().grid_size(), 81);
        assert_eq!(build_rule_grid([5, 5, 5, 5], ranges).unwrap().grid_size(), 625);
        assert!(matches!(
            build_rule_grid([3, 0, 3, 3], ranges),
            Err(FuzzyError::InvalidCount { state: 1, count: 0 })
        ));
        let mut bad = ranges;
        bad[2] = (1.0, -1.0);
        assert!(matches!(
            build_rule_grid([3, 3, 3, 3], bad),
            Err(FuzzyError::InvalidRange { state: 2, .. })
        ));
    }

    #[test]
    fn neighbours_cross_at_exp_minus_quarter() {
        let m = build_rule_grid([3, 1, 1, 1], [(-2.0, 2.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]).unwrap();
        let mfs = &m.membership_functions()[0];
        let midpoint = 0.5 * (mfs[0].center + mfs[1].center);
        assert_relative_eq!(mfs[0].membership(midpoint), (-0.25f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn singleton_basis_is_one() {
        let b = singleton_grid().basis(&PlantState::new(0.3, -2.0, 1.0, 5.0)).unwrap();
        assert_eq!(b.values(), &[1.0]);
    }

    #[test]
    fn two_term_basis() {
        let mfs = [
            vec![GaussianMF::new(0.0, 0.5).unwrap(), GaussianMF::new(1.0, 0.5).unwrap()],
            vec![GaussianMF::new(0.0, 1.0).unwrap()],
            vec![GaussianMF::new(0.0, 1.0).unwrap()],
            vec![GaussianMF::new(0.0, 1.0).unwrap()],
        ];
        let m = FuzzyModel::new(mfs, vec![0.0; 2], vec![0.0; 2], 1.0).unwrap();
        let b = m.basis(&PlantState::new(0.0, 0.3, -0.2, 0.1)).unwrap();
        let second = (-0.5f64 * (1.0 / 0.5f64).powi(2)).exp();
        assert_relative_eq!(b.values()[0], 1.0 / (1.0 + second), max_relative = 1e-14);
        assert_relative_eq!(b.values()[1], second / (1.0 + second), max_relative = 1e-14);
    }

    #[test]
    fn estimates_are_convex_combinations() {
        let mut m = build_rule_grid([3, 3, 3, 3], [(-1.0, 1.0); 4]).unwrap();
        let x = PlantState::new(0.2, -0.7, 0.9, 0.1);
        assert_eq!(m.f_hat(&x), 0.0);
        m.theta_f = vec![5.0; 81];
        assert_relative_eq!(m.f_hat(&x), 5.0, max_relative = 1e-14);
    }

    #[test]
    fn dot_product_example() {
        let b = BasisVector(vec![0.25, 0.75]);
        assert_eq!(b.dot(&[1.0, 3.0]), 2.5);
    }

    #[test]
    fn estimate_agrees_with_explicit_basis() {
        let mut m = build_rule_grid([3, 2, 4, 3], [(-3.0, 3.0), (-10.0, 10.0), (-1.0, 1.0), (-5.0, 5.0)]).unwrap();
        m.theta_f = (0..m.grid_size()).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        m.theta_g = (0..m.grid_size())
            .map(|i| 50.0 + (i as f64 * 0.11).cos() * 30.0)
            .collect();
        let x = PlantState::new(0.4, 3.0, -0.3, 1.5);
        let b = m.basis(&x).unwrap();
        let (f, g) = m.estimate(&x);
        assert_relative_eq!(f, b.dot(&m.theta_f), max_relative = 1e-12);
        assert_relative_eq!(g, b.dot(&m.theta_g), max_relative = 1e-12);
    }

    #[test]
    fn g_hat_is_clamped() {
        let m = build_rule_grid([2, 2, 2, 2], [(-1.0, 1.0); 4]).unwrap();
        assert_eq!(m.g_hat(&PlantState::zeros()), DEFAULT_G_FLOOR);
    }

    #[test]
    fn far_states_do_not_underflow() {
        let m = build_rule_grid([3, 3, 3, 3], [(-1.0, 1.0); 4]).unwrap();
        let b = m.basis(&PlantState::new(1e4, -1e4, 5e3, 0.0)).unwrap();
        assert_relative_eq!(b.values().iter().sum::<f64>(), 1.0, max_relative = 1e-12);
        assert_eq!(
            m.basis(&PlantState::new(f64::NAN, 0.0, 0.0, 0.0)),
            Err(FuzzyError::DegenerateFiring)
        );
    }

    fn law_with_signal(value: f64) -> (AdaptationLaw, Vec4) {
        // P = I, b = e1, e = value·e1  ⇒  eᵀPb = value
        let law = AdaptationLaw::new(Mat4::identity(), Vec4::new(1.0, 0.0, 0.0, 0.0));
        (law, Vec4::new(value, 0.0, 0.0, 0.0))
    }

    fn two_rule_model() -> FuzzyModel {
        // symmetric pair evaluated at their midpoint gives ε = (0.5, 0.5)
        let mfs = [
            vec![GaussianMF::new(-1.0, 1.0).unwrap(), GaussianMF::new(1.0, 1.0).unwrap()],
            vec![GaussianMF::new(0.0, 1.0).unwrap()],
            vec![GaussianMF::new(0.0, 1.0).unwrap()],
            vec![GaussianMF::new(0.0, 1.0).unwrap()],
        ];
        FuzzyModel::new(mfs, vec![0.0; 2], vec![0.0; 2], 1.0).unwrap()
    }

    #[test]
    fn adaptation_examples() {
        let m = two_rule_model();
        let x = PlantState::zeros();

        let (law, _) = law_with_signal(0.0);
        assert_eq!(law.adapt(&m, &Vec4::zeros(), &x, 1.0, 0.1).unwrap(), m);

        let (law, e) = law_with_signal(2.0);
        let out = law.adapt(&m, &e, &x, 1.0, 1.0).unwrap();
        assert_relative_eq!(out.theta_f[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(out.theta_f[1], -1.0, max_relative = 1e-14);
        assert_relative_eq!(out.theta_g[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(out.theta_g[1], -1.0, max_relative = 1e-14);

        let out = law.adapt(&m, &e, &x, 0.0, 1.0).unwrap();
        assert_eq!(out.theta_g, m.theta_g);
        assert!(out.theta_f != m.theta_f);
    }

    #[test]
    fn adaptation_blow_up_is_reported() {
        let m = two_rule_model();
        let (mut law, e) = law_with_signal(1e3);
        law.bound = 10.0;
        assert!(matches!(
            law.adapt(&m, &e, &PlantState::zeros(), 1.0, 1.0),
            Err(FuzzyError::ParameterBlowUp { .. })
        ));
        assert!(matches!(
            law.adapt(&m, &e, &PlantState::zeros(), 1.0, 0.0),
            Err(FuzzyError::NonPositiveStep(_))
        ));
    }

    #[test]
    fn snapshot_round_trip() {
        let mut m = build_rule_grid([2, 3, 1, 2], [(-3.0, 3.0), (-10.0, 10.0), (-1.0, 1.0), (-5.0, 5.0)]).unwrap();
        m.theta_f = (0..m.grid_size()).map(|i| 0.1 * i as f64 - 1.0 / 3.0).collect();
        m.theta_g = (0..m.grid_size()).map(|i| 1e-7 * i as f64 + 142.291).collect();
        let text = m.to_snapshot();
        assert_eq!(text.lines().count(), 4 + 2 * 8 + 1 + 2 * 12);
        assert_eq!(FuzzyModel::from_snapshot(&text).unwrap(), m);
        assert!(FuzzyModel::from_snapshot("3\n3\n").is_err());
    }

    #[test]
    fn fit_recovers_representable_function() {
        let m = build_rule_grid([3, 3, 1, 1], [(-1.0, 1.0); 4]).unwrap();
        let mut truth = m.clone();
        truth.theta_f = (0..9).map(|i| i as f64 - 4.0).collect();
        truth.theta_g = vec![2.0; 9];
        let samples: Vec<_> = (0..400)
            .map(|k| PlantState::new(-1.0 + 0.1 * (k % 21) as f64, -1.0 + 0.1 * (k / 21) as f64, 0.0, 0.0))
            .collect();
        let fitted = m.fit(&samples, |x| truth.f_hat(x), |_| 2.0).unwrap();
        for (a, b) in fitted.theta_f.iter().zip(&truth.theta_f) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}
