//! Dense SQP solver for
//!
//! ```text
//! minimize J(z)   subject to   c(z) ≤ 0,   lower ≤ z ≤ upper
//! ```
//!
//! Derivatives come from central finite differences, the Lagrangian Hessian
//! from damped BFGS, and each search direction from a bound-constrained QP
//! with linearised constraints. Globalisation is a backtracking line search
//! on the ℓ1 merit function `J + ρ·Σ max(cᵢ, 0)`. When the linearised
//! constraints are inconsistent the QP is relaxed with elastic slacks.

mod qp;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("lower bound exceeds upper bound at index {0}")]
    InvertedBounds(usize),
    #[error("QP infeasible: linearised constraints admit no point")]
    QpInfeasible { relaxed: SearchStep },
    #[error("QP subproblem failed: {0}")]
    QpFailure(String),
    #[error("non-finite objective or constraint value")]
    NonFinite,
}

type Objective<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;
type Constraints<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>;

/// `minimize objective(z)` s.t. `constraints(z) ≤ 0` and box bounds.
pub struct NlpProblem<'a> {
    dimension: usize,
    objective: Objective<'a>,
    num_constraints: usize,
    constraints: Option<Constraints<'a>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> NlpProblem<'a> {
    pub fn new(dimension: usize, objective: impl Fn(&[f64]) -> f64 + 'a) -> Self {
        Self {
            dimension,
            objective: Box::new(objective),
            num_constraints: 0,
            constraints: None,
            lower: vec![f64::NEG_INFINITY; dimension],
            upper: vec![f64::INFINITY; dimension],
        }
    }

    pub fn with_constraints(mut self, count: usize, constraints: impl Fn(&[f64]) -> Vec<f64> + 'a) -> Self {
        self.num_constraints = count;
        self.constraints = Some(Box::new(constraints));
        self
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimizerError> {
        if lower.len() != self.dimension || upper.len() != self.dimension {
            return Err(OptimizerError::Dimension(format!(
                "bounds have lengths {} and {}, expected {}",
                lower.len(),
                upper.len(),
                self.dimension
            )));
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| !(l <= u)) {
            return Err(OptimizerError::InvertedBounds(i));
        }
        self.lower = lower;
        self.upper = upper;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        (self.objective)(z)
    }

    pub fn constraints(&self, z: &[f64]) -> Vec<f64> {
        match &self.constraints {
            Some(c) => {
                let v = c(z);
                debug_assert_eq!(v.len(), self.num_constraints);
                v
            }
            None => Vec::new(),
        }
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    fn clamp(&self, z: &mut DVector<f64>) {
        for i in 0..self.dimension {
            z[i] = z[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// `L(z, λ) = J(z) + λᵀc(z)`.
pub fn lagrangian(problem: &NlpProblem<'_>, z: &[f64], multipliers: &[f64]) -> f64 {
    let c = problem.constraints(z);
    problem.objective(z) + c.iter().zip(multipliers).map(|(c, l)| c * l).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// Relative step of the central-difference derivatives.
    pub finite_difference_step: f64,
    /// BFGS updates with `sᵀBs` below this are skipped.
    pub hessian_reset_threshold: f64,
    /// Penalty on the elastic slacks of a relaxed QP.
    pub elastic_penalty: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-6,
            max_iterations: 100,
            finite_difference_step: 1e-6,
            hessian_reset_threshold: 1e-14,
            elastic_penalty: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

impl SolverStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIterations => "max_iter",
            SolverStatus::Infeasible => "infeasible",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(SolverStatus::Converged),
            "max_iter" => Some(SolverStatus::MaxIterations),
            "infeasible" => Some(SolverStatus::Infeasible),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub minimizer: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub objective_value: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: SolverStatus,
    /// Merit value before and after every accepted line-search step.
    pub merit_trace: Vec<(f64, f64)>,
}

/// QP search direction and the QP's multiplier estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStep {
    pub direction: Vec<f64>,
    pub multipliers: Vec<f64>,
}

/// Objective, constraints and their derivatives at one point.
struct Local {
    z: DVector<f64>,
    f: f64,
    c: DVector<f64>,
    grad: DVector<f64>,
    jac: DMatrix<f64>,
}

impl Local {
    fn evaluate(problem: &NlpProblem<'_>, z: DVector<f64>, h: f64) -> Result<Local, OptimizerError> {
        let n = problem.dimension;
        let m = problem.num_constraints;
        let f = problem.objective(z.as_slice());
        let c = DVector::from_vec(problem.constraints(z.as_slice()));
        if !f.is_finite() || c.iter().any(|v| !v.is_finite()) {
            return Err(OptimizerError::NonFinite);
        }
        let mut grad = DVector::zeros(n);
        let mut jac = DMatrix::zeros(m, n);
        let mut probe = z.clone();
        for i in 0..n {
            let step = h * z[i].abs().max(1.0);
            probe[i] = z[i] + step;
            let fp = problem.objective(probe.as_slice());
            let cp = problem.constraints(probe.as_slice());
            probe[i] = z[i] - step;
            let fm = problem.objective(probe.as_slice());
            let cm = problem.constraints(probe.as_slice());
            probe[i] = z[i];
            grad[i] = (fp - fm) / (2.0 * step);
            for j in 0..m {
                jac[(j, i)] = (cp[j] - cm[j]) / (2.0 * step);
            }
        }
        if grad.iter().chain(jac.iter()).any(|v| !v.is_finite()) {
            return Err(OptimizerError::NonFinite);
        }
        Ok(Local { z, f, c, grad, jac })
    }

    fn lagrangian_gradient(&self, multipliers: &DVector<f64>) -> DVector<f64> {
        &self.grad + self.jac.transpose() * multipliers
    }

    fn violation(&self) -> f64 {
        self.c.iter().map(|v| v.max(0.0)).sum()
    }
}

/// First-order optimality error at `local` for multipliers `lambda`. Bound
/// multipliers are implicit: the Lagrangian gradient is projected onto the
/// directions the box leaves free.
fn kkt_residual(problem: &NlpProblem<'_>, local: &Local, lambda: &DVector<f64>) -> f64 {
    let gl = local.lagrangian_gradient(lambda);
    let mut r = 0.0f64;
    for i in 0..problem.dimension {
        let scale = local.z[i].abs().max(1.0);
        let at_lower = local.z[i] <= problem.lower[i] + 1e-12 * scale;
        let at_upper = local.z[i] >= problem.upper[i] - 1e-12 * scale;
        let component = match (at_lower, at_upper) {
            (true, true) => 0.0,
            (true, false) => gl[i].min(0.0),
            (false, true) => gl[i].max(0.0),
            (false, false) => gl[i],
        };
        r = r.max(component.abs());
    }
    for (c, l) in local.c.iter().zip(lambda.iter()) {
        r = r.max(c.max(0.0)).max((c * l).abs()).max((-l).max(0.0));
    }
    r
}

/// Solves the (possibly relaxed) QP subproblem at `local`. Returns the step,
/// the constraint multipliers and whether elastic slacks were needed.
fn qp_step(
    problem: &NlpProblem<'_>,
    local: &Local,
    hessian: &DMatrix<f64>,
    penalty: f64,
) -> Result<(DVector<f64>, DVector<f64>, bool), OptimizerError> {
    let n = problem.dimension;
    let m = problem.num_constraints;
    let nv = n + m;

    let mut g = DMatrix::zeros(nv, nv);
    g.view_mut((0, 0), (n, n)).copy_from(hessian);
    for j in 0..m {
        g[(n + j, n + j)] = 1.0;
    }
    let mut c = DVector::zeros(nv);
    c.rows_mut(0, n).copy_from(&local.grad);
    for j in 0..m {
        c[n + j] = penalty;
    }

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..m {
        // J_j p − s_j ≤ −c_j
        let mut a = vec![0.0; nv];
        for (i, ai) in a.iter_mut().take(n).enumerate() {
            *ai = local.jac[(j, i)];
        }
        a[n + j] = -1.0;
        rows.push((a, -local.c[j]));
    }
    for j in 0..m {
        let mut a = vec![0.0; nv];
        a[n + j] = -1.0;
        rows.push((a, 0.0));
    }
    for i in 0..n {
        if problem.upper[i].is_finite() {
            let mut a = vec![0.0; nv];
            a[i] = 1.0;
            rows.push((a, (problem.upper[i] - local.z[i]).max(0.0)));
        }
        if problem.lower[i].is_finite() {
            let mut a = vec![0.0; nv];
            a[i] = -1.0;
            rows.push((a, (local.z[i] - problem.lower[i]).max(0.0)));
        }
    }
    let a = DMatrix::from_row_iterator(rows.len(), nv, rows.iter().flat_map(|(r, _)| r.iter().copied()));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|(_, b)| *b));

    let mut x0 = DVector::zeros(nv);
    for j in 0..m {
        x0[n + j] = local.c[j].max(0.0);
    }
    let sol = qp::solve(&g, &c, &a, &b, x0).map_err(|e| OptimizerError::QpFailure(format!("{e:?}")))?;
    let p = sol.x.rows(0, n).into_owned();
    let slack = sol.x.rows(n, m).amax();
    let lambda = sol.multipliers.rows(0, m).into_owned();
    Ok((p, lambda, m > 0 && slack > 1e-9))
}

/// Computes the SQP search direction at `z` for Hessian approximation
/// `hessian` (row-major `n×n`). The multipliers argument is accepted for
/// symmetry with the Lagrangian; the QP multipliers do not depend on it.
pub fn search_step(
    problem: &NlpProblem<'_>,
    z: &[f64],
    _multipliers: &[f64],
    hessian: &[f64],
    settings: &SolverSettings,
) -> Result<SearchStep, OptimizerError> {
    let n = problem.dimension;
    if z.len() != n || hessian.len() != n * n {
        return Err(OptimizerError::Dimension("z or hessian has the wrong size".into()));
    }
    let local = Local::evaluate(problem, DVector::from_column_slice(z), settings.finite_difference_step)?;
    let h = DMatrix::from_row_slice(n, n, hessian);
    let (p, lambda, relaxed) = qp_step(problem, &local, &h, settings.elastic_penalty)?;
    let step = SearchStep {
        direction: p.as_slice().to_vec(),
        multipliers: lambda.as_slice().to_vec(),
    };
    if relaxed {
        Err(OptimizerError::QpInfeasible { relaxed: step })
    } else {
        Ok(step)
    }
}

/// Powell-damped BFGS update. Falls back to the identity if the result is
/// no longer positive definite.
fn bfgs_update(h: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>, threshold: f64, first: bool) {
    let n = h.nrows();
    let sy = s.dot(y);
    if first && sy > 0.0 {
        // Shanno–Phua scaling of the initial matrix
        *h = DMatrix::identity(n, n) * (y.dot(y) / sy);
    }
    let hs = &*h * s;
    let shs = s.dot(&hs);
    if !(shs > threshold) {
        return;
    }
    let r = if sy >= 0.2 * shs {
        y.clone()
    } else {
        let theta = 0.8 * shs / (shs - sy);
        y * theta + &hs * (1.0 - theta)
    };
    let sr = s.dot(&r);
    *h += &r * r.transpose() / sr - &hs * hs.transpose() / shs;
    if h.iter().any(|v| !v.is_finite()) || h.clone().cholesky().is_none() {
        *h = DMatrix::identity(n, n);
    }
}

pub fn minimize(problem: &NlpProblem<'_>, z0: &[f64], settings: &SolverSettings) -> Result<Solution, OptimizerError> {
    let n = problem.dimension;
    let m = problem.num_constraints;
    if z0.len() != n {
        return Err(OptimizerError::Dimension(format!(
            "z0 has length {}, expected {n}",
            z0.len()
        )));
    }
    let h_fd = settings.finite_difference_step;
    let mut z = DVector::from_column_slice(z0);
    problem.clamp(&mut z);

    let mut local = Local::evaluate(problem, z, h_fd)?;
    let mut lambda = DVector::<f64>::zeros(m);
    let mut hessian = DMatrix::<f64>::identity(n, n);
    let mut first_update = true;
    let mut rho = 1.0f64;
    let mut merit_trace = Vec::new();
    let mut iterations = 0;
    let mut residual = kkt_residual(problem, &local, &lambda);
    let mut failed_searches = 0;

    while iterations < settings.max_iterations && residual > settings.kkt_tolerance {
        iterations += 1;
        let (p, lambda_qp, _relaxed) = qp_step(problem, &local, &hessian, settings.elastic_penalty)?;

        if p.amax() <= 1e-14 * (1.0 + local.z.amax()) {
            lambda = lambda_qp;
            residual = kkt_residual(problem, &local, &lambda);
            break;
        }

        rho = rho.max(1.5 * lambda_qp.amax() + 1e-3);
        let phi0 = local.f + rho * local.violation();
        let slope = (local.grad.dot(&p) - rho * local.violation()).min(0.0);

        // A decrease this small is lost in the rounding of φ, so Armijo's test
        // only measures noise. The full step is taken without a search and
        // is not part of the merit trace.
        if -slope <= 16.0 * f64::EPSILON * phi0.abs().max(1.0) {
            let mut trial = &local.z + &p;
            problem.clamp(&mut trial);
            if trial != local.z {
                let lambda_next = lambda_qp;
                let next = Local::evaluate(problem, trial, h_fd)?;
                let s = &next.z - &local.z;
                let y = next.lagrangian_gradient(&lambda_next) - local.lagrangian_gradient(&lambda_next);
                bfgs_update(&mut hessian, &s, &y, settings.hessian_reset_threshold, first_update);
                first_update = false;
                local = next;
                lambda = lambda_next;
                residual = kkt_residual(problem, &local, &lambda);
                continue;
            }
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let mut trial = &local.z + &p * alpha;
            problem.clamp(&mut trial);
            let f = problem.objective(trial.as_slice());
            let viol: f64 = problem.constraints(trial.as_slice()).iter().map(|v| v.max(0.0)).sum();
            let phi = f + rho * viol;
            if phi.is_finite() && phi <= phi0 + 1e-4 * alpha * slope {
                accepted = Some((trial, phi));
                break;
            }
            alpha *= 0.5;
        }

        let Some((trial, phi)) = accepted else {
            failed_searches += 1;
            if failed_searches >= 2 {
                break;
            }
            hessian = DMatrix::identity(n, n);
            first_update = true;
            continue;
        };
        failed_searches = 0;
        merit_trace.push((phi0, phi));

        let lambda_next = &lambda + (&lambda_qp - &lambda) * alpha;
        let next = Local::evaluate(problem, trial, h_fd)?;
        let s = &next.z - &local.z;
        let y = next.lagrangian_gradient(&lambda_next) - local.lagrangian_gradient(&lambda_next);
        bfgs_update(&mut hessian, &s, &y, settings.hessian_reset_threshold, first_update);
        first_update = false;

        local = next;
        lambda = lambda_next;
        residual = kkt_residual(problem, &local, &lambda);
    }

    let violation = local.c.iter().fold(0.0f64, |a, v| a.max(*v));
    let status = if residual <= settings.kkt_tolerance {
        SolverStatus::Converged
    } else if violation > settings.kkt_tolerance {
        SolverStatus::Infeasible
    } else {
        SolverStatus::MaxIterations
    };
    Ok(Solution {
        minimizer: local.z.as_slice().to_vec(),
        multipliers: lambda.as_slice().to_vec(),
        objective_value: local.f,
        kkt_residual: residual,
        iterations,
        status,
        merit_trace,
    })
}
