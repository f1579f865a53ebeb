//! Small dense matrix helpers and a continuous Lyapunov solver.
//!
//! `solve_lyapunov` finds `P` with `AᵀP + PA = −Q` by vectorising the
//! equation into an `n²×n²` linear system. For the 4×4 matrices used by the
//! adaptation law that is a 16×16 dense solve.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use thiserror::Error;

pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

const SYMMETRY_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix dimensions do not match: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("weight matrix Q must be symmetric positive definite")]
    InvalidWeight,
    #[error("singular Lyapunov operator: A has eigenvalues summing to zero")]
    SingularLyapunov,
    #[error("P not positive definite: A is not Hurwitz")]
    NotPositiveDefinite { solution: DMatrix<f64> },
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::Dimension(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = max_asymmetry(m);
    let scale = m.amax().max(1.0);
    if asym > SYMMETRY_TOL * scale {
        return Err(LinalgError::Asymmetric(asym));
    }
    Ok(())
}

/// True iff the (symmetric) matrix admits a Cholesky factorisation.
pub fn is_positive_definite_dyn(m: &DMatrix<f64>) -> Result<bool, LinalgError> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    Ok(sym.cholesky().is_some())
}

pub fn is_positive_definite(m: &Mat4) -> Result<bool, LinalgError> {
    is_positive_definite_dyn(&DMatrix::from_column_slice(4, 4, m.as_slice()))
}

/// `eᵀ M e`.
pub fn quadratic_form(e: &Vec4, m: &Mat4) -> f64 {
    e.dot(&(m * e))
}

const REFINEMENT_STEPS: usize = 2;

/// Solves `AᵀP + PA = −Q` for any square size.
///
/// The returned `P` is symmetrised. If the solution exists but is not
/// positive definite the error carries it, so callers that only need the
/// residual-satisfying matrix can still use it.
pub fn solve_lyapunov_dyn(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(LinalgError::Dimension(format!(
            "A is {}x{}, Q is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    if !is_positive_definite_dyn(q).map_err(|_| LinalgError::InvalidWeight)? {
        return Err(LinalgError::InvalidWeight);
    }

    // Column-major vec: vec(AᵀP) = (I ⊗ Aᵀ) vec(P), vec(PA) = (Aᵀ ⊗ I) vec(P).
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DVector::from_column_slice(q.as_slice());

    let svd = op.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOL * smax.max(1.0)) {
        return Err(LinalgError::SingularLyapunov);
    }
    let mut vec_p = svd.solve(&rhs, 0.0).map_err(|_| LinalgError::SingularLyapunov)?;
    // iterative refinement recovers the digits lost to ill-conditioning
    for _ in 0..REFINEMENT_STEPS {
        let residual = &rhs - &op * &vec_p;
        let delta = svd.solve(&residual, 0.0).map_err(|_| LinalgError::SingularLyapunov)?;
        vec_p += delta;
    }
    let p = DMatrix::from_column_slice(n, n, vec_p.as_slice());
    let p = (&p + p.transpose()) * 0.5;

    if p.clone().cholesky().is_none() {
        return Err(LinalgError::NotPositiveDefinite { solution: p });
    }
    Ok(p)
}

pub fn solve_lyapunov(a: &Mat4, q: &Mat4) -> Result<Mat4, LinalgError> {
    let da = DMatrix::from_column_slice(4, 4, a.as_slice());
    let dq = DMatrix::from_column_slice(4, 4, q.as_slice());
    solve_lyapunov_dyn(&da, &dq).map(|p| Mat4::from_column_slice(p.as_slice()))
}

/// Frobenius norm of `AᵀP + PA + Q`.
pub fn lyapunov_residual(a: &Mat4, p: &Mat4, q: &Mat4) -> f64 {
    (a.transpose() * p + p * a + q).norm()
}
