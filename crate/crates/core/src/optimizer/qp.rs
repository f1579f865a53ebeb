//! Primal active-set solver for small dense strictly convex QPs
//!
//! ```text
//! minimize ½ xᵀGx + cᵀx   subject to   A x ≤ b
//! ```
//!
//! started from a feasible point.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum QpError {
    SingularKkt,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct QpSolution {
    pub x: DVector<f64>,
    /// One multiplier per row of `A`, zero for inactive rows.
    pub multipliers: DVector<f64>,
}

pub(crate) fn solve(
    g: &DMatrix<f64>,
    c: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x0: DVector<f64>,
) -> Result<QpSolution, QpError> {
    let n = g.nrows();
    let m = a.nrows();
    let mut x = x0;
    let mut working: Vec<usize> = Vec::new();
    let max_iter = 50 + 10 * (n + m);

    for _ in 0..max_iter {
        let k = working.len();
        let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(g);
        for (r, &i) in working.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = a[(i, j)];
                kkt[(j, n + r)] = a[(i, j)];
            }
        }
        let grad = g * &x + c;
        let mut rhs = DVector::<f64>::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-&grad));
        let sol = kkt.lu().solve(&rhs).ok_or(QpError::SingularKkt)?;
        let p = sol.rows(0, n).into_owned();
        let lambda = sol.rows(n, k).into_owned();

        let scale = 1.0 + x.amax();
        if p.amax() <= 1e-12 * scale {
            // EQP optimum at x; check multiplier signs
            let (worst, pos) = lambda.iter().enumerate().fold(
                (0.0, usize::MAX),
                |(w, pi), (r, &l)| if l < w { (l, r) } else { (w, pi) },
            );
            if worst >= -1e-12 || pos == usize::MAX {
                let mut multipliers = DVector::zeros(m);
                for (r, &i) in working.iter().enumerate() {
                    multipliers[i] = lambda[r].max(0.0);
                }
                return Ok(QpSolution { x, multipliers });
            }
            working.remove(pos);
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let ap = a.row(i).dot(&p.transpose());
            if ap > 1e-14 {
                let slack = b[i] - a.row(i).dot(&x.transpose());
                let ratio = (slack / ap).max(0.0);
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
        }
        x += &p * alpha;
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Err(QpError::IterationLimit)
}
