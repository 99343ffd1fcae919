//! Least squares on the probability simplex:
//! `min ‖F x − y‖₂` subject to `x ≥ 0`, `Σ x = 1`.
//!
//! Primal active-set method. Each subproblem on the free set eliminates the
//! equality constraint with an orthonormal basis of `{1}⊥` and is solved by
//! SVD, so the normal equations are never formed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

pub fn simplex_least_squares(f: &DMatrix<f64>, y: &DVector<f64>) -> Result<SimplexSolution> {
    let (rows, n) = f.shape();
    if n == 0 {
        return Err(Error::Infeasible("no unknowns".into()));
    }
    if y.len() != rows {
        return Err(Error::DimensionMismatch { expected: rows, found: y.len() });
    }
    if f.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEntries);
    }
    let scale = f.norm() * (f.norm() + y.norm());
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    // start at the barycentre with every coordinate free, so an interior
    // optimum is found by a single well-conditioned solve
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut free = vec![true; n];

    let max_iter = 20 * n + 20;
    for iter in 0..max_iter {
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        let c = solve_free(f, y, &idx);
        if c.iter().all(|&v| v > 0.0) {
            x.fill(0.0);
            for (k, &i) in idx.iter().enumerate() {
                x[i] = c[k];
            }
            let grad = f.transpose() * (f * &x - y);
            let nu = idx.iter().map(|&i| grad[i]).sum::<f64>() / idx.len() as f64;
            let entering = (0..n).filter(|&j| !free[j]).map(|j| (j, grad[j] - nu)).min_by(|a, b| a.1.total_cmp(&b.1));
            match entering {
                Some((j, m)) if m < -tol => free[j] = true,
                _ => return Ok(finish(f, y, x, iter + 1)),
            }
        } else {
            // step towards c until the first free coordinate hits zero
            let mut alpha = 1.0f64;
            for (k, &i) in idx.iter().enumerate() {
                if c[k] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - c[k]));
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (c[k] - x[i]);
            }
            let mut dropped = false;
            for (k, &i) in idx.iter().enumerate() {
                if c[k] <= 0.0 && x[i] <= 1e-15 {
                    x[i] = 0.0;
                    free[i] = false;
                    dropped = true;
                }
            }
            if !dropped {
                // rounding kept every coordinate positive; drop the smallest
                let (k, _) = idx.iter().enumerate().min_by(|a, b| x[*a.1].total_cmp(&x[*b.1])).expect("non-empty");
                x[idx[k]] = 0.0;
                free[idx[k]] = false;
            }
            if !free.iter().any(|&b| b) {
                return Err(Error::Infeasible("active set became empty".into()));
            }
        }
    }
    Err(Error::NoConvergence(max_iter))
}

fn finish(f: &DMatrix<f64>, y: &DVector<f64>, mut x: DVector<f64>, iterations: usize) -> SimplexSolution {
    x.apply(|v| *v = v.max(0.0));
    let s = x.sum();
    x /= s;
    let residual_norm = (f * &x - y).norm();
    SimplexSolution { x, residual_norm, iterations }
}

/// Minimizer of `‖F_W c − y‖` with `Σ c = 1` over the columns in `idx`.
fn solve_free(f: &DMatrix<f64>, y: &DVector<f64>, idx: &[usize]) -> Vec<f64> {
    let m = idx.len();
    if m == 1 {
        return vec![1.0];
    }
    let fw = f.select_columns(idx);
    let basis = complement_of_ones(m);
    let centre = DVector::from_element(m, 1.0 / m as f64);
    let a = &fw * &basis;
    let b = y - &fw * &centre;
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let z = svd.solve(&b, 1e-13 * smax.max(f64::MIN_POSITIVE)).expect("u and v_t computed");
    (centre + basis * z).iter().copied().collect()
}

/// Orthonormal basis (m × (m−1)) of the complement of `1/√m`: the last
/// `m − 1` columns of the Householder reflector mapping `e₁` to `1/√m`.
fn complement_of_ones(m: usize) -> DMatrix<f64> {
    let u = 1.0 / (m as f64).sqrt();
    let mut v = DVector::from_element(m, u);
    v[0] -= 1.0;
    let vv = v.norm_squared();
    let mut h = DMatrix::<f64>::identity(m, m);
    h -= (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, m - 1).into_owned()
}
