use serde::{Deserialize, Serialize};

use super::matrix::{dot, DenseMatrix};
use crate::error::{LabError, Result};

const SWEEP_CAP: usize = 60;
const OFF_TOL: f64 = 1e-13;

/// Thin SVD `A = left · diag(σ) · rightᵀ` with `k = min(rows, cols)` columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    pub left: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right: DenseMatrix,
}

/// One-sided Jacobi SVD.
///
/// Sign convention: the first entry of each right singular vector whose
/// magnitude exceeds 1e-12 is positive. Left vectors belonging to zero
/// singular values are completed deterministically from the standard basis.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    let (mut left, sigma, mut right) = if a.rows() >= a.cols() {
        jacobi_tall(a)?
    } else {
        let (u, s, v) = jacobi_tall(&a.transpose())?;
        (v, s, u)
    };
    for j in 0..sigma.len() {
        let first = right[j].iter().copied().find(|x| x.abs() > 1e-12);
        if matches!(first, Some(x) if x < 0.0) {
            right[j].iter_mut().for_each(|x| *x = -*x);
            left[j].iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SvdResult {
        left: DenseMatrix::from_columns(&left),
        singular_values: sigma,
        right: DenseMatrix::from_columns(&right),
    })
}

/// Returns column lists `(U, σ, V)` for a matrix with rows ≥ cols.
#[allow(clippy::type_complexity)]
fn jacobi_tall(a: &DenseMatrix) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>)> {
    let m = a.rows();
    let n = a.cols();
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    // columns at rounding level of ‖A‖_F are numerically zero; their directions are noise
    let fro2: f64 = u.iter().map(|c| dot(c, c)).sum();
    let negligible = (f64::EPSILON * (m.max(n) as f64)).powi(2) * fro2;
    let mut converged = n < 2;
    for _ in 0..SWEEP_CAP {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 || alpha <= negligible || beta <= negligible || gamma.abs() <= OFF_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(LabError::SvdNoConvergence { sweeps: SWEEP_CAP });
    }

    let norms: Vec<f64> = u.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma_max = norms.iter().copied().fold(0.0, f64::max);
    let rank_tol = sigma_max * (m.max(n) as f64) * f64::EPSILON;

    let mut left: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if norms[j] > rank_tol && norms[j] > 0.0 {
            left.push(u[j].iter().map(|x| x / norms[j]).collect());
        } else {
            left.push(vec![0.0; m]);
            pending.push(slot);
        }
    }
    for slot in pending {
        let basis: Vec<Vec<f64>> = left
            .iter()
            .enumerate()
            .filter(|(k, c)| *k != slot && c.iter().any(|&x| x != 0.0))
            .map(|(_, c)| c.clone())
            .collect();
        left[slot] = complete(&basis, m);
    }
    let sigma = order.iter().map(|&j| norms[j]).collect();
    let right = order.iter().map(|&j| v[j].clone()).collect();
    Ok((left, sigma, right))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Unit vector orthogonal to `basis`, chosen as the standard basis vector with
/// the largest orthogonal residual (ties to the lowest index).
fn complete(basis: &[Vec<f64>], m: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let c = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&e, &e).sqrt();
        if best.as_ref().is_none_or(|(n, _)| norm > *n + 1e-12) {
            best = Some((norm, e));
        }
    }
    let (norm, e) = best.expect("m > 0");
    e.into_iter().map(|x| x / norm).collect()
}

pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    Ok(svd(a)?.singular_values[0])
}

/// Nearest semi-orthogonal matrix `U Vᵀ`.
///
/// At rank deficiency the completed singular vectors make the result
/// deterministic; `diag(0, 1)` maps to the identity.
pub fn polar_factor(w: &DenseMatrix) -> Result<DenseMatrix> {
    let s = svd(w)?;
    Ok(s.left.matmul(&s.right.transpose()))
}
