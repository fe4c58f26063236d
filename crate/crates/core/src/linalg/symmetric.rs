use super::matrix::{frobenius_norm, DenseMatrix};
use crate::error::{LabError, Result};

/// Eigenvalues of the symmetric part of `a`, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(LabError::Dimension("symmetric eigensolve needs a square matrix".into()));
    }
    let n = a.rows();
    let mut m = a.symmetric_part();
    let scale = frobenius_norm(&m);
    if n == 0 {
        return Ok(Vec::new());
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(LabError::SvdNoConvergence { sweeps: 100 })
}

pub fn lambda_min(a: &DenseMatrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(a)?.first().copied().unwrap_or(0.0))
}

/// Largest |eigenvalue| of the symmetric part, i.e. its spectral norm.
pub fn symmetric_norm(a: &DenseMatrix) -> Result<f64> {
    let ev = symmetric_eigenvalues(a)?;
    Ok(ev.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
}
