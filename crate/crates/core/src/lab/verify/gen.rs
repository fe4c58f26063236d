use rand::Rng;

use crate::linalg::{polar_factor, ComplexValue, DenseMatrix};
use crate::rng::{self, LabRng};

pub fn random_orthogonal(r: &mut LabRng, n: usize) -> DenseMatrix {
    polar_factor(&rng::normal_matrix(r, n, n)).expect("square Gaussian matrices have a polar factor")
}

/// `QΛQᵀ` with eigenvalues uniform on `[lo, hi]`; returns the matrix and its largest eigenvalue.
pub fn random_spd(r: &mut LabRng, n: usize, lo: f64, hi: f64) -> (DenseMatrix, f64) {
    let q = random_orthogonal(r, n);
    let lambdas: Vec<f64> = (0..n).map(|_| r.random_range(lo..=hi)).collect();
    let mu = lambdas.iter().cloned().fold(f64::MIN, f64::max);
    (q.matmul(&DenseMatrix::diag(&lambdas)).matmul(&q.transpose()), mu)
}

/// Largest distance after greedily pairing each value of `a` with its nearest unused value of `b`.
pub fn matched_max_distance(a: &[ComplexValue], b: &[ComplexValue]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

pub fn log_uniform(r: &mut LabRng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo.ln()..=hi.ln()).exp()
}
