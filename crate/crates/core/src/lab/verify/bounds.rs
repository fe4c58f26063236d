use rand::Rng;
use rayon::prelude::*;

use super::gen::random_orthogonal;
use super::CheckResult;
use crate::error::Result;
use crate::linalg::{spectral_norm, symmetric_norm, DenseMatrix};
use crate::optim::orth_potential;
use crate::rng::{self, LabRng};
use crate::spectral::{
    code_statistics, epsilon_bound, gram_factor_bound, near_ortho_condition, polar_defect_check, row_gram_condition,
    stability_report, FrozenSnapshot,
};

const TRIALS: usize = 1000;

/// `I + σE/√n` with Gaussian `E` and `σ` uniform on `[0, max_sigma)`.
fn perturbed_identity(r: &mut LabRng, n: usize, max_sigma: f64) -> DenseMatrix {
    let sigma = r.random_range(0.0..max_sigma) / (n as f64).sqrt();
    DenseMatrix::identity(n).add(&rng::normal_matrix(r, n, n).scale(sigma))
}

/// Snapshot with `D^{1/2}Z(X) = Φ` and `D^{1/2}Z(X′) = Φ_*` for a random positive `D`.
fn snapshot_for(r: &mut LabRng, phi: &DenseMatrix, phi_star: &DenseMatrix, gamma: f64) -> Result<FrozenSnapshot> {
    let d: Vec<f64> = (0..phi.rows()).map(|_| r.random_range(0.2..5.0)).collect();
    let inv: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    FrozenSnapshot::new(phi.scale_rows(&inv), phi_star.scale_rows(&inv), d, gamma, 1.0, 0.9, 1e-2)
}

fn coupling(r: &mut LabRng, rows: usize, cols: usize) -> DenseMatrix {
    let scale = r.random_range(0.0..1.2) / ((rows * cols) as f64).sqrt().max(1.0);
    rng::normal_matrix(r, rows, cols).scale(scale)
}

/// `(margin > 0, max Re λ(S))`.
fn near_ortho_trial(r: &mut LabRng) -> Result<(bool, f64)> {
    let p = r.random_range(2..=12);
    let m = r.random_range(1..=p);
    let q = random_orthogonal(r, p);
    let cols = DenseMatrix::from_fn(p, m, |i, j| q[(i, j)]);
    let phi = cols.matmul(&perturbed_identity(r, m, 0.3));
    let phi_star = coupling(r, p, m);
    let gamma = r.random_range(0.5..0.99);
    let snap = snapshot_for(r, &phi, &phi_star, gamma)?;
    let report = stability_report(&snap)?;
    let direct = near_ortho_condition(&phi, &phi_star, gamma)?;
    debug_assert!((direct - report.margins.near_ortho).abs() < 1e-8);
    Ok((report.margins.near_ortho > 0.0, report.max_re))
}

/// Row-Gram margin with `M > P`: `(margin > 0, max Re of nonzero modes, smallest |λ|)`.
fn row_gram_trial(r: &mut LabRng) -> Result<(bool, f64, f64)> {
    let p = r.random_range(1..=8);
    let m = r.random_range(p + 1..=p + 8);
    let q = random_orthogonal(r, m);
    let rows = DenseMatrix::from_fn(p, m, |i, j| q[(i, j)]);
    let phi = perturbed_identity(r, p, 0.3).matmul(&rows);
    let phi_star = coupling(r, p, m);
    let gamma = r.random_range(0.5..0.99);
    let positive = row_gram_condition(&phi, &phi_star, gamma)? > 0.0;
    let report = stability_report(&snapshot_for(r, &phi, &phi_star, gamma)?)?;
    // rank(S) ≤ P, so the M − P smallest moduli are the structural zeros
    let mut values = report.spectrum_s.values.clone();
    values.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let smallest = values[0].norm();
    let max_re_nonzero = values[m - p..].iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let zeros_ok = values[..m - p].iter().all(|z| z.norm() <= 1e-8);
    Ok((positive, if zeros_ok { max_re_nonzero } else { f64::INFINITY }, smallest))
}

/// `(target, bound)` for `‖ΦᵀΦ − I‖₂` with `Φ = ΨU`.
fn gram_trial(r: &mut LabRng) -> Result<(f64, f64)> {
    let p = r.random_range(2..=10);
    let p_code = r.random_range(1..=p);
    let m = r.random_range(1..=p_code);
    let q = random_orthogonal(r, p);
    let psi = DenseMatrix::from_fn(p, p_code, |i, j| q[(i, j)]).matmul(&perturbed_identity(r, p_code, 0.2));
    let qc = random_orthogonal(r, p_code);
    let u = DenseMatrix::from_fn(p_code, m, |i, j| qc[(i, j)])
        .add(&rng::normal_matrix(r, p_code, m).scale(r.random_range(0.0..0.1) / (p_code as f64).sqrt()));
    let eps = symmetric_norm(&psi.t_matmul(&psi).shift_diag(1.0))?;
    let (delta, rho) = code_statistics(&u);
    let phi = psi.matmul(&u);
    let target = symmetric_norm(&phi.t_matmul(&phi).shift_diag(1.0))?;
    Ok((target, gram_factor_bound(eps, delta, rho, m)))
}

/// `(ε(ω), bound)` for `Ψ(W) = AW` with tall `W`.
fn epsilon_trial(r: &mut LabRng) -> Result<(f64, f64)> {
    let n = r.random_range(2..=8);
    let d = r.random_range(1..=n);
    let a = perturbed_identity(r, n, 0.2);
    let q = random_orthogonal(r, n);
    let w = DenseMatrix::from_fn(n, d, |i, j| q[(i, j)]).add(&rng::normal_matrix(r, n, d).scale(r.random_range(0.0..0.3) / (n as f64).sqrt()));
    let eps0 = symmetric_norm(&a.t_matmul(&a).shift_diag(1.0))?;
    let l_psi = spectral_norm(&a)?;
    let psi = a.matmul(&w);
    let target = symmetric_norm(&psi.t_matmul(&psi).shift_diag(1.0))?;
    Ok((target, epsilon_bound(orth_potential(&w), eps0, l_psi)))
}

fn polar_trial(r: &mut LabRng) -> Result<f64> {
    let rows = r.random_range(1..=7);
    let cols = r.random_range(1..=7);
    let w = if r.random_bool(0.5) {
        rng::normal_matrix(r, rows, cols).scale(r.random_range(0.01..3.0))
    } else {
        let n = rows.max(cols);
        let q = random_orthogonal(r, n);
        DenseMatrix::from_fn(rows, cols, |i, j| q[(i, j)]).add(&rng::normal_matrix(r, rows, cols).scale(r.random_range(0.0..0.2)))
    };
    let (defect, bound) = polar_defect_check(&w)?;
    Ok((defect - bound) / bound.max(1.0))
}

fn collect<T: Send>(seed: u64, base: u64, n: usize, f: impl Fn(&mut LabRng) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(|k| f(&mut rng::stream(seed, base + k as u64))).collect()
}

pub fn criterion8(seed: u64) -> Result<Vec<CheckResult>> {
    let near = collect(seed, 80_000, TRIALS, near_ortho_trial)?;
    let near_pos: Vec<f64> = near.iter().filter(|x| x.0).map(|x| x.1).collect();
    let near_worst = near_pos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let near_check = CheckResult::new(
        "near_ortho_implies_hurwitz",
        8,
        near_pos.len(),
        near_pos.iter().filter(|&&x| !(x < 0.0)).count(),
        near_worst,
        0.0,
    )
    .detail(format!("{} of {TRIALS} constructions had a positive margin; max Re shown", near_pos.len()))
    .require(near_pos.len() >= 100, "too few positive margins");

    let rows = collect(seed, 81_000, TRIALS, row_gram_trial)?;
    let row_pos: Vec<(f64, f64)> = rows.iter().filter(|x| x.0).map(|x| (x.1, x.2)).collect();
    let row_worst = row_pos.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let row_check = CheckResult::new(
        "row_gram_implies_semistable",
        8,
        row_pos.len(),
        row_pos.iter().filter(|x| !(x.0 < 0.0 && x.1 <= 1e-8)).count(),
        row_worst,
        0.0,
    )
    .detail(format!("{} of {TRIALS} constructions had a positive margin", row_pos.len()))
    .require(row_pos.len() >= 100, "too few positive margins");

    let gram = collect(seed, 82_000, TRIALS, gram_trial)?;
    let gram_worst = gram.iter().map(|(t, b)| t - b).fold(f64::NEG_INFINITY, f64::max);
    let gram_check = CheckResult::new(
        "gram_factor_bound",
        8,
        TRIALS,
        gram.iter().filter(|(t, b)| !(t <= &(b + 1e-12))).count(),
        gram_worst,
        1e-12,
    )
    .detail("max of target minus bound");

    let eps = collect(seed, 83_000, TRIALS, epsilon_trial)?;
    let eps_worst = eps.iter().map(|(t, b)| t - b).fold(f64::NEG_INFINITY, f64::max);
    let eps_check = CheckResult::new(
        "epsilon_bound",
        8,
        TRIALS,
        eps.iter().filter(|(t, b)| !(t <= &(b + 1e-12))).count(),
        eps_worst,
        1e-12,
    )
    .detail("max of target minus bound");

    let polar = collect(seed, 84_000, 10_000, polar_trial)?;
    let polar_worst = polar.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let polar_check = CheckResult::new(
        "polar_defect",
        8,
        10_000,
        polar.iter().filter(|&&g| !(g <= 1e-12)).count(),
        polar_worst,
        1e-12,
    )
    .detail("max of (||W - Q||_F^2 - 4R) / max(1, 4R)");

    Ok(vec![near_check, row_check, gram_check, eps_check, polar_check])
}
