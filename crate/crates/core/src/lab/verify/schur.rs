use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::gen::{matched_max_distance, random_orthogonal};
use super::CheckResult;
use crate::dynamics::simulate_norms;
use crate::error::Result;
use crate::linalg::{companion_quadratic_roots, eigenvalues, DenseMatrix};
use crate::rng::{self, LabRng};
use crate::spectral::{companion_matrix, companion_radius, companion_spectrum};

const ETAS: [f64; 3] = [1e-3, 1e-2, 1e-1];
const BETA1: f64 = 0.9;
/// Sampled systems keep `|ρ − 1|` at least this large so that a decaying trace
/// reaches 1e-8 well inside 10⁵ steps.
const RHO_GAP: f64 = 1e-3;

/// Real `S = Q(B + N)Qᵀ`: `B` holds the prescribed eigenvalues in 1×1 and 2×2
/// blocks and `N` is strictly block upper triangular, so `spec(S) = spec(B)`.
pub(super) fn system_with_spectrum(r: &mut LabRng, modes: &[Complex64]) -> DenseMatrix {
    let m: usize = modes.iter().map(|z| if z.im == 0.0 { 1 } else { 2 }).sum();
    let mut b = DenseMatrix::zeros(m, m);
    let mut starts = Vec::new();
    let mut k = 0;
    let scale = modes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut data = b.as_slice().to_vec();
    for z in modes {
        starts.push(k);
        if z.im == 0.0 {
            data[k * m + k] = z.re;
            k += 1;
        } else {
            data[k * m + k] = z.re;
            data[(k + 1) * m + k + 1] = z.re;
            data[k * m + k + 1] = z.im;
            data[(k + 1) * m + k] = -z.im;
            k += 2;
        }
    }
    starts.push(m);
    let nil = 0.1 * scale / (m as f64).sqrt();
    for (bi, &s) in starts.iter().enumerate().take(modes.len()) {
        let end = starts[bi + 1];
        for i in s..end {
            for j in end..m {
                data[i * m + j] = nil * rng::normal(r);
            }
        }
    }
    b = DenseMatrix::new(m, m, data).expect("finite");
    let q = random_orthogonal(r, m);
    q.matmul(&b).matmul(&q.transpose())
}

/// Modes `λ = w/η` with `w` drawn so both stable and unstable systems appear.
fn sample_modes(r: &mut LabRng, m: usize, eta: f64, unstable: bool) -> Vec<Complex64> {
    let mut modes = Vec::new();
    let mut dim = 0;
    while dim < m {
        let re = -r.random_range(0.01..1.0);
        if m - dim >= 2 && r.random_bool(0.5) {
            let im = r.random_range(0.0..0.3);
            modes.push(Complex64::new(re / eta, im / eta));
            dim += 2;
        } else {
            modes.push(Complex64::new(re / eta, 0.0));
            dim += 1;
        }
    }
    if unstable {
        let i = r.random_range(0..modes.len());
        modes[i].re = r.random_range(0.002..0.05) / eta;
    }
    modes
}

fn full_spectrum(modes: &[Complex64]) -> Vec<Complex64> {
    modes.iter().flat_map(|z| if z.im == 0.0 { vec![*z] } else { vec![*z, z.conj()] }).collect()
}

pub fn criterion1(seed: u64) -> Result<Vec<CheckResult>> {
    let trials = 200;
    let outcomes: Vec<Result<(bool, bool, f64)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 1000 + k as u64);
            let eta = ETAS[k % 3];
            let (s, rho_true) = loop {
                let m = r.random_range(1..=16);
                let modes = sample_modes(&mut r, m, eta, k % 2 == 1);
                let rho = companion_radius(&full_spectrum(&modes), BETA1, eta);
                if (rho - 1.0).abs() >= RHO_GAP {
                    break (system_with_spectrum(&mut r, &modes), rho);
                }
            };
            let rho = companion_spectrum(&s, BETA1, eta)?.spectral_radius();
            let e0 = rng::normal_vec(&mut r, s.rows());
            let norms = simulate_norms(&s, BETA1, eta, e0, 100_000, Some((1e-8, 1e12)));
            let decayed = *norms.last().unwrap() < 1e-8;
            Ok((decayed, rho < 1.0 - 1e-6, (rho - rho_true).abs()))
        })
        .collect();
    let mut violations = 0;
    let mut stable = 0;
    let mut rho_err: f64 = 0.0;
    for o in outcomes {
        let (decayed, predicted, err) = o?;
        violations += usize::from(decayed != predicted);
        stable += usize::from(predicted);
        rho_err = rho_err.max(err);
    }
    Ok(vec![CheckResult::new("schur_iff", 1, trials, violations, violations as f64, 0.0)
        .detail(format!("{stable} stable / {} unstable; max |rho - rho_exact| = {rho_err:.2e}", trials - stable))
        .require(stable > 0 && stable < trials, "both classes must occur")])
}

pub fn criterion2(seed: u64) -> Result<Vec<CheckResult>> {
    let trials = 100;
    let dists: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 2000 + k as u64);
            let m = r.random_range(1..=16);
            let eta = ETAS[k % 3];
            let beta1 = r.random_range(0.0..0.99);
            let s = rng::normal_matrix(&mut r, m, m).scale(1.0 / (m as f64).sqrt());
            let fast = companion_spectrum(&s, beta1, eta)?;
            let direct = eigenvalues(&companion_matrix(&s, beta1, eta))?;
            Ok(matched_max_distance(&fast.values, &direct.values))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for d in dists {
        let d = d?;
        worst = worst.max(d);
        violations += usize::from(!(d <= 1e-8));
    }
    let factorization = CheckResult::new("companion_factorization", 2, trials, violations, worst, 1e-8);

    // zero modes: the quadratic r² − (1+β₁)r + β₁ = (r − 1)(r − β₁)
    let mut r = rng::stream(seed, 2999);
    let mut zero_worst: f64 = 0.0;
    let zero_trials = 200;
    for k in 0..zero_trials {
        let beta1 = r.random_range(0.0..1.0);
        let eta = ETAS[k % 3];
        let roots: Vec<Complex64> = if k % 2 == 0 {
            let (a, b) = companion_quadratic_roots(Complex64::new(0.0, 0.0), beta1, eta);
            vec![a, b]
        } else {
            companion_spectrum(&DenseMatrix::zeros(1, 1), beta1, eta)?.values
        };
        let d = matched_max_distance(&roots, &[Complex64::new(1.0, 0.0), Complex64::new(beta1, 0.0)]);
        zero_worst = zero_worst.max(d);
    }
    let zero_violations = usize::from(zero_worst > 1e-14);
    let zero = CheckResult::new("zero_mode_roots", 2, zero_trials, zero_violations, zero_worst, 1e-14);
    Ok(vec![factorization, zero])
}

/// `ρ(A(η_k))` on the grid `η₀·k/33`, `k = 1..32`.
fn grid_radii(lambdas: &[Complex64], eta0: f64) -> impl Iterator<Item = f64> + '_ {
    (1..=32).map(move |k| companion_radius(lambdas, 0.9, eta0 * k as f64 / 33.0))
}

pub fn criterion3(seed: u64) -> Result<Vec<CheckResult>> {
    let hurwitz: Vec<Result<Option<f64>>> = (0..50)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 3000 + k as u64);
            let m = r.random_range(2..=16);
            let g = rng::normal_matrix(&mut r, m, m).scale(1.0 / (m as f64).sqrt());
            let shift = eigenvalues(&g)?.rightmost().unwrap_or_default().re + r.random_range(0.05..1.0);
            let s = g.shift_diag(shift);
            let lambdas = eigenvalues(&s)?.values;
            // halve until the whole grid below η₀ is Schur stable
            let mut eta0 = 1.0;
            for _ in 0..60 {
                if grid_radii(&lambdas, eta0).all(|rho| rho < 1.0) {
                    return Ok(Some(eta0));
                }
                eta0 /= 2.0;
            }
            Ok(None)
        })
        .collect();
    let mut found = 0;
    let mut smallest = f64::INFINITY;
    for h in hurwitz {
        if let Some(eta0) = h? {
            found += 1;
            smallest = smallest.min(eta0);
        }
    }
    let small_step = CheckResult::new("hurwitz_small_step", 3, 50, 50 - found, (50 - found) as f64, 0.0)
        .detail(format!("smallest eta0 = {smallest:.3e}"));

    let singular: Vec<Result<f64>> = (0..20)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 3500 + k as u64);
            let m = r.random_range(2..=16);
            let rank = r.random_range(0..m);
            let u = rng::normal_matrix(&mut r, m, rank.max(1));
            let v = rng::normal_matrix(&mut r, m, rank.max(1));
            let s = if rank == 0 { DenseMatrix::zeros(m, m) } else { u.matmul(&v.transpose()) };
            let lambdas = eigenvalues(&s)?.values;
            Ok(grid_radii(&lambdas, 1.0).fold(f64::INFINITY, f64::min))
        })
        .collect();
    let mut min_rho = f64::INFINITY;
    let mut violations = 0;
    for s in singular {
        let rho = s?;
        min_rho = min_rho.min(rho);
        violations += usize::from(rho < 1.0 - 1e-12);
    }
    let zero = CheckResult::new("zero_eigenvalue_no_stable_step", 3, 20, violations, 1.0 - min_rho, 1e-12)
        .detail(format!("min rho over grids = {min_rho:.15}"));
    Ok(vec![small_step, zero])
}
