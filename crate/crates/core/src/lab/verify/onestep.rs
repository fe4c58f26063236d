use rand::Rng;
use rayon::prelude::*;

use super::gen::{log_uniform, random_spd};
use super::CheckResult;
use crate::error::Result;
use crate::linalg::{dot, norm2, DenseMatrix};
use crate::network::ParamLayout;
use crate::optim::{
    adam_step, adamo_step, degradation_bound, kappa_max_budgeted, kappa_max_conflict_free, onestep_eta_bound,
    AdamConfig, AdamState, OrthConfig, StepReport,
};
use crate::rng::{self, LabRng};

/// Random quadratic over a layout with one or two weight matrices and a bias,
/// with a random Adam state.
struct Problem {
    layout: ParamLayout,
    a: DenseMatrix,
    b: Vec<f64>,
    mu: f64,
    params: Vec<f64>,
    state: AdamState,
}

impl Problem {
    fn sample(r: &mut LabRng) -> Self {
        let mut shapes = vec![("W1", r.random_range(2..=5), r.random_range(2..=5), true)];
        if r.random_bool(0.5) {
            shapes.push(("W2", r.random_range(1..=3), r.random_range(2..=4), true));
        }
        shapes.push(("b", 2, 1, false));
        let layout = ParamLayout::sequential(&shapes);
        let n = layout.total();
        let hi = r.random_range(0.5..4.0);
        let (a, mu) = random_spd(r, n, 0.1, hi);
        let b = rng::normal_vec(r, n);
        let params: Vec<f64> = rng::normal_vec(r, n).iter().map(|x| 0.7 * x).collect();
        let t = r.random_range(1..50u64);
        let m = rng::normal_vec(r, n);
        let v: Vec<f64> = m.iter().map(|x| x * x + r.random_range(0.01..1.0)).collect();
        Problem { layout, a, b, mu, params, state: AdamState { t, m, v } }
    }

    fn loss(&self, w: &[f64]) -> f64 {
        0.5 * dot(w, &self.a.matvec(w)) - dot(&self.b, w)
    }

    fn grad(&self) -> Vec<f64> {
        self.a.matvec(&self.params).iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }

    /// `(L(ω_O), L(ω_A), report)` for one step from the shared state.
    fn step(&self, eta: f64, orth: &OrthConfig) -> Result<(f64, f64, StepReport)> {
        let cfg = AdamConfig::default().with_eta(eta);
        let g = self.grad();
        let (wo, report) = adamo_step(&self.params, &g, &mut self.state.clone(), &cfg, orth, &self.layout)?;
        let wa = adam_step(&self.params, &g, &mut self.state.clone(), &cfg);
        Ok((self.loss(&wo), self.loss(&wa), report))
    }
}

fn orth(kappa: f64, tau: f64) -> OrthConfig {
    OrthConfig { kappa_orth: kappa, tau, ..OrthConfig::budgeted() }
}

/// `⟨g, Δ⟩` and `‖Δ‖` for a report.
fn delta_stats(p: &Problem, report: &StepReport) -> (f64, f64) {
    let delta = report.assembled_delta(&p.layout);
    (dot(&p.grad(), &delta), norm2(&delta))
}

pub fn criterion7(seed: u64) -> Result<Vec<CheckResult>> {
    // τ = 0 at a stepsize within the closed-form bound
    let conflict_free: Vec<Result<Option<f64>>> = (0..1000)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 7000 + k as u64);
            let p = Problem::sample(&mut r);
            let kappa = if k % 4 == 0 { 1e-4 } else { r.random_range(0.01..2.0) };
            let cfg = orth(kappa, 0.0);
            let (_, _, report) = p.step(1.0, &cfg)?;
            let (gd, dn) = delta_stats(&p, &report);
            if !(gd > 0.0 && dn > 0.0) {
                return Ok(None);
            }
            let bound = onestep_eta_bound(gd, p.mu, dn, norm2(&report.u));
            let eta = bound.min(1.0) * r.random_range(0.05..=1.0);
            let (lo, la, _) = p.step(eta, &cfg)?;
            Ok(Some(lo - la))
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    let mut violations = 0;
    for x in conflict_free {
        if let Some(excess) = x? {
            used += 1;
            worst = worst.max(excess);
            violations += usize::from(!(excess <= 1e-12));
        }
    }
    let tau0 = CheckResult::new("onestep_no_worse_than_adam", 7, used, violations, worst, 1e-12)
        .detail(format!("{} of 1000 draws had an active correction", used))
        .require(used >= 500, "too few informative draws");

    // τ > 0 at arbitrary stepsizes
    let budgeted: Vec<Result<f64>> = (0..1000)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 7500 + k as u64);
            let p = Problem::sample(&mut r);
            let kappa = r.random_range(0.0..2.0);
            let tau = r.random_range(0.01..0.5);
            let eta = log_uniform(&mut r, 1e-3, 1.0);
            let (lo, la, report) = p.step(eta, &orth(kappa, tau))?;
            let positive: f64 = report.blocks.iter().map(|b| b.g_dot_u.max(0.0)).sum();
            let bound = degradation_bound(eta, tau, positive, p.mu, norm2(&report.u), kappa);
            Ok((lo - la) - bound)
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for x in budgeted {
        let gap = x?;
        worst = worst.max(gap);
        violations += usize::from(!(gap <= 1e-10));
    }
    let taupos = CheckResult::new("budgeted_degradation_bound", 7, 1000, violations, worst, 1e-10)
        .detail("max of excess loss minus the bound");
    Ok(vec![tau0, taupos])
}

pub fn criterion11(seed: u64) -> Result<Vec<CheckResult>> {
    let cases = [
        (kappa_max_conflict_free(1.0, 1.0, 1.0, 0.1, 1.0), 18.0),
        (kappa_max_budgeted(1.5, 1.0, 1.0, 1.0), 1.0),
        (kappa_max_budgeted(4.0, 2.0, 1.0, 1.0), 5f64.sqrt() - 1.0),
    ];
    let hand_worst = cases.iter().map(|(got, want)| (got - want).abs()).fold(0.0, f64::max);
    let hand = CheckResult::new("kappa_closed_forms", 11, 3, usize::from(hand_worst > 1e-12), hand_worst, 1e-12);

    let sampled: Vec<Result<Option<f64>>> = (0..1000)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, 11_000 + k as u64);
            let p = Problem::sample(&mut r);
            let eta = log_uniform(&mut r, 1e-3, 1.0);
            // under τ = 0 the direction of Δ does not depend on κ
            let (_, _, report) = p.step(eta, &orth(1.0, 0.0))?;
            let (gd, dn) = delta_stats(&p, &report);
            if !(dn > 0.0) {
                return Ok(None);
            }
            let g = p.grad();
            let c = gd / (norm2(&g) * dn);
            let kmax = kappa_max_conflict_free(norm2(&g), c, p.mu, eta, norm2(&report.u));
            if !(kmax > 0.0) {
                return Ok(None);
            }
            let (lo, la, _) = p.step(eta, &orth(0.9 * kmax, 0.0))?;
            Ok(Some(lo - la))
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    let mut violations = 0;
    for x in sampled {
        if let Some(excess) = x? {
            used += 1;
            worst = worst.max(excess);
            violations += usize::from(!(excess <= 1e-12));
        }
    }
    let empirical = CheckResult::new("kappa_cap_empirical", 11, used, violations, worst, 1e-12)
        .detail(format!("{used} of 1000 draws admitted a positive kappa"))
        .require(used >= 200, "too few informative draws");
    Ok(vec![hand, empirical])
}
