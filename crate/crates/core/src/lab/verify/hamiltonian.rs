use rand::Rng;
use rayon::prelude::*;

use super::gen::random_spd;
use super::CheckResult;
use crate::dynamics::{budget_integral_check, integrate_hamiltonian, Objective, OdeConfig, OdeState, Quadratic};
use crate::error::Result;
use crate::network::ParamLayout;
use crate::optim::OrthConfig;
use crate::rng::{self, LabRng};

const DT: f64 = 1e-3;
const STEPS: usize = 2000;
const CFG: OdeConfig = OdeConfig { beta1: 0.9, beta2: 0.999, eps: 1e-8 };

struct Problem {
    obj: Quadratic,
    layout: ParamLayout,
    start: OdeState,
}

/// Quadratic over one weight matrix; starts at rest with `v₀ = g(w₀)²`.
fn sample(r: &mut LabRng) -> Problem {
    let rows = r.random_range(2..=4);
    let cols = r.random_range(2..=4);
    let layout = ParamLayout::sequential(&[("W", rows, cols, true)]);
    let n = rows * cols;
    let (a, _) = random_spd(r, n, 0.2, 2.0);
    let obj = Quadratic { a, b: rng::normal_vec(r, n).iter().map(|x| 0.5 * x).collect() };
    let w0: Vec<f64> = rng::normal_vec(r, n).iter().map(|x| 0.5 * x).collect();
    let g0 = obj.grad(&w0);
    let mut start = OdeState::new(w0);
    start.v = g0.iter().map(|g| g * g).collect();
    Problem { obj, layout, start }
}

pub fn criterion9(seed: u64) -> Result<Vec<CheckResult>> {
    let runs: Vec<Result<(f64, f64, f64)>> = (0..100)
        .into_par_iter()
        .map(|k| {
            let p = sample(&mut rng::stream(seed, 9000 + k as u64));
            let (_, adam) = integrate_hamiltonian(&p.obj, &CFG, None, p.start.clone(), DT, STEPS)?;
            let conflict_free = OrthConfig { kappa_orth: 0.5, tau: 0.0, ..OrthConfig::budgeted() };
            let (_, cf) = integrate_hamiltonian(&p.obj, &CFG, Some((&conflict_free, &p.layout)), p.start.clone(), DT, STEPS)?;
            let budgeted = OrthConfig::budgeted();
            let (_, bud) = integrate_hamiltonian(&p.obj, &CFG, Some((&budgeted, &p.layout)), p.start, DT, STEPS)?;
            Ok((adam.max_rise_rate(), cf.max_rise_rate(), budget_integral_check(&bud)))
        })
        .collect();
    let mut rise_worst = f64::NEG_INFINITY;
    let mut rise_viol = 0;
    let mut slack_worst = f64::INFINITY;
    let mut slack_viol = 0;
    for run in runs {
        let (a, c, s) = run?;
        for rise in [a, c] {
            rise_worst = rise_worst.max(rise);
            rise_viol += usize::from(!(rise <= 1e-8));
        }
        slack_worst = slack_worst.min(s);
        slack_viol += usize::from(!(s >= -1e-6));
    }
    Ok(vec![
        CheckResult::new("hamiltonian_nonincreasing", 9, 200, rise_viol, rise_worst, 1e-8)
            .detail("Adam and conflict-free AdamO flows; max dH/dt between samples"),
        CheckResult::new("budget_integral_slack", 9, 100, slack_viol, slack_worst, -1e-6)
            .detail("kappa = 1, tau = 0.05; min slack"),
    ])
}
