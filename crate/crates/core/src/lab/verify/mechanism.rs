use rand::Rng;
use rayon::prelude::*;

use super::CheckResult;
use crate::dynamics::decay_slope;
use crate::envlab::{baird_fixture, gen_random_mdp, generate_dataset, DatasetSpec};
use crate::error::Result;
use crate::lab::train::{train, OptimizerKind, RunStatus, TrainConfig, DIVERGENCE_CAP};
use crate::network::Critic;
use crate::optim::{AdamConfig, OrthConfig};
use crate::rng;
use crate::td::TargetRule;

/// Frozen runs with `|ρ − 1|` below this are treated as marginal and skipped.
const MARGINAL: f64 = 1e-3;

fn baird_config(steps: usize) -> TrainConfig {
    TrainConfig {
        optimizer: OptimizerKind::Adam,
        adam: AdamConfig::default().with_eta(1e-2),
        orth: OrthConfig::disabled(),
        rule: TargetRule::QLearning,
        polyak_alpha: 1.0,
        steps,
        monitor_every: 100,
    }
}

/// One frozen linear-critic SARSA run: `Some((ρ, slope of log‖e‖))` unless marginal.
fn frozen_run(seed: u64, k: u64) -> Result<Option<(f64, f64)>> {
    let mut r = rng::stream(seed, 10_000 + k);
    let states = r.random_range(3..=8);
    let size = r.random_range(4..=10);
    let dim = size + r.random_range(2..=6);
    let gamma = [0.5, 0.9, 0.99][(k % 3) as usize];
    let mdp = gen_random_mdp(seed.wrapping_add(k), states, 2, dim, gamma)?;
    let dataset = generate_dataset(&mdp, &DatasetSpec::new(r.random_range(0.1..0.9), size, r.random()))?;
    let cfg = TrainConfig {
        optimizer: OptimizerKind::Frozen,
        adam: AdamConfig::default().with_eta([1e-3, 1e-2, 1e-1][((k / 3) % 3) as usize]),
        orth: OrthConfig::disabled(),
        rule: TargetRule::Sarsa,
        polyak_alpha: 1.0,
        steps: 3000,
        monitor_every: 3000,
    };
    let out = train(Critic::linear(mdp.feature_map()), &dataset, &cfg)?;
    let rho = out.rows[0].rho_a;
    if (rho - 1.0).abs() < MARGINAL {
        return Ok(None);
    }
    let norms: Vec<f64> = out.loss_history.iter().map(|l| (2.0 * l).sqrt()).collect();
    Ok(Some((rho, decay_slope(&norms))))
}

pub fn criterion10(seed: u64) -> Result<Vec<CheckResult>> {
    let fx = baird_fixture();
    let offpolicy = train(fx.critic.clone(), &fx.dataset, &baird_config(20_000))?;
    let first_rho = offpolicy.rows.first().map_or(f64::NAN, |r| r.rho_a);
    let diverged = offpolicy.status == RunStatus::Diverged;
    let last_step = offpolicy.rows.last().map_or(0, |r| r.step);
    let baird = CheckResult::new("baird_diverges", 10, 1, usize::from(!(diverged && first_rho > 1.0)), first_rho, 1.0)
        .detail(format!("first-row rho_A = {first_rho:.3e}; status {} at step {last_step}", offpolicy.status));

    let supervised = train(fx.critic, &fx.dataset.with_gamma(0.0)?, &baird_config(20_000))?;
    let max_loss = supervised.loss_history.iter().cloned().fold(0.0, f64::max);
    let all_hurwitz = supervised.rows.iter().all(|r| r.hurwitz);
    let first = supervised.loss_history[0];
    let last = *supervised.loss_history.last().unwrap();
    let ok = supervised.status == RunStatus::Ok && all_hurwitz && max_loss < DIVERGENCE_CAP && last < first;
    let gamma0 = CheckResult::new("baird_gamma0_stable", 10, 1, usize::from(!ok), max_loss, DIVERGENCE_CAP)
        .detail(format!("hurwitz in every row: {all_hurwitz}; loss {first:.3e} -> {last:.3e}"));

    let runs: Vec<Result<Option<(f64, f64)>>> = (0..90).into_par_iter().map(|k| frozen_run(seed, k)).collect();
    let mut used = 0;
    let mut growing = 0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for run in runs {
        if let Some((rho, slope)) = run? {
            used += 1;
            growing += usize::from(rho > 1.0);
            if (rho > 1.0) != (slope > 0.0) {
                violations += 1;
                worst = worst.max((rho - 1.0).abs());
            }
        }
    }
    let frozen = CheckResult::new("frozen_sign_agreement", 10, used, violations, worst, 0.0)
        .detail(format!("{growing} with rho > 1, {} with rho < 1", used - growing))
        .require(growing > 0 && growing < used, "both signs must occur");
    Ok(vec![baird, gamma0, frozen])
}
