use rand::Rng;
use rayon::prelude::*;

use super::CheckResult;
use crate::envlab::{gen_random_mdp, generate_dataset, DatasetSpec};
use crate::error::Result;
use crate::lab::train::{trace_to_writer, train, OptimizerKind, TrainConfig};
use crate::linalg::{frobenius_norm, norm2, DenseMatrix};
use crate::network::{Critic, FeatureMap, ParamLayout};
use crate::optim::{budgeted_scale, orth_gradient, orth_potential, reference_step, AdamConfig, OrthConfig};
use crate::rng::{self, LabRng};
use crate::td::TargetRule;

pub fn criterion4(seed: u64) -> Result<Vec<CheckResult>> {
    let runs: Vec<Result<bool>> = (0..10u64)
        .into_par_iter()
        .map(|k| {
            let mdp = gen_random_mdp(seed.wrapping_add(40 + k), 5, 2, 6, 0.9)?;
            let dataset = generate_dataset(&mdp, &DatasetSpec::new(0.3, 32, seed.wrapping_add(400 + k)))?;
            let critic = Critic::mlp(mdp.feature_map(), &[8], seed.wrapping_add(4000 + k))?;
            let base = TrainConfig {
                optimizer: OptimizerKind::Adam,
                adam: AdamConfig::default().with_eta(1e-3),
                orth: OrthConfig { kappa_orth: 0.0, tau: 0.05, ..OrthConfig::budgeted() },
                rule: TargetRule::QLearning,
                polyak_alpha: 0.5,
                steps: 1000,
                monitor_every: 250,
            };
            let adam = train(critic.clone(), &dataset, &base)?;
            let adamo = train(critic, &dataset, &TrainConfig { optimizer: OptimizerKind::Adamo, ..base })?;
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            let mut csv_a = Vec::new();
            let mut csv_o = Vec::new();
            trace_to_writer(&mut csv_a, &adam.rows)?;
            trace_to_writer(&mut csv_o, &adamo.rows)?;
            Ok(bits(adam.critic.params()) == bits(adamo.critic.params())
                && bits(&adam.loss_history) == bits(&adamo.loss_history)
                && csv_a == csv_o)
        })
        .collect();
    let mut violations = 0;
    for r in runs {
        violations += usize::from(!r?);
    }
    Ok(vec![CheckResult::new("kappa_zero_bitwise", 4, 10, violations, violations as f64, 0.0)
        .detail("params, loss histories and trace CSVs over 1000 steps")])
}

struct BudgetDraw {
    floor_gap: f64,
    clipped_gap: Option<f64>,
    block_ratio: f64,
    total_ratio: f64,
}

fn random_layout(r: &mut LabRng) -> ParamLayout {
    let nb = r.random_range(1..=3);
    let mut shapes: Vec<(String, usize, usize, bool)> =
        (0..nb).map(|i| (format!("W{i}"), r.random_range(1..=6), r.random_range(1..=6), true)).collect();
    shapes.push(("bias".into(), r.random_range(1..=4), 1, false));
    let refs: Vec<(&str, usize, usize, bool)> = shapes.iter().map(|(n, a, b, m)| (n.as_str(), *a, *b, *m)).collect();
    ParamLayout::sequential(&refs)
}

fn budget_draw(r: &mut LabRng) -> Vec<BudgetDraw> {
    let layout = random_layout(r);
    let n = layout.total();
    let scale = r.random_range(0.2..2.0);
    let params: Vec<f64> = rng::normal_vec(r, n).iter().map(|x| x * scale).collect();
    let g = rng::normal_vec(r, n);
    let u = rng::normal_vec(r, n);
    let kappa = r.random_range(0.0..2.0);
    let tau = if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..0.5) };
    let mut delta = vec![0.0; n];
    let mut out = Vec::new();
    for b in layout.matrix_blocks() {
        let w = layout.matrix(&params, b);
        let gb = layout.matrix(&g, b);
        let ub = layout.matrix(&u, b);
        let d0 = reference_step(&ub, &orth_gradient(&w), kappa, 1e-8);
        let step = budgeted_scale(&gb, &ub, &d0, tau);
        let gd = gb.frobenius_inner(&step.delta);
        delta[b.range()].copy_from_slice(step.delta.as_slice());
        let unorm = frobenius_norm(&ub);
        out.push(BudgetDraw {
            floor_gap: step.budget - gd,
            clipped_gap: (step.scale < 1.0).then(|| (gd - step.budget).abs()),
            block_ratio: if unorm > 0.0 { frobenius_norm(&step.delta) / (kappa * unorm) } else { 0.0 },
            total_ratio: 0.0,
        });
    }
    let sum: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + b).collect();
    if let Some(last) = out.last_mut() {
        last.total_ratio = norm2(&sum) / ((1.0 + kappa) * norm2(&u));
    }
    out
}

pub fn criterion5(seed: u64) -> Result<Vec<CheckResult>> {
    let trials = 10_000;
    let draws: Vec<Vec<BudgetDraw>> =
        (0..trials).into_par_iter().map(|k| budget_draw(&mut rng::stream(seed, 5000 + k as u64))).collect();
    let blocks: Vec<&BudgetDraw> = draws.iter().flatten().collect();
    let floor_worst = blocks.iter().map(|d| d.floor_gap).fold(f64::NEG_INFINITY, f64::max);
    let floor_viol = blocks.iter().filter(|d| !(d.floor_gap <= 1e-12)).count();
    let clipped: Vec<f64> = blocks.iter().filter_map(|d| d.clipped_gap).collect();
    let clip_worst = clipped.iter().cloned().fold(0.0, f64::max);
    let clip_viol = clipped.iter().filter(|&&x| !(x <= 1e-9)).count();
    let mag_worst = blocks.iter().map(|d| d.block_ratio).fold(0.0, f64::max);
    let mag_viol = blocks.iter().filter(|d| !(d.block_ratio <= 1.0 + 1e-12)).count();
    let tot_worst = draws.iter().filter_map(|d| d.last()).map(|d| d.total_ratio).fold(0.0, f64::max);
    let tot_viol = draws.iter().filter_map(|d| d.last()).filter(|d| !(d.total_ratio <= 1.0 + 1e-12)).count();
    Ok(vec![
        CheckResult::new("budget_floor", 5, blocks.len(), floor_viol, floor_worst, 1e-12)
            .detail("max of T - <g_b, delta_b>"),
        CheckResult::new("budget_equality_when_clipped", 5, clipped.len(), clip_viol, clip_worst, 1e-9)
            .require(!clipped.is_empty(), "no clipped draws"),
        CheckResult::new("block_magnitude", 5, blocks.len(), mag_viol, mag_worst, 1.0 + 1e-12)
            .detail("max ||delta_b|| / (kappa ||u_b||)"),
        CheckResult::new("assembled_magnitude", 5, trials, tot_viol, tot_worst, 1.0 + 1e-12)
            .detail("max ||u + Delta|| / ((1 + kappa) ||u||)"),
    ])
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(1e-12)
}

fn orth_fd_error(r: &mut LabRng) -> f64 {
    let rows = r.random_range(1..=6);
    let cols = r.random_range(1..=6);
    let w = rng::normal_matrix(r, rows, cols);
    let h = 1e-6;
    let mut fd = vec![0.0; rows * cols];
    for (k, slot) in fd.iter_mut().enumerate() {
        let mut plus = w.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[k] += h;
        minus[k] -= h;
        let fp = orth_potential(&DenseMatrix::new(rows, cols, plus).unwrap());
        let fm = orth_potential(&DenseMatrix::new(rows, cols, minus).unwrap());
        *slot = (fp - fm) / (2.0 * h);
    }
    rel_err(orth_gradient(&w).as_slice(), &fd)
}

fn jacobian_fd_error(r: &mut LabRng, k: usize) -> Result<f64> {
    let state_dim = r.random_range(2..=6);
    let actions = r.random_range(1..=3);
    let features = FeatureMap::random_projection(state_dim, actions, r.random_range(2..=8), r.random());
    let critic = if k.is_multiple_of(4) {
        let mut c = Critic::linear(features);
        let p = rng::normal_vec(r, c.param_count());
        c.set_params(&p);
        c
    } else {
        let depth = r.random_range(1..=2);
        let hidden: Vec<usize> = (0..depth).map(|_| r.random_range(2..=8)).collect();
        let mut c = Critic::mlp(features, &hidden, r.random())?;
        let p: Vec<f64> = c.params().iter().map(|x| x + 0.1 * rng::normal(r)).collect();
        c.set_params(&p);
        c
    };
    let s = rng::normal_vec(r, state_dim);
    let a = r.random_range(0..actions);
    let h = 1e-5;
    let params = critic.params().to_vec();
    let fd: Vec<f64> = (0..params.len())
        .map(|i| {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[i] += h;
            minus[i] -= h;
            (critic.q_value_at(&plus, &s, a) - critic.q_value_at(&minus, &s, a)) / (2.0 * h)
        })
        .collect();
    Ok(rel_err(&critic.jacobian_column(&s, a), &fd))
}

pub fn criterion6(seed: u64) -> Result<Vec<CheckResult>> {
    let orth: Vec<f64> = (0..100).into_par_iter().map(|k| orth_fd_error(&mut rng::stream(seed, 6000 + k))).collect();
    let jac: Vec<Result<f64>> =
        (0..100).into_par_iter().map(|k| jacobian_fd_error(&mut rng::stream(seed, 6500 + k as u64), k)).collect();
    let orth_worst = orth.iter().cloned().fold(0.0, f64::max);
    let orth_viol = orth.iter().filter(|&&e| !(e <= 1e-6)).count();
    let mut jac_worst: f64 = 0.0;
    let mut jac_viol = 0;
    for e in jac {
        let e = e?;
        jac_worst = jac_worst.max(e);
        jac_viol += usize::from(!(e <= 1e-5));
    }
    Ok(vec![
        CheckResult::new("orth_gradient_fd", 6, 100, orth_viol, orth_worst, 1e-6),
        CheckResult::new("critic_jacobian_fd", 6, 100, jac_viol, jac_worst, 1e-5),
    ])
}
