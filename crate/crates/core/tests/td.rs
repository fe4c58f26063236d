use std::path::Path;

use collapse_lab::envlab::one_hot;
use collapse_lab::linalg::{norm2, solve};
use collapse_lab::network::{Critic, FeatureMap};
use collapse_lab::rng;
use collapse_lab::td::*;
use proptest::prelude::*;
use rand::Rng;

fn tr(s: Vec<f64>, a: usize, r: f64, s_next: Vec<f64>, a_next: Option<usize>, terminal: bool) -> Transition {
    Transition { s, a, r, s_next, a_next, terminal }
}

/// One-hot states with action-block features, so `Q(s_i, a) = θ[a·n + i]`.
fn tabular(n: usize, actions: usize) -> Critic {
    Critic::linear(FeatureMap::action_blocks(n, actions))
}

#[test]
fn argmax_examples() {
    assert_eq!(argmax_lowest(&[1.0, 0.0]), 0);
    assert_eq!(argmax_lowest(&[0.3, 0.3]), 0);
    assert_eq!(argmax_lowest(&[-1.0, 2.0, 2.0]), 1);
}

#[test]
fn target_actions_follow_the_rule() {
    let mut c = tabular(2, 2);
    // Q(s1, 0) = 0, Q(s1, 1) = 5
    c.set_params(&[0.0, 0.0, 0.0, 5.0]);
    let ds = OfflineDataset::new(vec![tr(one_hot(2, 0), 0, 0.0, one_hot(2, 1), Some(0), false)], 2, 0.9).unwrap();
    assert_eq!(target_actions(&c, c.params(), &ds, TargetRule::QLearning).unwrap(), vec![Some(1)]);
    assert_eq!(target_actions(&c, c.params(), &ds, TargetRule::Sarsa).unwrap(), vec![Some(0)]);
    let no_behavior = OfflineDataset::new(vec![tr(one_hot(2, 0), 0, 0.0, one_hot(2, 1), None, false)], 2, 0.9).unwrap();
    assert!(matches!(
        target_actions(&c, c.params(), &no_behavior, TargetRule::Sarsa),
        Err(collapse_lab::LabError::MissingBehaviorAction { index: 0 })
    ));
}

#[test]
fn td_error_examples() {
    let zero = tabular(2, 1);
    let ds = OfflineDataset::new(vec![tr(one_hot(2, 0), 0, 0.0, one_hot(2, 1), Some(0), false)], 1, 0.9).unwrap();
    assert_eq!(td_error(&zero, zero.params(), &ds, TargetRule::QLearning).unwrap(), vec![0.0]);

    let mut c = tabular(2, 1);
    c.set_params(&[1.0, 1.0]);
    let ds = OfflineDataset::new(vec![tr(one_hot(2, 0), 0, 0.5, one_hot(2, 1), Some(0), false)], 1, 0.9).unwrap();
    let e = td_error(&c, c.params(), &ds, TargetRule::Sarsa).unwrap();
    assert!((e[0] - (-0.4)).abs() < 1e-15);
    assert!((td_loss(&e) - 0.08).abs() < 1e-15);

    // a terminal transition ignores the next state entirely
    c.set_params(&[2.5, 1e6]);
    let ds = OfflineDataset::new(vec![tr(one_hot(2, 0), 0, 0.5, one_hot(2, 1), None, true)], 1, 0.9).unwrap();
    assert_eq!(td_error(&c, c.params(), &ds, TargetRule::QLearning).unwrap(), vec![2.0]);
}

#[test]
fn td_loss_examples() {
    assert_eq!(td_loss(&[0.0, 0.0]), 0.0);
    assert_eq!(td_loss(&[3.0, 4.0]), 12.5);
}

#[test]
fn semi_gradient_examples() {
    let c = tabular(3, 2);
    let ds = OfflineDataset::new(vec![tr(vec![1.0, -2.0, 0.5], 1, 0.0, vec![0.0; 3], Some(0), false)], 2, 0.9).unwrap();
    assert_eq!(semi_gradient(&c, &ds, &[0.0]), vec![0.0; 6]);
    let g = semi_gradient(&c, &ds, &[2.0]);
    assert_eq!(g, vec![0.0, 0.0, 0.0, 2.0, -4.0, 1.0]);
}

fn random_dataset(r: &mut impl Rng, n: usize, state_dim: usize, actions: usize) -> OfflineDataset {
    let ts = (0..n)
        .map(|i| {
            tr(
                rng::normal_vec(r, state_dim),
                r.random_range(0..actions),
                rng::normal(r),
                rng::normal_vec(r, state_dim),
                Some(r.random_range(0..actions)),
                i % 7 == 6,
            )
        })
        .collect();
    OfflineDataset::new(ts, actions, 0.9).unwrap()
}

fn loss_at(c: &Critic, online: &[f64], target: &[f64], ds: &OfflineDataset) -> f64 {
    let mut c = c.clone();
    c.set_params(online);
    td_loss(&td_error(&c, target, ds, TargetRule::Sarsa).unwrap())
}

#[test]
fn semi_gradient_matches_frozen_target_differences_and_not_the_full_gradient() {
    let r = &mut rng::seeded(8);
    let ds = random_dataset(r, 12, 3, 2);
    let c = Critic::mlp(FeatureMap::random_projection(3, 2, 4, 1), &[5], 2).unwrap();
    let theta = c.params().to_vec();
    let e = td_error(&c, &theta, &ds, TargetRule::Sarsa).unwrap();
    let g = semi_gradient(&c, &ds, &e);
    let h = 1e-6;
    let fd = |tie: bool| -> Vec<f64> {
        (0..theta.len())
            .map(|i| {
                let mut up = theta.clone();
                up[i] += h;
                let mut down = theta.clone();
                down[i] -= h;
                let (tu, td) = if tie { (up.clone(), down.clone()) } else { (theta.clone(), theta.clone()) };
                (loss_at(&c, &up, &tu, &ds) - loss_at(&c, &down, &td, &ds)) / (2.0 * h)
            })
            .collect()
    };
    let rel = |a: &[f64], b: &[f64]| {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm2(&d) / norm2(b)
    };
    assert!(rel(&g, &fd(false)) <= 1e-5);
    // differentiating through the target branch gives something else
    assert!(rel(&g, &fd(true)) > 1e-2);
}

#[test]
fn interpolating_linear_critic_reaches_zero_loss() {
    let (n, actions) = (3, 2);
    let c = tabular(n, actions);
    let mut ts = Vec::new();
    let r = &mut rng::seeded(4);
    for s in 0..n {
        for a in 0..actions {
            ts.push(tr(one_hot(n, s), a, rng::normal(r), one_hot(n, (s + 1) % n), Some(a), false));
        }
    }
    let ds = OfflineDataset::new(ts, actions, 0.9).unwrap();
    let target = rng::normal_vec(r, c.param_count());
    let next = target_actions(&c, &target, &ds, TargetRule::QLearning).unwrap();
    let y = td_targets(&c, &target, &ds, &next);
    // solve Zᵀθ = y for the square full-rank Z
    let z = c.batch_jacobian(ds.inputs());
    let theta = solve(&z.transpose(), &y).unwrap();
    let mut fitted = c.clone();
    fitted.set_params(&theta);
    let e = td_error(&fitted, &target, &ds, TargetRule::QLearning).unwrap();
    assert!(td_loss(&e) < 1e-24);
}

#[test]
fn polyak_updates() {
    assert!(TargetNetwork::new(vec![0.0], 0.0).is_err());
    assert!(TargetNetwork::new(vec![0.0], 1.5).is_err());
    let mut t = TargetNetwork::new(vec![0.0, 0.0], 1.0).unwrap();
    polyak_update(&mut t, &[1.0, -2.0]);
    assert_eq!(t.params(), &[1.0, -2.0]);
    let mut t = TargetNetwork::new(vec![0.0, 0.0], 0.5).unwrap();
    polyak_update(&mut t, &[1.0, -2.0]);
    assert_eq!(t.params(), &[0.5, -1.0]);
}

#[test]
fn min_action_gap_examples() {
    let mut c = tabular(2, 3);
    c.set_params(&[0.0, 1.0, 0.0, 4.0, 0.0, 3.5]);
    let ds = OfflineDataset::new(
        vec![tr(one_hot(2, 0), 0, 0.0, one_hot(2, 1), Some(0), false), tr(one_hot(2, 1), 0, 0.0, one_hot(2, 0), None, true)],
        3,
        0.9,
    )
    .unwrap();
    assert_eq!(min_action_gap(&c, c.params(), &ds), Some(0.5));
    let single = OfflineDataset::new(vec![tr(vec![1.0], 0, 0.0, vec![1.0], Some(0), false)], 1, 0.9).unwrap();
    assert_eq!(min_action_gap(&Critic::linear(FeatureMap::action_blocks(1, 1)), &[0.0], &single), None);
}

#[test]
fn dataset_validation_and_round_trip() {
    let t = tr(vec![1.0], 0, 1.0, vec![0.0], Some(1), false);
    assert!(OfflineDataset::new(vec![], 2, 0.9).is_err());
    assert!(OfflineDataset::new(vec![t.clone()], 2, 1.0).is_err());
    assert!(OfflineDataset::new(vec![t.clone()], 1, 0.9).is_err());
    assert!(OfflineDataset::new(vec![tr(vec![f64::NAN], 0, 1.0, vec![0.0], None, false)], 2, 0.9).is_err());
    let ds = OfflineDataset::new(vec![t.clone(), t], 2, 0.9).unwrap();
    assert_eq!(ds.with_gamma(0.0).unwrap().gamma(), 0.0);
    assert!(ds.with_gamma(1.0).is_err());
    let mut buf = Vec::new();
    ds.to_writer(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(OfflineDataset::from_reader(buf.as_slice(), Path::new("mem")).unwrap(), ds);
    let broken = format!("{}\n{{\"s\": [1.0]}}\n", text.lines().next().unwrap());
    let err = OfflineDataset::from_reader(broken.as_bytes(), Path::new("mem")).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    assert!(ds.check_features(&FeatureMap::action_blocks(2, 2)).is_err());
    assert!(ds.check_features(&FeatureMap::action_blocks(1, 2)).is_ok());
    assert_eq!(ds.select(&[1]).unwrap().len(), 1);
}

#[test]
fn rule_names_parse() {
    assert_eq!("sarsa".parse::<TargetRule>().unwrap(), TargetRule::Sarsa);
    assert_eq!("q_learning".parse::<TargetRule>().unwrap(), TargetRule::QLearning);
    assert!("expected_sarsa".parse::<TargetRule>().is_err());
}

proptest! {
    #[test]
    fn argmax_ignores_a_common_shift(values in proptest::collection::vec(-100.0f64..100.0, 1..8), c in -50.0f64..50.0) {
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        // shifting can merge near-ties through rounding, so compare values
        let (i, j) = (argmax_lowest(&values), argmax_lowest(&shifted));
        prop_assert!((values[i] - values[j]).abs() <= 1e-12 * (1.0 + values[i].abs()));
    }

    #[test]
    fn greedy_targets_ignore_the_output_bias(seed in any::<u64>(), shift in -10.0f64..10.0) {
        let r = &mut rng::seeded(seed);
        let ds = random_dataset(r, 6, 2, 3);
        let c = Critic::mlp(FeatureMap::random_projection(2, 3, 3, seed), &[4], seed).unwrap();
        let mut p = c.params().to_vec();
        let before = target_actions(&c, &p, &ds, TargetRule::QLearning).unwrap();
        let b = c.layout().block("bL").unwrap().offset;
        p[b] += shift;
        let after = target_actions(&c, &p, &ds, TargetRule::QLearning).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn semi_gradient_is_linear_in_the_error(seed in any::<u64>(), k in -3.0f64..3.0) {
        let r = &mut rng::seeded(seed);
        let ds = random_dataset(r, 5, 2, 2);
        let c = Critic::mlp(FeatureMap::action_blocks(2, 2), &[3], seed).unwrap();
        let e = rng::normal_vec(r, 5);
        let ke: Vec<f64> = e.iter().map(|x| k * x).collect();
        let g = semi_gradient(&c, &ds, &e);
        let gk = semi_gradient(&c, &ds, &ke);
        for (a, b) in g.iter().zip(&gk) {
            prop_assert!((k * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
