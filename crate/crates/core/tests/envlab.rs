use std::path::PathBuf;

use collapse_lab::dynamics::simulate_norms;
use collapse_lab::envlab::*;
use collapse_lab::linalg::norm2;
use collapse_lab::network::{Critic, FeatureSpec};
use collapse_lab::rng;
use collapse_lab::spectral::{stability_report, td_operator, FrozenSnapshot};
use collapse_lab::td::{argmax_lowest, OfflineDataset, TargetRule};
use collapse_lab::lab::{snapshot_at, SnapshotSettings};
use rand::Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Compares against a committed file; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, bytes: &[u8]) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, bytes).unwrap();
    }
    let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(want == bytes, "{name} no longer matches its golden file");
}

fn chain(rewards: [f64; 2], gamma: f64) -> LinearMdpSpec {
    // 0 → 1 → 1 under every action
    LinearMdpSpec {
        n_states: 2,
        n_actions: 1,
        transitions: vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
        rewards: vec![vec![rewards[0]], vec![rewards[1]]],
        gamma,
        features: FeatureSpec::ActionBlocks { state_dim: 2, action_count: 1, clip: None },
    }
}

#[test]
fn policy_return_examples() {
    let zero = LinearMdpSpec { rewards: vec![vec![0.0; 2]; 4], ..gen_random_mdp(1, 4, 2, 3, 0.9).unwrap() };
    assert_eq!(policy_return(&zero, &Policy::uniform(4, 2)).unwrap(), 0.0);

    let self_loop = LinearMdpSpec {
        n_states: 1,
        n_actions: 1,
        transitions: vec![vec![vec![1.0]]],
        rewards: vec![vec![1.0]],
        gamma: 0.9,
        features: FeatureSpec::ActionBlocks { state_dim: 1, action_count: 1, clip: None },
    };
    assert!((policy_return(&self_loop, &Policy::uniform(1, 1)).unwrap() - 10.0).abs() < 1e-12);

    // v1 = 2 / (1 − 0.5) = 4, v0 = 1 + 0.5 · 4 = 3
    let mdp = chain([1.0, 2.0], 0.5);
    let v = state_values(&mdp, &Policy::uniform(2, 1)).unwrap();
    assert!((v[0] - 3.0).abs() < 1e-14 && (v[1] - 4.0).abs() < 1e-14);
    assert!((policy_return(&mdp, &Policy::uniform(2, 1)).unwrap() - 3.5).abs() < 1e-14);
}

/// Truncated discounted rollouts from a uniform start.
fn monte_carlo(mdp: &LinearMdpSpec, policy: &Policy, episodes: usize, horizon: usize, seed: u64) -> f64 {
    let r = &mut rng::seeded(seed);
    let pick = |p: &[f64], r: &mut rng::LabRng| {
        let u: f64 = r.random();
        let mut acc = 0.0;
        p.iter().position(|x| {
            acc += x;
            u < acc
        }).unwrap_or(p.len() - 1)
    };
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut s = r.random_range(0..mdp.n_states);
        let mut disc = 1.0;
        for _ in 0..horizon {
            let a = pick(&policy.probs[s], r);
            total += disc * mdp.rewards[s][a];
            disc *= mdp.gamma;
            s = pick(&mdp.transitions[s][a], r);
        }
    }
    total / episodes as f64
}

#[test]
fn exact_return_agrees_with_rollouts() {
    for seed in 0..10 {
        let mdp = gen_random_mdp(seed, 5, 3, 4, 0.8).unwrap();
        // fixed rewards offset keeps returns away from zero so the 1% tolerance is meaningful
        let mdp = LinearMdpSpec { rewards: mdp.rewards.iter().map(|r| r.iter().map(|x| x + 2.0).collect()).collect(), ..mdp };
        let policy = Policy::epsilon_greedy(&optimal_actions(&mdp).unwrap(), 3, 0.5);
        let exact = policy_return(&mdp, &policy).unwrap();
        // 0.8^60 ≈ 1.5e-6, far below the tolerance
        let mc = monte_carlo(&mdp, &policy, 20_000, 60, 100 + seed);
        assert!((mc - exact).abs() <= 0.01 * exact.abs(), "seed {seed}: {mc} vs {exact}");
    }
}

#[test]
fn generation_is_deterministic_and_stochastic() {
    let a = gen_random_mdp(5, 6, 3, 4, 0.9).unwrap();
    assert_eq!(a, gen_random_mdp(5, 6, 3, 4, 0.9).unwrap());
    assert_ne!(a, gen_random_mdp(6, 6, 3, 4, 0.9).unwrap());
    for row in a.transitions.iter().flatten() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(row.iter().all(|p| *p > 0.0));
    }
    assert!(a.rewards.iter().flatten().all(|r| (-1.0..=1.0).contains(r)));
    assert!(gen_random_mdp(0, 1, 2, 3, 0.9).is_err());
    assert!(gen_random_mdp(0, 2, 2, 3, 1.0).is_err());

    let spec = DatasetSpec::new(0.3, 50, 7);
    let d = generate_dataset(&a, &spec).unwrap();
    assert_eq!(d, generate_dataset(&a, &spec).unwrap());
}

#[test]
fn golden_random_mdp_and_dataset() {
    let mdp = gen_random_mdp(0, 2, 2, 3, 0.9).unwrap();
    let mut text = serde_json::to_string_pretty(&mdp).unwrap();
    text.push('\n');
    golden("mdp_2x2_seed0.json", text.as_bytes());
    let back: LinearMdpSpec = serde_json::from_slice(&std::fs::read(fixture("mdp_2x2_seed0.json")).unwrap()).unwrap();
    assert_eq!(back, mdp);

    let d = generate_dataset(&mdp, &DatasetSpec::new(0.3, 16, 0)).unwrap();
    let mut bytes = Vec::new();
    d.to_writer(&mut bytes).unwrap();
    golden("dataset_2x2_seed0.jsonl", &bytes);
    assert_eq!(OfflineDataset::read_jsonl(fixture("dataset_2x2_seed0.jsonl")).unwrap(), d);
}

#[test]
fn normalized_score_examples() {
    let refs = ScoreRefs::new(-2.0, 6.0).unwrap();
    assert_eq!(normalized_score(6.0, &refs), 100.0);
    assert_eq!(normalized_score(-2.0, &refs), 0.0);
    assert_eq!(normalized_score(2.0, &refs), 50.0);
    assert!(ScoreRefs::new(1.0, 1.0).is_err());
    let mdp = gen_random_mdp(3, 4, 3, 2, 0.9).unwrap();
    let refs = ScoreRefs::for_mdp(&mdp).unwrap();
    assert!(refs.r_expert > refs.r_random);
}

#[test]
fn dataset_examples() {
    let mdp = gen_random_mdp(2, 5, 3, 4, 0.9).unwrap();
    let one = generate_dataset(&mdp, &DatasetSpec::new(0.2, 1, 0)).unwrap();
    assert_eq!(one.len(), 1);
    assert!(generate_dataset(&mdp, &DatasetSpec::new(0.2, 0, 0)).is_err());

    // ε = 0 around a critic's greedy actions: every recorded next action is greedy
    let critic = Critic::mlp(mdp.feature_map(), &[6], 3).unwrap();
    let greedy: Vec<usize> = (0..5)
        .map(|s| {
            let x = mdp.state_vector(s);
            argmax_lowest(&(0..3).map(|a| critic.q_value(&x, a)).collect::<Vec<_>>())
        })
        .collect();
    let spec = DatasetSpec { reference: Some(greedy.clone()), episode_cap: 7, ..DatasetSpec::new(0.0, 200, 4) };
    let d = generate_dataset(&mdp, &spec).unwrap();
    for t in d.transitions() {
        let s = t.s.iter().position(|x| *x == 1.0).unwrap();
        let sn = t.s_next.iter().position(|x| *x == 1.0).unwrap();
        assert_eq!(t.a, greedy[s]);
        assert_eq!(t.a_next, Some(greedy[sn]));
        assert_eq!(t.r, mdp.rewards[s][t.a]);
    }
    let bad = DatasetSpec { reference: Some(vec![0; 4]), ..spec };
    assert!(generate_dataset(&mdp, &bad).is_err());
}

fn baird_snapshot(dataset: &OfflineDataset, rule: TargetRule) -> FrozenSnapshot {
    let c = baird_critic();
    let settings = SnapshotSettings { rule, gamma: dataset.gamma(), coupling_alpha: 1.0, beta1: 0.9, eta: 1e-2 };
    snapshot_at(&c, c.params(), c.params(), dataset, vec![1.0; c.param_count()], &settings).unwrap()
}

#[test]
fn star_fixture_is_unstable_off_policy() {
    let fx = baird_fixture();
    fx.mdp.validate().unwrap();
    fx.dataset.check_features(fx.critic.features()).unwrap();
    let snap = baird_snapshot(&fx.dataset, TargetRule::QLearning);
    let report = stability_report(&snap).unwrap();
    assert!(!report.hurwitz);
    assert!(report.max_re > 0.0);

    // the frozen recurrence blows up
    let s = td_operator(&snap);
    let e0 = vec![1.0; s.rows()];
    let start = norm2(&e0);
    let norms = simulate_norms(&s, 0.9, 1e-2, e0, 10_000, Some((0.0, 1e12 * start)));
    assert!(norms.iter().cloned().fold(0.0, f64::max) >= 10.0 * start);
}

#[test]
fn star_fixture_is_stable_with_on_policy_sarsa() {
    let snap = baird_snapshot(&baird_onpolicy_cycle(), TargetRule::Sarsa);
    assert!(stability_report(&snap).unwrap().max_re < 0.0);
}

#[test]
fn star_fixture_values() {
    let c = baird_critic();
    let hub = one_hot(7, HUB);
    assert_eq!(c.q_value(&hub, SOLID), 7.0 * FEATURE_SCALE);
    assert_eq!(c.q_value(&hub, DASHED), 0.0);
    assert_eq!(baird_offpolicy_dataset().len(), 6);
    assert!(baird_offpolicy_dataset().transitions().iter().all(|t| t.a == SOLID && t.r == 0.0));
}
