//! Linearize a critic on a generated dataset and print its stability report.
//!
//! `cargo run --example spectrum_report -- [seed]`

use collapse_lab::envlab::{gen_random_mdp, generate_dataset, DatasetSpec};
use collapse_lab::lab::{snapshot_at, SnapshotSettings};
use collapse_lab::network::Critic;
use collapse_lab::spectral::stability_report;
use collapse_lab::td::TargetRule;

fn main() -> collapse_lab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mdp = gen_random_mdp(seed, 40, 3, 8, 0.95)?;
    let data = generate_dataset(&mdp, &DatasetSpec::new(0.5, 10, seed))?;
    let critic = Critic::mlp(mdp.feature_map(), &[16], seed)?;

    for rule in [TargetRule::QLearning, TargetRule::Sarsa] {
        let settings = SnapshotSettings { rule, gamma: data.gamma(), coupling_alpha: 1.0, beta1: 0.9, eta: 1e-3 };
        let d = vec![1.0; critic.param_count()];
        let snap = snapshot_at(&critic, critic.params(), critic.params(), &data, d, &settings)?;
        let r = stability_report(&snap)?;
        println!(
            "{rule:?}: max_re {:+.4e}  rho(A) {:.6}  {:?}  symmetric-part margin {:+.3e}",
            r.max_re, r.rho_a, r.status, r.margins.symmetric_part
        );
    }
    Ok(())
}
