//! Train the star fixture with Adam and watch `ρ(A)` and the loss, then repeat
//! with bootstrapping switched off.

use collapse_lab::envlab::baird_fixture;
use collapse_lab::lab::{train, OptimizerKind, TrainConfig};
use collapse_lab::optim::AdamConfig;

fn main() -> collapse_lab::Result<()> {
    let fx = baird_fixture();
    let cfg = TrainConfig {
        optimizer: OptimizerKind::Adam,
        adam: AdamConfig::default().with_eta(1e-2),
        steps: 10_000,
        monitor_every: 1000,
        ..TrainConfig::default()
    };
    for gamma in [fx.dataset.gamma(), 0.0] {
        let data = fx.dataset.with_gamma(gamma)?;
        let out = train(fx.critic.clone(), &data, &cfg)?;
        println!("gamma = {gamma}: {}", out.status);
        for row in &out.rows {
            println!("  step {:>6}  loss {:>12.4e}  rho_a {:>12.6}  hurwitz {}", row.step, row.td_loss, row.rho_a, row.hurwitz);
        }
    }
    Ok(())
}
