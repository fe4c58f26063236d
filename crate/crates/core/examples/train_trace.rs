//! Train an MLP critic with Adam and AdamO on the same offline data and write
//! both monitoring traces as CSV to stdout.

use collapse_lab::envlab::{gen_random_mdp, generate_dataset, DatasetSpec};
use collapse_lab::lab::{train, trace_to_writer, OptimizerKind, TrainConfig};
use collapse_lab::network::Critic;
use collapse_lab::optim::AdamConfig;

fn main() -> collapse_lab::Result<()> {
    let mdp = gen_random_mdp(4, 6, 3, 6, 0.9)?;
    let data = generate_dataset(&mdp, &DatasetSpec::new(0.3, 64, 4))?;
    for optimizer in [OptimizerKind::Adam, OptimizerKind::Adamo] {
        let critic = Critic::mlp(mdp.feature_map(), &[16, 16], 1)?;
        let cfg = TrainConfig { optimizer, adam: AdamConfig::default().with_eta(1e-3), steps: 2000, ..TrainConfig::default() };
        let out = train(critic, &data, &cfg)?;
        eprintln!("{optimizer:?}: {} after {} steps", out.status, out.loss_history.len() - 1);
        trace_to_writer(std::io::stdout().lock(), &out.rows)?;
    }
    Ok(())
}
