//! One AdamO step on a single 4×3 weight block, showing the budget at work.

use collapse_lab::network::ParamLayout;
use collapse_lab::optim::{adam_step, adamo_step, AdamConfig, AdamState, OrthConfig};
use collapse_lab::rng;

fn main() -> collapse_lab::Result<()> {
    let layout = ParamLayout::sequential(&[("W", 4, 3, true)]);
    let r = &mut rng::seeded(3);
    let w = rng::normal_vec(r, 12);
    let g = rng::normal_vec(r, 12);
    let adam = AdamConfig::default().with_eta(1e-2);

    let plain = adam_step(&w, &g, &mut AdamState::new(12), &adam);
    for (name, orth) in [("budgeted", OrthConfig::budgeted()), ("conflict-free", OrthConfig::conflict_free())] {
        let (next, report) = adamo_step(&w, &g, &mut AdamState::new(12), &adam, &orth, &layout)?;
        let b = &report.blocks[0];
        let moved: f64 = next.iter().zip(&plain).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        println!(
            "{name:>13}: R(W) {:.4}  <g,u> {:+.4}  <g,delta> {:+.4}  budget {:+.4}  scale {:.4}  |w_O - w_A| {:.3e}",
            report.r_total, b.g_dot_u, b.g_dot_delta, b.budget, b.scale, moved
        );
    }
    Ok(())
}
