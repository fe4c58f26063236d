//! A star-shaped counterexample in the spirit of Baird's, built for this crate.
//!
//! Six upper states and a hub. `SOLID` moves to the hub, `DASHED` to a uniformly
//! chosen upper state, and every reward is zero. Upper state `i` has base feature
//! `e_i`, the hub has `e_0 + … + e_5 + e_6`, placed in a per-action block and
//! multiplied by [`FEATURE_SCALE`]. The dataset only contains `SOLID` moves into
//! the hub, so a greedy bootstrap keeps feeding the hub value back into all six
//! upper estimates.
//!
//! The scale matters for Adam: its steps are about `η` per coordinate no matter
//! how large the gradient is, so parameters can only grow linearly. Large features
//! turn that linear growth into a TD loss that crosses the divergence cap within
//! about ten thousand steps at `η = 1e-2`.

use super::mdp::{one_hot, LinearMdpSpec};
use crate::network::{Critic, FeatureSpec};
use crate::td::{OfflineDataset, Transition};

pub const UPPER: usize = 6;
pub const HUB: usize = 6;
pub const STATES: usize = 7;
pub const SOLID: usize = 0;
pub const DASHED: usize = 1;
pub const GAMMA: f64 = 0.99;
pub const FEATURE_SCALE: f64 = 1000.0;

#[derive(Clone, Debug)]
pub struct BairdFixture {
    pub mdp: LinearMdpSpec,
    pub critic: Critic,
    pub dataset: OfflineDataset,
}

fn base_feature(s: usize) -> Vec<f64> {
    if s == HUB {
        vec![1.0; STATES]
    } else {
        one_hot(STATES, s)
    }
}

fn feature_table() -> Vec<Vec<Vec<f64>>> {
    (0..STATES)
        .map(|s| {
            (0..2)
                .map(|a| {
                    let mut f = vec![0.0; 2 * STATES];
                    for (k, x) in base_feature(s).into_iter().enumerate() {
                        f[a * STATES + k] = FEATURE_SCALE * x;
                    }
                    f
                })
                .collect()
        })
        .collect()
}

fn transition(s: usize, a: usize, r: f64, s_next: usize, a_next: usize) -> Transition {
    Transition { s: one_hot(STATES, s), a, r, s_next: one_hot(STATES, s_next), a_next: Some(a_next), terminal: false }
}

pub fn baird_mdp() -> LinearMdpSpec {
    let to_hub = one_hot(STATES, HUB);
    let mut to_upper = vec![1.0 / UPPER as f64; STATES];
    to_upper[HUB] = 0.0;
    LinearMdpSpec {
        n_states: STATES,
        n_actions: 2,
        transitions: vec![vec![to_hub, to_upper]; STATES],
        rewards: vec![vec![0.0; 2]; STATES],
        gamma: GAMMA,
        features: FeatureSpec::Table { state_dim: STATES, action_count: 2, table: feature_table(), clip: None },
    }
}

/// Linear critic with ones on the `SOLID` block and zeros on the `DASHED` block.
pub fn baird_critic() -> Critic {
    let mut critic = Critic::linear(baird_mdp().feature_map());
    for (i, p) in critic.params_mut().iter_mut().enumerate() {
        *p = if i < STATES { 1.0 } else { 0.0 };
    }
    critic
}

/// `(upper_i, SOLID) → hub`, recorded with the behavior's `DASHED` follow-up.
pub fn baird_offpolicy_dataset() -> OfflineDataset {
    let transitions = (0..UPPER).map(|i| transition(i, SOLID, 0.0, HUB, DASHED)).collect();
    OfflineDataset::new(transitions, 2, GAMMA).expect("static fixture")
}

/// One on-policy cycle `u0 → u1 → … → u5 → hub → u0` for SARSA targets.
pub fn baird_onpolicy_cycle() -> OfflineDataset {
    let steps = [(0, DASHED), (1, DASHED), (2, DASHED), (3, DASHED), (4, DASHED), (5, SOLID), (HUB, DASHED)];
    let transitions = (0..steps.len())
        .map(|k| {
            let (s, a) = steps[k];
            let (sn, an) = steps[(k + 1) % steps.len()];
            transition(s, a, 0.0, sn, an)
        })
        .collect();
    OfflineDataset::new(transitions, 2, GAMMA).expect("static fixture")
}

pub fn baird_fixture() -> BairdFixture {
    BairdFixture { mdp: baird_mdp(), critic: baird_critic(), dataset: baird_offpolicy_dataset() }
}
