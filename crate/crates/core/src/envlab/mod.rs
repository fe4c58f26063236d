//! Finite MDPs, offline dataset generation, the star divergence fixture and
//! normalized scores.

mod baird;
mod data;
mod mdp;

pub use baird::{
    baird_critic, baird_fixture, baird_mdp, baird_offpolicy_dataset, baird_onpolicy_cycle, BairdFixture, DASHED,
    FEATURE_SCALE, HUB, SOLID,
};
pub use data::{generate_dataset, DatasetSpec};
pub use mdp::{
    action_values, gen_random_mdp, normalized_score, one_hot, optimal_actions, policy_return, state_values,
    LinearMdpSpec, Policy, ScoreRefs,
};
