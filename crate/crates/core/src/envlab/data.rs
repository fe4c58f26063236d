use serde::{Deserialize, Serialize};

use super::mdp::{optimal_actions, sample_index, LinearMdpSpec, Policy};
use crate::error::{LabError, Result};
use crate::rng;
use crate::td::{OfflineDataset, Transition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    /// Probability of replacing the reference action by a uniform one.
    pub epsilon: f64,
    pub size: usize,
    pub seed: u64,
    /// Episodes restart from a uniform state after this many steps.
    pub episode_cap: usize,
    /// Greedy action per state; the optimal policy when absent.
    pub reference: Option<Vec<usize>>,
}

impl DatasetSpec {
    pub fn new(epsilon: f64, size: usize, seed: u64) -> Self {
        DatasetSpec { epsilon, size, seed, episode_cap: 100, reference: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.episode_cap == 0 {
            return Err(LabError::Config("dataset size and episode cap must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(LabError::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Rolls out the ε-greedy behavior policy and records each step with the
/// action actually taken next, so SARSA targets are available.
pub fn generate_dataset(mdp: &LinearMdpSpec, spec: &DatasetSpec) -> Result<OfflineDataset> {
    mdp.validate()?;
    spec.validate()?;
    let reference = match &spec.reference {
        Some(r) if r.len() == mdp.n_states && r.iter().all(|&a| a < mdp.n_actions) => r.clone(),
        Some(_) => return Err(LabError::Config("reference policy does not match the MDP".into())),
        None => optimal_actions(mdp)?,
    };
    let behavior = Policy::epsilon_greedy(&reference, mdp.n_actions, spec.epsilon);
    let mut r = rng::seeded(spec.seed);
    let uniform_start = vec![1.0 / mdp.n_states as f64; mdp.n_states];

    let mut transitions = Vec::with_capacity(spec.size);
    let mut s = sample_index(&uniform_start, &mut r);
    let mut a = behavior.sample(s, &mut r);
    let mut t_in_episode = 0;
    while transitions.len() < spec.size {
        let s_next = sample_index(&mdp.transitions[s][a], &mut r);
        let a_next = behavior.sample(s_next, &mut r);
        transitions.push(Transition {
            s: mdp.state_vector(s),
            a,
            r: mdp.rewards[s][a],
            s_next: mdp.state_vector(s_next),
            a_next: Some(a_next),
            terminal: false,
        });
        t_in_episode += 1;
        if t_in_episode == spec.episode_cap {
            t_in_episode = 0;
            s = sample_index(&uniform_start, &mut r);
            a = behavior.sample(s, &mut r);
        } else {
            s = s_next;
            a = a_next;
        }
    }
    OfflineDataset::new(transitions, mdp.n_actions, mdp.gamma)
}
