use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{solve, DenseMatrix};
use crate::network::{FeatureMap, FeatureSpec};
use crate::rng;

/// Finite MDP with one-hot state encoding and a feature map over `(state, action)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transitions[s][a][s′] = P(s′ | s, a)`.
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<f64>>,
    pub gamma: f64,
    pub features: FeatureSpec,
}

impl LinearMdpSpec {
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n_states, self.n_actions);
        if n == 0 || k == 0 {
            return Err(LabError::Config("an MDP needs at least one state and one action".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(LabError::Config(format!("MDP gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.transitions.len() != n || self.rewards.len() != n {
            return Err(LabError::Dimension("transition/reward tables do not match n_states".into()));
        }
        for s in 0..n {
            if self.transitions[s].len() != k || self.rewards[s].len() != k {
                return Err(LabError::Dimension(format!("state {s}: tables do not match n_actions")));
            }
            for a in 0..k {
                let row = &self.transitions[s][a];
                if row.len() != n || row.iter().any(|p| !(*p >= 0.0)) {
                    return Err(LabError::Config(format!("P(.|{s},{a}) is not a distribution over {n} states")));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(LabError::Config(format!("P(.|{s},{a}) sums to {total}")));
                }
                if !self.rewards[s][a].is_finite() {
                    return Err(LabError::Config(format!("reward r({s},{a}) is not finite")));
                }
            }
        }
        let fm = self.feature_map();
        if fm.state_dim() != n || fm.action_count() != k {
            return Err(LabError::Dimension("feature map does not match the MDP sizes".into()));
        }
        Ok(())
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.features.clone().into()
    }

    pub fn state_vector(&self, s: usize) -> Vec<f64> {
        one_hot(self.n_states, s)
    }
}

pub fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Random MDP: each `P(·|s,a)` is a normalized vector of unit exponentials,
/// rewards are uniform on `[−1, 1]` and features are a seeded random projection.
pub fn gen_random_mdp(seed: u64, n_states: usize, n_actions: usize, feature_dim: usize, gamma: f64) -> Result<LinearMdpSpec> {
    if n_states < 2 || n_actions < 2 || feature_dim == 0 {
        return Err(LabError::Config(format!(
            "need at least 2 states, 2 actions and a positive feature dimension, got {n_states}, {n_actions}, {feature_dim}"
        )));
    }
    let mut r = rng::seeded(seed);
    let transitions = (0..n_states)
        .map(|_| {
            (0..n_actions)
                .map(|_| {
                    let draw: Vec<f64> = (0..n_states).map(|_| r.sample::<f64, _>(Exp1)).collect();
                    let total: f64 = draw.iter().sum();
                    draw.iter().map(|x| x / total).collect()
                })
                .collect()
        })
        .collect();
    let rewards = (0..n_states).map(|_| (0..n_actions).map(|_| r.random_range(-1.0..=1.0)).collect()).collect();
    let features = FeatureSpec::RandomProjection {
        state_dim: n_states,
        action_count: n_actions,
        dim: feature_dim,
        seed: seed.wrapping_add(1),
        clip: None,
    };
    let mdp = LinearMdpSpec { n_states, n_actions, transitions, rewards, gamma, features };
    mdp.validate()?;
    Ok(mdp)
}

/// Stochastic policy, `probs[s][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub probs: Vec<Vec<f64>>,
}

impl Policy {
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy { probs: vec![vec![1.0 / n_actions as f64; n_actions]; n_states] }
    }

    pub fn deterministic(actions: &[usize], n_actions: usize) -> Self {
        Policy { probs: actions.iter().map(|&a| one_hot(n_actions, a)).collect() }
    }

    /// Mixes a deterministic policy with the uniform one: greedy with probability `1 − ε`.
    pub fn epsilon_greedy(actions: &[usize], n_actions: usize, epsilon: f64) -> Self {
        let base = epsilon / n_actions as f64;
        let probs = actions
            .iter()
            .map(|&g| (0..n_actions).map(|a| base + if a == g { 1.0 - epsilon } else { 0.0 }).collect())
            .collect();
        Policy { probs }
    }

    pub fn sample(&self, s: usize, rng: &mut impl Rng) -> usize {
        sample_index(&self.probs[s], rng)
    }
}

pub(crate) fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the last cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

fn check_policy(mdp: &LinearMdpSpec, policy: &Policy) -> Result<()> {
    if policy.probs.len() != mdp.n_states || policy.probs.iter().any(|p| p.len() != mdp.n_actions) {
        return Err(LabError::Dimension("policy does not cover every state and action".into()));
    }
    Ok(())
}

/// `v_π = (I − γP_π)⁻¹ r_π`.
pub fn state_values(mdp: &LinearMdpSpec, policy: &Policy) -> Result<Vec<f64>> {
    check_policy(mdp, policy)?;
    let n = mdp.n_states;
    let mut r_pi = vec![0.0; n];
    let a = DenseMatrix::from_fn(n, n, |s, t| {
        let p: f64 = (0..mdp.n_actions).map(|a| policy.probs[s][a] * mdp.transitions[s][a][t]).sum();
        (if s == t { 1.0 } else { 0.0 }) - mdp.gamma * p
    });
    for (s, r) in r_pi.iter_mut().enumerate() {
        *r = (0..mdp.n_actions).map(|a| policy.probs[s][a] * mdp.rewards[s][a]).sum();
    }
    solve(&a, &r_pi)
}

/// Exact discounted return from a uniform start state.
pub fn policy_return(mdp: &LinearMdpSpec, policy: &Policy) -> Result<f64> {
    let v = state_values(mdp, policy)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// `Q_π(s, a) = r(s, a) + γ Σ P(s′|s,a) v_π(s′)`.
pub fn action_values(mdp: &LinearMdpSpec, v: &[f64]) -> Vec<Vec<f64>> {
    (0..mdp.n_states)
        .map(|s| {
            (0..mdp.n_actions)
                .map(|a| {
                    let next: f64 = mdp.transitions[s][a].iter().zip(v).map(|(p, v)| p * v).sum();
                    mdp.rewards[s][a] + mdp.gamma * next
                })
                .collect()
        })
        .collect()
}

/// Optimal deterministic policy by policy iteration (lowest action index on ties).
pub fn optimal_actions(mdp: &LinearMdpSpec) -> Result<Vec<usize>> {
    let mut actions = vec![0; mdp.n_states];
    for _ in 0..10_000 {
        let v = state_values(mdp, &Policy::deterministic(&actions, mdp.n_actions))?;
        let q = action_values(mdp, &v);
        let mut changed = false;
        for s in 0..mdp.n_states {
            let best = (0..mdp.n_actions).fold(actions[s], |b, a| if q[s][a] > q[s][b] + 1e-12 { a } else { b });
            if best != actions[s] {
                actions[s] = best;
                changed = true;
            }
        }
        if !changed {
            return Ok(actions);
        }
    }
    Err(LabError::Config("policy iteration did not settle".into()))
}

/// Reference returns for the normalized score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRefs {
    pub r_random: f64,
    pub r_expert: f64,
}

impl ScoreRefs {
    pub fn new(r_random: f64, r_expert: f64) -> Result<Self> {
        if !(r_random.is_finite() && r_expert.is_finite()) || r_random == r_expert {
            return Err(LabError::Config(format!("score references must be finite and distinct, got {r_random}, {r_expert}")));
        }
        Ok(ScoreRefs { r_random, r_expert })
    }

    /// Uniform-random policy against the optimal policy.
    pub fn for_mdp(mdp: &LinearMdpSpec) -> Result<Self> {
        let r_random = policy_return(mdp, &Policy::uniform(mdp.n_states, mdp.n_actions))?;
        let r_expert = policy_return(mdp, &Policy::deterministic(&optimal_actions(mdp)?, mdp.n_actions))?;
        ScoreRefs::new(r_random, r_expert)
    }
}

/// `100 (R − R_random) / (R_expert − R_random)`.
pub fn normalized_score(r: f64, refs: &ScoreRefs) -> f64 {
    100.0 * (r - refs.r_random) / (refs.r_expert - refs.r_random)
}
