//! Offline TD learning: target rules, TD errors with a stopped target branch,
//! semi-gradients and Polyak target networks.

mod dataset;

use serde::{Deserialize, Serialize};

pub use dataset::{DatasetHeader, OfflineDataset, Transition};

use crate::error::{LabError, Result};
use crate::network::Critic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRule {
    /// `a′ = argmax_a Q(s′, a)`, ties to the lowest index.
    QLearning,
    /// `a′` is the behavior action recorded in the dataset.
    Sarsa,
}

impl std::str::FromStr for TargetRule {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q_learning" | "q-learning" | "greedy" => Ok(TargetRule::QLearning),
            "sarsa" => Ok(TargetRule::Sarsa),
            other => Err(LabError::Config(format!("unknown target rule {other}"))),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Next actions per transition; `None` marks a terminal transition.
pub fn target_actions(
    critic: &Critic,
    params: &[f64],
    dataset: &OfflineDataset,
    rule: TargetRule,
) -> Result<Vec<Option<usize>>> {
    dataset
        .transitions()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.terminal {
                return Ok(None);
            }
            match rule {
                TargetRule::Sarsa => t.a_next.map(Some).ok_or(LabError::MissingBehaviorAction { index: i }),
                TargetRule::QLearning => {
                    let q: Vec<f64> =
                        (0..dataset.action_count()).map(|a| critic.q_value_at(params, &t.s_next, a)).collect();
                    Ok(Some(argmax_lowest(&q)))
                }
            }
        })
        .collect()
}

/// Bootstrapped targets `r + γ Q_target(s′, a′)`, with the bootstrap masked on terminals.
pub fn td_targets(
    critic: &Critic,
    target_params: &[f64],
    dataset: &OfflineDataset,
    next_actions: &[Option<usize>],
) -> Vec<f64> {
    dataset
        .transitions()
        .iter()
        .zip(next_actions)
        .map(|(t, a)| match a {
            Some(a) if dataset.gamma() != 0.0 => t.r + dataset.gamma() * critic.q_value_at(target_params, &t.s_next, *a),
            _ => t.r,
        })
        .collect()
}

/// `e_i = Q_θ(x_i) − (r_i + γ Q_θ̄(s′_i, a′_i)(1 − terminal_i))`.
///
/// Greedy next actions are chosen under the target parameters.
pub fn td_error(critic: &Critic, target_params: &[f64], dataset: &OfflineDataset, rule: TargetRule) -> Result<Vec<f64>> {
    let next = target_actions(critic, target_params, dataset, rule)?;
    let targets = td_targets(critic, target_params, dataset, &next);
    Ok(dataset
        .transitions()
        .iter()
        .zip(targets)
        .map(|(t, y)| critic.q_value(&t.s, t.a) - y)
        .collect())
}

/// `½‖e‖²`.
pub fn td_loss(e: &[f64]) -> f64 {
    0.5 * e.iter().map(|x| x * x).sum::<f64>()
}

/// `g = Z(X)·e`; the target branch contributes nothing.
pub fn semi_gradient(critic: &Critic, dataset: &OfflineDataset, e: &[f64]) -> Vec<f64> {
    assert_eq!(e.len(), dataset.len(), "TD error length mismatch");
    let mut g = vec![0.0; critic.param_count()];
    for ((s, a), &ei) in dataset.inputs().zip(e) {
        if ei == 0.0 {
            continue;
        }
        let col = critic.jacobian_column(s, a);
        g.iter_mut().zip(&col).for_each(|(gi, ci)| *gi += ei * ci);
    }
    g
}

/// Smallest gap between the best and second-best next-state action values
/// over non-terminal transitions; `None` with a single action or only terminals.
pub fn min_action_gap(critic: &Critic, params: &[f64], dataset: &OfflineDataset) -> Option<f64> {
    if dataset.action_count() < 2 {
        return None;
    }
    dataset
        .transitions()
        .iter()
        .filter(|t| !t.terminal)
        .map(|t| {
            let mut q: Vec<f64> = (0..dataset.action_count()).map(|a| critic.q_value_at(params, &t.s_next, a)).collect();
            q.sort_by(|a, b| b.total_cmp(a));
            q[0] - q[1]
        })
        .reduce(f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetNetwork {
    params: Vec<f64>,
    polyak_alpha: f64,
}

impl TargetNetwork {
    /// `α ∈ (0, 1]`; `α = 1` means the target always equals the online critic.
    pub fn new(params: Vec<f64>, polyak_alpha: f64) -> Result<Self> {
        if !(polyak_alpha > 0.0 && polyak_alpha <= 1.0) {
            return Err(LabError::Config(format!("polyak alpha must lie in (0, 1], got {polyak_alpha}")));
        }
        Ok(TargetNetwork { params, polyak_alpha })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn polyak_alpha(&self) -> f64 {
        self.polyak_alpha
    }
}

/// `θ̄ ← (1 − α)θ̄ + αθ`.
pub fn polyak_update(target: &mut TargetNetwork, theta: &[f64]) {
    assert_eq!(target.params.len(), theta.len(), "target layout mismatch");
    let a = target.polyak_alpha;
    if a == 1.0 {
        target.params.copy_from_slice(theta);
        return;
    }
    for (tb, &t) in target.params.iter_mut().zip(theta) {
        *tb = (1.0 - a) * *tb + a * t;
    }
}
