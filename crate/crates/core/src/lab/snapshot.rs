use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::network::Critic;
use crate::spectral::FrozenSnapshot;
use crate::td::{target_actions, OfflineDataset, TargetRule};

/// Settings that turn a critic and dataset into a [`FrozenSnapshot`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotSettings {
    pub rule: TargetRule,
    pub gamma: f64,
    pub coupling_alpha: f64,
    pub beta1: f64,
    pub eta: f64,
}

/// Linearizes at `params`. Next actions come from `target_params`; terminal
/// transitions get a zero `Z(X′)` column.
pub fn snapshot_at(
    critic: &Critic,
    params: &[f64],
    target_params: &[f64],
    dataset: &OfflineDataset,
    d_diag: Vec<f64>,
    settings: &SnapshotSettings,
) -> Result<FrozenSnapshot> {
    let next = target_actions(critic, target_params, dataset, settings.rule)?;
    let z_x = critic.batch_jacobian_at(params, dataset.inputs());
    let p = critic.param_count();
    let cols: Vec<Vec<f64>> = dataset
        .transitions()
        .iter()
        .zip(&next)
        .map(|(t, a)| match a {
            Some(a) => critic.jacobian_column_at(params, &t.s_next, *a),
            None => vec![0.0; p],
        })
        .collect();
    let z_xp = if cols.is_empty() { DenseMatrix::zeros(p, 0) } else { DenseMatrix::from_columns(&cols) };
    FrozenSnapshot::new(z_x, z_xp, d_diag, settings.gamma, settings.coupling_alpha, settings.beta1, settings.eta)
}
