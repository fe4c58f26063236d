use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::files::{read_json, CriticFile};
use super::gendata::FEATURES_FILE;
use super::snapshot::{snapshot_at, SnapshotSettings};
use super::train::{OptimizerKind, TrainConfig};
use crate::error::{LabError, Result};
use crate::linalg::DenseMatrix;
use crate::network::{Critic, FeatureMap, FeatureSpec};
use crate::optim::{AdamConfig, AdamState, OrthConfig};
use crate::spectral::FrozenSnapshot;
use crate::td::{OfflineDataset, TargetRule};

/// Experiment settings as read from a JSON config file or command-line flags.
///
/// Every field is optional; [`merged`](Self::merged) layers flags over a file,
/// and unset fields fall back to the documented defaults when resolved.
///
/// | field | default |
/// |---|---|
/// | `dataset` | required |
/// | `features` | `features.json` beside the dataset, else action blocks |
/// | `critic` | `"linear"`; also `"mlp:64,64"` or a critic JSON path |
/// | `optimizer` | `"adamo"` |
/// | `kappa`, `tau` | 1, 0.05 |
/// | `eta`, `beta1`, `beta2`, `eps` | 1e-4, 0.9, 0.999, 1e-4 |
/// | `gamma` | the dataset's |
/// | `alpha` | 1 (target copies the online critic every step) |
/// | `rule` | `"q_learning"` |
/// | `steps`, `monitor_every` | 1000, 100 |
/// | `seed` | 0 (MLP initialization) |
/// | `out` | `out` |
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub critic: Option<String>,
    pub optimizer: Option<OptimizerKind>,
    pub kappa: Option<f64>,
    pub tau: Option<f64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub eps: Option<f64>,
    pub rule: Option<TargetRule>,
    pub steps: Option<usize>,
    pub monitor_every: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        ExperimentConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

/// A fully resolved training run.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub dataset: OfflineDataset,
    pub critic: Critic,
    pub train: TrainConfig,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path)
    }

    /// Fields set in `top` win.
    pub fn merged(self, top: ExperimentConfig) -> Self {
        let base = self;
        overlay!(
            base, top, dataset, features, critic, optimizer, kappa, tau, eta, gamma, alpha, beta1, beta2, eps, rule,
            steps, monitor_every, seed, out
        )
    }

    pub fn adam(&self) -> AdamConfig {
        let d = AdamConfig::default();
        AdamConfig {
            eta: self.eta.unwrap_or(d.eta),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            eps: self.eps.unwrap_or(d.eps),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        let preset = OrthConfig::budgeted();
        TrainConfig {
            optimizer: self.optimizer.unwrap_or(d.optimizer),
            adam: self.adam(),
            orth: OrthConfig {
                kappa_orth: self.kappa.unwrap_or(preset.kappa_orth),
                tau: self.tau.unwrap_or(preset.tau),
                ..preset
            },
            rule: self.rule.unwrap_or(d.rule),
            polyak_alpha: self.alpha.unwrap_or(d.polyak_alpha),
            steps: self.steps.unwrap_or(d.steps),
            monitor_every: self.monitor_every.unwrap_or(d.monitor_every),
        }
    }

    /// The dataset, with `gamma` applied when set.
    pub fn load_dataset(&self) -> Result<OfflineDataset> {
        let path = self.dataset.as_ref().ok_or_else(|| LabError::Config("a dataset path is required".into()))?;
        let ds = OfflineDataset::read_jsonl(path)?;
        match self.gamma {
            Some(g) => ds.with_gamma(g),
            None => Ok(ds),
        }
    }

    /// Critic from a file, or a fresh one over the resolved feature map.
    pub fn load_critic(&self, dataset: &OfflineDataset) -> Result<(Critic, Option<AdamState>)> {
        let choice = self.critic.as_deref().unwrap_or("linear");
        if let Some(arch) = parse_arch(choice)? {
            let features = self.resolve_features(dataset)?;
            let critic = match arch {
                None => Critic::linear(features),
                Some(hidden) => Critic::mlp(features, &hidden, self.seed.unwrap_or(0))?,
            };
            return Ok((critic, None));
        }
        let file = CriticFile::load(choice)?;
        Ok((file.to_critic()?, file.optimizer_state))
    }

    fn resolve_features(&self, dataset: &OfflineDataset) -> Result<FeatureMap> {
        if let Some(path) = &self.features {
            return Ok(read_json::<FeatureSpec>(path)?.into());
        }
        if let Some(beside) = self.dataset.as_ref().and_then(|p| p.parent()).map(|d| d.join(FEATURES_FILE)) {
            if beside.is_file() {
                return Ok(read_json::<FeatureSpec>(beside)?.into());
            }
        }
        let state_dim = dataset.transitions().first().map_or(0, |t| t.s.len());
        Ok(FeatureMap::action_blocks(state_dim, dataset.action_count()))
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let dataset = self.load_dataset()?;
        let (critic, _) = self.load_critic(&dataset)?;
        let train = self.train_config();
        train.validate()?;
        Ok(Experiment { dataset, critic, train, out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")) })
    }

    /// One-shot snapshot for `spectrum` and `sweep`. `D` comes from the critic's
    /// saved Adam moments, or is the identity without them.
    pub fn snapshot(&self) -> Result<FrozenSnapshot> {
        let dataset = self.load_dataset()?;
        let (critic, state) = self.load_critic(&dataset)?;
        dataset.check_features(critic.features())?;
        let adam = self.adam();
        let d_diag = match state {
            Some(s) if s.v.len() == critic.param_count() => s.preconditioner(&adam),
            Some(_) => return Err(LabError::Dimension("optimizer state does not match the critic".into())),
            None => vec![1.0; critic.param_count()],
        };
        let settings = SnapshotSettings {
            rule: self.rule.unwrap_or(TargetRule::QLearning),
            gamma: dataset.gamma(),
            coupling_alpha: self.alpha.unwrap_or(1.0),
            beta1: adam.beta1,
            eta: adam.eta,
        };
        snapshot_at(&critic, critic.params(), critic.params(), &dataset, d_diag, &settings)
    }
}

/// `Some(None)` for linear, `Some(Some(widths))` for `mlp:…`, `None` for a file path.
fn parse_arch(choice: &str) -> Result<Option<Option<Vec<usize>>>> {
    if choice == "linear" {
        return Ok(Some(None));
    }
    if let Some(widths) = choice.strip_prefix("mlp:") {
        let hidden = widths
            .split(',')
            .map(|w| w.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| LabError::Config(format!("cannot parse hidden widths in {choice:?}")))?;
        return Ok(Some(Some(hidden)));
    }
    Ok(None)
}

/// A TD operator given either as `{"rows", "cols", "entries"}` or as nested rows.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum OperatorFile {
    Dense(DenseMatrix),
    Rows(Vec<Vec<f64>>),
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    match read_json::<OperatorFile>(path)? {
        OperatorFile::Dense(m) => Ok(m),
        OperatorFile::Rows(rows) => DenseMatrix::from_rows(&rows),
    }
}
