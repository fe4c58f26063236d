use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, DenseMatrix};
use crate::rng;

/// Serializable description of a feature map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSpec {
    /// The state vector copied into the slot of the chosen action; `d₀ = state_dim · action_count`.
    ActionBlocks { state_dim: usize, action_count: usize, clip: Option<f64> },
    /// `φ(s, a) = W_a s / √state_dim` with Gaussian `W_a` drawn from `seed`.
    RandomProjection { state_dim: usize, action_count: usize, dim: usize, seed: u64, clip: Option<f64> },
    /// Lookup by the index of the largest state coordinate (one-hot states).
    Table { state_dim: usize, action_count: usize, table: Vec<Vec<Vec<f64>>>, clip: Option<f64> },
}

/// Deterministic `(state, action) → ℝ^{d₀}` embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "FeatureSpec", into = "FeatureSpec")]
pub struct FeatureMap {
    spec: FeatureSpec,
    projections: Vec<DenseMatrix>,
}

impl From<FeatureSpec> for FeatureMap {
    fn from(spec: FeatureSpec) -> Self {
        let projections = match &spec {
            FeatureSpec::RandomProjection { state_dim, action_count, dim, seed, .. } => {
                let mut r = rng::seeded(*seed);
                let scale = 1.0 / (*state_dim as f64).sqrt();
                (0..*action_count)
                    .map(|_| rng::normal_matrix(&mut r, *dim, *state_dim).scale(scale))
                    .collect()
            }
            _ => Vec::new(),
        };
        FeatureMap { spec, projections }
    }
}

impl From<FeatureMap> for FeatureSpec {
    fn from(map: FeatureMap) -> Self {
        map.spec
    }
}

impl FeatureMap {
    pub fn action_blocks(state_dim: usize, action_count: usize) -> Self {
        FeatureSpec::ActionBlocks { state_dim, action_count, clip: None }.into()
    }

    pub fn random_projection(state_dim: usize, action_count: usize, dim: usize, seed: u64) -> Self {
        FeatureSpec::RandomProjection { state_dim, action_count, dim, seed, clip: None }.into()
    }

    pub fn table(table: Vec<Vec<Vec<f64>>>) -> Self {
        let state_dim = table.len();
        let action_count = table.first().map_or(0, Vec::len);
        FeatureSpec::Table { state_dim, action_count, table, clip: None }.into()
    }

    /// Rescales any feature vector longer than `r` back onto the sphere of radius `r`.
    pub fn with_clip(self, r: f64) -> Self {
        let mut spec = self.spec;
        match &mut spec {
            FeatureSpec::ActionBlocks { clip, .. }
            | FeatureSpec::RandomProjection { clip, .. }
            | FeatureSpec::Table { clip, .. } => *clip = Some(r),
        }
        spec.into()
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn state_dim(&self) -> usize {
        match &self.spec {
            FeatureSpec::ActionBlocks { state_dim, .. }
            | FeatureSpec::RandomProjection { state_dim, .. }
            | FeatureSpec::Table { state_dim, .. } => *state_dim,
        }
    }

    pub fn action_count(&self) -> usize {
        match &self.spec {
            FeatureSpec::ActionBlocks { action_count, .. }
            | FeatureSpec::RandomProjection { action_count, .. }
            | FeatureSpec::Table { action_count, .. } => *action_count,
        }
    }

    pub fn clip(&self) -> Option<f64> {
        match &self.spec {
            FeatureSpec::ActionBlocks { clip, .. }
            | FeatureSpec::RandomProjection { clip, .. }
            | FeatureSpec::Table { clip, .. } => *clip,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.spec {
            FeatureSpec::ActionBlocks { state_dim, action_count, .. } => state_dim * action_count,
            FeatureSpec::RandomProjection { dim, .. } => *dim,
            FeatureSpec::Table { table, .. } => table.first().and_then(|r| r.first()).map_or(0, Vec::len),
        }
    }

    /// Panics if `s` has the wrong length or `a` is out of range; datasets are
    /// checked against the map once at load time.
    pub fn embed(&self, s: &[f64], a: usize) -> Vec<f64> {
        assert_eq!(s.len(), self.state_dim(), "state dimension mismatch");
        assert!(a < self.action_count(), "action index out of range");
        let mut phi = match &self.spec {
            FeatureSpec::ActionBlocks { state_dim, action_count, .. } => {
                let mut phi = vec![0.0; state_dim * action_count];
                phi[a * state_dim..(a + 1) * state_dim].copy_from_slice(s);
                phi
            }
            FeatureSpec::RandomProjection { .. } => self.projections[a].matvec(s),
            FeatureSpec::Table { table, .. } => {
                let idx = s
                    .iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
                    .map_or(0, |(i, _)| i);
                table[idx][a].clone()
            }
        };
        if let Some(r) = self.clip() {
            let n = norm2(&phi);
            if n > r {
                phi.iter_mut().for_each(|x| *x *= r / n);
            }
        }
        phi
    }
}
