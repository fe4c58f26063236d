use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::network::{Architecture, Critic, FeatureMap, FeatureSpec};
use crate::optim::AdamState;

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| LabError::Parse { path: path.to_path_buf(), line: 0, source })
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| LabError::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticSpec {
    pub features: FeatureSpec,
    pub arch: Architecture,
}

/// On-disk critic: architecture, parameters by block, and optionally the Adam
/// moments whose `v` defines the preconditioner of spectral reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticFile {
    pub spec: CriticSpec,
    pub params: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_state: Option<AdamState>,
}

impl CriticFile {
    pub fn from_critic(critic: &Critic, optimizer_state: Option<AdamState>) -> Self {
        CriticFile {
            spec: CriticSpec { features: critic.features().spec().clone(), arch: critic.architecture().clone() },
            params: critic.params_by_block(),
            optimizer_state,
        }
    }

    pub fn to_critic(&self) -> Result<Critic> {
        let features: FeatureMap = self.spec.features.clone().into();
        let flat = Critic::layout_for(&features, &self.spec.arch).flatten(&self.params)?;
        Critic::from_parts(features, self.spec.arch.clone(), flat)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}
