use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::network::FeatureMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<f64>,
    /// Action the behavior policy took at `s_next`.
    pub a_next: Option<usize>,
    pub terminal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub action_count: usize,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineDataset {
    transitions: Vec<Transition>,
    action_count: usize,
    gamma: f64,
}

impl OfflineDataset {
    /// Requires at least one transition, `γ ∈ (0, 1)`, in-range actions and finite rewards.
    pub fn new(transitions: Vec<Transition>, action_count: usize, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(LabError::Config(format!("dataset discount must lie in (0, 1), got {gamma}")));
        }
        let ds = OfflineDataset { transitions, action_count, gamma };
        ds.check()?;
        Ok(ds)
    }

    fn check(&self) -> Result<()> {
        if self.transitions.is_empty() {
            return Err(LabError::Config("dataset has no transitions".into()));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.a >= self.action_count || t.a_next.is_some_and(|a| a >= self.action_count) {
                return Err(LabError::Config(format!("transition {i}: action index out of range")));
            }
            if !t.r.is_finite() || t.s.iter().chain(&t.s_next).any(|x| !x.is_finite()) {
                return Err(LabError::Config(format!("transition {i}: non-finite value")));
            }
        }
        Ok(())
    }

    /// Same transitions under another discount. `γ = 0` is allowed here as the
    /// supervised limit used by diagnostics.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(LabError::Config(format!("discount must lie in [0, 1), got {gamma}")));
        }
        Ok(OfflineDataset { gamma, ..self.clone() })
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn header(&self) -> DatasetHeader {
        DatasetHeader { action_count: self.action_count, gamma: self.gamma }
    }

    /// Subset keeping the given transition indices, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let transitions = indices.iter().map(|&i| self.transitions[i].clone()).collect();
        let ds = OfflineDataset { transitions, ..self.clone() };
        ds.check()?;
        Ok(ds)
    }

    /// The inputs `X = {(s_i, a_i)}`.
    pub fn inputs(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.transitions.iter().map(|t| (t.s.as_slice(), t.a))
    }

    pub fn check_features(&self, features: &FeatureMap) -> Result<()> {
        if features.action_count() != self.action_count {
            return Err(LabError::Dimension(format!(
                "feature map has {} actions, dataset {}",
                features.action_count(),
                self.action_count
            )));
        }
        let d = features.state_dim();
        if let Some(i) = self.transitions.iter().position(|t| t.s.len() != d || t.s_next.len() != d) {
            return Err(LabError::Dimension(format!("transition {i}: state length differs from feature input {d}")));
        }
        Ok(())
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| LabError::io(path, e))?;
        Self::from_reader(BufReader::new(file), path)
    }

    pub fn from_reader(reader: impl Read, origin: &Path) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        let parse_err = |line: usize, source| LabError::Parse { path: origin.to_path_buf(), line, source };
        let header: DatasetHeader = loop {
            match lines.next() {
                None => return Err(LabError::Config(format!("{}: empty dataset file", origin.display()))),
                Some((i, line)) => {
                    let line = line.map_err(|e| LabError::io(origin, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e))?;
                }
            }
        };
        let mut transitions = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| LabError::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            transitions.push(serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e))?);
        }
        OfflineDataset::new(transitions, header.action_count, header.gamma)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| LabError::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.to_writer(&mut w).map_err(|e| LabError::io(path, e))?;
        w.flush().map_err(|e| LabError::io(path, e))
    }

    pub fn to_writer(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", serde_json::to_string(&self.header())?)?;
        for t in &self.transitions {
            writeln!(w, "{}", serde_json::to_string(t)?)?;
        }
        Ok(())
    }
}
