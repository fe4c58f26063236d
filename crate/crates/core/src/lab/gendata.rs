use std::fs;
use std::path::Path;

use super::files::{write_json, CriticFile};
use crate::envlab::{baird_fixture, generate_dataset, LinearMdpSpec, ScoreRefs, DatasetSpec};
use crate::error::{LabError, Result};

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const FEATURES_FILE: &str = "features.json";
pub const MDP_FILE: &str = "mdp.json";
pub const SCORES_FILE: &str = "scores.json";
pub const CRITIC_FILE: &str = "critic.json";

/// Writes the dataset, its feature map, the MDP and the score references.
///
/// `scores.json` holds `null` when every policy earns the same return.
pub fn write_generated(out: &Path, mdp: &LinearMdpSpec, spec: &DatasetSpec) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let dataset = generate_dataset(mdp, spec)?;
    dataset.write_jsonl(out.join(DATASET_FILE))?;
    write_json(out.join(FEATURES_FILE), &mdp.features)?;
    write_json(out.join(MDP_FILE), mdp)?;
    write_json(out.join(SCORES_FILE), &ScoreRefs::for_mdp(mdp).ok())
}

/// Writes the star fixture, including its initial critic.
pub fn write_baird(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let fx = baird_fixture();
    fx.dataset.write_jsonl(out.join(DATASET_FILE))?;
    write_json(out.join(FEATURES_FILE), &fx.mdp.features)?;
    write_json(out.join(MDP_FILE), &fx.mdp)?;
    write_json(out.join(SCORES_FILE), &ScoreRefs::for_mdp(&fx.mdp).ok())?;
    CriticFile::from_critic(&fx.critic, None).save(out.join(CRITIC_FILE))
}
