use serde::{Deserialize, Serialize};

use super::adam::{adam_direction, AdamConfig, AdamState};
use super::orth::{budgeted_scale, orth_gradient, orth_potential, reference_step};
use crate::error::{LabError, Result};
use crate::linalg::DenseMatrix;
use crate::network::{Block, ParamLayout};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthConfig {
    pub kappa_orth: f64,
    pub tau: f64,
    pub eps_r: f64,
    /// `None` selects every matrix-shaped block of the layout.
    pub constrained_blocks: Option<Vec<String>>,
}

impl Default for OrthConfig {
    fn default() -> Self {
        OrthConfig::budgeted()
    }
}

impl OrthConfig {
    /// κ = 1, τ = 0.05.
    pub fn budgeted() -> Self {
        OrthConfig { kappa_orth: 1.0, tau: 0.05, eps_r: 1e-8, constrained_blocks: None }
    }

    /// κ = 1e-4, τ = 0.
    pub fn conflict_free() -> Self {
        OrthConfig { kappa_orth: 1e-4, tau: 0.0, eps_r: 1e-8, constrained_blocks: None }
    }

    pub fn disabled() -> Self {
        OrthConfig { kappa_orth: 0.0, ..OrthConfig::conflict_free() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_orth >= 0.0 && self.kappa_orth.is_finite()) {
            return Err(LabError::Config(format!("kappa must be nonnegative, got {}", self.kappa_orth)));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(LabError::Config(format!("tau must lie in [0, 1), got {}", self.tau)));
        }
        if self.eps_r <= 0.0 {
            return Err(LabError::Config("eps_r must be positive".into()));
        }
        Ok(())
    }

    /// Blocks receiving the correction. Unknown or vector-shaped ids are an error.
    pub fn blocks<'a>(&self, layout: &'a ParamLayout) -> Result<Vec<&'a Block>> {
        match &self.constrained_blocks {
            None => Ok(layout.matrix_blocks().collect()),
            Some(ids) => ids
                .iter()
                .map(|id| match layout.block(id) {
                    Some(b) if b.matrix => Ok(b),
                    Some(_) => Err(LabError::Config(format!("block {id} is not matrix-shaped"))),
                    None => Err(LabError::Config(format!("unknown block {id}"))),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub id: String,
    pub r: DenseMatrix,
    pub delta0: DenseMatrix,
    pub delta: DenseMatrix,
    pub scale: f64,
    pub budget: f64,
    pub g_dot_u: f64,
    pub g_dot_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub u: Vec<f64>,
    pub blocks: Vec<BlockReport>,
    pub r_total: f64,
}

impl StepReport {
    /// Assembled correction `Δ` (zero outside constrained blocks).
    pub fn assembled_delta(&self, layout: &ParamLayout) -> Vec<f64> {
        let mut delta = vec![0.0; self.u.len()];
        for br in &self.blocks {
            let b = layout.block(&br.id).expect("report block belongs to layout");
            delta[b.range()].copy_from_slice(br.delta.as_slice());
        }
        delta
    }

    pub fn min_scale(&self) -> f64 {
        self.blocks.iter().map(|b| b.scale).fold(1.0, f64::min)
    }
}

fn block_matrix(v: &[f64], b: &Block) -> DenseMatrix {
    DenseMatrix::from_fn(b.rows, b.cols, |i, j| v[b.offset + i * b.cols + j])
}

/// One AdamO step: `ω − η(u + Δ)`, where Adam only ever sees the task gradient.
///
/// With `kappa_orth = 0` the correction path is never entered and the result is
/// bit-for-bit the plain Adam update.
pub fn adamo_step(
    params: &[f64],
    g: &[f64],
    state: &mut AdamState,
    adam_cfg: &AdamConfig,
    orth_cfg: &OrthConfig,
    layout: &ParamLayout,
) -> Result<(Vec<f64>, StepReport)> {
    if params.len() != layout.total() || g.len() != layout.total() || state.m.len() != layout.total() {
        return Err(LabError::Config(format!(
            "layout has {} coordinates but params/grad/state have {}/{}/{}",
            layout.total(),
            params.len(),
            g.len(),
            state.m.len()
        )));
    }
    let blocks = orth_cfg.blocks(layout)?;
    let u = adam_direction(state, g, adam_cfg);
    if orth_cfg.kappa_orth == 0.0 {
        let next = params.iter().zip(&u).map(|(p, ui)| p - adam_cfg.eta * ui).collect();
        return Ok((next, StepReport { u, blocks: Vec::new(), r_total: 0.0 }));
    }

    let mut reports = Vec::with_capacity(blocks.len());
    let mut r_total = 0.0;
    for b in blocks {
        let w = block_matrix(params, b);
        let g_b = block_matrix(g, b);
        let u_b = block_matrix(&u, b);
        r_total += orth_potential(&w);
        let r = orth_gradient(&w);
        let delta0 = reference_step(&u_b, &r, orth_cfg.kappa_orth, orth_cfg.eps_r);
        let step = budgeted_scale(&g_b, &u_b, &delta0, orth_cfg.tau);
        reports.push(BlockReport {
            id: b.id.clone(),
            g_dot_u: g_b.frobenius_inner(&u_b),
            g_dot_delta: g_b.frobenius_inner(&step.delta),
            r,
            delta0,
            delta: step.delta,
            scale: step.scale,
            budget: step.budget,
        });
    }
    let report = StepReport { u, blocks: reports, r_total };
    let delta = report.assembled_delta(layout);
    let next = params
        .iter()
        .zip(report.u.iter().zip(&delta))
        .map(|(p, (ui, di))| p - adam_cfg.eta * (ui + di))
        .collect();
    Ok((next, report))
}

/// Sum of orthogonality potentials over the constrained blocks.
pub fn total_orth_potential(params: &[f64], layout: &ParamLayout, orth_cfg: &OrthConfig) -> Result<f64> {
    Ok(orth_cfg.blocks(layout)?.into_iter().fold(0.0, |acc, b| acc + orth_potential(&block_matrix(params, b))))
}
