use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::snapshot::{snapshot_at, SnapshotSettings};
use crate::error::{LabError, Result};
use crate::linalg::norm2;
use crate::network::Critic;
use crate::optim::{adam_step, adamo_step, total_orth_potential, AdamConfig, AdamState, OrthConfig};
use crate::spectral::stability_report;
use crate::td::{polyak_update, semi_gradient, td_error, td_loss, OfflineDataset, TargetNetwork, TargetRule};

/// TD loss above which a run stops and is recorded as diverged.
pub const DIVERGENCE_CAP: f64 = 1e12;

pub const TRACE_HEADER: &str = "# collapse-lab trace v1";
pub const TRACE_COLUMNS: [&str; 10] =
    ["step", "td_loss", "grad_norm", "r_omega", "max_re", "max_im", "rho_a", "hurwitz", "s_min", "status"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Adamo,
    /// Momentum with a diagonal preconditioner fixed at `1/(|g₀| + ε)` and no
    /// bias correction, so the TD errors of a linear critic follow the frozen
    /// recurrence exactly.
    Frozen,
}

impl FromStr for OptimizerKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(OptimizerKind::Adam),
            "adamo" => Ok(OptimizerKind::Adamo),
            "frozen" => Ok(OptimizerKind::Frozen),
            other => Err(LabError::Config(format!("unknown optimizer {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub adam: AdamConfig,
    pub orth: OrthConfig,
    pub rule: TargetRule,
    pub polyak_alpha: f64,
    pub steps: usize,
    pub monitor_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adamo,
            adam: AdamConfig::default(),
            orth: OrthConfig::budgeted(),
            rule: TargetRule::QLearning,
            polyak_alpha: 1.0,
            steps: 1000,
            monitor_every: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.adam.validate()?;
        self.orth.validate()?;
        if self.steps == 0 || self.monitor_every == 0 {
            return Err(LabError::Config("steps and monitor interval must be at least 1".into()));
        }
        if !(self.polyak_alpha > 0.0 && self.polyak_alpha <= 1.0) {
            return Err(LabError::Config(format!("polyak alpha must lie in (0, 1], got {}", self.polyak_alpha)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Diverged,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged => "diverged",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub td_loss: f64,
    pub grad_norm: f64,
    pub r_omega: f64,
    pub max_re: f64,
    pub max_im: f64,
    pub rho_a: f64,
    pub hurwitz: bool,
    pub s_min: f64,
    pub status: RunStatus,
}

impl TraceRow {
    fn record(&self) -> [String; 10] {
        [
            self.step.to_string(),
            self.td_loss.to_string(),
            self.grad_norm.to_string(),
            self.r_omega.to_string(),
            self.max_re.to_string(),
            self.max_im.to_string(),
            self.rho_a.to_string(),
            self.hurwitz.to_string(),
            self.s_min.to_string(),
            self.status.to_string(),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
    pub critic: Critic,
    /// Adam moments for `adam`/`adamo`; `None` for the frozen optimizer.
    pub optimizer_state: Option<AdamState>,
    /// TD loss before every update, plus the final one.
    pub loss_history: Vec<f64>,
}

enum OptState {
    Adam(AdamState),
    Frozen { d: Option<Vec<f64>>, m: Vec<f64> },
}

/// Offline TD training with periodic spectral monitoring.
pub fn train(mut critic: Critic, dataset: &OfflineDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    dataset.check_features(critic.features())?;
    let layout = critic.layout().clone();
    // reject bad block ids before the first step
    cfg.orth.blocks(&layout)?;
    let p = critic.param_count();
    let mut opt = match cfg.optimizer {
        OptimizerKind::Frozen => OptState::Frozen { d: None, m: vec![0.0; p] },
        _ => OptState::Adam(AdamState::new(p)),
    };
    let settings = SnapshotSettings {
        rule: cfg.rule,
        gamma: dataset.gamma(),
        coupling_alpha: cfg.polyak_alpha,
        beta1: cfg.adam.beta1,
        eta: cfg.adam.eta,
    };
    let mut target = TargetNetwork::new(critic.params().to_vec(), cfg.polyak_alpha)?;
    let mut rows = Vec::new();
    let mut history = Vec::with_capacity(cfg.steps + 1);
    let mut s_min = 1.0;
    let mut status = RunStatus::Ok;

    for step in 0..=cfg.steps {
        let e = td_error(&critic, target.params(), dataset, cfg.rule)?;
        let loss = td_loss(&e);
        history.push(loss);
        let diverged = !(loss <= DIVERGENCE_CAP);
        let g = semi_gradient(&critic, dataset, &e);
        if let OptState::Frozen { d: d @ None, .. } = &mut opt {
            *d = Some(g.iter().map(|x| 1.0 / (x.abs() + cfg.adam.eps)).collect());
        }

        if diverged || step % cfg.monitor_every == 0 || step == cfg.steps {
            let r_omega = total_orth_potential(critic.params(), &layout, &cfg.orth)?;
            let mut row = TraceRow {
                step,
                td_loss: loss,
                grad_norm: norm2(&g),
                r_omega,
                max_re: f64::NAN,
                max_im: f64::NAN,
                rho_a: f64::NAN,
                hurwitz: false,
                s_min,
                status: if diverged { RunStatus::Diverged } else { RunStatus::Ok },
            };
            if !diverged {
                let d_diag = match &opt {
                    OptState::Adam(state) => state.preconditioner(&cfg.adam),
                    OptState::Frozen { d, .. } => d.clone().expect("set from the first gradient"),
                };
                let snap = snapshot_at(&critic, critic.params(), target.params(), dataset, d_diag, &settings)?;
                let report = stability_report(&snap)?;
                row.max_re = report.max_re;
                row.max_im = report.max_im_at_max_re;
                row.rho_a = report.rho_a;
                row.hurwitz = report.hurwitz;
            }
            rows.push(row);
        }
        if diverged {
            status = RunStatus::Diverged;
            break;
        }
        if step == cfg.steps {
            break;
        }

        let next = match (&mut opt, cfg.optimizer) {
            (OptState::Adam(state), OptimizerKind::Adam) => adam_step(critic.params(), &g, state, &cfg.adam),
            (OptState::Adam(state), _) => {
                let (next, report) = adamo_step(critic.params(), &g, state, &cfg.adam, &cfg.orth, &layout)?;
                s_min = report.min_scale();
                next
            }
            (OptState::Frozen { d, m }, _) => {
                let d = d.as_ref().expect("set from the first gradient");
                let b1 = cfg.adam.beta1;
                for (mi, gi) in m.iter_mut().zip(&g) {
                    *mi = b1 * *mi + (1.0 - b1) * gi;
                }
                critic.params().iter().zip(d).zip(m.iter()).map(|((p, d), m)| p - cfg.adam.eta * d * m).collect()
            }
        };
        critic.set_params(&next);
        polyak_update(&mut target, &next);
    }

    Ok(TrainOutcome {
        rows,
        status,
        critic,
        optimizer_state: match opt {
            OptState::Adam(state) => Some(state),
            OptState::Frozen { .. } => None,
        },
        loss_history: history,
    })
}

pub fn trace_to_writer(w: impl Write, rows: &[TraceRow]) -> Result<()> {
    let mut w = w;
    writeln!(w, "{TRACE_HEADER}").map_err(csv::Error::from)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_COLUMNS)?;
    for row in rows {
        out.write_record(row.record())?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    trace_to_writer(BufWriter::new(file), rows)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| LabError::Config(format!("{}: bad number {:?}", path.display(), &rec[i])))
        };
        rows.push(TraceRow {
            step: f(0)? as usize,
            td_loss: f(1)?,
            grad_norm: f(2)?,
            r_omega: f(3)?,
            max_re: f(4)?,
            max_im: f(5)?,
            rho_a: f(6)?,
            hurwitz: &rec[7] == "true",
            s_min: f(8)?,
            status: if &rec[9] == "diverged" { RunStatus::Diverged } else { RunStatus::Ok },
        });
    }
    Ok(rows)
}
