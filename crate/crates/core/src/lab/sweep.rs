use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{eigenvalues, DenseMatrix};
use crate::spectral::{companion_radius, stability_report, FrozenSnapshot};

pub const SWEEP_COLUMNS: [&str; 11] = [
    "eta",
    "gamma",
    "alpha",
    "beta1",
    "max_re",
    "max_im",
    "rho_a",
    "symmetric_part",
    "near_ortho",
    "row_gram",
    "crossing",
];

/// Half-width of the band around `ρ = 1` that never triggers a crossing, so
/// roundoff on a zero mode of `S` does not flip the flag.
pub const CROSSING_BAND: f64 = 1e-9;

/// Parses `"a,b,c"` or `"lo:hi:n"`; ranges are geometric when `0 < lo`, linear otherwise.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || LabError::Config(format!("cannot parse grid {text:?}"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![lo],
            _ if lo > 0.0 && hi > 0.0 => {
                let (a, b) = (lo.ln(), hi.ln());
                (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
            }
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        }
    } else {
        text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta1: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub max_re: f64,
    pub max_im: f64,
    pub rho_a: f64,
    pub symmetric_part: f64,
    pub near_ortho: f64,
    pub row_gram: f64,
    /// `ρ(A(η))` moved across 1 since the last `η` of this series that was clear of the band.
    pub crossing: bool,
}

/// Where the TD operator comes from.
pub enum SweepSource<'a> {
    /// `S` is rebuilt for every `(γ, α)` and all margins are reported.
    Snapshot(&'a FrozenSnapshot),
    /// A fixed `S`; `γ`, `α` and the margins are not defined and reported as NaN.
    Operator(&'a DenseMatrix),
}

struct Cell {
    gamma: f64,
    alpha: f64,
    max_re: f64,
    max_im: f64,
    lambdas: Vec<crate::linalg::ComplexValue>,
    margins: [f64; 3],
}

pub fn sweep(source: SweepSource<'_>, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    let mut etas = grid.eta.clone();
    etas.sort_by(f64::total_cmp);
    if etas.iter().any(|&e| !(e > 0.0)) || grid.beta1.iter().any(|b| !(0.0..1.0).contains(b)) {
        return Err(LabError::Config("sweep needs eta > 0 and beta1 in [0, 1)".into()));
    }
    let cells: Vec<Cell> = match source {
        SweepSource::Operator(s) => {
            if !s.is_square() {
                return Err(LabError::Dimension("operator must be square".into()));
            }
            let spec = eigenvalues(s)?;
            let top = spec.rightmost().unwrap_or_default();
            vec![Cell { gamma: f64::NAN, alpha: f64::NAN, max_re: top.re, max_im: top.im, lambdas: spec.values, margins: [f64::NAN; 3] }]
        }
        SweepSource::Snapshot(base) => {
            let pairs: Vec<(f64, f64)> =
                grid.gamma.iter().flat_map(|&g| grid.alpha.iter().map(move |&a| (g, a))).collect();
            pairs
                .par_iter()
                .map(|&(gamma, alpha)| {
                    let snap = FrozenSnapshot::new(
                        base.z_x.clone(),
                        base.z_xp.clone(),
                        base.d_diag.clone(),
                        gamma,
                        alpha,
                        base.beta1,
                        base.eta,
                    )?;
                    let r = stability_report(&snap)?;
                    Ok(Cell {
                        gamma,
                        alpha,
                        max_re: r.max_re,
                        max_im: r.max_im_at_max_re,
                        lambdas: r.spectrum_s.values,
                        margins: [r.margins.symmetric_part, r.margins.near_ortho, r.margins.row_gram],
                    })
                })
                .collect::<Result<_>>()?
        }
    };

    let mut rows = Vec::with_capacity(cells.len() * grid.beta1.len() * etas.len());
    for cell in &cells {
        for &beta1 in &grid.beta1 {
            let mut prev: Option<bool> = None;
            for &eta in &etas {
                let rho_a = companion_radius(&cell.lambdas, beta1, eta);
                // radii within CROSSING_BAND of 1 count as neither side
                let side = if rho_a < 1.0 - CROSSING_BAND {
                    Some(true)
                } else if rho_a > 1.0 + CROSSING_BAND {
                    Some(false)
                } else {
                    None
                };
                rows.push(SweepRow {
                    eta,
                    gamma: cell.gamma,
                    alpha: cell.alpha,
                    beta1,
                    max_re: cell.max_re,
                    max_im: cell.max_im,
                    rho_a,
                    symmetric_part: cell.margins[0],
                    near_ortho: cell.margins[1],
                    row_gram: cell.margins[2],
                    crossing: matches!((prev, side), (Some(p), Some(q)) if p != q),
                });
                prev = side.or(prev);
            }
        }
    }
    Ok(rows)
}

pub fn sweep_to_writer(w: impl Write, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        out.write_record([
            r.eta.to_string(),
            r.gamma.to_string(),
            r.alpha.to_string(),
            r.beta1.to_string(),
            r.max_re.to_string(),
            r.max_im.to_string(),
            r.rho_a.to_string(),
            r.symmetric_part.to_string(),
            r.near_ortho.to_string(),
            r.row_gram.to_string(),
            r.crossing.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sweep(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    sweep_to_writer(BufWriter::new(file), rows)
}
