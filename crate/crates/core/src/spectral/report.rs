use serde::{Deserialize, Serialize};

use super::conditions::{end_to_end_condition, near_ortho_condition, row_gram_condition, symmetric_part_test, FactorizationInputs};
use super::operator::{companion_radius, precond_gram, td_operator, FrozenSnapshot};
use crate::error::Result;
use crate::linalg::{eigenvalues, spectral_norm, Spectrum};

/// `|max Re λ(S)|` below this is reported as marginal.
pub const MARGINAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub symmetric_part: f64,
    pub near_ortho: f64,
    pub row_gram: f64,
    /// Only available when a factorization `Φ = ΨU` is supplied.
    pub end_to_end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub spectrum_s: Spectrum,
    pub max_re: f64,
    /// Imaginary part of the rightmost eigenvalue (nonnegative member of a conjugate pair).
    pub max_im_at_max_re: f64,
    pub rho_a: f64,
    pub hurwitz: bool,
    pub status: Stability,
    pub margins: Margins,
}

pub fn stability_report(snapshot: &FrozenSnapshot) -> Result<StabilityReport> {
    stability_report_with(snapshot, None)
}

/// Report including the end-to-end margin for a given factorization and
/// orthogonality potential `R(ω)`.
pub fn stability_report_with(
    snapshot: &FrozenSnapshot,
    factorization: Option<(&FactorizationInputs, f64)>,
) -> Result<StabilityReport> {
    let s = td_operator(snapshot);
    let spectrum_s = eigenvalues(&s)?;
    let rightmost = spectrum_s.rightmost().unwrap_or_default();
    let max_re = rightmost.re;
    let rho_a = companion_radius(&spectrum_s.values, snapshot.beta1, snapshot.eta);

    let gamma = snapshot.effective_gamma();
    let b_gram = precond_gram(&snapshot.z_x, &snapshot.d_diag, &snapshot.z_x);
    let a_cross = precond_gram(&snapshot.z_xp, &snapshot.d_diag, &snapshot.z_x);
    let phi = snapshot.phi();
    let phi_star = snapshot.phi_star();
    let end_to_end = match factorization {
        None => None,
        Some((f, r_omega)) => Some(end_to_end_condition(
            gamma,
            (spectral_norm(&phi)?, spectral_norm(&phi_star)?),
            f.delta_code,
            f.rho_code,
            snapshot.sample_count(),
            f.eps0,
            f.l_psi,
            r_omega,
        )),
    };
    let margins = Margins {
        symmetric_part: symmetric_part_test(&a_cross, &b_gram, gamma)?,
        near_ortho: near_ortho_condition(&phi, &phi_star, gamma)?,
        row_gram: row_gram_condition(&phi, &phi_star, gamma)?,
        end_to_end,
    };
    Ok(StabilityReport {
        max_im_at_max_re: rightmost.im,
        hurwitz: max_re < 0.0,
        status: classify(max_re),
        spectrum_s,
        max_re,
        rho_a,
        margins,
    })
}

pub fn classify(max_re: f64) -> Stability {
    if max_re.abs() < MARGINAL_TOL {
        Stability::Marginal
    } else if max_re < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}
