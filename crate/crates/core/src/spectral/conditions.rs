use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{frobenius_norm, lambda_min, polar_factor, spectral_norm, symmetric_norm, DenseMatrix};
use crate::optim::orth_potential;

/// `λ_min(B − γ(A + Aᵀ)/2)`; positive implies `γA − B` is Hurwitz.
pub fn symmetric_part_test(a_cross: &DenseMatrix, b_gram: &DenseMatrix, gamma: f64) -> Result<f64> {
    lambda_min(&b_gram.sub(&a_cross.symmetric_part().scale(gamma)))
}

fn check_same_shape(phi: &DenseMatrix, phi_star: &DenseMatrix) -> Result<()> {
    if phi.rows() != phi_star.rows() || phi.cols() != phi_star.cols() {
        return Err(LabError::Dimension("Φ and Φ* must have the same shape".into()));
    }
    Ok(())
}

/// `1 − γ‖Φ‖₂‖Φ_*‖₂ − ‖ΦᵀΦ − I‖₂`.
pub fn near_ortho_condition(phi: &DenseMatrix, phi_star: &DenseMatrix, gamma: f64) -> Result<f64> {
    check_same_shape(phi, phi_star)?;
    let m = phi.cols();
    let deviation = symmetric_norm(&phi.t_matmul(phi).sub(&DenseMatrix::identity(m)))?;
    Ok(1.0 - gamma * spectral_norm(phi)? * spectral_norm(phi_star)? - deviation)
}

/// `1 − γ‖Φ‖₂‖Φ_*‖₂ − ‖ΦΦᵀ − I_P‖₂`.
pub fn row_gram_condition(phi: &DenseMatrix, phi_star: &DenseMatrix, gamma: f64) -> Result<f64> {
    check_same_shape(phi, phi_star)?;
    let p = phi.rows();
    let deviation = symmetric_norm(&phi.matmul(&phi.transpose()).sub(&DenseMatrix::identity(p)))?;
    Ok(1.0 - gamma * spectral_norm(phi)? * spectral_norm(phi_star)? - deviation)
}

/// `(√M·G, γMG²)`: the bound on `‖Φ‖₂` from per-sample gradient norms `≤ G`,
/// and the matching bound on `γ‖Φ‖₂‖Φ_*‖₂`.
pub fn scale_bound(m: usize, g: f64, gamma: f64) -> (f64, f64) {
    let m = m as f64;
    (m.sqrt() * g, gamma * m * g * g)
}

/// `Δ_U = δ + (M − 1)ρ`.
pub fn code_defect(delta_code: f64, rho_code: f64, m: usize) -> f64 {
    delta_code + m.saturating_sub(1) as f64 * rho_code
}

/// `(1 + Δ_U)ε + Δ_U`, a bound on `‖ΦᵀΦ − I‖₂` for `Φ = ΨU`.
pub fn gram_factor_bound(eps_iso: f64, delta_code: f64, rho_code: f64, m: usize) -> f64 {
    let du = code_defect(delta_code, rho_code, m);
    (1.0 + du) * eps_iso + du
}

/// `(‖W − polar(W)‖²_F, 4·R(W))`; the first never exceeds the second.
pub fn polar_defect_check(w: &DenseMatrix) -> Result<(f64, f64)> {
    let q = polar_factor(w)?;
    let d = frobenius_norm(&w.sub(&q));
    Ok((d * d, 4.0 * orth_potential(w)))
}

/// `ε₀ + c₁√R + c₂R` with `c₁ = 4L_Ψ√(1+ε₀)` and `c₂ = 4L_Ψ²`.
pub fn epsilon_bound(r_omega: f64, eps0: f64, l_psi: f64) -> f64 {
    let c1 = 4.0 * l_psi * (1.0 + eps0).sqrt();
    let c2 = 4.0 * l_psi * l_psi;
    eps0 + c1 * r_omega.sqrt() + c2 * r_omega
}

/// `1 − γ‖Φ‖‖Φ_*‖ − Δ_U − (1 + Δ_U)[ε₀ + c₁√R + c₂R]`.
///
/// Positive implies Hurwitz; nonpositive is inconclusive.
#[allow(clippy::too_many_arguments)]
pub fn end_to_end_condition(
    gamma: f64,
    phi_norms: (f64, f64),
    delta_code: f64,
    rho_code: f64,
    m: usize,
    eps0: f64,
    l_psi: f64,
    r_omega: f64,
) -> f64 {
    let du = code_defect(delta_code, rho_code, m);
    1.0 - gamma * phi_norms.0 * phi_norms.1 - du - (1.0 + du) * epsilon_bound(r_omega, eps0, l_psi)
}

/// Dictionary/code split `Φ = ΨU` with the constants of the Ψ-side regularity assumption.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationInputs {
    pub psi: DenseMatrix,
    pub u_codes: DenseMatrix,
    pub eps0: f64,
    pub l_psi: f64,
    pub delta_code: f64,
    pub rho_code: f64,
}

impl FactorizationInputs {
    /// Measures `δ = max|‖u_i‖² − 1|` and `ρ = max_{i≠j}|u_iᵀu_j|` from the codes.
    pub fn new(psi: DenseMatrix, u_codes: DenseMatrix, eps0: f64, l_psi: f64) -> Result<Self> {
        if psi.cols() != u_codes.rows() {
            return Err(LabError::Dimension("Ψ columns must match U rows".into()));
        }
        let (delta_code, rho_code) = code_statistics(&u_codes);
        if !(0.0..1.0).contains(&delta_code) || !(0.0..1.0).contains(&rho_code) {
            return Err(LabError::Config(format!("code constants out of [0, 1): δ={delta_code}, ρ={rho_code}")));
        }
        Ok(FactorizationInputs { psi, u_codes, eps0, l_psi, delta_code, rho_code })
    }

    pub fn phi(&self) -> DenseMatrix {
        self.psi.matmul(&self.u_codes)
    }
}

pub fn code_statistics(u: &DenseMatrix) -> (f64, f64) {
    let g = u.t_matmul(u);
    let m = g.rows();
    let mut delta: f64 = 0.0;
    let mut rho: f64 = 0.0;
    for i in 0..m {
        delta = delta.max((g[(i, i)] - 1.0).abs());
        for j in 0..m {
            if i != j {
                rho = rho.max(g[(i, j)].abs());
            }
        }
    }
    (delta, rho)
}
