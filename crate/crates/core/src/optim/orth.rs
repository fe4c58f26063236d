use serde::{Deserialize, Serialize};

use crate::linalg::{frobenius_norm, DenseMatrix};

/// `¼‖WWᵀ − I‖²_F` for wide `W`, `¼‖WᵀW − I‖²_F` otherwise.
pub fn orth_potential(w: &DenseMatrix) -> f64 {
    let n = frobenius_norm(&gram_defect(w));
    0.25 * n * n
}

/// Closed-form gradient of [`orth_potential`]: `(WWᵀ − I)W` or `W(WᵀW − I)`.
pub fn orth_gradient(w: &DenseMatrix) -> DenseMatrix {
    let e = gram_defect(w);
    if w.rows() < w.cols() {
        e.matmul(w)
    } else {
        w.matmul(&e)
    }
}

fn gram_defect(w: &DenseMatrix) -> DenseMatrix {
    if w.rows() < w.cols() {
        w.matmul(&w.transpose()).shift_diag(1.0)
    } else {
        w.t_matmul(w).shift_diag(1.0)
    }
}

/// `δ₀ = κ · ‖u‖_F / (‖r‖_F + ε_r) · r`.
pub fn reference_step(u_b: &DenseMatrix, r_b: &DenseMatrix, kappa_orth: f64, eps_r: f64) -> DenseMatrix {
    let coef = kappa_orth * frobenius_norm(u_b) / (frobenius_norm(r_b) + eps_r);
    r_b.scale(coef)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetedStep {
    pub delta: DenseMatrix,
    pub scale: f64,
    pub budget: f64,
}

/// Largest multiple `s ∈ [0, 1]` of `δ₀` with `⟨g, s·δ₀⟩ ≥ T = −τ(⟨g, u⟩)₊`.
pub fn budgeted_scale(g_b: &DenseMatrix, u_b: &DenseMatrix, delta0_b: &DenseMatrix, tau: f64) -> BudgetedStep {
    let budget = -tau * g_b.frobenius_inner(u_b).max(0.0);
    let gd = g_b.frobenius_inner(delta0_b);
    if gd >= budget {
        return BudgetedStep { delta: delta0_b.clone(), scale: 1.0, budget };
    }
    // here gd < budget ≤ 0, so the divisor is strictly negative
    let scale = budget / gd;
    BudgetedStep { delta: delta0_b.scale(scale), scale, budget }
}
