use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{companion_quadratic_roots, eigenvalues, spectral_order, DenseMatrix, Spectrum};

/// Frozen linearization of one TD training state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenSnapshot {
    /// `Z(X)`, `P × M`.
    pub z_x: DenseMatrix,
    /// `Z(X′)`, `P × M`; columns of terminal transitions are zero.
    pub z_xp: DenseMatrix,
    pub d_diag: Vec<f64>,
    pub gamma: f64,
    pub coupling_alpha: f64,
    pub beta1: f64,
    pub eta: f64,
}

impl FrozenSnapshot {
    pub fn new(
        z_x: DenseMatrix,
        z_xp: DenseMatrix,
        d_diag: Vec<f64>,
        gamma: f64,
        coupling_alpha: f64,
        beta1: f64,
        eta: f64,
    ) -> Result<Self> {
        if z_x.rows() != z_xp.rows() || z_x.cols() != z_xp.cols() || d_diag.len() != z_x.rows() {
            return Err(LabError::Dimension(format!(
                "Z(X) {}x{}, Z(X') {}x{}, D of length {}",
                z_x.rows(),
                z_x.cols(),
                z_xp.rows(),
                z_xp.cols(),
                d_diag.len()
            )));
        }
        if d_diag.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(LabError::Config("preconditioner entries must be positive and finite".into()));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(LabError::Config(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if !(coupling_alpha > 0.0 && coupling_alpha <= 1.0) {
            return Err(LabError::Config(format!("coupling alpha must lie in (0, 1], got {coupling_alpha}")));
        }
        if !(0.0..1.0).contains(&beta1) || !(eta > 0.0) {
            return Err(LabError::Config(format!("need beta1 in [0, 1) and eta > 0, got {beta1}, {eta}")));
        }
        Ok(FrozenSnapshot { z_x, z_xp, d_diag, gamma, coupling_alpha, beta1, eta })
    }

    pub fn sample_count(&self) -> usize {
        self.z_x.cols()
    }

    pub fn param_count(&self) -> usize {
        self.z_x.rows()
    }

    /// Effective bootstrap strength `αγ`.
    pub fn effective_gamma(&self) -> f64 {
        self.coupling_alpha * self.gamma
    }

    /// Whitened features `Φ = D^{1/2} Z(X)`.
    pub fn phi(&self) -> DenseMatrix {
        self.z_x.scale_rows(&self.sqrt_d())
    }

    /// `Φ_* = D^{1/2} Z(X′)`.
    pub fn phi_star(&self) -> DenseMatrix {
        self.z_xp.scale_rows(&self.sqrt_d())
    }

    fn sqrt_d(&self) -> Vec<f64> {
        self.d_diag.iter().map(|d| d.sqrt()).collect()
    }
}

/// `K(X₁, X₂) = Z₁ᵀ D Z₂`.
pub fn precond_gram(z1: &DenseMatrix, d_diag: &[f64], z2: &DenseMatrix) -> DenseMatrix {
    z1.t_matmul(&z2.scale_rows(d_diag))
}

/// `S = αγ K(X′, X) − K(X, X)`.
pub fn td_operator(snapshot: &FrozenSnapshot) -> DenseMatrix {
    let dz = snapshot.z_x.scale_rows(&snapshot.d_diag);
    let k_xx = snapshot.z_x.t_matmul(&dz);
    let g = snapshot.effective_gamma();
    if g == 0.0 {
        return k_xx.scale(-1.0);
    }
    let k_px = snapshot.z_xp.t_matmul(&dz);
    k_px.scale(g).sub(&k_xx)
}

/// `A(η) = [[(1+β₁)I + η(1−β₁)S, −β₁I], [I, 0]]`.
pub fn companion_matrix(s: &DenseMatrix, beta1: f64, eta: f64) -> DenseMatrix {
    assert!(s.is_square(), "S must be square");
    let m = s.rows();
    let c = eta * (1.0 - beta1);
    DenseMatrix::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, true) => c * s[(i, j)] + if i == j { 1.0 + beta1 } else { 0.0 },
        (true, false) => {
            if j - m == i {
                -beta1
            } else {
                0.0
            }
        }
        (false, true) => {
            if i - m == j {
                1.0
            } else {
                0.0
            }
        }
        (false, false) => 0.0,
    })
}

/// Eigenvalues of `A(η)` from the per-mode quadratics of `spec(S)`.
pub fn companion_spectrum(s: &DenseMatrix, beta1: f64, eta: f64) -> Result<Spectrum> {
    Ok(companion_from_eigenvalues(&eigenvalues(s)?.values, beta1, eta))
}

/// Same as [`companion_spectrum`] for an already computed `spec(S)`.
pub fn companion_from_eigenvalues(lambdas: &[Complex64], beta1: f64, eta: f64) -> Spectrum {
    let mut values = Vec::with_capacity(2 * lambdas.len());
    for &lambda in lambdas {
        let (r1, r2) = companion_quadratic_roots(lambda, beta1, eta);
        values.push(r1);
        values.push(r2);
    }
    values.sort_by(spectral_order);
    Spectrum { values, residual: None }
}

/// `ρ(A(η))` for an already computed `spec(S)`.
pub fn companion_radius(lambdas: &[Complex64], beta1: f64, eta: f64) -> f64 {
    lambdas
        .iter()
        .map(|&l| {
            let (r1, r2) = companion_quadratic_roots(l, beta1, eta);
            r1.norm().max(r2.norm())
        })
        .fold(0.0, f64::max)
}
