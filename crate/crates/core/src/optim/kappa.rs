/// Value returned instead of +∞ when the stepsize vanishes.
pub const KAPPA_CAP: f64 = 1e12;

/// `2‖g‖c / (μη‖u‖) − 2`, capped at [`KAPPA_CAP`]. Negative means no admissible κ.
pub fn kappa_max_conflict_free(g_norm: f64, c_t: f64, mu: f64, eta: f64, u_norm: f64) -> f64 {
    let denom = mu * eta * u_norm;
    if denom <= 0.0 {
        return KAPPA_CAP;
    }
    (2.0 * g_norm * c_t / denom - 2.0).min(KAPPA_CAP)
}

/// `√(1 + 2ε/(μη²‖u‖²)) − 1`.
pub fn kappa_max_budgeted(eps_budget: f64, mu: f64, eta: f64, u_norm: f64) -> f64 {
    (1.0 + 2.0 * eps_budget / (mu * eta * eta * u_norm * u_norm)).sqrt() - 1.0
}

/// Largest stepsize for which the conflict-free step cannot lose to Adam:
/// `2⟨g,Δ⟩ / (μ‖Δ‖(2‖u‖ + ‖Δ‖))`.
pub fn onestep_eta_bound(g_dot_delta: f64, mu: f64, delta_norm: f64, u_norm: f64) -> f64 {
    2.0 * g_dot_delta / (mu * delta_norm * (2.0 * u_norm + delta_norm))
}

/// Worst-case one-step excess loss of the budgeted step over Adam:
/// `ητ Σ_b(⟨g_b,u_b⟩)₊ + μη²‖u‖²(κ + κ²/2)`.
pub fn degradation_bound(eta: f64, tau: f64, positive_descent: f64, mu: f64, u_norm: f64, kappa: f64) -> f64 {
    eta * tau * positive_descent + mu * eta * eta * u_norm * u_norm * (kappa + 0.5 * kappa * kappa)
}
