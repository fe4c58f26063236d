//! Admissible orthogonality strengths and the one-step degradation bound
//! for a few curvature levels.

use collapse_lab::optim::{degradation_bound, kappa_max_budgeted, kappa_max_conflict_free};

fn main() {
    let (g_norm, u_norm, c_t, eta) = (1.0, 0.8, 0.3, 1e-3);
    println!("{:>8} {:>14} {:>14} {:>14}", "mu", "kappa cf", "kappa budget", "bound k=1");
    for mu in [0.1, 1.0, 10.0, 100.0] {
        let cf = kappa_max_conflict_free(g_norm, c_t, mu, eta, u_norm);
        let bud = kappa_max_budgeted(1e-6, mu, eta, u_norm);
        let bound = degradation_bound(eta, 0.05, 0.5, mu, u_norm, 1.0);
        println!("{mu:>8} {cf:>14.4e} {bud:>14.4e} {bound:>14.4e}");
    }
}
