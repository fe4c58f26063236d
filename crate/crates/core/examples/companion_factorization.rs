//! The momentum companion matrix decouples into one quadratic per eigenvalue of `S`.
//! Compare its direct eigensolve with the per-mode roots.

use collapse_lab::linalg::eigenvalues;
use collapse_lab::rng;
use collapse_lab::spectral::{companion_matrix, companion_spectrum};

fn main() -> collapse_lab::Result<()> {
    let r = &mut rng::seeded(7);
    let s = rng::normal_matrix(r, 6, 6).scale(0.5);
    let (beta1, eta) = (0.9, 0.05);

    let direct = eigenvalues(&companion_matrix(&s, beta1, eta))?;
    let factored = companion_spectrum(&s, beta1, eta)?;
    println!("rho direct   {:.12}", direct.spectral_radius());
    println!("rho factored {:.12}", factored.spectral_radius());

    // a zero mode sits exactly at {1, beta1}
    let zero = companion_spectrum(&collapse_lab::linalg::DenseMatrix::zeros(1, 1), beta1, eta)?;
    println!("zero mode roots: {:?}", zero.values);
    Ok(())
}
