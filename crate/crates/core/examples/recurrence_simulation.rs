//! Run the frozen TD-error recurrence for a stable and an unstable operator
//! and compare the observed decay rate with `ln ρ(A(η))`.

use collapse_lab::dynamics::{decay_slope, simulate_norms};
use collapse_lab::linalg::DenseMatrix;
use collapse_lab::spectral::companion_spectrum;

fn main() -> collapse_lab::Result<()> {
    let (beta1, eta) = (0.9, 0.1);
    let cases = [
        ("rotation + damping", DenseMatrix::from_rows(&[vec![-0.5, 2.0], vec![-2.0, -0.5]])?),
        ("one growing mode", DenseMatrix::from_rows(&[vec![0.05, 0.0], vec![0.0, -1.0]])?),
    ];
    for (name, s) in cases {
        let rho = companion_spectrum(&s, beta1, eta)?.spectral_radius();
        let norms = simulate_norms(&s, beta1, eta, vec![1.0, 1.0], 5000, Some((1e-300, 1e300)));
        println!(
            "{name:>20}: rho {rho:.6}  ln rho {:+.3e}  fitted slope {:+.3e}  final |e| {:.3e}",
            rho.ln(),
            decay_slope(&norms),
            norms.last().unwrap()
        );
    }
    Ok(())
}
