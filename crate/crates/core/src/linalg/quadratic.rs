use num_complex::Complex64;

/// Roots of `r² − b·r + c`, larger-modulus root first.
///
/// Uses the cancellation-free form: one root from `(b ± √(b²−4c))/2` with the
/// sign that avoids subtraction, the other from Vieta's product `c / r₁`.
pub fn monic_quadratic_roots(b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let sq = (b * b - 4.0 * c).sqrt();
    let q = if (b.conj() * sq).re >= 0.0 { (b + sq) * 0.5 } else { (b - sq) * 0.5 };
    if q == Complex64::new(0.0, 0.0) {
        return (q, q);
    }
    (q, c / q)
}

/// Roots of the per-mode polynomial `r² − (1 + β₁ + η(1−β₁)λ) r + β₁`.
pub fn companion_quadratic_roots(lambda: Complex64, beta1: f64, eta: f64) -> (Complex64, Complex64) {
    let b = Complex64::new(1.0 + beta1, 0.0) + lambda * (eta * (1.0 - beta1));
    monic_quadratic_roots(b, Complex64::new(beta1, 0.0))
}
