//! Dense real linear algebra, dependency-free and sized for matrices up to 512.

mod eigen;
mod matrix;
mod quadratic;
mod solve;
mod svd;
mod symmetric;

pub use eigen::{eigen_decomposition, eigenvalues, spectral_order, Spectrum, MAX_DIM};
pub use matrix::{dot, frobenius_norm, norm2, DenseMatrix};
pub use num_complex::Complex64 as ComplexValue;
pub use quadratic::{companion_quadratic_roots, monic_quadratic_roots};
pub use solve::solve;
pub use svd::{polar_factor, spectral_norm, svd, SvdResult};
pub use symmetric::{lambda_min, symmetric_eigenvalues, symmetric_norm};
