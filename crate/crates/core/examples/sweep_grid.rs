//! Sweep `ρ(A(η))` over a log grid of step sizes for a fixed operator and mark
//! where it crosses 1.

use collapse_lab::lab::{parse_grid, sweep, sweep_to_writer, SweepGrid, SweepSource};
use collapse_lab::linalg::DenseMatrix;

fn main() -> collapse_lab::Result<()> {
    let s = DenseMatrix::from_rows(&[vec![-1.0, 4.0], vec![-4.0, -1.0]])?;
    let grid = SweepGrid { eta: parse_grid("1e-3:10:13")?, gamma: vec![], alpha: vec![1.0], beta1: parse_grid("0,0.9")? };
    let rows = sweep(SweepSource::Operator(&s), &grid)?;
    sweep_to_writer(std::io::stdout().lock(), &rows)
}
