//! Fixtures shared by the benchmarks.

use nalgebra::{DMatrix, DVector};
use semimex::fd::{sinh_clustered_grid, Grid};

/// Banded matrix with half bandwidth `hb` and its first and last rows full,
/// the shape of a stage matrix after constraint rows are injected.
pub fn bordered_band(n: usize, hb: usize) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) <= hb {
            ((i * 7 + j * 13) as f64).sin() + if i == j { 4.0 } else { 0.0 }
        } else {
            0.0
        }
    });
    for j in 0..n {
        a[(0, j)] = ((j + 1) as f64).cos();
        a[(n - 1, j)] = ((2 * j + 3) as f64).sin();
    }
    a
}

pub fn rhs(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| (i as f64 * 0.3).cos())
}

pub fn clustered_grid() -> Grid {
    sinh_clustered_grid(20.0, 128, 3.0).expect("valid grid parameters")
}
