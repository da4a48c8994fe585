//! Test problems: a scalar equation with a closed-form solution, periodic
//! nonlinear diffusion and a 1D Cahn-Hilliard equation, plus the linear
//! splittings used by the classical IMEX baseline.

mod cahn_hilliard;
mod diffusion;
mod scalar;

pub use cahn_hilliard::{
    cahn_hilliard_problem, cahn_hilliard_steady, CahnHilliard, CH_HALF_WIDTH, CH_POINTS,
    CH_STRETCH, CH_WIDTH,
};
pub use diffusion::{
    diffusion_long_time_limit, diffusion_problem, Diffusion, Source, DIFFUSION_POINTS,
    DIFFUSION_WIDTH,
};
pub use scalar::{scalar_exact, scalar_problem};

use crate::error::{Error, Result};
use crate::fd::{DiffMatrix, Grid};
use nalgebra::DVector;
use nalgebra_sparse::CsrMatrix;
use std::fmt::Write as _;

/// `Σ_k diag(w_k) D_k` in CSR form, storing each row's stencil window.
pub(crate) fn weighted_sum(n: usize, terms: &[(&DVector<f64>, &DiffMatrix)]) -> CsrMatrix<f64> {
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for i in 0..n {
        let lo = terms.iter().map(|(_, d)| d.window(i).start).min().unwrap_or(i);
        let hi = terms.iter().map(|(_, d)| d.window(i).end).max().unwrap_or(i);
        let base = vals.len();
        cols.extend(lo..hi);
        vals.resize(base + (hi - lo), 0.0);
        for (w, d) in terms {
            let wi = w[i];
            let off = base + d.window(i).start - lo;
            for (slot, c) in vals[off..].iter_mut().zip(d.weights(i)) {
                *slot += wi * c;
            }
        }
        offsets.push(vals.len());
    }
    CsrMatrix::try_from_csr_data(n, n, offsets, cols, vals).expect("stencil windows are sorted and in range")
}

/// CSV with header `x,value`, 17 significant digits.
pub fn write_profile_csv(grid: &Grid, values: &DVector<f64>) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in grid.nodes().iter().zip(values.iter()) {
        let _ = writeln!(out, "{x:.16e},{v:.16e}");
    }
    out
}

pub fn parse_profile_csv(text: &str) -> Result<(Vec<f64>, DVector<f64>)> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: idx + 1,
            message: format!("expected `x,value`, got `{line}`"),
        };
        let (x, v) = line.split_once(',').ok_or_else(bad)?;
        xs.push(x.trim().parse().map_err(|_| bad())?);
        vs.push(v.trim().parse().map_err(|_| bad())?);
    }
    Ok((xs, DVector::from_vec(vs)))
}

/// Which problem family a run uses, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Scalar,
    Diffusion { kappa: f64, source: Source, n: usize },
    CahnHilliard { epsilon: f64 },
}

impl ProblemKind {
    pub fn label(&self) -> String {
        match self {
            ProblemKind::Scalar => "scalar".into(),
            ProblemKind::Diffusion { kappa, source, n } => {
                format!("diffusion(kappa={kappa},source={},n={n})", source.label())
            }
            ProblemKind::CahnHilliard { epsilon } => format!("cahn-hilliard(epsilon={epsilon})"),
        }
    }
}
