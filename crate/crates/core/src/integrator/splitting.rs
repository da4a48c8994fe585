//! Classical IMEX Runge-Kutta for `u' = N(t, u) + L u` with a constant
//! linear part, used as a baseline against the semi-IMEX schemes.

use super::{inject_constraints, relative_row_residual, ConstraintRow, StepStats, TimeStepper, VectorField};
use crate::error::{Error, Result};
use crate::linalg::solve_linear;
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// An explicit/implicit tableau pair with `s` weights on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalImexPair {
    pub name: String,
    pub explicit_a: DMatrix<f64>,
    pub explicit_b: Vec<f64>,
    pub explicit_c: Vec<f64>,
    pub implicit_a: DMatrix<f64>,
    pub implicit_b: Vec<f64>,
    pub implicit_c: Vec<f64>,
}

impl ClassicalImexPair {
    pub fn stages(&self) -> usize {
        self.explicit_b.len()
    }
}

/// ARS(2,2,2): second order, L-stable implicit part, stiffly accurate.
pub fn ars222() -> ClassicalImexPair {
    let g = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let d = 1.0 - 1.0 / (2.0 * g);
    ClassicalImexPair {
        name: "ars222".into(),
        explicit_a: DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, g, 0.0, 0.0, d, 1.0 - d, 0.0]),
        explicit_b: vec![d, 1.0 - d, 0.0],
        explicit_c: vec![0.0, g, 1.0],
        implicit_a: DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, g, 0.0, 0.0, 1.0 - g, g]),
        implicit_b: vec![0.0, 1.0 - g, g],
        implicit_c: vec![0.0, g, 1.0],
    }
}

/// `u' = N(t, u) + L u` with constraint rows.
#[derive(Clone)]
pub struct LinearSplitting {
    pub linear: DMatrix<f64>,
    nonlinear: Arc<VectorField>,
    pub constraints: Vec<ConstraintRow>,
}

impl fmt::Debug for LinearSplitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearSplitting")
            .field("dim", &self.linear.nrows())
            .field("constraints", &self.constraints)
            .finish_non_exhaustive()
    }
}

impl LinearSplitting {
    pub fn new(
        linear: DMatrix<f64>,
        nonlinear: impl Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        constraints: Vec<ConstraintRow>,
    ) -> Self {
        LinearSplitting {
            linear,
            nonlinear: Arc::new(nonlinear),
            constraints,
        }
    }

    pub fn nonlinear(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        (self.nonlinear)(t, u)
    }
}

/// One classical IMEX step. Implicit stages take constraint rows built from
/// the previous stage; the constraint rows of `u_{n+1}` come from `K_s`.
pub fn imex_linear_splitting_step(
    sp: &LinearSplitting,
    pair: &ClassicalImexPair,
    t: f64,
    u: &DVector<f64>,
    h: f64,
    stats: &mut StepStats,
) -> Result<DVector<f64>> {
    let s = pair.stages();
    let n = u.len();
    let mut stages: Vec<DVector<f64>> = Vec::with_capacity(s);
    let mut nk: Vec<DVector<f64>> = Vec::with_capacity(s);
    let mut lk: Vec<DVector<f64>> = Vec::with_capacity(s);
    let mut solves = 0;
    let mut residual = 0.0f64;
    for i in 0..s {
        let mut rhs = u.clone();
        for j in 0..i {
            rhs.axpy(h * pair.explicit_a[(i, j)], &nk[j], 1.0);
            rhs.axpy(h * pair.implicit_a[(i, j)], &lk[j], 1.0);
        }
        let diag = pair.implicit_a[(i, i)];
        let k = if diag == 0.0 {
            rhs
        } else {
            let lagged = if i == 0 { u } else { &stages[i - 1] };
            let ti = t + pair.implicit_c[i] * h;
            let mut m = sp.linear.scale(-h * diag);
            for d in 0..n {
                m[(d, d)] += 1.0;
            }
            let rows = inject_constraints(&sp.constraints, ti, lagged, &mut m, &mut rhs);
            let k = solve_linear(&m, &rhs).map_err(|e| Error::StageSolve {
                stage: i + 1,
                source: Box::new(e),
            })?;
            solves += 1;
            residual = residual.max(relative_row_residual(&rows, &k));
            k
        };
        if k.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { stage: i + 1 });
        }
        nk.push(sp.nonlinear(t + pair.explicit_c[i] * h, &k));
        lk.push(&sp.linear * &k);
        stages.push(k);
    }
    let mut next = u.clone();
    for j in 0..s {
        next.axpy(h * pair.explicit_b[j], &nk[j], 1.0);
        next.axpy(h * pair.implicit_b[j], &lk[j], 1.0);
    }
    for con in &sp.constraints {
        next[con.row_index] = stages[s - 1][con.row_index];
    }
    if next.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence { stage: s });
    }
    stats.steps += 1;
    stats.linear_solves += solves;
    stats.max_constraint_residual = stats.max_constraint_residual.max(residual);
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct LinearSplittingStepper<'a> {
    pub splitting: &'a LinearSplitting,
    pub pair: &'a ClassicalImexPair,
}

impl TimeStepper for LinearSplittingStepper<'_> {
    fn label(&self) -> String {
        self.pair.name.clone()
    }

    fn step(&self, t: f64, u: &DVector<f64>, h: f64, stats: &mut StepStats) -> Result<DVector<f64>> {
        imex_linear_splitting_step(self.splitting, self.pair, t, u, h, stats)
    }
}
