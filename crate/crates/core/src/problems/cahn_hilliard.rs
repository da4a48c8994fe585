use super::weighted_sum;
use crate::error::{Error, Result};
use crate::fd::{diff_matrix, sinh_clustered_grid, DiffMatrix, Grid};
use crate::integrator::{ConstraintRow, LinearSplitting, SemiLinearProblem};
use crate::linalg::solve_linear;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use std::sync::Arc;

pub const CH_POINTS: usize = 128;
pub const CH_HALF_WIDTH: f64 = 20.0;
pub const CH_STRETCH: f64 = 3.0;
pub const CH_WIDTH: usize = 7;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug)]
struct Operators {
    d1: DiffMatrix,
    d2: DiffMatrix,
    d3: DiffMatrix,
    d4: DiffMatrix,
}

/// `φ_t = -ε² φ_xxxx + ∂_x((3φ² - 1) φ_x)` on `[-L, L]` with
/// `∂_n φ = 0` and `∂_n μ = 0`, `μ = φ³ - φ - ε² φ_xx`.
///
/// `G(φ̃) = -ε² D4 + diag(3φ̃² - 1) D2 + diag(D1(3φ̃² - 1)) D1`. At each end
/// the outermost row carries `D1 φ = 0` and the next row inward carries
/// `(-ε² D3 + (3φ̃_end² - 1) D1) φ = 0`, both built from the end node.
#[derive(Debug, Clone)]
pub struct CahnHilliard {
    pub epsilon: f64,
    grid: Grid,
    ops: Arc<Operators>,
}

impl CahnHilliard {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_grid(epsilon, CH_POINTS, CH_HALF_WIDTH, CH_STRETCH)
    }

    pub fn with_grid(epsilon: f64, n: usize, half_width: f64, stretch: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if n < CH_WIDTH + 1 {
            return Err(Error::Parameter(format!("need at least {} points, got {n}", CH_WIDTH + 1)));
        }
        let grid = sinh_clustered_grid(half_width, n, stretch)?;
        let ops = Operators {
            d1: diff_matrix(&grid, 1, CH_WIDTH)?,
            d2: diff_matrix(&grid, 2, CH_WIDTH)?,
            d3: diff_matrix(&grid, 3, CH_WIDTH)?,
            d4: diff_matrix(&grid, 4, CH_WIDTH)?,
        };
        Ok(CahnHilliard {
            epsilon,
            grid,
            ops: Arc::new(ops),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn d(&self, order: usize) -> &DiffMatrix {
        match order {
            1 => &self.ops.d1,
            2 => &self.ops.d2,
            3 => &self.ops.d3,
            4 => &self.ops.d4,
            _ => panic!("no derivative matrix of order {order}"),
        }
    }

    pub fn initial_state(&self) -> DVector<f64> {
        self.grid.sample(f64::tanh)
    }

    pub fn operator(&self, lagged: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from(&assemble(self.epsilon, &self.ops, lagged))
    }

    pub fn constraints(&self) -> Vec<ConstraintRow> {
        boundary_rows(self.epsilon, &self.ops, self.grid.len())
            .into_iter()
            .map(|(row, build)| ConstraintRow::new(row, move |_, lag| (build(lag), 0.0)))
            .collect()
    }

    pub fn problem(&self) -> SemiLinearProblem {
        let n = self.grid.len();
        let (eps, ops) = (self.epsilon, self.ops.clone());
        SemiLinearProblem::new_sparse(
            self.initial_state(),
            move |_, _| DVector::zeros(n),
            move |_, phi| assemble(eps, &ops, phi),
        )
        .with_constraints(self.constraints())
        .expect("boundary rows are distinct")
    }

    /// `L = -ε² D4` implicit; `diag(3φ² - 1) D2 φ + diag(D1(3φ² - 1)) D1 φ` explicit.
    pub fn splitting(&self) -> LinearSplitting {
        let ops = self.ops.clone();
        LinearSplitting::new(
            -(self.epsilon * self.epsilon) * &self.ops.d4.matrix,
            move |_, phi| {
                let m = phi.map(|v| 3.0 * v * v - 1.0);
                let dm = ops.d1.apply_banded(&m);
                m.component_mul(&ops.d2.apply_banded(phi)) + dm.component_mul(&ops.d1.apply_banded(phi))
            },
            self.constraints(),
        )
    }

    /// `G(φ)φ` with the four boundary rows replaced by their residuals.
    pub fn residual(&self, phi: &DVector<f64>) -> DVector<f64> {
        let ops = &self.ops;
        let eps2 = self.epsilon * self.epsilon;
        let m = phi.map(|v| 3.0 * v * v - 1.0);
        let dm = ops.d1.apply_banded(&m);
        let mut r = -eps2 * ops.d4.apply_banded(phi)
            + m.component_mul(&ops.d2.apply_banded(phi))
            + dm.component_mul(&ops.d1.apply_banded(phi));
        for (row, build) in boundary_rows(self.epsilon, ops, phi.len()) {
            r[row] = build(phi).dot(phi);
        }
        r
    }

    /// Newton's method on [`residual`](Self::residual) with a forward
    /// difference Jacobian.
    ///
    /// Steady profiles come in a two-parameter family (translation and a
    /// constant chemical potential), both along even directions, so the full
    /// Jacobian is singular. The iteration runs over odd profiles
    /// `φ(-x) = -φ(x)` on the mirrored grid, with the right-half values as
    /// unknowns and the right-half rows of the residual as equations. The
    /// guess is projected onto odd profiles first.
    pub fn steady(&self, initial_guess: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.grid.len();
        if initial_guess.len() != n || initial_guess.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("initial guess must be finite with one value per node".into()));
        }
        if n % 2 != 0 {
            return Err(Error::Parameter(format!("odd steady search needs an even node count, got {n}")));
        }
        let half = n / 2;
        let expand = |right: &DVector<f64>| {
            DVector::from_fn(n, |i, _| if i >= half { right[i - half] } else { -right[n - 1 - i - half] })
        };
        let reduced = |right: &DVector<f64>| self.residual(&expand(right)).rows(half, half).into_owned();
        let mut right = DVector::from_fn(half, |k, _| {
            0.5 * (initial_guess[half + k] - initial_guess[half - 1 - k])
        });
        let mut r = reduced(&right);
        for _ in 0..NEWTON_MAX_ITER {
            let full = self.residual(&expand(&right)).amax();
            if full < NEWTON_TOL {
                return Ok(expand(&right));
            }
            let mut jac = DMatrix::zeros(half, half);
            for j in 0..half {
                let delta = 1e-7 * (1.0 + right[j].abs());
                let mut p = right.clone();
                p[j] += delta;
                jac.set_column(j, &((reduced(&p) - &r) / delta));
            }
            right -= solve_linear(&jac, &r)?;
            r = reduced(&right);
        }
        let phi = expand(&right);
        let residual = self.residual(&phi).amax();
        if residual < NEWTON_TOL {
            return Ok(phi);
        }
        Err(Error::NewtonFailure {
            iterations: NEWTON_MAX_ITER,
            residual,
        })
    }
}

type RowFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

fn boundary_rows(epsilon: f64, ops: &Arc<Operators>, n: usize) -> Vec<(usize, RowFn)> {
    let eps2 = epsilon * epsilon;
    let flux = |end: usize| -> RowFn {
        let ops = ops.clone();
        Box::new(move |_| ops.d1.row(end))
    };
    let chem = |end: usize| -> RowFn {
        let ops = ops.clone();
        Box::new(move |lag: &DVector<f64>| {
            let fpp = 3.0 * lag[end] * lag[end] - 1.0;
            ops.d3.row(end) * (-eps2) + ops.d1.row(end) * fpp
        })
    };
    vec![(0, flux(0)), (1, chem(0)), (n - 2, chem(n - 1)), (n - 1, flux(n - 1))]
}

fn assemble(epsilon: f64, ops: &Operators, phi: &DVector<f64>) -> CsrMatrix<f64> {
    let n = phi.len();
    let bi = DVector::from_element(n, -epsilon * epsilon);
    let m = phi.map(|v| 3.0 * v * v - 1.0);
    let dm = ops.d1.apply_banded(&m);
    weighted_sum(n, &[(&bi, &ops.d4), (&m, &ops.d2), (&dm, &ops.d1)])
}

pub fn cahn_hilliard_problem(epsilon: f64) -> Result<SemiLinearProblem> {
    Ok(CahnHilliard::new(epsilon)?.problem())
}

/// Steady state on the default grid, from `tanh(x)` unless a guess is given.
pub fn cahn_hilliard_steady(epsilon: f64, initial_guess: Option<&DVector<f64>>) -> Result<DVector<f64>> {
    let ch = CahnHilliard::new(epsilon)?;
    match initial_guess {
        Some(g) => ch.steady(g),
        None => ch.steady(&ch.initial_state()),
    }
}
