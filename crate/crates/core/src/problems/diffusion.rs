use super::weighted_sum;
use crate::error::{Error, Result};
use crate::fd::{diff_matrix, uniform_grid, DiffMatrix, Grid};
use crate::integrator::{ConstraintRow, LinearSplitting, SemiLinearProblem};
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

pub const DIFFUSION_POINTS: usize = 129;
pub const DIFFUSION_WIDTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// `S = cos(x) sin(t)`.
    CosXSinT,
    /// `S = cos(x)`.
    CosX,
}

impl Source {
    pub fn eval(self, t: f64, x: f64) -> f64 {
        match self {
            Source::CosXSinT => x.cos() * t.sin(),
            Source::CosX => x.cos(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Source::CosXSinT => "cos(x)sin(t)",
            Source::CosX => "cos(x)",
        }
    }
}

/// `c_t = ∂_x((1 + κc²) ∂_x c) + S(t, x)` on `[-π, π]`, periodic.
///
/// `G(c̃) = diag(1 + κc̃²) D2 + diag(D1(1 + κc̃²)) D1`. Row 0 is replaced
/// by `c_{n-1} - c_0 = 0` and row `n-1` by `(D1_{n-1} - D1_0) c = 0`.
#[derive(Debug, Clone)]
pub struct Diffusion {
    pub kappa: f64,
    pub source: Source,
    grid: Grid,
    d1: Arc<DiffMatrix>,
    d2: Arc<DiffMatrix>,
}

impl Diffusion {
    pub fn new(kappa: f64, source: Source, n: usize) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Parameter(format!("kappa must be non-negative, got {kappa}")));
        }
        let grid = uniform_grid(-PI, PI, n)?;
        let d1 = Arc::new(diff_matrix(&grid, 1, DIFFUSION_WIDTH)?);
        let d2 = Arc::new(diff_matrix(&grid, 2, DIFFUSION_WIDTH)?);
        Ok(Diffusion {
            kappa,
            source,
            grid,
            d1,
            d2,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn d1(&self) -> &DiffMatrix {
        &self.d1
    }

    pub fn d2(&self) -> &DiffMatrix {
        &self.d2
    }

    pub fn operator(&self, lagged: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from(&assemble(self.kappa, &self.d1, &self.d2, lagged))
    }

    pub fn source_at(&self, t: f64) -> DVector<f64> {
        let s = self.source;
        self.grid.sample(|x| s.eval(t, x))
    }

    pub fn constraints(&self) -> Vec<ConstraintRow> {
        let n = self.grid.len();
        let mut value = DVector::zeros(n);
        value[0] = -1.0;
        value[n - 1] = 1.0;
        let slope = self.d1.row(n - 1) - self.d1.row(0);
        vec![
            ConstraintRow::new(0, move |_, _| (value.clone(), 0.0)),
            ConstraintRow::new(n - 1, move |_, _| (slope.clone(), 0.0)),
        ]
    }

    /// Semi-IMEX form, starting from `c = 0` at `t = 0`.
    pub fn problem(&self) -> SemiLinearProblem {
        let n = self.grid.len();
        let (kappa, d1, d2) = (self.kappa, self.d1.clone(), self.d2.clone());
        let (source, nodes) = (self.source, self.grid.clone());
        SemiLinearProblem::new_sparse(
            DVector::zeros(n),
            move |t, _| nodes.sample(|x| source.eval(t, x)),
            move |_, c| assemble(kappa, &d1, &d2, c),
        )
        .with_constraints(self.constraints())
        .expect("diffusion constraint rows are distinct")
    }

    /// `L = D2` implicit; `diag(κc²) D2 c + diag(D1(κc²)) D1 c + S` explicit.
    pub fn splitting(&self) -> LinearSplitting {
        let (kappa, d1, d2) = (self.kappa, self.d1.clone(), self.d2.clone());
        let (source, nodes) = (self.source, self.grid.clone());
        LinearSplitting::new(
            self.d2.matrix.clone(),
            move |t, c| {
                let w = c.map(|v| kappa * v * v);
                let dw = d1.apply_banded(&w);
                let mut out = w.component_mul(&d2.apply_banded(c)) + dw.component_mul(&d1.apply_banded(c));
                out += nodes.sample(|x| source.eval(t, x));
                out
            },
            self.constraints(),
        )
    }

    /// Closed-form steady state for the time-independent source.
    pub fn long_time_limit(&self) -> Result<DVector<f64>> {
        let k = self.kappa;
        let vals = self
            .grid
            .nodes()
            .iter()
            .map(|&x| diffusion_long_time_limit(k, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }
}

fn assemble(kappa: f64, d1: &DiffMatrix, d2: &DiffMatrix, c: &DVector<f64>) -> CsrMatrix<f64> {
    let w = c.map(|v| 1.0 + kappa * v * v);
    let dw = d1.apply_banded(&w);
    weighted_sum(c.len(), &[(&w, d2), (&dw, d1)])
}

pub fn diffusion_problem(kappa: f64, source: Source, n: usize) -> Result<SemiLinearProblem> {
    Ok(Diffusion::new(kappa, source, n)?.problem())
}

/// Real root of `c + κc³/3 = cos x`:
/// `(2^{1/3} r^{2/3} - 2) / (2^{2/3} √κ r^{1/3})` with
/// `r = √(9κ cos²x + 4) + 3√κ cos x`.
pub fn diffusion_long_time_limit(kappa: f64, x: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Parameter(format!("kappa must be positive, got {kappa}")));
    }
    let cx = x.cos();
    let sk = kappa.sqrt();
    let r = (9.0 * kappa * cx * cx + 4.0).sqrt() + 3.0 * sk * cx;
    let cbrt2 = 2f64.cbrt();
    Ok((cbrt2 * r.powf(2.0 / 3.0) - 2.0) / (cbrt2 * cbrt2 * sk * r.cbrt()))
}
