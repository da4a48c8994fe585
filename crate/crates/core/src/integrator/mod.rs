//! Semi-IMEX Runge-Kutta time stepping.
//!
//! One step from `(t_n, u_n)` with step `h` computes, for `i = 1..s`,
//!
//! ```text
//! (I - h a_ii G(t_n + c_i h, K̃_i)) K_i = u_n + h Σ_{j<i} [ ã_ij f(t_n + c̃_j h, K_j)
//!                                                     + a_ij G(t_n + c_j h, K_j) K_j ]
//! ```
//!
//! with the lagged state `K̃_1 = u_n`, `K̃_i = K_{i-1}`, and then
//!
//! ```text
//! u_{n+1} = u_n + h Σ_j [ b̃_j f(t_n + c̃_j h, K_j) + b_j G(t_n + c_j h, K_j) K_j ]
//!               + h b_{s+1} G(t_n + c_s h, K̃_s) K_s.
//! ```
//!
//! Each product `G(·, K_j) K_j` pairs the stage state with its own abscissa
//! `c_j`; only the diagonal solve uses the lagged state. Stages with
//! `a_ii = 0` are explicit. On implicit stages the problem's constraint
//! rows overwrite the corresponding rows of the stage system.
//!
//! When the scheme satisfies the α-condition, constraint rows of `u_{n+1}`
//! are taken from `K_s / α + (1 - 1/α) u_n`, so linear time-independent
//! constraints enforced on `K_s` carry over to the new state.

mod splitting;
mod steady;
mod trajectory;

pub use splitting::{
    ars222, imex_linear_splitting_step, ClassicalImexPair, LinearSplitting, LinearSplittingStepper,
};
pub use steady::{integrate_until_steady, SteadyOutcome, SteadyStatus, DIVERGENCE_THRESHOLD};
pub use trajectory::{parse_trajectory_csv, write_trajectory_csv, Trajectory};

use crate::error::{Error, Result};
use crate::linalg::{csr_apply, ProfileMatrix};
use crate::tableau::{check_alpha_condition, ButcherPair};
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use std::fmt;
use std::sync::Arc;

pub type VectorField = dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync;
pub type MatrixField = dyn Fn(f64, &DVector<f64>) -> CsrMatrix<f64> + Send + Sync;
pub type RowBuilder = dyn Fn(f64, &DVector<f64>) -> (DVector<f64>, f64) + Send + Sync;
pub type ExactSolution = dyn Fn(f64) -> DVector<f64> + Send + Sync;

/// A row of the stage system replaced by a discretized constraint
/// `coefficients · K = rhs`, built from the stage time and lagged state.
#[derive(Clone)]
pub struct ConstraintRow {
    pub row_index: usize,
    build: Arc<RowBuilder>,
}

impl ConstraintRow {
    pub fn new(
        row_index: usize,
        build: impl Fn(f64, &DVector<f64>) -> (DVector<f64>, f64) + Send + Sync + 'static,
    ) -> Self {
        ConstraintRow {
            row_index,
            build: Arc::new(build),
        }
    }

    pub fn build(&self, t: f64, lagged: &DVector<f64>) -> (DVector<f64>, f64) {
        (self.build)(t, lagged)
    }

    /// `|coefficients · v - rhs|` for the row built at `(t, lagged)`.
    pub fn residual(&self, t: f64, lagged: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let (coef, rhs) = self.build(t, lagged);
        (coef.dot(v) - rhs).abs()
    }
}

impl fmt::Debug for ConstraintRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintRow")
            .field("row_index", &self.row_index)
            .finish_non_exhaustive()
    }
}

/// `u' = f(t, u) + G(t, u) u` with optional constraint rows.
#[derive(Clone)]
pub struct SemiLinearProblem {
    t0: f64,
    u0: DVector<f64>,
    f: Arc<VectorField>,
    g: Arc<MatrixField>,
    constraints: Vec<ConstraintRow>,
    exact: Option<Arc<ExactSolution>>,
}

impl fmt::Debug for SemiLinearProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiLinearProblem")
            .field("dim", &self.dim())
            .field("t0", &self.t0)
            .field("constraints", &self.constraints)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl SemiLinearProblem {
    /// Problem with a dense `G`, stored as CSR after each evaluation.
    pub fn new(
        u0: DVector<f64>,
        f: impl Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        g: impl Fn(f64, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new_sparse(u0, f, move |t, u| CsrMatrix::from(&g(t, u)))
    }

    pub fn new_sparse(
        u0: DVector<f64>,
        f: impl Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        g: impl Fn(f64, &DVector<f64>) -> CsrMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        SemiLinearProblem {
            t0: 0.0,
            u0,
            f: Arc::new(f),
            g: Arc::new(g),
            constraints: Vec::new(),
            exact: None,
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_initial_state(mut self, u0: DVector<f64>) -> Result<Self> {
        if u0.len() != self.dim() {
            return Err(Error::Config(format!(
                "initial state has length {}, problem dimension is {}",
                u0.len(),
                self.dim()
            )));
        }
        self.u0 = u0;
        Ok(self)
    }

    /// Attach constraint rows; indices must be distinct and below the dimension.
    pub fn with_constraints(mut self, constraints: Vec<ConstraintRow>) -> Result<Self> {
        let n = self.dim();
        let mut seen = vec![false; n];
        for c in &constraints {
            if c.row_index >= n {
                return Err(Error::Config(format!(
                    "constraint row {} out of range for dimension {n}",
                    c.row_index
                )));
            }
            if std::mem::replace(&mut seen[c.row_index], true) {
                return Err(Error::Config(format!(
                    "duplicate constraint row {}",
                    c.row_index
                )));
            }
        }
        self.constraints = constraints;
        Ok(self)
    }

    pub fn with_exact(
        mut self,
        exact: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn u0(&self) -> &DVector<f64> {
        &self.u0
    }

    pub fn f(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        (self.f)(t, u)
    }

    pub fn assemble_g(&self, t: f64, u: &DVector<f64>) -> CsrMatrix<f64> {
        (self.g)(t, u)
    }

    /// `G(t, u) v`.
    pub fn apply_g(&self, t: f64, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        csr_apply(&self.assemble_g(t, u), v)
    }

    pub fn constraints(&self) -> &[ConstraintRow] {
        &self.constraints
    }

    pub fn exact(&self, t: f64) -> Option<DVector<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// Per-step scratch data, exposed for diagnostics and tests.
#[derive(Debug, Clone, Default)]
pub struct StepWorkspace {
    /// `K_1, ..., K_s`.
    pub stages: Vec<DVector<f64>>,
    /// `f(t + c̃_j h, K_j)`, computed only where some weight uses it.
    pub stage_f: Vec<Option<DVector<f64>>>,
    /// `G(t + c_j h, K_j) K_j`, computed only where some weight uses it.
    pub stage_gk: Vec<Option<DVector<f64>>>,
    /// `G(t + c_s h, K̃_s)` when the last stage is implicit.
    pub last_lagged_g: Option<CsrMatrix<f64>>,
    pub linear_solves: usize,
    /// Largest `|row · K_i - rhs| / ‖K_i‖_∞` over constraint rows of this step.
    pub max_constraint_residual: f64,
}

impl StepWorkspace {
    fn reset(&mut self, s: usize) {
        self.stages.clear();
        self.stage_f.clear();
        self.stage_f.resize(s, None);
        self.stage_gk.clear();
        self.stage_gk.resize(s, None);
        self.last_lagged_g = None;
        self.linear_solves = 0;
        self.max_constraint_residual = 0.0;
    }
}

/// Running totals over an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub linear_solves: usize,
    pub max_constraint_residual: f64,
}

impl StepStats {
    pub fn absorb(&mut self, ws: &StepWorkspace) {
        self.steps += 1;
        self.linear_solves += ws.linear_solves;
        self.max_constraint_residual = self.max_constraint_residual.max(ws.max_constraint_residual);
    }
}

/// Anything that advances a state by one step of size `h`.
pub trait TimeStepper: Sync {
    fn label(&self) -> String;
    fn step(&self, t: f64, u: &DVector<f64>, h: f64, stats: &mut StepStats) -> Result<DVector<f64>>;
}

/// A problem paired with a semi-IMEX scheme.
#[derive(Debug, Clone)]
pub struct SemiImex<'a> {
    pub problem: &'a SemiLinearProblem,
    pub tableau: &'a ButcherPair,
    alpha: Option<f64>,
}

impl<'a> SemiImex<'a> {
    pub fn new(problem: &'a SemiLinearProblem, tableau: &'a ButcherPair) -> Self {
        SemiImex {
            problem,
            tableau,
            alpha: check_alpha_condition(tableau),
        }
    }

    pub fn step_with_workspace(
        &self,
        t: f64,
        u: &DVector<f64>,
        h: f64,
        ws: &mut StepWorkspace,
    ) -> Result<DVector<f64>> {
        step_impl(self.problem, self.tableau, self.alpha, t, u, h, ws)
    }
}

impl TimeStepper for SemiImex<'_> {
    fn label(&self) -> String {
        self.tableau.name().to_string()
    }

    fn step(&self, t: f64, u: &DVector<f64>, h: f64, stats: &mut StepStats) -> Result<DVector<f64>> {
        let mut ws = StepWorkspace::default();
        let next = self.step_with_workspace(t, u, h, &mut ws)?;
        stats.absorb(&ws);
        Ok(next)
    }
}

/// One semi-IMEX step of `problem` with scheme `tb`.
pub fn step(
    problem: &SemiLinearProblem,
    tb: &ButcherPair,
    t: f64,
    u: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let mut ws = StepWorkspace::default();
    step_impl(problem, tb, check_alpha_condition(tb), t, u, h, &mut ws)
}

/// Like [`step`], keeping the stage data in `ws`.
pub fn step_with_workspace(
    problem: &SemiLinearProblem,
    tb: &ButcherPair,
    t: f64,
    u: &DVector<f64>,
    h: f64,
    ws: &mut StepWorkspace,
) -> Result<DVector<f64>> {
    step_impl(problem, tb, check_alpha_condition(tb), t, u, h, ws)
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Replace constraint rows of `m` and `rhs` with rows built at `(t, lagged)`.
pub(crate) fn inject_constraints(
    constraints: &[ConstraintRow],
    t: f64,
    lagged: &DVector<f64>,
    m: &mut DMatrix<f64>,
    rhs: &mut DVector<f64>,
) -> Vec<(usize, DVector<f64>, f64)> {
    constraints
        .iter()
        .map(|con| {
            let (coef, value) = con.build(t, lagged);
            for (j, cj) in coef.iter().enumerate() {
                m[(con.row_index, j)] = *cj;
            }
            rhs[con.row_index] = value;
            (con.row_index, coef, value)
        })
        .collect()
}

pub(crate) fn relative_row_residual(rows: &[(usize, DVector<f64>, f64)], k: &DVector<f64>) -> f64 {
    let scale = k.amax();
    rows.iter()
        .map(|(_, coef, value)| {
            let r = (coef.dot(k) - value).abs();
            if scale > 0.0 {
                r / scale
            } else {
                r
            }
        })
        .fold(0.0, f64::max)
}

fn step_impl(
    problem: &SemiLinearProblem,
    tb: &ButcherPair,
    alpha: Option<f64>,
    t: f64,
    u: &DVector<f64>,
    h: f64,
    ws: &mut StepWorkspace,
) -> Result<DVector<f64>> {
    let s = tb.stages();
    let ea = tb.explicit_a();
    let ia = tb.implicit_a();
    let eb = tb.explicit_b();
    let ib = tb.implicit_b();
    let ec = tb.explicit_c();
    let ic = tb.implicit_c();
    ws.reset(s);

    let need_f: Vec<bool> = (0..s)
        .map(|j| eb[j] != 0.0 || (j + 1..s).any(|i| ea[(i, j)] != 0.0))
        .collect();
    let need_gk: Vec<bool> = (0..s)
        .map(|j| ib[j] != 0.0 || (j + 1..s).any(|i| ia[(i, j)] != 0.0))
        .collect();

    for i in 0..s {
        let mut rhs = u.clone();
        for j in 0..i {
            if ea[(i, j)] != 0.0 {
                if let Some(fj) = &ws.stage_f[j] {
                    rhs.axpy(h * ea[(i, j)], fj, 1.0);
                }
            }
            if ia[(i, j)] != 0.0 {
                if let Some(gj) = &ws.stage_gk[j] {
                    rhs.axpy(h * ia[(i, j)], gj, 1.0);
                }
            }
        }
        let diag = ia[(i, i)];
        let k = if diag == 0.0 {
            rhs
        } else {
            let lagged = if i == 0 { u } else { &ws.stages[i - 1] };
            let ti = t + ic[i] * h;
            let g = problem.assemble_g(ti, lagged);
            let mut m = ProfileMatrix::shifted_csr(&g, -h * diag, 1.0);
            let rows: Vec<_> = problem
                .constraints()
                .iter()
                .map(|con| {
                    let (coef, value) = con.build(ti, lagged);
                    m.set_row(con.row_index, &coef);
                    rhs[con.row_index] = value;
                    (con.row_index, coef, value)
                })
                .collect();
            let k = m.solve(&rhs).map_err(|e| Error::StageSolve {
                stage: i + 1,
                source: Box::new(e),
            })?;
            ws.linear_solves += 1;
            if all_finite(&k) {
                ws.max_constraint_residual =
                    ws.max_constraint_residual.max(relative_row_residual(&rows, &k));
            }
            if i == s - 1 {
                ws.last_lagged_g = Some(g);
            }
            k
        };
        if !all_finite(&k) {
            return Err(Error::Divergence { stage: i + 1 });
        }
        if need_f[i] {
            ws.stage_f[i] = Some(problem.f(t + ec[i] * h, &k));
        }
        if need_gk[i] {
            ws.stage_gk[i] = Some(problem.apply_g(t + ic[i] * h, &k, &k));
        }
        ws.stages.push(k);
    }

    let mut next = u.clone();
    for j in 0..s {
        if eb[j] != 0.0 {
            if let Some(fj) = &ws.stage_f[j] {
                next.axpy(h * eb[j], fj, 1.0);
            }
        }
        if ib[j] != 0.0 {
            if let Some(gj) = &ws.stage_gk[j] {
                next.axpy(h * ib[j], gj, 1.0);
            }
        }
    }
    let extra = tb.extra_weight();
    if extra != 0.0 {
        let ks = &ws.stages[s - 1];
        let g_last = match &ws.last_lagged_g {
            Some(g) => csr_apply(g, ks),
            None => {
                let lagged = if s == 1 { u } else { &ws.stages[s - 2] };
                problem.apply_g(t + ic[s - 1] * h, lagged, ks)
            }
        };
        next.axpy(h * extra, &g_last, 1.0);
    }
    if let Some(alpha) = alpha {
        let ks = &ws.stages[s - 1];
        for con in problem.constraints() {
            let r = con.row_index;
            next[r] = ks[r] / alpha + (1.0 - 1.0 / alpha) * u[r];
        }
    }
    if !all_finite(&next) {
        return Err(Error::Divergence { stage: s });
    }
    Ok(next)
}

/// Result of a fixed-step integration.
#[derive(Debug, Clone)]
pub struct Integration {
    pub state: DVector<f64>,
    pub t_end: f64,
    pub stats: StepStats,
    pub trajectory: Option<Trajectory>,
}

/// Number of steps of size `h` covering `[t0, t_end]`, which must be whole.
pub fn step_count(t0: f64, t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("step size {h} must be positive")));
    }
    if t_end < t0 {
        return Err(Error::Config(format!("t_end {t_end} precedes t0 {t0}")));
    }
    let ratio = (t_end - t0) / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "(t_end - t0) / h = {ratio} is not a whole number of steps"
        )));
    }
    Ok(n as usize)
}

/// Integrate from `(t0, u0)` to `t_end` with fixed steps.
pub fn integrate_with(
    stepper: &dyn TimeStepper,
    u0: &DVector<f64>,
    t0: f64,
    t_end: f64,
    h: f64,
    record: bool,
) -> Result<Integration> {
    let steps = step_count(t0, t_end, h)?;
    let mut stats = StepStats::default();
    let mut trajectory = record.then(|| Trajectory::new(t0, u0.clone()));
    let mut u = u0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        u = stepper.step(t, &u, h, &mut stats).map_err(|e| Error::AtStep {
            step: k + 1,
            t,
            source: Box::new(e),
        })?;
        if let Some(tr) = trajectory.as_mut() {
            tr.push(t0 + (k + 1) as f64 * h, u.clone());
        }
    }
    Ok(Integration {
        state: u,
        t_end,
        stats,
        trajectory,
    })
}

/// Integrate `problem` from its initial state to `t_end` with scheme `tb`.
pub fn integrate(
    problem: &SemiLinearProblem,
    tb: &ButcherPair,
    t_end: f64,
    h: f64,
) -> Result<Integration> {
    integrate_with(&SemiImex::new(problem, tb), problem.u0(), problem.t0(), t_end, h, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{builtin_names, eval_stability, make_builtin};
    use num_complex::Complex64;

    fn linear_scalar(lambda: f64) -> SemiLinearProblem {
        SemiLinearProblem::new(
            DVector::from_element(1, 1.0),
            |_, _| DVector::zeros(1),
            move |_, _| DMatrix::from_element(1, 1, lambda),
        )
    }

    #[test]
    fn fb_euler_scalar_step() {
        let p = linear_scalar(-1.0);
        let tb = make_builtin("fb_euler").unwrap();
        let next = step(&p, &tb, 0.0, p.u0(), 1.0).unwrap();
        assert!((next[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_fields_are_identity() {
        let p = SemiLinearProblem::new(
            DVector::from_vec(vec![1.0, -2.0, 0.5]),
            |_, _| DVector::zeros(3),
            |_, _| DMatrix::zeros(3, 3),
        );
        for name in builtin_names() {
            let tb = make_builtin(name).unwrap();
            let next = step(&p, &tb, 0.3, p.u0(), 0.1).unwrap();
            assert_eq!(&next, p.u0(), "{name}");
        }
    }

    #[test]
    fn scalar_step_equals_stability_function() {
        for name in builtin_names() {
            let tb = make_builtin(name).unwrap();
            for lambda in [-7.0, -1.0, -0.1, 0.3] {
                let next = step(&linear_scalar(lambda), &tb, 0.0, &DVector::from_element(1, 1.0), 1.0).unwrap();
                let r = eval_stability(&tb, Complex64::new(lambda, 0.0)).unwrap();
                assert!((next[0] - r.re).abs() <= 1e-14 * r.re.abs().max(1.0), "{name} {lambda}");
            }
        }
    }

    /// Transcription of the reduced α = 1/2 scheme:
    /// K2 = u + h/2 f(t, u) + h/2 G(t + h/2, u) K2,
    /// K3 = u + h/2 f(t + h/2, K2) + h/2 G(t + h/2, K2) K3,
    /// u_{n+1} = 2 K3 - u.
    #[test]
    fn trapezoid_matches_hand_transcription() {
        let f = |t: f64, y: f64| t.cos() * y;
        let g = |t: f64, y: f64| -y + t.cos();
        let p = SemiLinearProblem::new(
            DVector::from_element(1, 1.0),
            move |t, u| DVector::from_element(1, f(t, u[0])),
            move |t, u| DMatrix::from_element(1, 1, g(t, u[0])),
        );
        let (t, u, h) = (0.0, 1.0, 0.1);
        let k2 = (u + h / 2.0 * f(t, u)) / (1.0 - h / 2.0 * g(t + h / 2.0, u));
        let k3 = (u + h / 2.0 * f(t + h / 2.0, k2)) / (1.0 - h / 2.0 * g(t + h / 2.0, k2));
        let expected = 2.0 * k3 - u;
        let tb = make_builtin("trapezoid").unwrap();
        let got = step(&p, &tb, t, &DVector::from_element(1, u), h).unwrap();
        assert!((got[0] - expected).abs() < 1e-15, "{} vs {expected}", got[0]);
    }

    #[test]
    fn solve_counts() {
        let p = linear_scalar(-1.0);
        for (name, count) in [("third_order_5stage_v1", 3), ("third_order_5stage_v2", 4), ("fb_euler", 1), ("midpoint", 1)] {
            let tb = make_builtin(name).unwrap();
            let mut ws = StepWorkspace::default();
            step_with_workspace(&p, &tb, 0.0, p.u0(), 0.1, &mut ws).unwrap();
            assert_eq!(ws.linear_solves, count, "{name}");
        }
    }

    #[test]
    fn exact_step_count() {
        let p = linear_scalar(-1.0);
        let tb = make_builtin("midpoint").unwrap();
        let out = integrate(&p, &tb, 1.0, 0.1).unwrap();
        assert_eq!(out.stats.steps, 10);
        assert!(matches!(integrate(&p, &tb, 1.0, 0.3), Err(Error::Config(_))));
    }

    #[test]
    fn constraint_rows_are_enforced() {
        // u' = -A u with a replaced row demanding u_0 = u_2.
        let n = 3;
        let p = SemiLinearProblem::new(
            DVector::from_vec(vec![1.0, 0.0, 1.0]),
            |_, _| DVector::from_vec(vec![0.0, 1.0, 0.0]),
            move |_, _| DMatrix::from_row_slice(n, n, &[-2.0, 1.0, 0.0, 1.0, -2.0, 1.0, 0.0, 1.0, -3.0]),
        )
        .with_constraints(vec![ConstraintRow::new(0, |_, _| {
            (DVector::from_vec(vec![1.0, 0.0, -1.0]), 0.0)
        })])
        .unwrap();
        let tb = make_builtin("third_order_5stage_v2").unwrap();
        let mut ws = StepWorkspace::default();
        let next = step_with_workspace(&p, &tb, 0.0, p.u0(), 0.2, &mut ws).unwrap();
        assert!(ws.max_constraint_residual < 1e-14);
        for k in tb.implicit_stages() {
            assert!((ws.stages[k][0] - ws.stages[k][2]).abs() < 1e-14);
        }
        assert!((next[0] - next[2]).abs() < 1e-14);
    }

    #[test]
    fn constraint_validation() {
        let p = linear_scalar(-1.0);
        let row = || ConstraintRow::new(0, |_, _| (DVector::from_element(1, 1.0), 0.0));
        assert!(p.clone().with_constraints(vec![row(), row()]).is_err());
        assert!(p
            .with_constraints(vec![ConstraintRow::new(3, |_, _| (DVector::zeros(1), 0.0))])
            .is_err());
    }

    #[test]
    fn singular_stage_reports_stage() {
        // 1 - h G = 0 for h = 1, G = 1.
        let p = linear_scalar(1.0);
        let tb = make_builtin("fb_euler").unwrap();
        match step(&p, &tb, 0.0, p.u0(), 1.0).unwrap_err() {
            Error::StageSolve { stage, source } => {
                assert_eq!(stage, 2);
                assert!(matches!(*source, Error::SingularMatrix { .. }));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn non_finite_stage_is_divergence() {
        let p = SemiLinearProblem::new(
            DVector::from_element(1, 1.0),
            |_, _| DVector::from_element(1, f64::NAN),
            |_, _| DMatrix::zeros(1, 1),
        );
        let tb = make_builtin("midpoint").unwrap();
        assert!(matches!(step(&p, &tb, 0.0, p.u0(), 0.1), Err(Error::Divergence { .. })));
    }
}
