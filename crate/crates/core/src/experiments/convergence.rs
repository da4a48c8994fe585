use crate::error::{Error, Result};
use crate::integrator::{integrate_with, TimeStepper};
use nalgebra::DVector;
use rayon::prelude::*;

/// Errors below this are treated as roundoff and excluded from rate checks.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Final-time state the errors are measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub label: String,
    pub state: DVector<f64>,
}

impl ReferenceSolution {
    pub fn new(label: impl Into<String>, state: DVector<f64>) -> Self {
        ReferenceSolution {
            label: label.into(),
            state,
        }
    }

    /// Run `stepper` with step `h` and use the result.
    pub fn computed(
        stepper: &dyn TimeStepper,
        u0: &DVector<f64>,
        t0: f64,
        t_end: f64,
        h: f64,
    ) -> Result<Self> {
        let out = integrate_with(stepper, u0, t0, t_end, h, false)?;
        Ok(ReferenceSolution {
            label: format!("{} h={}", stepper.label(), super::format_step(h)),
            state: out.state,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    /// `None` when the run diverged.
    pub error: Option<f64>,
    /// `log2(E(2h) / E(h))`; `None` on the first row or next to a divergent row.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub problem: String,
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
    /// Largest relative constraint-row residual over every implicit stage.
    pub max_constraint_residual: f64,
}

impl ConvergenceReport {
    pub fn any_divergent(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_none())
    }

    /// Rates whose two errors both lie above [`ROUNDOFF_FLOOR`].
    pub fn clean_rates(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .filter_map(|w| match (w[0].error, w[1].error, w[1].rate) {
                (Some(a), Some(b), Some(r)) if a >= ROUNDOFF_FLOOR && b >= ROUNDOFF_FLOOR => Some(r),
                _ => None,
            })
            .collect()
    }

    pub fn error_at(&self, h: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.h - h).abs() <= 1e-12 * h)
            .and_then(|r| r.error)
    }
}

/// `E(h) = ‖u_h(t_end) - u_ref‖_∞ / ‖u_ref‖_∞` for each `h`, which must
/// halve from one entry to the next. Runs are independent and execute in
/// parallel; the report does not depend on completion order.
pub fn convergence_study(
    stepper: &dyn TimeStepper,
    problem_label: &str,
    u0: &DVector<f64>,
    t0: f64,
    t_end: f64,
    h_list: &[f64],
    reference: &ReferenceSolution,
) -> Result<ConvergenceReport> {
    for w in h_list.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "step sizes must halve successively, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    for &h in h_list {
        crate::integrator::step_count(t0, t_end, h)?;
    }
    let scale = reference.state.amax();
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Config("reference solution must be finite and nonzero".into()));
    }
    let runs: Vec<(Option<f64>, f64)> = h_list
        .par_iter()
        .map(|&h| match integrate_with(stepper, u0, t0, t_end, h, false) {
            Ok(out) if out.state.iter().all(|v| v.is_finite()) => (
                Some((&out.state - &reference.state).amax() / scale),
                out.stats.max_constraint_residual,
            ),
            _ => (None, 0.0),
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(h_list.len());
    for (k, (&h, (error, _))) in h_list.iter().zip(&runs).enumerate() {
        let rate = match (k.checked_sub(1).and_then(|p| rows[p].error), error) {
            (Some(prev), Some(e)) if *e > 0.0 && prev > 0.0 => Some((prev / e).log2()),
            _ => None,
        };
        rows.push(ConvergenceRow { h, error: *error, rate });
    }
    Ok(ConvergenceReport {
        scheme: stepper.label(),
        problem: problem_label.to_string(),
        reference: reference.label.clone(),
        rows,
        max_constraint_residual: runs.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}
