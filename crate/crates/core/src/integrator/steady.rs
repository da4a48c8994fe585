use super::{StepStats, TimeStepper};
use crate::error::{Error, Result};
use nalgebra::DVector;

/// States with `‖u‖_∞` above this count as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStatus {
    Converged,
    Diverged,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyOutcome {
    pub status: SteadyStatus,
    pub steps: usize,
    pub t: f64,
    /// `‖u - reference‖_∞ / ‖reference‖_∞` at the last finite state.
    pub gap: f64,
    pub max_constraint_residual: f64,
}

/// Step with fixed `h` until the relative gap to `reference` drops below
/// `tolerance`, the state blows up, or `max_steps` steps have been taken.
/// Step failures (singular stage systems, non-finite stages) count as
/// divergence.
pub fn integrate_until_steady(
    stepper: &dyn TimeStepper,
    u0: &DVector<f64>,
    t0: f64,
    h: f64,
    reference: &DVector<f64>,
    tolerance: f64,
    max_steps: usize,
) -> Result<SteadyOutcome> {
    let scale = reference.amax();
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Config("steady reference must be finite and nonzero".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("step size {h} must be positive")));
    }
    let gap = |u: &DVector<f64>| (u - reference).amax() / scale;
    let mut u = u0.clone();
    let mut last_gap = gap(&u);
    let mut stats = StepStats::default();
    let outcome = |status, steps, t, gap, stats: &StepStats| SteadyOutcome {
        status,
        steps,
        t,
        gap,
        max_constraint_residual: stats.max_constraint_residual,
    };
    if last_gap < tolerance {
        return Ok(outcome(SteadyStatus::Converged, 0, t0, last_gap, &stats));
    }
    for k in 0..max_steps {
        let t = t0 + k as f64 * h;
        let t_next = t0 + (k + 1) as f64 * h;
        match stepper.step(t, &u, h, &mut stats) {
            Ok(next) => u = next,
            Err(_) => return Ok(outcome(SteadyStatus::Diverged, k + 1, t_next, last_gap, &stats)),
        }
        let norm = u.amax();
        if !norm.is_finite() || norm > DIVERGENCE_THRESHOLD {
            return Ok(outcome(SteadyStatus::Diverged, k + 1, t_next, last_gap, &stats));
        }
        last_gap = gap(&u);
        if last_gap < tolerance {
            return Ok(outcome(SteadyStatus::Converged, k + 1, t_next, last_gap, &stats));
        }
    }
    Ok(outcome(SteadyStatus::TimedOut, max_steps, t0 + max_steps as f64 * h, last_gap, &stats))
}
