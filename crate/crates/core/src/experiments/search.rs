use crate::error::{Error, Result};
use crate::integrator::{integrate_until_steady, SteadyOutcome, SteadyStatus, TimeStepper};
use nalgebra::DVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub h0: f64,
    pub growth: f64,
    /// Bisection stops once `h_fail / h_pass ≤ 1 + bracket_tol`.
    pub bracket_tol: f64,
    pub max_steps_per_trial: usize,
    pub h_cap: f64,
    /// Relative gap to the reference that counts as converged.
    pub tolerance: f64,
    /// Halvings tried when `h0` itself fails.
    pub max_shrink: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            h0: 1e-3,
            growth: 2.0,
            bracket_tol: 0.05,
            max_steps_per_trial: 100_000,
            h_cap: 1e4,
            tolerance: 0.01,
            max_shrink: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub h: f64,
    pub outcome: SteadyOutcome,
}

impl Trial {
    pub fn passed(&self) -> bool {
        self.outcome.status == SteadyStatus::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSizeSearchResult {
    pub scheme: String,
    /// Largest step seen to converge; `0` if none did.
    pub h_max: f64,
    /// `(h_pass, h_fail)`; `h_fail` is infinite when capped.
    pub bracket: (f64, f64),
    /// The cap itself converged.
    pub capped: bool,
    pub trace: Vec<Trial>,
    pub config: SearchConfig,
}

impl StepSizeSearchResult {
    pub fn max_constraint_residual(&self) -> f64 {
        self.trace
            .iter()
            .map(|t| t.outcome.max_constraint_residual)
            .fold(0.0, f64::max)
    }
}

/// Largest fixed step for which integration from `u0` reaches `reference`.
///
/// Grows `h` geometrically from `h0` until a trial fails (divergence or
/// the step budget), then bisects the bracket in log scale. If `h0` fails
/// the search shrinks first. A trial converging at `h_cap` ends the search.
pub fn max_stable_step(
    stepper: &dyn TimeStepper,
    u0: &DVector<f64>,
    t0: f64,
    reference: &DVector<f64>,
    cfg: &SearchConfig,
) -> Result<StepSizeSearchResult> {
    if !(cfg.h0 > 0.0 && cfg.growth > 1.0 && cfg.bracket_tol > 0.0 && cfg.h_cap >= cfg.h0) {
        return Err(Error::Config(format!("invalid search configuration {cfg:?}")));
    }
    let mut trace = Vec::new();
    let mut trial = |h: f64| -> Result<bool> {
        let outcome = integrate_until_steady(stepper, u0, t0, h, reference, cfg.tolerance, cfg.max_steps_per_trial)?;
        let t = Trial { h, outcome };
        let ok = t.passed();
        trace.push(t);
        Ok(ok)
    };
    let done = |h_max, bracket, capped, trace| StepSizeSearchResult {
        scheme: stepper.label(),
        h_max,
        bracket,
        capped,
        trace,
        config: cfg.clone(),
    };

    let (mut lo, mut hi);
    if trial(cfg.h0)? {
        lo = cfg.h0;
        loop {
            if lo >= cfg.h_cap {
                return Ok(done(lo, (lo, f64::INFINITY), true, trace));
            }
            let next = (lo * cfg.growth).min(cfg.h_cap);
            if trial(next)? {
                lo = next;
            } else {
                hi = next;
                break;
            }
        }
    } else {
        hi = cfg.h0;
        let mut found = None;
        for _ in 0..cfg.max_shrink {
            let next = hi / cfg.growth;
            if trial(next)? {
                found = Some(next);
                break;
            }
            hi = next;
        }
        match found {
            Some(h) => lo = h,
            None => return Ok(done(0.0, (0.0, hi), false, trace)),
        }
    }
    while hi / lo > 1.0 + cfg.bracket_tol {
        let mid = (lo * hi).sqrt();
        if trial(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(done(lo, (lo, hi), false, trace))
}
