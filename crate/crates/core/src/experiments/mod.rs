//! Convergence studies, maximum-stable-step searches and stability reports,
//! with CSV and markdown rendering.

mod convergence;
mod render;
mod search;
mod stability_report;

pub use convergence::{convergence_study, ConvergenceReport, ConvergenceRow, ReferenceSolution, ROUNDOFF_FLOOR};
pub use render::{
    format_step, parse_convergence_csv, render_convergence, render_stability, render_step_sizes, Format,
    StepSizeTable,
};
pub use search::{max_stable_step, SearchConfig, StepSizeSearchResult, Trial};
pub use stability_report::{stability_report, StabilityReport, StabilitySample};

/// Configure the global rayon pool from `SEMIMEX_THREADS` (unset or 0 means
/// one thread per core). Has no effect once the pool exists.
pub fn init_threads_from_env() -> crate::Result<()> {
    let threads = match std::env::var("SEMIMEX_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| crate::Error::Config(format!("SEMIMEX_THREADS must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
