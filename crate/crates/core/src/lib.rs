//! Semi-implicit-explicit Runge-Kutta methods for `u' = f(t, u) + G(t, u) u`,
//! with finite-difference test problems and convergence and stability
//! experiments.

pub mod error;
pub mod experiments;
pub mod fd;
pub mod integrator;
pub mod linalg;
pub mod problems;
pub mod tableau;

pub use error::{Error, Result};
pub use integrator::{integrate, step, ConstraintRow, SemiLinearProblem, TimeStepper};
pub use tableau::{make_builtin, ButcherPair, Coefficients};
