use crate::integrator::SemiLinearProblem;
use nalgebra::{DMatrix, DVector};

/// `y' = cos(t) y + (cos t - y) y`, `y(0) = 1`.
pub fn scalar_problem() -> SemiLinearProblem {
    SemiLinearProblem::new(
        DVector::from_element(1, 1.0),
        |t, y| DVector::from_element(1, t.cos() * y[0]),
        |t, y| DMatrix::from_element(1, 1, t.cos() - y[0]),
    )
    .with_exact(|t| DVector::from_element(1, scalar_exact(t)))
}

/// `y(t) = e^{2 sin t} / (1 + ∫_0^t e^{2 sin s} ds)`.
pub fn scalar_exact(t: f64) -> f64 {
    let integral = if t == 0.0 {
        0.0
    } else {
        quadrature::clenshaw_curtis::integrate(|s: f64| (2.0 * s.sin()).exp(), 0.0, t, 1e-14)
            .integral
    };
    (2.0 * t.sin()).exp() / (1.0 + integral)
}
