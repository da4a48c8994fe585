//! Double Butcher tableaus for semi-IMEX Runge-Kutta schemes.
//!
//! A scheme is a pair of `s`-stage tableaus. The explicit half
//! `(ã, b̃, c̃)` weights the non-stiff map `f` and the implicit half
//! `(a, b, c)` weights the stiff products `G(t, K) K`. The implicit weight
//! vector carries one extra entry `b_{s+1}`, which multiplies the product of
//! the last stage's lagged matrix `G(t + c_s h, K̃_s)` with `K_s`.
//!
//! ```text
//!  c̃ | ã            c | a
//!  --+-----         --+-----------
//!    | b̃              | b  b_{s+1}
//! ```

mod catalog;
mod conditions;
pub mod scheme_file;
mod stability;

pub use catalog::{
    builtin_names, make_alpha_second_order, make_builtin, make_l_stable_second_order,
};
pub use conditions::{
    check_alpha_condition, check_order_conditions, check_row_sums, ConditionReport,
    ConditionResidual, ORDER_TOLERANCE,
};
pub use stability::{
    eval_stability, probe_stability, SampleSpec, StabilityClass, StabilityProbeResult,
    LIMIT_PROBE_Z,
};

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Tolerance used by structural checks (row sums, weight sums).
pub const STRUCTURE_TOLERANCE: f64 = 1e-12;

/// Coefficients of one half of a double tableau, with `a` given as `s` rows of
/// length `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// A semi-IMEX scheme: explicit and implicit tableaus plus declared order.
///
/// Invariants are checked by [`ButcherPair::new`]: the explicit matrix is
/// strictly lower triangular, the implicit matrix is lower triangular, every
/// row sums to its abscissa and both weight vectors sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherPair {
    name: String,
    declared_order: u8,
    explicit_a: DMatrix<f64>,
    explicit_b: Vec<f64>,
    explicit_c: Vec<f64>,
    implicit_a: DMatrix<f64>,
    implicit_b: Vec<f64>,
    implicit_c: Vec<f64>,
}

impl ButcherPair {
    pub fn new(
        name: impl Into<String>,
        declared_order: u8,
        explicit: Coefficients,
        implicit: Coefficients,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidTableau {
            name: name.clone(),
            reason,
        };
        let s = explicit.c.len();
        if s == 0 {
            return Err(invalid("stage count must be at least 1".into()));
        }
        if !(1..=3).contains(&declared_order) {
            return Err(invalid(format!(
                "declared order {declared_order} not in 1..=3"
            )));
        }
        if explicit.b.len() != s {
            return Err(invalid(format!(
                "explicit weights have length {}, expected {s}",
                explicit.b.len()
            )));
        }
        if implicit.c.len() != s {
            return Err(invalid(format!(
                "implicit abscissae have length {}, expected {s}",
                implicit.c.len()
            )));
        }
        if implicit.b.len() != s + 1 {
            return Err(invalid(format!(
                "implicit weights have length {}, expected {}",
                implicit.b.len(),
                s + 1
            )));
        }
        let explicit_a = square(&explicit.a, s).map_err(|r| invalid(format!("explicit a: {r}")))?;
        let implicit_a = square(&implicit.a, s).map_err(|r| invalid(format!("implicit a: {r}")))?;
        let all_finite = explicit_a.iter().chain(implicit_a.iter()).all(|v| v.is_finite())
            && explicit
                .b
                .iter()
                .chain(&explicit.c)
                .chain(&implicit.b)
                .chain(&implicit.c)
                .all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("non-finite coefficient".into()));
        }
        for i in 0..s {
            for j in i..s {
                if explicit_a[(i, j)] != 0.0 {
                    return Err(invalid(format!(
                        "explicit a[{}][{}] = {} must be zero (strictly lower triangular)",
                        i + 1,
                        j + 1,
                        explicit_a[(i, j)]
                    )));
                }
                if j > i && implicit_a[(i, j)] != 0.0 {
                    return Err(invalid(format!(
                        "implicit a[{}][{}] = {} must be zero (lower triangular)",
                        i + 1,
                        j + 1,
                        implicit_a[(i, j)]
                    )));
                }
            }
        }
        let pair = ButcherPair {
            name: name.clone(),
            declared_order,
            explicit_a,
            explicit_b: explicit.b,
            explicit_c: explicit.c,
            implicit_a,
            implicit_b: implicit.b,
            implicit_c: implicit.c,
        };
        let rows = check_row_sums(&pair);
        if let Some(bad) = rows.conditions.iter().find(|c| !c.pass) {
            return Err(invalid(format!(
                "row-sum condition {} violated (residual {:e})",
                bad.id, bad.residual
            )));
        }
        let first = check_order_conditions(&pair, 1);
        if let Some(bad) = first.conditions.iter().find(|c| !c.pass) {
            return Err(invalid(format!(
                "consistency condition {} violated (residual {:e})",
                bad.id, bad.residual
            )));
        }
        Ok(pair)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Rename the scheme, keeping its coefficients.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn stages(&self) -> usize {
        self.explicit_c.len()
    }

    pub fn declared_order(&self) -> u8 {
        self.declared_order
    }

    pub fn explicit_a(&self) -> &DMatrix<f64> {
        &self.explicit_a
    }

    pub fn explicit_b(&self) -> &[f64] {
        &self.explicit_b
    }

    pub fn explicit_c(&self) -> &[f64] {
        &self.explicit_c
    }

    pub fn implicit_a(&self) -> &DMatrix<f64> {
        &self.implicit_a
    }

    /// Implicit weights `b_1, ..., b_s, b_{s+1}`.
    pub fn implicit_b(&self) -> &[f64] {
        &self.implicit_b
    }

    pub fn implicit_c(&self) -> &[f64] {
        &self.implicit_c
    }

    /// The extra implicit weight `b_{s+1}`.
    pub fn extra_weight(&self) -> f64 {
        self.implicit_b[self.stages()]
    }

    /// Stages with a nonzero diagonal entry, i.e. those that need a linear solve.
    pub fn implicit_stages(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.stages()).filter(|&i| self.implicit_a[(i, i)] != 0.0)
    }

    /// Number of linear systems solved per step.
    pub fn linear_solves_per_step(&self) -> usize {
        self.implicit_stages().count()
    }
}

fn square(rows: &[Vec<f64>], s: usize) -> std::result::Result<DMatrix<f64>, String> {
    if rows.len() != s {
        return Err(format!("{} rows, expected {s}", rows.len()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != s) {
        return Err(format!("row {} has {} entries, expected {s}", i + 1, r.len()));
    }
    Ok(DMatrix::from_fn(s, s, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Coefficients {
        Coefficients { a, b, c }
    }

    #[test]
    fn rejects_nonzero_explicit_diagonal() {
        let err = ButcherPair::new(
            "bad",
            1,
            coeffs(vec![vec![1.0]], vec![1.0], vec![1.0]),
            coeffs(vec![vec![1.0]], vec![1.0, 0.0], vec![1.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidTableau { .. }), "{err}");
    }

    #[test]
    fn rejects_upper_implicit_entry() {
        let err = ButcherPair::new(
            "bad",
            1,
            coeffs(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 1.0], vec![0.0, 1.0]),
            coeffs(
                vec![vec![0.0, 0.5], vec![0.5, 0.5]],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 1.0],
            ),
        )
        .unwrap_err();
        assert!(err.to_string().contains("lower triangular"), "{err}");
    }

    #[test]
    fn rejects_row_sum_mismatch() {
        let err = ButcherPair::new(
            "bad",
            1,
            coeffs(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![1.0, 0.0], vec![0.0, 0.9]),
            coeffs(
                vec![vec![0.0, 0.0], vec![0.0, 1.0]],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 1.0],
            ),
        )
        .unwrap_err();
        assert!(err.to_string().contains("row-sum"), "{err}");
    }

    #[test]
    fn rejects_inconsistent_weights() {
        let err = ButcherPair::new(
            "bad",
            1,
            coeffs(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![1.0, 0.0], vec![0.0, 1.0]),
            coeffs(
                vec![vec![0.0, 0.0], vec![0.0, 1.0]],
                vec![0.0, 0.0, 0.5],
                vec![0.0, 1.0],
            ),
        )
        .unwrap_err();
        assert!(err.to_string().contains("consistency"), "{err}");
    }

    #[test]
    fn rejects_wrong_weight_length() {
        let err = ButcherPair::new(
            "bad",
            1,
            coeffs(vec![vec![0.0]], vec![1.0], vec![0.0]),
            coeffs(vec![vec![0.0]], vec![1.0], vec![0.0]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("expected 2"), "{err}");
    }

    #[test]
    fn solve_count_matches_nonzero_diagonal() {
        let fb = make_builtin("fb_euler").unwrap();
        assert_eq!(fb.linear_solves_per_step(), 1);
        assert_eq!(fb.implicit_stages().collect::<Vec<_>>(), vec![1]);
    }
}
