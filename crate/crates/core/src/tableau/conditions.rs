//! Row-sum, order and α-condition checks.

use super::{ButcherPair, STRUCTURE_TOLERANCE};

/// A condition passes when its residual is below this in magnitude.
pub const ORDER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResidual {
    pub id: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub scheme: String,
    pub order: u8,
    pub conditions: Vec<ConditionResidual>,
    /// Remarks on how the conditions were read.
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| c.residual.abs())
            .fold(0.0, f64::max)
    }
}

fn residual(id: impl Into<String>, residual: f64, tol: f64) -> ConditionResidual {
    ConditionResidual {
        id: id.into(),
        residual,
        pass: residual.abs() < tol,
    }
}

/// `Σ_{j<i} ã_ij = c̃_i` and `Σ_{j≤i} a_ij = c_i` for every stage.
pub fn check_row_sums(tb: &ButcherPair) -> ConditionReport {
    let s = tb.stages();
    let mut conditions = Vec::with_capacity(2 * s);
    for i in 0..s {
        let ex: f64 = (0..i).map(|j| tb.explicit_a()[(i, j)]).sum();
        conditions.push(residual(
            format!("explicit_row_{}", i + 1),
            ex - tb.explicit_c()[i],
            STRUCTURE_TOLERANCE,
        ));
        let im: f64 = (0..=i).map(|j| tb.implicit_a()[(i, j)]).sum();
        conditions.push(residual(
            format!("implicit_row_{}", i + 1),
            im - tb.implicit_c()[i],
            STRUCTURE_TOLERANCE,
        ));
    }
    ConditionReport {
        scheme: tb.name().to_string(),
        order: 0,
        conditions,
        notes: Vec::new(),
    }
}

/// Evaluate the order conditions up to `order` (1 or 2; higher values are
/// clamped to 2 since third-order conditions are validated empirically).
///
/// First order: `Σ_{i≤s} b̃_i = 1` and `Σ_{i≤s+1} b_i = 1`. Second order adds
/// six conditions coupling weights with abscissae, where `H(s-2)` switches
/// off the extra-weight term of the third condition for two-stage schemes.
pub fn check_order_conditions(tb: &ButcherPair, order: u8) -> ConditionReport {
    let s = tb.stages();
    let bt = tb.explicit_b();
    let b = tb.implicit_b();
    let ct = tb.explicit_c();
    let c = tb.implicit_c();
    let bx = tb.extra_weight();
    // 1-based accessors; indices outside 1..=s contribute zero.
    let at = |v: &[f64], k: usize| if (1..=s).contains(&k) { v[k - 1] } else { 0.0 };

    let mut conditions = vec![
        residual("O1.explicit_weights", bt.iter().sum::<f64>() - 1.0, ORDER_TOLERANCE),
        residual("O1.implicit_weights", b.iter().sum::<f64>() - 1.0, ORDER_TOLERANCE),
    ];
    let notes = vec![
        "first-order sums read as sum_{i<=s} of explicit weights and sum_{i<=s+1} of implicit weights"
            .to_string(),
    ];
    if order >= 2 {
        let heaviside = if s > 2 { 1.0 } else { 0.0 };
        let bc: f64 = (1..=s).map(|i| at(b, i) * at(c, i)).sum();
        let bct: f64 = (2..=s).map(|i| at(b, i) * at(ct, i)).sum();
        let btc: f64 = (1..=s).map(|i| at(bt, i) * at(c, i)).sum();
        let btct: f64 = (2..=s).map(|i| at(bt, i) * at(ct, i)).sum();
        let half = 0.5;
        conditions.extend([
            residual("O2.1", bc + bx * at(c, s - 1) - half, ORDER_TOLERANCE),
            residual("O2.2", bct + bx * at(ct, s - 1) - half, ORDER_TOLERANCE),
            residual("O2.3", bc + heaviside * bx * at(c, s) - half, ORDER_TOLERANCE),
            residual("O2.4", btc - half, ORDER_TOLERANCE),
            residual("O2.5", bct + bx * at(ct, s) - half, ORDER_TOLERANCE),
            residual("O2.6", btct - half, ORDER_TOLERANCE),
        ]);
    }
    ConditionReport {
        scheme: tb.name().to_string(),
        order: order.min(2),
        conditions,
        notes,
    }
}

/// Return `α` when `α b_j = a_sj`, `α b̃_j = ã_sj` (`j < s`), `α b_{s+1} = a_ss`
/// and `b̃_s = 0` hold. Such schemes update as
/// `u_{n+1} = K_s / α + (1 - 1/α) u_n`.
pub fn check_alpha_condition(tb: &ButcherPair) -> Option<f64> {
    let s = tb.stages();
    let tol = STRUCTURE_TOLERANCE;
    if tb.explicit_b()[s - 1].abs() >= tol {
        return None;
    }
    // (weight, last-row entry) pairs that must satisfy α·weight = entry.
    let pairs: Vec<(f64, f64)> = (0..s - 1)
        .map(|j| (tb.implicit_b()[j], tb.implicit_a()[(s - 1, j)]))
        .chain((0..s - 1).map(|j| (tb.explicit_b()[j], tb.explicit_a()[(s - 1, j)])))
        .chain(std::iter::once((tb.extra_weight(), tb.implicit_a()[(s - 1, s - 1)])))
        .collect();
    let (w, e) = pairs
        .iter()
        .copied()
        .max_by(|x, y| x.0.abs().total_cmp(&y.0.abs()))?;
    if w.abs() < tol {
        return None;
    }
    let alpha = e / w;
    if alpha == 0.0 || !alpha.is_finite() {
        return None;
    }
    pairs
        .iter()
        .all(|&(w, e)| (alpha * w - e).abs() < tol)
        .then_some(alpha)
}
