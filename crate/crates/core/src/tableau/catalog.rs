//! Built-in schemes and the three-stage second-order family.

use super::{ButcherPair, Coefficients};
use crate::error::{Error, Result};

const NAMES: [&str; 8] = [
    "fb_euler",
    "midpoint",
    "trapezoid",
    "l_stable_second_order",
    "embedded_imex_second_order",
    "third_order_4stage",
    "third_order_5stage_v1",
    "third_order_5stage_v2",
];

/// Identifiers accepted by [`make_builtin`], in catalog order.
pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Construct one of the built-in schemes by identifier.
pub fn make_builtin(name: &str) -> Result<ButcherPair> {
    let pair = match name {
        "fb_euler" => fb_euler(),
        "midpoint" => midpoint(),
        "trapezoid" => make_alpha_second_order(0.5, 1.0, 0.0)?,
        "l_stable_second_order" => make_l_stable_second_order(1.0)?,
        "embedded_imex_second_order" => embedded_imex_second_order(),
        "third_order_4stage" => third_order_4stage(),
        "third_order_5stage_v1" => third_order_5stage_v1(),
        "third_order_5stage_v2" => third_order_5stage_v2(),
        _ => {
            return Err(Error::UnknownScheme {
                name: name.to_string(),
                valid: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(pair.with_name(name))
}

fn build(name: &str, order: u8, explicit: Coefficients, implicit: Coefficients) -> ButcherPair {
    ButcherPair::new(name, order, explicit, implicit)
        .unwrap_or_else(|e| panic!("built-in tableau `{name}` is invalid: {e}"))
}

fn fb_euler() -> ButcherPair {
    build(
        "fb_euler",
        1,
        Coefficients {
            a: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            b: vec![1.0, 0.0],
            c: vec![0.0, 1.0],
        },
        Coefficients {
            a: vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            b: vec![0.0, 0.0, 1.0],
            c: vec![0.0, 1.0],
        },
    )
}

fn midpoint() -> ButcherPair {
    build(
        "midpoint",
        2,
        Coefficients {
            a: vec![vec![0.0, 0.0], vec![0.5, 0.0]],
            b: vec![0.0, 1.0],
            c: vec![0.0, 0.5],
        },
        Coefficients {
            a: vec![vec![0.0, 0.0], vec![0.0, 0.5]],
            b: vec![0.0, 1.0, 0.0],
            c: vec![0.0, 0.5],
        },
    )
}

/// Three-stage second-order schemes satisfying the α-condition, with free
/// parameters `b4` (the extra implicit weight) and `a21`.
pub fn make_alpha_second_order(alpha: f64, b4: f64, a21: f64) -> Result<ButcherPair> {
    if alpha == 0.0 {
        return Err(Error::Parameter(
            "alpha must be nonzero (weights divide by 2 alpha)".into(),
        ));
    }
    if !(alpha.is_finite() && b4.is_finite() && a21.is_finite()) {
        return Err(Error::Parameter("alpha, b4, a21 must be finite".into()));
    }
    let two_a = 2.0 * alpha;
    let explicit = Coefficients {
        a: vec![
            vec![0.0, 0.0, 0.0],
            vec![alpha, 0.0, 0.0],
            vec![(two_a - 1.0) / 2.0, 0.5, 0.0],
        ],
        b: vec![(two_a - 1.0) / two_a, 1.0 / two_a, 0.0],
        c: vec![0.0, alpha, alpha],
    };
    let implicit = Coefficients {
        a: vec![
            vec![0.0, 0.0, 0.0],
            vec![a21, alpha - a21, 0.0],
            vec![(two_a - 1.0) / 2.0, (1.0 - two_a * b4) / 2.0, alpha * b4],
        ],
        b: vec![
            (two_a - 1.0) / two_a,
            (1.0 - two_a * b4) / two_a,
            0.0,
            b4,
        ],
        c: vec![0.0, alpha, alpha],
    };
    ButcherPair::new(
        format!("alpha_second_order(alpha={alpha}, b4={b4}, a21={a21})"),
        2,
        explicit,
        implicit,
    )
}

/// The L-stable member of the α-family with equal diagonal entries
/// `α - a21 = b4`.
///
/// The stability numerator's `z²` coefficient vanishes when
/// `2α b4² - 2(α + 1) b4 + 1 = 0`; of the two roots the one giving
/// `a21, b4 ∈ [0, 1]` is selected (the smaller `b4` if both qualify).
pub fn make_l_stable_second_order(alpha: f64) -> Result<ButcherPair> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha = {alpha} must be positive")));
    }
    let root = (alpha * alpha + 1.0).sqrt();
    let branches = [
        (alpha + 1.0 - root) / (2.0 * alpha),
        (alpha + 1.0 + root) / (2.0 * alpha),
    ];
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    let b4 = branches
        .into_iter()
        .find(|&b4| b4 != 0.0 && in_unit(b4) && in_unit(alpha - b4))
        .ok_or_else(|| {
            Error::Parameter(format!(
                "alpha = {alpha}: no L-stable branch with a21, b4 in [0, 1]"
            ))
        })?;
    let a21 = alpha - b4;
    make_alpha_second_order(alpha, b4, a21)
        .map(|p| p.with_name(format!("l_stable_second_order(alpha={alpha})")))
}

/// Classical two-stage L-stable IMEX pair recast as three semi-IMEX stages;
/// the middle stage supplies the lagged state for the last implicit solve.
fn embedded_imex_second_order() -> ButcherPair {
    let g = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    build(
        "embedded_imex_second_order",
        2,
        Coefficients {
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
            ],
            b: vec![0.5, 0.0, 0.5],
            c: vec![0.0, 0.0, 1.0],
        },
        Coefficients {
            a: vec![
                vec![g, 0.0, 0.0],
                vec![1.0 - g, 0.0, 0.0],
                vec![1.0 - 2.0 * g, 0.0, g],
            ],
            b: vec![0.5, 0.0, 0.5, 0.0],
            c: vec![g, 1.0 - g, 1.0 - g],
        },
    )
}

fn third_order_4stage() -> ButcherPair {
    let b = vec![
        0.2486553715043413,
        0.04469938464765911,
        0.3828282521031255,
        0.3238169917448679,
    ];
    let mut implicit_b = b.clone();
    implicit_b.push(0.0);
    build(
        "third_order_4stage",
        3,
        Coefficients {
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.7775079538595848, 0.0, 0.0, 0.0],
                vec![0.3850382624054263, 0.2733484980719337, 0.0, 0.0],
                vec![
                    0.2905474198112961,
                    0.1784065415104640,
                    0.1894327991556034,
                    0.0,
                ],
            ],
            b,
            c: vec![
                0.0,
                0.7775079538595848,
                0.6583867604773560,
                0.6583867604773565,
            ],
        },
        Coefficients {
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5668275181562270, 0.2106804357033578, 0.0, 0.0],
                vec![
                    0.3481097445529071,
                    0.1497169356151823,
                    0.1605600803092672,
                    0.0,
                ],
                vec![
                    0.3299758037920577,
                    0.1113697479208660,
                    0.1255619659848192,
                    0.09147924277961349,
                ],
            ],
            b: implicit_b,
            c: vec![
                0.0,
                0.7775079538595848,
                0.6583867604773565,
                0.6583867604773565,
            ],
        },
    )
}

/// The last rows of both tableaus double as the weights, so `u_{n+1} = K_s`:
/// `b_s = 0` and `b_{s+1} = a_{ss}`.
fn stiffly_accurate(
    name: &str,
    explicit_a: Vec<Vec<f64>>,
    explicit_c: Vec<f64>,
    implicit_a: Vec<Vec<f64>>,
    implicit_c: Vec<f64>,
) -> ButcherPair {
    let s = explicit_c.len();
    let explicit_b = explicit_a[s - 1].clone();
    let mut implicit_b = implicit_a[s - 1].clone();
    implicit_b[s - 1] = 0.0;
    implicit_b.push(implicit_a[s - 1][s - 1]);
    build(
        name,
        3,
        Coefficients {
            a: explicit_a,
            b: explicit_b,
            c: explicit_c,
        },
        Coefficients {
            a: implicit_a,
            b: implicit_b,
            c: implicit_c,
        },
    )
}

fn third_order_5stage_v1() -> ButcherPair {
    stiffly_accurate(
        "third_order_5stage_v1",
        vec![
            vec![0.0; 5],
            vec![0.6411692131552690, 0.0, 0.0, 0.0, 0.0],
            vec![0.3905895060040396, 0.8631427692385082, 0.0, 0.0, 0.0],
            vec![
                0.4274711580740817,
                0.3555517808854274,
                0.21697706104049089,
                0.0,
                0.0,
            ],
            vec![
                0.3099153072147496,
                0.3259623915325679,
                -0.2881752086128284,
                0.6522975098655108,
                0.0,
            ],
        ],
        vec![0.0, 0.6411692131552690, 1.2537322752425418, 1.0, 1.0],
        vec![
            vec![0.0; 5],
            vec![0.3031200089371227, 0.3380492042181466, 0.0, 0.0, 0.0],
            vec![
                0.3905895060040396,
                0.4629099915955034,
                0.4002327776430044,
                0.0,
                0.0,
            ],
            vec![
                0.4341539203752613,
                0.3418741772176282,
                0.2239719024071105,
                0.0,
                0.0,
            ],
            vec![
                0.3099153072147496,
                0.3259623915325679,
                -0.2881752086128284,
                0.0,
                0.6522975098655108,
            ],
        ],
        vec![0.0, 0.641169213155269, 1.253732275242547, 1.0, 1.0],
    )
}

fn third_order_5stage_v2() -> ButcherPair {
    stiffly_accurate(
        "third_order_5stage_v2",
        vec![
            vec![0.0; 5],
            vec![0.3772977846271119, 0.0, 0.0, 0.0, 0.0],
            vec![0.3210924473454751, 0.6789075526545275, 0.0, 0.0, 0.0],
            vec![
                0.2958359189953578,
                0.3278679213986500,
                0.3762961596059923,
                0.0,
                0.0,
            ],
            vec![
                0.05826227065874467,
                0.7093884017687849,
                -0.2070619980550040,
                0.4394113256274744,
                0.0,
            ],
        ],
        vec![0.0, 0.3772977846271119, 1.0, 1.0, 1.0],
        vec![
            vec![0.0; 5],
            vec![0.2709023139105694, 0.1063954707165423, 0.0, 0.0, 0.0],
            vec![
                0.3210924473454735,
                0.4580508073137827,
                0.2208567453407465,
                0.0,
                0.0,
            ],
            vec![
                0.4458748098646118,
                0.08691986121002987,
                0.3372847407465245,
                0.1299205881788340,
                0.0,
            ],
            vec![
                0.05826227065874504,
                0.7093884017687844,
                -0.2070619980550035,
                -0.2178085843289785,
                0.6572199099564526,
            ],
        ],
        vec![0.0, 0.3772977846271117, 1.0, 1.0, 1.0],
    )
}
