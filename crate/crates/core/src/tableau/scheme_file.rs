//! Plain-text scheme files.
//!
//! One `key = value` pair per line; `#` starts a comment. Coefficient lists
//! are whitespace separated and matrices are row-major:
//!
//! ```text
//! name = fb_euler
//! stages = 2
//! order = 1
//! explicit_a = 0 0 1 0
//! explicit_b = 1 0
//! explicit_c = 0 1
//! implicit_a = 0 0 0 1
//! implicit_b = 0 0 1
//! implicit_c = 0 1
//! ```
//!
//! `implicit_b` holds `s + 1` weights. [`write_scheme_file`] emits every
//! coefficient with 17 significant digits so files round-trip exactly.

use super::{ButcherPair, Coefficients};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

const KEYS: [&str; 9] = [
    "name",
    "stages",
    "order",
    "explicit_a",
    "explicit_b",
    "explicit_c",
    "implicit_a",
    "implicit_b",
    "implicit_c",
];

pub fn write_scheme_file(tb: &ButcherPair) -> String {
    let s = tb.stages();
    let list = |v: &mut dyn Iterator<Item = f64>| {
        v.map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
    };
    let row_major = |m: &nalgebra::DMatrix<f64>| {
        list(&mut (0..s).flat_map(|i| (0..s).map(move |j| m[(i, j)])))
    };
    let mut out = String::new();
    let _ = writeln!(out, "# semimex scheme file");
    let _ = writeln!(out, "name = {}", tb.name());
    let _ = writeln!(out, "stages = {s}");
    let _ = writeln!(out, "order = {}", tb.declared_order());
    let _ = writeln!(out, "explicit_a = {}", row_major(tb.explicit_a()));
    let _ = writeln!(out, "explicit_b = {}", list(&mut tb.explicit_b().iter().copied()));
    let _ = writeln!(out, "explicit_c = {}", list(&mut tb.explicit_c().iter().copied()));
    let _ = writeln!(out, "implicit_a = {}", row_major(tb.implicit_a()));
    let _ = writeln!(out, "implicit_b = {}", list(&mut tb.implicit_b().iter().copied()));
    let _ = writeln!(out, "implicit_c = {}", list(&mut tb.implicit_c().iter().copied()));
    out
}

pub fn parse_scheme_file(text: &str) -> Result<ButcherPair> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key `{key}`"),
            });
        }
        if fields.insert(key, (line_no, value.trim())).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let get = |key: &str| {
        fields.get(key).copied().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing key `{key}`"),
        })
    };
    let int = |key: &str| -> Result<usize> {
        let (line, v) = get(key)?;
        v.parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{key}` must be a non-negative integer, got `{v}`"),
        })
    };
    let floats = |key: &str, len: usize| -> Result<Vec<f64>> {
        let (line, v) = get(key)?;
        let vals = v
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{key}`: cannot parse `{t}` as a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != len {
            return Err(Error::Parse {
                line,
                message: format!("`{key}` has {} values, expected {len}", vals.len()),
            });
        }
        Ok(vals)
    };
    let s = int("stages")?;
    if s == 0 {
        return Err(Error::Parse {
            line: get("stages")?.0,
            message: "stages must be at least 1".into(),
        });
    }
    let order = int("order")?;
    let order_line = get("order")?.0;
    let order = u8::try_from(order).map_err(|_| Error::Parse {
        line: order_line,
        message: format!("order {order} out of range"),
    })?;
    let rows = |flat: Vec<f64>| flat.chunks(s).map(|r| r.to_vec()).collect::<Vec<_>>();
    let explicit = Coefficients {
        a: rows(floats("explicit_a", s * s)?),
        b: floats("explicit_b", s)?,
        c: floats("explicit_c", s)?,
    };
    let implicit = Coefficients {
        a: rows(floats("implicit_a", s * s)?),
        b: floats("implicit_b", s + 1)?,
        c: floats("implicit_c", s)?,
    };
    ButcherPair::new(get("name")?.1, order, explicit, implicit)
}
