use crate::error::{Error, Result};
use nalgebra::DVector;
use std::fmt::Write as _;

/// States recorded at the initial time and after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn new(t0: f64, u0: DVector<f64>) -> Self {
        Trajectory {
            times: vec![t0],
            states: vec![u0],
        }
    }

    pub fn push(&mut self, t: f64, u: DVector<f64>) {
        self.times.push(t);
        self.states.push(u);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// CSV with header `t,u_0,...,u_{N-1}` and 17 significant digits.
pub fn write_trajectory_csv(tr: &Trajectory) -> String {
    let n = tr.states.first().map_or(0, |u| u.len());
    let mut out = String::from("t");
    for i in 0..n {
        let _ = write!(out, ",u_{i}");
    }
    out.push('\n');
    for (t, u) in tr.times.iter().zip(&tr.states) {
        let _ = write!(out, "{t:.16e}");
        for v in u.iter() {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty trajectory file".into(),
    })?;
    let width = header.split(',').count();
    let mut tr = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("cannot parse `{v}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != width {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {width} columns, got {}", vals.len()),
            });
        }
        tr.push(vals[0], DVector::from_vec(vals[1..].to_vec()));
    }
    Ok(tr)
}
