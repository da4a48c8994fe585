use super::{ConvergenceReport, ConvergenceRow, StabilityReport, StepSizeSearchResult};
use crate::error::{Error, Result};
use crate::tableau::StabilityClass;
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            _ => Err(Error::Config(format!("unknown format `{s}`, expected csv or md"))),
        }
    }
}

/// `1/16` for reciprocal integers, shortest decimal otherwise.
pub fn format_step(h: f64) -> String {
    let inv = 1.0 / h;
    if h < 1.0 && (inv - inv.round()).abs() <= 1e-9 * inv {
        format!("1/{}", inv.round() as u64)
    } else {
        format!("{h}")
    }
}

/// Three significant digits, two-digit exponent: `6.64e-02`.
fn sci3(x: f64) -> String {
    let s = format!("{x:.2e}");
    match s.split_once('e') {
        Some((m, e)) => {
            let exp: i32 = e.parse().unwrap_or(0);
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{m}e{sign}{:02}", exp.abs())
        }
        None => s,
    }
}

/// Three significant digits in plain notation where reasonable.
fn sig3(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..4).contains(&mag) {
        let decimals = (2 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci3(x)
    }
}

const CSV_HEADER: [&str; 7] = ["scheme", "problem", "reference", "h", "error", "rate", "constraint_residual"];

/// CSV is one row per `(report, h)`; markdown puts each report on one row
/// as `Method | E(h1) | O | E(h2) | O | ...`. `lossless` writes 17
/// significant digits in CSV so [`parse_convergence_csv`] inverts it.
pub fn render_convergence(reports: &[ConvergenceReport], format: Format, lossless: bool) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(CSV_HEADER);
            let num = |x: f64| if lossless { format!("{x:.16e}") } else { sci3(x) };
            for rep in reports {
                for row in &rep.rows {
                    let error = row.error.map_or("divergent".to_string(), num);
                    let rate = row
                        .rate
                        .map_or(String::new(), |r| if lossless { format!("{r:.16e}") } else { format!("{r:.2}") });
                    let resid = if lossless {
                        format!("{:.16e}", rep.max_constraint_residual)
                    } else {
                        sci3(rep.max_constraint_residual)
                    };
                    let _ = w.write_record([
                        rep.scheme.as_str(),
                        rep.problem.as_str(),
                        rep.reference.as_str(),
                        &format!("{}", row.h),
                        &error,
                        &rate,
                        &resid,
                    ]);
                }
            }
            String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
        }
        Format::Markdown => {
            let hs: Vec<f64> = reports.first().map_or(Vec::new(), |r| r.rows.iter().map(|x| x.h).collect());
            let mut out = String::from("| Method |");
            for h in &hs {
                let _ = write!(out, " E({}) | O |", format_step(*h));
            }
            out.push_str("\n|---|");
            for _ in &hs {
                out.push_str("---|---|");
            }
            out.push('\n');
            for rep in reports {
                let _ = write!(out, "| {} |", rep.scheme);
                for row in &rep.rows {
                    let e = row.error.map_or("divergent".to_string(), sci3);
                    let r = row.rate.map_or("-".to_string(), |r| format!("{r:.2}"));
                    let _ = write!(out, " {e} | {r} |");
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Inverse of the CSV form of [`render_convergence`]; rows are grouped
/// into reports by consecutive `(scheme, problem, reference)`.
pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceReport>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut reports: Vec<ConvergenceReport> = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse { line, message: format!("cannot parse `{s}`") })
        };
        let row = ConvergenceRow {
            h: num(&rec[3])?,
            error: if &rec[4] == "divergent" { None } else { Some(num(&rec[4])?) },
            rate: if rec[5].is_empty() { None } else { Some(num(&rec[5])?) },
        };
        let resid = num(&rec[6])?;
        match reports.last_mut() {
            Some(r) if r.scheme == rec[0] && r.problem == rec[1] && r.reference == rec[2] => r.rows.push(row),
            _ => reports.push(ConvergenceReport {
                scheme: rec[0].to_string(),
                problem: rec[1].to_string(),
                reference: rec[2].to_string(),
                rows: vec![row],
                max_constraint_residual: resid,
            }),
        }
    }
    Ok(reports)
}

/// Maximum stable steps, one row per parameter value, one column per scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizeTable {
    pub parameter: String,
    pub schemes: Vec<String>,
    pub rows: Vec<(f64, Vec<StepSizeSearchResult>)>,
}

fn step_cell(r: &StepSizeSearchResult) -> String {
    if r.capped {
        format!("> {:e}", r.config.h_cap)
    } else {
        sig3(r.h_max)
    }
}

pub fn render_step_sizes(table: &StepSizeTable, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec![table.parameter.clone()];
            header.extend(table.schemes.iter().cloned());
            let _ = w.write_record(&header);
            for (p, results) in &table.rows {
                let mut rec = vec![format!("{p}")];
                rec.extend(results.iter().map(step_cell));
                let _ = w.write_record(&rec);
            }
            out = String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default();
        }
        Format::Markdown => {
            let _ = write!(out, "| {} |", table.parameter);
            for s in &table.schemes {
                let _ = write!(out, " {s} |");
            }
            out.push_str("\n|---|");
            for _ in &table.schemes {
                out.push_str("---|");
            }
            out.push('\n');
            for (p, results) in &table.rows {
                let _ = write!(out, "| {p} |");
                for r in results {
                    let _ = write!(out, " {} |", step_cell(r));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn render_stability(rep: &StabilityReport, format: Format) -> String {
    let class = match rep.probe.classification {
        StabilityClass::AStableEvidence => "A-stable (sampled)".to_string(),
        StabilityClass::LStableEvidence => "L-stable (sampled)".to_string(),
        StabilityClass::UnstableSample(z) => format!("unstable sample at {z}"),
    };
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("re,im,modulus\n");
            for s in &rep.samples {
                let m = s.modulus.map_or("pole".to_string(), |m| format!("{m:.16e}"));
                let _ = writeln!(out, "{:e},{:e},{m}", s.z.re, s.z.im);
            }
        }
        Format::Markdown => {
            let _ = writeln!(out, "Scheme: {}", rep.scheme);
            let _ = writeln!(out, "Classification: {class}");
            let _ = writeln!(
                out,
                "Max sampled |R|: {} at {}; |R({:e})| = {}\n",
                sig3(rep.probe.sampled_max_modulus),
                rep.probe.argmax,
                crate::tableau::LIMIT_PROBE_Z,
                sci3(rep.probe.limit_modulus)
            );
            out.push_str("| z | abs(R(z)) |\n|---|---|\n");
            for s in rep.samples.iter().filter(|s| s.z.im == 0.0) {
                let m = s.modulus.map_or("pole".to_string(), sci3);
                let _ = writeln!(out, "| {:e} | {m} |", s.z.re);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SearchConfig;
    use proptest::prelude::*;

    fn report() -> ConvergenceReport {
        ConvergenceReport {
            scheme: "midpoint".into(),
            problem: "diffusion(kappa=1,n=129)".into(),
            reference: "exact".into(),
            rows: vec![
                ConvergenceRow { h: 0.0625, error: Some(9.49e-5), rate: None },
                ConvergenceRow { h: 0.03125, error: Some(2.37e-5), rate: Some(2.0014) },
                ConvergenceRow { h: 0.015625, error: None, rate: None },
            ],
            max_constraint_residual: 1e-15,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(render_convergence(&[], Format::Csv, false).lines().count(), 1);
        assert_eq!(render_convergence(&[], Format::Markdown, false).lines().count(), 2);
    }

    #[test]
    fn markdown_layout() {
        let md = render_convergence(&[report()], Format::Markdown, false);
        let mut lines = md.lines();
        assert_eq!(lines.next().unwrap(), "| Method | E(1/16) | O | E(1/32) | O | E(1/64) | O |");
        lines.next();
        assert_eq!(lines.next().unwrap(), "| midpoint | 9.49e-05 | - | 2.37e-05 | 2.00 | divergent | - |");
    }

    #[test]
    fn csv_quotes_labels_and_marks_divergence() {
        let text = render_convergence(&[report()], Format::Csv, false);
        assert!(text.contains("\"diffusion(kappa=1,n=129)\""));
        assert!(text.lines().nth(3).unwrap().contains(",divergent,,"));
    }

    #[test]
    fn step_cells() {
        let mk = |h_max: f64, capped: bool| StepSizeSearchResult {
            scheme: "x".into(),
            h_max,
            bracket: (h_max, h_max * 1.04),
            capped,
            trace: vec![],
            config: SearchConfig::default(),
        };
        let table = StepSizeTable {
            parameter: "kappa".into(),
            schemes: vec!["fb_euler".into(), "trapezoid".into(), "ars222".into()],
            rows: vec![(1.0, vec![mk(1e4, true), mk(4.5912, false), mk(0.006812, false)])],
        };
        let md = render_step_sizes(&table, Format::Markdown);
        assert!(md.contains("| 1 | > 1e4 | 4.59 | 0.00681 |"), "{md}");
    }

    #[test]
    fn step_labels() {
        assert_eq!(format_step(1.0 / 16.0), "1/16");
        assert_eq!(format_step(1.0 / 131072.0), "1/131072");
        assert_eq!(format_step(0.3), "0.3");
        assert_eq!(format_step(2.0), "2");
    }

    proptest! {
        #[test]
        fn lossless_csv_round_trips(
            errs in proptest::collection::vec(proptest::option::of(1e-16f64..1.0), 1..6),
            name in "[a-z_]{1,12}",
            resid in 0.0f64..1e-9,
        ) {
            let mut rows = Vec::new();
            for (k, e) in errs.iter().enumerate() {
                let prev = k.checked_sub(1).and_then(|p| errs[p]);
                let rate = match (prev, e) { (Some(a), Some(b)) => Some((a / b).log2()), _ => None };
                rows.push(ConvergenceRow { h: 0.5f64.powi(k as i32 + 4), error: *e, rate });
            }
            let reps = vec![ConvergenceReport {
                scheme: name,
                problem: "p, with comma".into(),
                reference: "ref".into(),
                rows,
                max_constraint_residual: resid,
            }];
            let text = render_convergence(&reps, Format::Csv, true);
            prop_assert_eq!(parse_convergence_csv(&text).unwrap(), reps);
        }
    }
}
