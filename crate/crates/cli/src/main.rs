//! `semimex`: convergence studies, step-size searches and stability reports.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{parse_h_list, ConfigFile};
use rayon::prelude::*;
use semimex::experiments::{
    convergence_study, init_threads_from_env, max_stable_step, render_convergence, render_stability,
    render_step_sizes, stability_report, ConvergenceReport, Format, ReferenceSolution, SearchConfig,
    StepSizeSearchResult, StepSizeTable,
};
use semimex::integrator::{ars222, LinearSplitting, LinearSplittingStepper, SemiImex};
use semimex::problems::{scalar_problem, CahnHilliard, Diffusion, ProblemKind, Source, DIFFUSION_POINTS};
use semimex::tableau::scheme_file::parse_scheme_file;
use semimex::tableau::{builtin_names, SampleSpec};
use semimex::{make_builtin, ButcherPair, Error};
use nalgebra::DVector;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_DIVERGENT: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const BASELINE: &str = "ars222";

#[derive(Parser, Debug)]
#[command(name = "semimex", version, about = "Semi-IMEX Runge-Kutta experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence study on y' = cos(t) y + (cos t - y) y.
    Scalar(StudyArgs),
    /// Convergence study on periodic nonlinear diffusion.
    Diffusion(StudyArgs),
    /// Convergence study on the 1D Cahn-Hilliard equation.
    CahnHilliard(StudyArgs),
    /// Largest step that still reaches the steady state.
    StepSize(StepSizeArgs),
    /// Sampled stability function of a scheme.
    Stability(StabilityArgs),
    /// Built-in scheme identifiers.
    ListSchemes,
}

#[derive(Args, Debug, Default)]
struct Output {
    /// csv or md.
    #[arg(long)]
    format: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file supplying any flag; flags on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct StudyArgs {
    /// Built-in scheme names, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Additional scheme read from a scheme file.
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// Halving step sizes, e.g. 1/16,1/32,1/64.
    #[arg(long)]
    h_list: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Scheme used for the computed reference solution.
    #[arg(long)]
    reference_scheme: Option<String>,
    /// Step of the computed reference solution.
    #[arg(long)]
    reference_h: Option<String>,
    /// 17 significant digits in CSV output.
    #[arg(long)]
    lossless: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Default)]
struct StepSizeArgs {
    /// diffusion or cahn-hilliard.
    #[arg(long)]
    problem: Option<String>,
    /// Scheme names; `ars222` is the linear-splitting baseline.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// One table row per value.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Step budget per trial.
    #[arg(long)]
    max_steps: Option<usize>,
    /// First trial step.
    #[arg(long)]
    h0: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Default)]
struct StabilityArgs {
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownScheme { .. }
            | Error::InvalidTableau { .. }
            | Error::Parameter(_)
            | Error::Config(_)
            | Error::Parse { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> CliResult<u8> {
    match cmd {
        Command::Scalar(a) => study(StudyKind::Scalar, a),
        Command::Diffusion(a) => study(StudyKind::Diffusion, a),
        Command::CahnHilliard(a) => study(StudyKind::CahnHilliard, a),
        Command::StepSize(a) => step_size(a),
        Command::Stability(a) => stability(a),
        Command::ListSchemes => {
            println!("{:<28} {:>6} {:>6} {:>7}", "name", "stages", "order", "solves");
            for name in builtin_names() {
                let t = make_builtin(name)?;
                println!(
                    "{name:<28} {:>6} {:>6} {:>7}",
                    t.stages(),
                    t.declared_order(),
                    t.linear_solves_per_step()
                );
            }
            let pair = ars222();
            let solves = (0..pair.stages()).filter(|&i| pair.implicit_a[(i, i)] != 0.0).count();
            println!(
                "{BASELINE:<28} {:>6} {:>6} {:>7}  (linear-splitting baseline, step-size only)",
                pair.stages(),
                2,
                solves
            );
            Ok(0)
        }
    }
}

fn load_config(out: &Output) -> CliResult<ConfigFile> {
    match &out.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            ConfigFile::parse(&text)
        }
        None => Ok(ConfigFile::default()),
    }
}

fn format_of(out: &Output, cfg: &ConfigFile) -> CliResult<Format> {
    let s = out.format.clone().or(cfg.string("format")).unwrap_or_else(|| "md".into());
    Ok(s.parse()?)
}

fn emit(text: &str, out: &Output, cfg: &ConfigFile) -> CliResult<()> {
    match out.out.clone().or(cfg.string("out").map(PathBuf::from)) {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Run(Error::Config(format!("cannot write {}: {e}", path.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn schemes(names: &[String], file: Option<PathBuf>, cfg: &ConfigFile) -> CliResult<Vec<String>> {
    let mut list: Vec<String> = if names.is_empty() { cfg.list("scheme") } else { names.to_vec() };
    if let Some(path) = file.or(cfg.string("scheme-file").map(PathBuf::from)) {
        list.push(format!("file:{}", path.display()));
    }
    if list.is_empty() {
        return Err(config_err("no scheme given; use --scheme or --scheme-file"));
    }
    Ok(list)
}

fn tableau(spec: &str) -> CliResult<ButcherPair> {
    match spec.strip_prefix("file:") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
            Ok(parse_scheme_file(&text)?)
        }
        None => Ok(make_builtin(spec)?),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum StudyKind {
    Scalar,
    Diffusion,
    CahnHilliard,
}

fn study(kind: StudyKind, a: StudyArgs) -> CliResult<u8> {
    let cfg = load_config(&a.output)?;
    let format = format_of(&a.output, &cfg)?;
    let lossless = a.lossless || cfg.flag("lossless")?;
    let names = schemes(&a.scheme, a.scheme_file.clone(), &cfg)?;
    let tableaus = names.iter().map(|n| tableau(n)).collect::<CliResult<Vec<_>>>()?;
    let default_h = match kind {
        StudyKind::Scalar | StudyKind::Diffusion => "1/16,1/32,1/64,1/128",
        StudyKind::CahnHilliard => "1/256,1/512,1/1024,1/2048",
    };
    let h_text = a.h_list.clone().or(cfg.string("h-list")).unwrap_or_else(|| default_h.into());
    let hs = parse_h_list(&h_text)?;
    let t_end = match a.t_end {
        Some(t) => t,
        None => cfg.number("t-end")?.unwrap_or(if kind == StudyKind::Scalar { 0.5 } else { 1.0 }),
    };
    let kappa = match a.kappa {
        Some(k) => k,
        None => cfg.number("kappa")?.unwrap_or(1.0),
    };
    let epsilon = match a.epsilon {
        Some(e) => e,
        None => cfg.number("epsilon")?.unwrap_or(1.0),
    };
    let ref_scheme = a.reference_scheme.clone().or(cfg.string("reference-scheme"));
    let ref_h = match a.reference_h.clone().or(cfg.string("reference-h")) {
        Some(s) => Some(config::parse_step(&s)?),
        None => None,
    };

    let (problem, label, default_ref_h) = match kind {
        StudyKind::Scalar => (scalar_problem(), ProblemKind::Scalar.label(), None),
        StudyKind::Diffusion => {
            let n = DIFFUSION_POINTS;
            let p = Diffusion::new(kappa, Source::CosXSinT, n)?.problem();
            let label = ProblemKind::Diffusion { kappa, source: Source::CosXSinT, n }.label();
            (p, label, Some(0.5f64.powi(9)))
        }
        StudyKind::CahnHilliard => {
            let p = CahnHilliard::new(epsilon)?.problem();
            (p, ProblemKind::CahnHilliard { epsilon }.label(), Some(0.5f64.powi(13)))
        }
    };
    let t0 = problem.t0();
    let reference = match (ref_scheme, kind) {
        (None, StudyKind::Scalar) if ref_h.is_none() => {
            let exact = problem.exact(t_end).ok_or_else(|| config_err("scalar problem lacks its exact solution"))?;
            ReferenceSolution::new("exact", exact)
        }
        (scheme, _) => {
            let rt = tableau(scheme.as_deref().unwrap_or("third_order_5stage_v2"))?;
            let h = ref_h.or(default_ref_h).unwrap_or(0.5f64.powi(12));
            ReferenceSolution::computed(&SemiImex::new(&problem, &rt), problem.u0(), t0, t_end, h)?
        }
    };
    let reports = tableaus
        .iter()
        .map(|tb| {
            convergence_study(&SemiImex::new(&problem, tb), &label, problem.u0(), t0, t_end, &hs, &reference)
        })
        .collect::<semimex::Result<Vec<ConvergenceReport>>>()?;
    emit(&render_convergence(&reports, format, lossless), &a.output, &cfg)?;
    Ok(if reports.iter().any(|r| r.any_divergent()) { EXIT_DIVERGENT } else { 0 })
}

enum SearchProblem {
    Diffusion,
    CahnHilliard,
}

fn baseline(sp: &LinearSplitting, u0: &DVector<f64>, reference: &DVector<f64>, cfg: &SearchConfig) -> semimex::Result<StepSizeSearchResult> {
    let pair = ars222();
    let stepper = LinearSplittingStepper { splitting: sp, pair: &pair };
    max_stable_step(&stepper, u0, 0.0, reference, cfg)
}

fn search_one(problem: &SearchProblem, param: f64, scheme: &str, cfg: &SearchConfig) -> CliResult<StepSizeSearchResult> {
    let (p, reference, splitting) = match problem {
        SearchProblem::Diffusion => {
            let d = Diffusion::new(param, Source::CosX, DIFFUSION_POINTS)?;
            (d.problem(), d.long_time_limit()?, d.splitting())
        }
        SearchProblem::CahnHilliard => {
            let ch = CahnHilliard::new(param)?;
            let steady = ch.steady(&ch.initial_state())?;
            (ch.problem(), steady, ch.splitting())
        }
    };
    let result = if scheme == BASELINE {
        baseline(&splitting, p.u0(), &reference, cfg)?
    } else {
        let tb = tableau(scheme)?;
        max_stable_step(&SemiImex::new(&p, &tb), p.u0(), 0.0, &reference, cfg)?
    };
    Ok(result)
}

fn step_size(a: StepSizeArgs) -> CliResult<u8> {
    let cfg = load_config(&a.output)?;
    let format = format_of(&a.output, &cfg)?;
    let problem = match a.problem.clone().or(cfg.string("problem")).as_deref() {
        Some("diffusion") => SearchProblem::Diffusion,
        Some("cahn-hilliard") => SearchProblem::CahnHilliard,
        Some(other) => return Err(config_err(format!("unknown problem `{other}`, expected diffusion or cahn-hilliard"))),
        None => return Err(config_err("--problem is required")),
    };
    let names = schemes(&a.scheme, a.scheme_file.clone(), &cfg)?;
    for n in names.iter().filter(|n| n.as_str() != BASELINE) {
        tableau(n)?;
    }
    let (parameter, flag_values, key) = match problem {
        SearchProblem::Diffusion => ("kappa", &a.kappa, "kappa"),
        SearchProblem::CahnHilliard => ("epsilon", &a.epsilon, "epsilon"),
    };
    let mut params = if flag_values.is_empty() { cfg.numbers(key)? } else { flag_values.clone() };
    if params.is_empty() {
        params.push(1.0);
    }
    let mut search = SearchConfig::default();
    if let Some(m) = a.max_steps.or(cfg.number("max-steps")?.map(|v| v as usize)) {
        search.max_steps_per_trial = m;
    }
    if let Some(h0) = a.h0.clone().or(cfg.string("h0")) {
        search.h0 = config::parse_step(&h0)?;
    }
    let jobs: Vec<(f64, &String)> = params.iter().flat_map(|&p| names.iter().map(move |n| (p, n))).collect();
    let results = jobs
        .par_iter()
        .map(|(p, n)| search_one(&problem, *p, n, &search))
        .collect::<CliResult<Vec<_>>>()?;
    let mut it = results.into_iter();
    let rows = params.iter().map(|&p| (p, it.by_ref().take(names.len()).collect())).collect();
    let table = StepSizeTable {
        parameter: parameter.into(),
        schemes: names.clone(),
        rows,
    };
    emit(&render_step_sizes(&table, format), &a.output, &cfg)?;
    Ok(0)
}

fn stability(a: StabilityArgs) -> CliResult<u8> {
    let cfg = load_config(&a.output)?;
    let format = format_of(&a.output, &cfg)?;
    let names: Vec<String> = a.scheme.clone().into_iter().collect();
    let list = schemes(&names, a.scheme_file.clone(), &cfg)?;
    let mut text = String::new();
    for name in list {
        let tb = tableau(&name)?;
        text.push_str(&render_stability(&stability_report(&tb, &SampleSpec::default()), format));
    }
    emit(&text, &a.output, &cfg)?;
    Ok(0)
}
