//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! criteria run one after another so each runtime budget is measured
//! without competition from the others. A FAIL line does not fail the test
//! target unless `SEMIMEX_ACCEPTANCE_STRICT` is set.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};
use semimex::experiments::{
    convergence_study, max_stable_step, ConvergenceReport, ReferenceSolution, SearchConfig,
    StepSizeSearchResult,
};
use semimex::fd::{diff_matrix, fornberg_weights, DiffMatrix, Grid};
use semimex::integrator::{
    ars222, integrate_until_steady, LinearSplitting, LinearSplittingStepper, SemiImex,
    StepWorkspace, SteadyStatus,
};
use semimex::problems::{scalar_problem, CahnHilliard, Diffusion, Source, DIFFUSION_POINTS};
use semimex::tableau::{
    builtin_names, check_order_conditions, check_row_sums, eval_stability, LIMIT_PROBE_Z,
};
use semimex::{make_builtin, ButcherPair, SemiLinearProblem};
use std::time::{Duration, Instant};

const CONSTRAINT_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Constraint residuals gathered from the experiment criteria for criterion 8.
#[derive(Default)]
struct Residuals {
    /// Convergence runs and non-diverged steady trials.
    checked: Vec<(String, f64)>,
    /// Trials that blew up; reported, not checked.
    diverged_max: f64,
}

impl Residuals {
    fn report(&mut self, label: &str, rep: &ConvergenceReport) {
        self.checked.push((format!("{label} {}", rep.scheme), rep.max_constraint_residual));
    }

    fn search(&mut self, label: &str, res: &StepSizeSearchResult) {
        for t in &res.trace {
            if t.outcome.status == SteadyStatus::Diverged {
                self.diverged_max = self.diverged_max.max(t.outcome.max_constraint_residual);
            } else {
                self.checked
                    .push((format!("{label} {} h={:.3e}", res.scheme, t.h), t.outcome.max_constraint_residual));
            }
        }
    }
}

fn tb(name: &str) -> ButcherPair {
    make_builtin(name).unwrap()
}

fn pow2(k: i32) -> f64 {
    0.5f64.powi(k)
}

fn halvings(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(pow2).collect()
}

fn fmt_rates(r: &[f64]) -> String {
    r.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(",")
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

fn all_rates(rep: &ConvergenceReport) -> Vec<f64> {
    rep.rows.iter().filter_map(|r| r.rate).collect()
}

// 1 -------------------------------------------------------------------------

fn tableau_validation() -> Outcome {
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for name in builtin_names() {
        let t = tb(name);
        let order = t.declared_order().min(2);
        let rows = check_row_sums(&t);
        let cond = check_order_conditions(&t, order);
        let r = rows.max_residual().max(cond.max_residual());
        worst = worst.max(r);
        if !(rows.passed() && cond.passed() && r < 1e-12) {
            failed.push(name.to_string());
        }
    }
    Outcome {
        pass: failed.is_empty() && builtin_names().len() == 8,
        detail: format!("8 schemes, max residual {worst:.1e}, failures {failed:?}"),
    }
}

// 2 -------------------------------------------------------------------------

fn sample_points() -> Vec<Complex64> {
    let mut pts = Vec::new();
    for re in [-0.01, -0.5, -2.0, -10.0, -100.0] {
        for im in [0.0, 0.7, -3.0, 25.0] {
            pts.push(Complex64::new(re, im));
        }
    }
    pts
}

fn poly(coef: &[f64], z: Complex64) -> Complex64 {
    coef.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn stability_oracle() -> Outcome {
    let exact: [(&str, fn(Complex64) -> Complex64); 3] = [
        ("fb_euler", |z| Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - z)),
        ("midpoint", |z| (Complex64::new(2.0, 0.0) + z) / (Complex64::new(2.0, 0.0) - z)),
        ("trapezoid", |z| (Complex64::new(2.0, 0.0) + z) / (Complex64::new(2.0, 0.0) - z)),
    ];
    // Numerator and denominator coefficients, highest power first, rounded
    // to six significant digits.
    let rationals: [(&str, &[f64], &[f64]); 3] = [
        ("third_order_4stage", &[33.95359, 173.6267, 323.1586], &[-1.0, 21.90616, -149.5318, 323.1586]),
        ("third_order_5stage_v1", &[-3.10127, -4.42559, 11.3308], &[-1.0, 6.98974, -15.7564, 11.3308]),
        ("third_order_5stage_v2", &[-35.1326, -123.561, -57.0133, 498.399], &[1.0, -23.1453, 182.652, -555.413, 498.399]),
    ];
    let pts = sample_points();
    let mut exact_err = 0.0f64;
    for (name, r) in exact {
        let t = tb(name);
        for &z in &pts {
            let want = r(z);
            exact_err = exact_err.max((eval_stability(&t, z).unwrap() - want).norm() / want.norm());
        }
    }
    let mut rational_err = 0.0f64;
    for (name, num, den) in rationals {
        let t = tb(name);
        for &z in &pts {
            let want = poly(num, z) / poly(den, z);
            rational_err = rational_err.max((eval_stability(&t, z).unwrap() - want).norm() / want.norm());
        }
    }
    let far = Complex64::new(LIMIT_PROBE_Z, 0.0);
    let l_stable = ["l_stable_second_order", "third_order_4stage", "third_order_5stage_v1", "third_order_5stage_v2"];
    let l_limit = l_stable
        .iter()
        .map(|n| eval_stability(&tb(n), far).unwrap().norm())
        .fold(0.0, f64::max);
    let mid_limit = eval_stability(&tb("midpoint"), far).unwrap().norm();
    Outcome {
        pass: exact_err < 1e-12 && rational_err < 1e-4 && l_limit < 1e-3 && (0.999..=1.001).contains(&mid_limit),
        detail: format!(
            "{} points; exact rel err {exact_err:.1e}, rational rel err {rational_err:.1e}, \
             L-stable |R(-1e8)| <= {l_limit:.1e}, midpoint |R(-1e8)| = {mid_limit:.6}",
            pts.len()
        ),
    }
}

// 3 -------------------------------------------------------------------------

fn scalar_convergence() -> Outcome {
    let p = scalar_problem();
    let reference = ReferenceSolution::new("exact", p.exact(0.5).unwrap());
    let study = |name: &str, hs: &[f64]| {
        let t = tb(name);
        convergence_study(&SemiImex::new(&p, &t), "scalar", p.u0(), 0.0, 0.5, hs, &reference).unwrap()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["midpoint", "trapezoid", "l_stable_second_order", "embedded_imex_second_order"] {
        let rates = all_rates(&study(name, &halvings(10, 14)));
        ok &= rates.len() == 4 && rates.iter().all(|r| (1.8..=2.4).contains(r));
        parts.push(format!("{name} [{}]", fmt_rates(&rates)));
    }
    for name in ["third_order_4stage", "third_order_5stage_v1", "third_order_5stage_v2"] {
        let rates = all_rates(&study(name, &halvings(7, 10)));
        ok &= rates.len() == 3 && rates.iter().all(|r| (2.7..=3.3).contains(r));
        parts.push(format!("{name} [{}]", fmt_rates(&rates)));
    }
    let e17 = study("midpoint", &[pow2(17)]).rows[0].error.unwrap_or(f64::INFINITY);
    ok &= e17 < 1e-11;
    parts.push(format!("midpoint E(2^-17) = {e17:.2e}"));
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

// 4 -------------------------------------------------------------------------

fn diffusion_convergence(res: &mut Residuals) -> Outcome {
    let d = Diffusion::new(1.0, Source::CosXSinT, DIFFUSION_POINTS).unwrap();
    let p = d.problem();
    let rt = tb("third_order_5stage_v2");
    let reference = ReferenceSolution::computed(&SemiImex::new(&p, &rt), p.u0(), 0.0, 1.0, pow2(9)).unwrap();
    let hs = halvings(4, 7);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, order, tol) in [
        ("fb_euler", 1.0, 0.1),
        ("trapezoid", 2.0, 0.1),
        ("l_stable_second_order", 2.0, 0.1),
        ("third_order_5stage_v1", 3.0, 0.2),
        ("third_order_5stage_v2", 3.0, 0.2),
    ] {
        let t = tb(name);
        let rep = convergence_study(&SemiImex::new(&p, &t), "diffusion", p.u0(), 0.0, 1.0, &hs, &reference).unwrap();
        res.report("diffusion", &rep);
        let rates = all_rates(&rep);
        ok &= rates.len() == 3 && rates.iter().all(|r| (r - order).abs() <= tol);
        let e16 = rep.error_at(pow2(4)).unwrap_or(f64::NAN);
        if name == "fb_euler" {
            ok &= (5.3e-2..=8.0e-2).contains(&e16);
        }
        parts.push(format!("{name} E(1/16)={e16:.2e} [{}]", fmt_rates(&rates)));
    }
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

// 5 -------------------------------------------------------------------------

fn cahn_hilliard_convergence(res: &mut Residuals) -> Outcome {
    let ch = CahnHilliard::new(1.0).unwrap();
    let p = ch.problem();
    let rt = tb("third_order_5stage_v2");
    let reference = ReferenceSolution::computed(&SemiImex::new(&p, &rt), p.u0(), 0.0, 1.0, pow2(13)).unwrap();
    let hs = halvings(8, 11);
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["fb_euler", "trapezoid", "l_stable_second_order", "third_order_5stage_v1", "third_order_5stage_v2"] {
        let t = tb(name);
        let order = f64::from(t.declared_order());
        let rep = convergence_study(&SemiImex::new(&p, &t), "cahn-hilliard", p.u0(), 0.0, 1.0, &hs, &reference).unwrap();
        res.report("cahn-hilliard", &rep);
        let rates = all_rates(&rep);
        ok &= rates.len() == 3 && rates.iter().all(|r| (r - order).abs() <= 0.25);
        let e256 = rep.error_at(pow2(8)).unwrap_or(f64::NAN);
        if name == "fb_euler" {
            ok &= within_factor(e256, 8.41e-5, 3.0);
        }
        parts.push(format!("{name} E(1/256)={e256:.2e} [{}]", fmt_rates(&rates)));
    }
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

// 6 -------------------------------------------------------------------------

fn search_semi(p: &SemiLinearProblem, name: &str, reference: &DVector<f64>) -> StepSizeSearchResult {
    let t = tb(name);
    max_stable_step(&SemiImex::new(p, &t), p.u0(), p.t0(), reference, &SearchConfig::default()).unwrap()
}

fn search_baseline(sp: &LinearSplitting, u0: &DVector<f64>, reference: &DVector<f64>) -> StepSizeSearchResult {
    let pair = ars222();
    let stepper = LinearSplittingStepper { splitting: sp, pair: &pair };
    max_stable_step(&stepper, u0, 0.0, reference, &SearchConfig::default()).unwrap()
}

fn diffusion_stability(res: &mut Residuals) -> Outcome {
    let cfg = SearchConfig::default();
    let fb = tb("fb_euler");
    let mut ok = true;
    let mut parts = Vec::new();
    for kappa in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let d = Diffusion::new(kappa, Source::CosX, DIFFUSION_POINTS).unwrap();
        let p = d.problem();
        let limit = d.long_time_limit().unwrap();
        let out = integrate_until_steady(&SemiImex::new(&p, &fb), p.u0(), 0.0, cfg.h_cap, &limit, cfg.tolerance, cfg.max_steps_per_trial).unwrap();
        ok &= out.status == SteadyStatus::Converged;
        if out.status != SteadyStatus::Diverged {
            res.checked.push((format!("diffusion k={kappa} fb_euler h=1e4"), out.max_constraint_residual));
        }
        parts.push(format!("fb_euler k={kappa} h=1e4 {:?} in {} steps", out.status, out.steps));
    }
    let d = Diffusion::new(1.0, Source::CosX, DIFFUSION_POINTS).unwrap();
    let p = d.problem();
    let limit = d.long_time_limit().unwrap();
    let mut trapezoid = f64::NAN;
    for (name, target) in [
        ("trapezoid", 4.59),
        ("l_stable_second_order", 9.52),
        ("third_order_5stage_v1", 2.14),
        ("third_order_5stage_v2", 5.60),
    ] {
        let r = search_semi(&p, name, &limit);
        res.search("diffusion", &r);
        ok &= !r.capped && within_factor(r.h_max, target, 2.0);
        if name == "trapezoid" {
            trapezoid = r.h_max;
        }
        parts.push(format!("{name} h_max={:.3} (target {target})", r.h_max));
    }
    let base = search_baseline(&d.splitting(), p.u0(), &limit);
    res.search("diffusion", &base);
    ok &= base.h_max > 0.0 && base.h_max < 0.05 && base.h_max * 100.0 <= trapezoid;
    parts.push(format!("baseline h_max={:.2e} (trapezoid/baseline = {:.0})", base.h_max, trapezoid / base.h_max));
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

// 7 -------------------------------------------------------------------------

fn cahn_hilliard_stability(res: &mut Residuals) -> Outcome {
    let ch = CahnHilliard::new(1.0).unwrap();
    let p = ch.problem();
    let steady = ch.steady(&ch.initial_state()).unwrap();
    let mut h = Vec::new();
    for name in ["fb_euler", "l_stable_second_order", "trapezoid"] {
        let r = search_semi(&p, name, &steady);
        res.search("cahn-hilliard", &r);
        h.push((name, r.h_max, r.capped));
    }
    let base = search_baseline(&ch.splitting(), p.u0(), &steady);
    res.search("cahn-hilliard", &base);
    let (fb, l, trap) = (h[0].1, h[1].1, h[2].1);
    let ok = !h[0].2 && within_factor(fb, 24.6, 2.0) && within_factor(base.h_max, 0.36, 3.0) && fb > l && l > trap;
    Outcome {
        pass: ok,
        detail: format!(
            "fb_euler h_max={fb:.3} (target 24.6), l_stable_second_order {l:.3}, trapezoid {trap:.3}, \
             baseline {:.3} (target 0.36)",
            base.h_max
        ),
    }
}

// 8 -------------------------------------------------------------------------

fn vandermonde_weights(x0: f64, nodes: &[f64], k: usize) -> Vec<f64> {
    let w = nodes.len();
    let a = DMatrix::from_fn(w, w, |p, j| (nodes[j] - x0).powi(p as i32));
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    let rhs = DVector::from_fn(w, |p, _| if p == k { fact } else { 0.0 });
    let lu = a.clone().full_piv_lu();
    let mut x = lu.solve(&rhs).unwrap();
    for _ in 0..3 {
        x += lu.solve(&(&rhs - &a * &x)).unwrap();
    }
    x.iter().copied().collect()
}

fn fornberg_oracle(rng: &mut StdRng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let w = rng.gen_range(2..=9);
        let mut nodes = vec![0.0];
        for _ in 1..w {
            let last = *nodes.last().unwrap();
            nodes.push(last + rng.gen_range(0.2..1.5));
        }
        let span = nodes[w - 1];
        for x in nodes.iter_mut() {
            *x = 2.0 * *x / span - 1.0;
        }
        let x0 = rng.gen_range(-1.0..1.0);
        let k = rng.gen_range(0..w);
        let fw = fornberg_weights(x0, &nodes, k).unwrap();
        let oracle = vandermonde_weights(x0, &nodes, k);
        let scale = oracle.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for j in 0..w {
            worst = worst.max((fw[k][j] - oracle[j]).abs() / scale);
        }
    }
    worst
}

/// Worst relative error of `d` on monomials `(x/ℓ)^q`, `q < width`.
fn polynomial_exactness(grid: &Grid, d: &DiffMatrix, ell: f64) -> f64 {
    let mut worst = 0.0f64;
    let row_norm = d.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    for q in 0..d.width {
        let p = grid.sample(|x| (x / ell).powi(q as i32));
        let exact = grid.sample(|x| {
            if q < d.order {
                0.0
            } else {
                let c: f64 = ((q - d.order + 1)..=q).map(|v| v as f64).product();
                c * (x / ell).powi((q - d.order) as i32) / ell.powi(d.order as i32)
            }
        });
        let scale = row_norm * p.amax();
        worst = worst.max((d.apply(&p) - exact).amax() / scale);
    }
    worst
}

fn alpha_identity(rng: &mut StdRng) -> (f64, usize) {
    let d = Diffusion::new(1.0, Source::CosXSinT, DIFFUSION_POINTS).unwrap();
    let ch = CahnHilliard::new(1.0).unwrap();
    let problems = [d.problem(), ch.problem()];
    let schemes: Vec<(ButcherPair, f64)> = builtin_names()
        .iter()
        .filter_map(|n| {
            let t = tb(n);
            semimex::tableau::check_alpha_condition(&t).map(|a| (t, a))
        })
        .collect();
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let p = &problems[trial % 2];
        let (t, alpha) = &schemes[trial % schemes.len()];
        let amp = rng.gen_range(0.1..1.0);
        let phase = rng.gen_range(0.0..6.0);
        let u = DVector::from_fn(p.dim(), |i, _| {
            let base = if trial % 2 == 1 { ch.initial_state()[i] } else { 0.0 };
            base + amp * ((i as f64) * 0.05 + phase).sin() * if trial % 2 == 1 { 0.05 } else { 1.0 }
        });
        let h = 10f64.powf(rng.gen_range(-3.0..-0.5));
        let t0 = rng.gen_range(0.0..1.0);
        let mut ws = StepWorkspace::default();
        let next = SemiImex::new(p, t).step_with_workspace(t0, &u, h, &mut ws).unwrap();
        let ks = ws.stages.last().unwrap();
        let combo = ks / *alpha + &u * (1.0 - 1.0 / alpha);
        // Rounding in the weighted update scales with h |G| |K|, not h |G K|.
        let ic = t.implicit_c();
        let mut scale = next.amax().max(u.amax());
        for (j, kj) in ws.stages.iter().enumerate() {
            let lagged = if j == 0 { &u } else { &ws.stages[j - 1] };
            for state in [kj, lagged] {
                let g = p.assemble_g(t0 + ic[j] * h, state);
                let mut mag = DVector::<f64>::zeros(kj.len());
                for (r, c, v) in g.triplet_iter() {
                    mag[r] += v.abs() * kj[c].abs();
                }
                scale = scale.max(h * mag.amax());
            }
        }
        worst = worst.max((&next - combo).amax() / scale);
    }
    (worst, schemes.len())
}

fn properties(res: &Residuals) -> Outcome {
    let mut rng = StdRng::seed_from_u64(20_240_611);
    let fornberg = fornberg_oracle(&mut rng);

    let d = Diffusion::new(1.0, Source::CosX, DIFFUSION_POINTS).unwrap();
    let ch = CahnHilliard::new(1.0).unwrap();
    let mut exactness = 0.0f64;
    for m in [d.d1(), d.d2()] {
        exactness = exactness.max(polynomial_exactness(d.grid(), m, std::f64::consts::PI));
    }
    for order in 1..=4 {
        exactness = exactness.max(polynomial_exactness(ch.grid(), ch.d(order), 20.0));
    }
    // A freshly built family on a random grid as well.
    let mut nodes = vec![-1.0];
    for _ in 0..40 {
        let last = *nodes.last().unwrap();
        nodes.push(last + rng.gen_range(0.02..0.08));
    }
    let grid = Grid::from_nodes(nodes).unwrap();
    for width in 3..=9 {
        for order in 0..width {
            let m = diff_matrix(&grid, order, width).unwrap();
            exactness = exactness.max(polynomial_exactness(&grid, &m, 1.0));
        }
    }

    let (alpha, n_alpha) = alpha_identity(&mut rng);

    let (worst_label, worst_res) = res
        .checked
        .iter()
        .cloned()
        .fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });

    let scalar = scalar_problem();
    let d_problem = d.problem();
    let u = d.long_time_limit().unwrap();
    let mut solves = Vec::new();
    for name in ["third_order_5stage_v1", "third_order_5stage_v2"] {
        let t = tb(name);
        let mut ws = StepWorkspace::default();
        SemiImex::new(&d_problem, &t).step_with_workspace(0.0, &u, 0.1, &mut ws).unwrap();
        let mut ws1 = StepWorkspace::default();
        SemiImex::new(&scalar, &t).step_with_workspace(0.0, scalar.u0(), 0.1, &mut ws1).unwrap();
        solves.push((t.linear_solves_per_step(), ws.linear_solves, ws1.linear_solves));
    }
    let solves_ok = solves[0] == (3, 3, 3) && solves[1] == (4, 4, 4);

    let pass = fornberg <= 1e-10
        && exactness <= 1e-9
        && alpha <= 1e-12
        && !res.checked.is_empty()
        && worst_res <= CONSTRAINT_TOL
        && solves_ok;
    Outcome {
        pass,
        detail: format!(
            "fornberg vs vandermonde {fornberg:.1e} over 200 stencils; polynomial exactness {exactness:.1e}; \
             alpha identity {alpha:.1e} (scaled by h |G| |K|) over 100 steps ({n_alpha} schemes); constraint residual max {worst_res:.1e} \
             over {} runs ({worst_label}), diverged trials reach {:.1e} (unchecked); solves per step v1 {:?} v2 {:?}",
            res.checked.len(),
            res.diverged_max,
            solves[0],
            solves[1]
        ),
    }
}

// ---------------------------------------------------------------------------

fn run(id: usize, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_budget = elapsed < budget;
    let pass = out.pass && in_budget;
    println!(
        "{} criterion {id} ({title}) [{:.1} s, budget {} s{}]: {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_budget { "" } else { ", OVER BUDGET" },
        out.detail
    );
    pass
}

fn main() {
    let mut res = Residuals::default();
    let secs = Duration::from_secs;
    let results = [
        run(1, "tableau validation", secs(1), tableau_validation),
        run(2, "stability-function oracle", secs(1), stability_oracle),
        run(3, "scalar convergence", secs(10), scalar_convergence),
        run(4, "diffusion convergence", secs(60), || diffusion_convergence(&mut res)),
        run(5, "Cahn-Hilliard convergence", secs(300), || cahn_hilliard_convergence(&mut res)),
        run(6, "diffusion stability", secs(300), || diffusion_stability(&mut res)),
        run(7, "Cahn-Hilliard stability", secs(600), || cahn_hilliard_stability(&mut res)),
        run(8, "property suites", secs(30), || properties(&res)),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() && std::env::var_os("SEMIMEX_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
