//! Linear stability function `R(z)` and sampled A-/L-stability evidence.

use super::ButcherPair;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Point used to estimate `lim_{z→-∞} |R(z)|`.
pub const LIMIT_PROBE_Z: f64 = -1e8;

/// Modulus slack allowed before a sample counts as unstable.
const MODULUS_SLACK: f64 = 1e-9;

/// Threshold on `|R(-1e8)|` for L-stability evidence.
const L_LIMIT_THRESHOLD: f64 = 1e-3;

/// `R(z)`: one step of the scheme on `u' = λu` with `f ≡ 0`, `G ≡ λ`, `h = 1`,
/// `u_n = 1`, so that `z = λh`.
///
/// Stage `i` solves `(1 - a_ii z) K_i = 1 + z Σ_{j<i} a_ij K_j`, and
/// `R = 1 + z (Σ_j b_j K_j + b_{s+1} K_s)`.
pub fn eval_stability(tb: &ButcherPair, z: Complex64) -> Result<Complex64> {
    let s = tb.stages();
    let a = tb.implicit_a();
    let b = tb.implicit_b();
    let one = Complex64::new(1.0, 0.0);
    let mut k = Vec::with_capacity(s);
    for i in 0..s {
        let rhs = (0..i).fold(one, |acc, j| acc + z * a[(i, j)] * k[j]);
        let factor = one - z * a[(i, i)];
        if factor == Complex64::new(0.0, 0.0) {
            return Err(Error::Pole { stage: i + 1 });
        }
        k.push(rhs / factor);
    }
    let sum = (0..s).fold(Complex64::new(0.0, 0.0), |acc, j| acc + b[j] * k[j])
        + tb.extra_weight() * k[s - 1];
    Ok(one + z * sum)
}

/// Sample grid for [`probe_stability`].
///
/// Real parts are log-spaced on `[-re_max, -re_min]`, imaginary parts on
/// `{0} ∪ ±[im_min, im_max]`, and the imaginary axis is probed along the
/// line `Re z = -re_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub points_per_decade: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            re_min: 1e-3,
            re_max: 1e6,
            im_min: 1e-3,
            im_max: 1e6,
            points_per_decade: 8,
        }
    }
}

impl SampleSpec {
    pub fn real_parts(&self) -> Vec<f64> {
        log_space(self.re_min, self.re_max, self.points_per_decade)
            .into_iter()
            .map(|v| -v)
            .collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        let pos = log_space(self.im_min, self.im_max, self.points_per_decade);
        let mut out = Vec::with_capacity(2 * pos.len() + 1);
        out.push(0.0);
        for &v in &pos {
            out.push(v);
            out.push(-v);
        }
        out
    }

    /// All sample points, including the near-imaginary-axis line.
    pub fn points(&self) -> Vec<Complex64> {
        let res = self.real_parts();
        let ims = self.imag_parts();
        let mut pts: Vec<Complex64> = res
            .iter()
            .flat_map(|&re| ims.iter().map(move |&im| Complex64::new(re, im)))
            .collect();
        pts.extend(ims.iter().map(|&im| Complex64::new(-self.re_min, im)));
        pts
    }
}

/// Log-spaced points from `lo` to `hi` inclusive.
pub(crate) fn log_space(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    (0..=n)
        .map(|k| lo * 10f64.powf(decades * k as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityClass {
    AStableEvidence,
    LStableEvidence,
    UnstableSample(Complex64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityProbeResult {
    pub sampled_max_modulus: f64,
    /// Location of the largest sampled modulus.
    pub argmax: Complex64,
    pub limit_modulus: f64,
    pub classification: StabilityClass,
}

/// Sample `|R(z)|` over the left half-plane. This is evidence, not proof:
/// a scheme classified as A-stable was merely never seen to exceed one.
pub fn probe_stability(tb: &ButcherPair, grid: &SampleSpec) -> StabilityProbeResult {
    let mut max = 0.0f64;
    let mut argmax = Complex64::new(0.0, 0.0);
    for z in grid.points() {
        // Poles lie at z = 1/a_ii; none sit in the left half-plane for the
        // catalog, and a pole simply contributes no sample.
        if let Ok(r) = eval_stability(tb, z) {
            let m = r.norm();
            if m > max || m.is_nan() {
                max = m;
                argmax = z;
            }
        }
    }
    let limit_modulus = eval_stability(tb, Complex64::new(LIMIT_PROBE_Z, 0.0))
        .map(|r| r.norm())
        .unwrap_or(f64::INFINITY);
    let classification = if !(max <= 1.0 + MODULUS_SLACK) {
        StabilityClass::UnstableSample(argmax)
    } else if limit_modulus < L_LIMIT_THRESHOLD {
        StabilityClass::LStableEvidence
    } else {
        StabilityClass::AStableEvidence
    };
    StabilityProbeResult {
        sampled_max_modulus: max,
        argmax,
        limit_modulus,
        classification,
    }
}
