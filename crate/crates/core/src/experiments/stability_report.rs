use crate::tableau::{eval_stability, probe_stability, ButcherPair, SampleSpec, StabilityProbeResult, LIMIT_PROBE_Z};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySample {
    pub z: Complex64,
    /// `None` at a pole.
    pub modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub scheme: String,
    pub samples: Vec<StabilitySample>,
    pub probe: StabilityProbeResult,
}

/// `|R(z)|` at every sample point of `spec` plus the far-left probe.
pub fn stability_report(tb: &ButcherPair, spec: &SampleSpec) -> StabilityReport {
    let mut points = spec.points();
    points.push(Complex64::new(LIMIT_PROBE_Z, 0.0));
    let samples = points
        .into_iter()
        .map(|z| StabilitySample {
            z,
            modulus: eval_stability(tb, z).ok().map(|r| r.norm()),
        })
        .collect();
    StabilityReport {
        scheme: tb.name().to_string(),
        samples,
        probe: probe_stability(tb, spec),
    }
}
