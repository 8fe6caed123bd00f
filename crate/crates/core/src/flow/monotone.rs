use serde::Serialize;

use super::blocks::{self, Blocks};
use super::integrator::{integrate_metric_flow, FlowOptions};
use crate::error::{domain, Result};
use crate::lozenge::{CMat, QuiverData};

/// Slack allowed below zero in `h_t − g_t ⪰ 0`.
pub const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub holds: bool,
    /// Smallest eigenvalue of `g^{-1/2}(h − g)g^{-1/2}` over all samples.
    pub min_gap: f64,
    /// Initial comparison constant `C` with `C⁻¹g₀ ≤ h₀ ≤ Cg₀`.
    pub c0: f64,
    /// Whether `C⁻¹g_t ≤ h_t ≤ Cg_t` holds at every sample.
    pub comparable: bool,
    pub samples: usize,
}

/// Spectrum of `g^{-1/2} h g^{-1/2}`, the relative position of two metrics.
pub fn relative_spectrum(g: &[CMat], h: &[CMat]) -> Vec<f64> {
    let gi = blocks::herm_apply(g, |e| e.powf(-0.5));
    g.iter()
        .enumerate()
        .flat_map(|(v, _)| blocks::eigenvalues(&(&gi[v] * &h[v] * &gi[v])))
        .collect()
}

/// Integrates from `g₀ ≤ h₀` on a shared sample grid and checks that the
/// order is preserved. The order is compared in the relative form
/// `g^{-1/2}hg^{-1/2} ⪰ 1`, which is invariant under the flow's scaling symmetry.
pub fn check_monotonicity(
    q: &QuiverData,
    g0: &[CMat],
    h0: &[CMat],
    samples: &[f64],
    opts: &FlowOptions,
) -> Result<MonotonicityReport> {
    let diff: Blocks = blocks::sub(h0, g0);
    if blocks::min_eigenvalue(&diff) < -1e-12 * (1.0 + blocks::max_abs(h0)) {
        return domain("monotonicity requires g₀ ≤ h₀");
    }
    let t_end = *samples.last().unwrap_or(&0.0);
    let tg = integrate_metric_flow(q, g0, t_end, samples, opts)?;
    let th = integrate_metric_flow(q, h0, t_end, samples, opts)?;
    let rel0 = relative_spectrum(g0, h0);
    let lo = rel0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rel0.iter().copied().fold(0.0, f64::max);
    let c0 = hi.max(1.0 / lo).max(1.0);
    let mut min_gap = f64::INFINITY;
    let mut comparable = true;
    for i in 0..tg.len() {
        let rel = relative_spectrum(&tg.metric(i), &th.metric(i));
        for &e in &rel {
            min_gap = min_gap.min(e - 1.0);
            if e < 1.0 / c0 - MONOTONE_SLACK || e > c0 + MONOTONE_SLACK {
                comparable = false;
            }
        }
    }
    Ok(MonotonicityReport { holds: min_gap >= -MONOTONE_SLACK, min_gap, c0, comparable, samples: tg.len() })
}
