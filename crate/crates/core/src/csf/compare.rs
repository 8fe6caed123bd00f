use serde::{Deserialize, Serialize};

use super::cylinder::CylinderConfig;
use super::grid::Grid;
use super::ode::integrate_ode;
use super::pde::{extract_y, integrate_pde, PdeOptions};
use crate::error::{domain, input, Result};
use crate::flow::log_times;

/// Handoff from PDE to ODE once every `y_i` is below this.
pub const HANDOFF_Y: f64 = 0.1;
/// Largest range of a log-gap over the final decade that still counts as bounded.
pub const DRIFT_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareOptions {
    pub t_first: f64,
    pub per_decade: usize,
    pub pde: PdeOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { t_first: 1e-3, per_decade: 20, pde: PdeOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub handoff: f64,
    pub eps: Vec<i8>,
    /// Sample times from the handoff on.
    pub t: Vec<f64>,
    pub y_pde: Vec<Vec<f64>>,
    pub y_ode: Vec<Vec<f64>>,
    /// `sup |log y_i^PDE − log y_i^ODE|` over `[t₀, t_end]`.
    pub sup: Vec<f64>,
    /// Range of the log-gap over `[t_end/10, t_end]`.
    pub final_decade_drift: Vec<f64>,
    pub bounded: bool,
    pub pde_steps: usize,
}

/// Runs the curve flow from `f0`, hands off to the reduced system at the first
/// sample with all `y_i < 0.1`, and measures the log-gap between the two.
pub fn compare_pde_ode(
    cfg: &CylinderConfig,
    grid: &Grid,
    f0: &[f64],
    t_end: f64,
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    if cfg.n() < 2 {
        return input("comparison needs at least two punctures");
    }
    if !(t_end > 10.0 * opts.t_first) {
        return input("t_end must exceed the first sample by more than a decade");
    }
    let decades = (t_end / opts.t_first).log10();
    let samples = log_times(opts.t_first, t_end, (decades * opts.per_decade as f64).ceil() as usize + 1);
    let traj = integrate_pde(cfg, grid, f0, &samples, &opts.pde)?;
    if let Some(e) = traj.event {
        return domain(format!("curve crossed puncture {} at t = {:.3e}", e.puncture, e.t));
    }
    let ys = extract_y(&traj);
    let Some(k0) = (1..ys.t.len()).find(|&k| ys.y[k].iter().all(|&y| y < HANDOFF_Y)) else {
        return domain("no handoff: some y_i stayed above 0.1");
    };
    let t0 = ys.t[k0];
    if t0 > t_end / 10.0 {
        return domain(format!("handoff at t = {t0:.3e} leaves less than a decade"));
    }
    let graph = cfg.graph(&ys.eps)?;
    let t = ys.t[k0..].to_vec();
    let ode = integrate_ode(&graph, &ys.y[k0], t0, &t)?;
    let n = cfg.n();
    let y_pde = ys.y[k0..].to_vec();
    let y_ode: Vec<Vec<f64>> = (0..t.len()).map(|k| ode.y(k)).collect();
    let gap = |k: usize, i: usize| y_pde[k][i].ln() - ode.log_y(k)[i];
    let mut sup = vec![0.0f64; n];
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for k in 0..t.len() {
        for i in 0..n {
            let g = gap(k, i);
            sup[i] = sup[i].max(g.abs());
            if t[k] >= t_end / 10.0 * (1.0 - 1e-12) {
                lo[i] = lo[i].min(g);
                hi[i] = hi[i].max(g);
            }
        }
    }
    let final_decade_drift: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    let bounded = final_decade_drift.iter().all(|&d| d < DRIFT_TOL);
    Ok(ComparisonReport {
        handoff: t0,
        eps: ys.eps,
        t,
        y_pde,
        y_ode,
        sup,
        final_decade_drift,
        bounded,
        pde_steps: traj.steps,
    })
}
