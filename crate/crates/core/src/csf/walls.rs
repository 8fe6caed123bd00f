use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ode::{coefficient_matrix, integrate_v, v_rhs};
use crate::error::{input, Result};
use crate::lattice::OrientedCycleGraph;

/// `|κ|` above this counts as a `log s` drift, below as none.
pub const KAPPA_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WallOptions {
    pub s_lo: f64,
    pub s_hi: f64,
    pub points: usize,
}

impl Default for WallOptions {
    fn default() -> Self {
        WallOptions { s_lo: 40.0, s_hi: 200.0, points: 81 }
    }
}

/// Per-arrow asymptotics `v_a ≈ c + r_a s + κ_a log s` predicted by the iterated
/// weight grading: `r_a = 1 + w_t − w_s`, `κ_a = w'_t − w'_s` with `w'` the
/// second-level label.
#[derive(Clone, Debug, Serialize)]
pub struct Prediction {
    pub rate: Vec<f64>,
    pub kappa: Vec<f64>,
    pub depth: usize,
}

pub fn predict(g: &OrientedCycleGraph) -> Result<Prediction> {
    let (labels, depth) = g.iterated_grading()?;
    let (mut rate, mut kappa) = (vec![], vec![]);
    for k in 0..g.n() {
        let (s, t) = g.arrow(k);
        rate.push(1.0 + labels[t].coeff(0) - labels[s].coeff(0));
        kappa.push(labels[t].coeff(1) - labels[s].coeff(1));
    }
    Ok(Prediction { rate, kappa, depth })
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub s_lo: f64,
    pub s_hi: f64,
    /// Fitted `dv/ds ≈ r + κ/s + c/s²` per arrow.
    pub rate: Vec<f64>,
    pub kappa: Vec<f64>,
    pub predicted: Prediction,
    /// `max_a |dv_a/ds − r_a|` at `s_lo`, against the predicted rates.
    pub drift_at_start: f64,
    pub drifting: Vec<bool>,
    pub predicted_drifting: Vec<bool>,
}

impl DriftReport {
    pub fn partition_matches(&self) -> bool {
        self.drifting == self.predicted_drifting
    }
}

/// Integrates the v-system from `v0` at `s = 0` and fits the slope of every `v_a`
/// on `[s_lo, s_hi]`. The derivative is exact (it is the right-hand side), so the
/// `log s` coefficient of `v` appears as the `1/s` coefficient of `dv/ds`.
pub fn wall_asymptotics(g: &OrientedCycleGraph, v0: &[f64], opts: &WallOptions) -> Result<DriftReport> {
    if !(opts.s_lo > 0.0 && opts.s_hi > opts.s_lo && opts.points >= 4) {
        return input("fit window needs 0 < s_lo < s_hi and at least four points");
    }
    let predicted = predict(g)?;
    let s: Vec<f64> = (0..opts.points)
        .map(|k| opts.s_lo + (opts.s_hi - opts.s_lo) * k as f64 / (opts.points - 1) as f64)
        .collect();
    let tr = integrate_v(g, v0, 0.0, &s)?;
    let m = coefficient_matrix(g);
    let n = g.n();
    let dv: Vec<DVector<f64>> = tr.v.iter().map(|v| v_rhs(&m, &DVector::from_column_slice(v))).collect();
    let a = DMatrix::from_fn(s.len(), 3, |i, j| s[i].powi(-(j as i32)));
    let svd = a.svd(true, true);
    let (mut rate, mut kappa) = (vec![], vec![]);
    for k in 0..n {
        let b = DVector::from_fn(s.len(), |i, _| dv[i][k]);
        let x = svd.solve(&b, 1e-14).map_err(|e| crate::Error::Internal(e.to_string()))?;
        rate.push(x[0]);
        kappa.push(x[1]);
    }
    let drift_at_start = (0..n).map(|k| (dv[0][k] - predicted.rate[k]).abs()).fold(0.0, f64::max);
    let drifting = kappa.iter().map(|k| k.abs() > KAPPA_TOL).collect();
    let predicted_drifting = predicted.kappa.iter().map(|k| k.abs() > KAPPA_TOL).collect();
    Ok(DriftReport { s_lo: opts.s_lo, s_hi: opts.s_hi, rate, kappa, predicted, drift_at_start, drifting, predicted_drifting })
}
