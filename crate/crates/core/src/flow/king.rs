use serde::{Deserialize, Serialize};

use super::blocks::{self, Blocks};
use super::integrator::{integrate_until, FlowOptions};
use super::model::QuiverModel;
use super::projector::{projector_lattice, ProjectorLattice};
use crate::error::{internal, Result};
use crate::lattice::PHASE_TOL;
use crate::lozenge::QuiverData;

/// Residual below which the flow counts as converged by `KING_T0`.
pub const KING_RESIDUAL: f64 = 1e-6;
pub const KING_T0: f64 = 1e3;
pub const KING_T_MAX: f64 = 1e5;
/// `‖log h‖ > KING_GROWTH·log t` counts as divergence.
pub const KING_GROWTH: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stability {
    Polystable,
    SemistableNotPoly,
    Unstable,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeVerdict {
    pub class: Stability,
    /// Maximal destabilizing subrepresentation (first Harder–Narasimhan step) when unstable.
    pub destabilizing: Option<Vec<usize>>,
    pub lattice_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowVerdict {
    pub class: Stability,
    pub residual: f64,
    pub log_norm: f64,
    pub t_final: f64,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityVerdict {
    pub classification: Stability,
    pub lattice: LatticeVerdict,
    pub flow: FlowVerdict,
}

pub fn lattice_verdict(pl: &ProjectorLattice) -> Result<LatticeVerdict> {
    let p = &pl.polarized;
    let l = p.lattice();
    let lattice_size = l.len();
    if !p.is_semistable() {
        let hn = p.harder_narasimhan();
        let first = hn.chain[1];
        return Ok(LatticeVerdict { class: Stability::Unstable, destabilizing: Some(pl.ranks(first)), lattice_size });
    }
    let phi = p.total_phase();
    let keep: Vec<bool> = (0..l.len())
        .map(|x| x == l.bottom() || x == l.top() || (p.phase(l.bottom(), x).unwrap() - phi).abs() <= PHASE_TOL)
        .collect();
    let (sub, _) = l.sublattice(&keep)?;
    let class = if sub.is_complemented() { Stability::Polystable } else { Stability::SemistableNotPoly };
    Ok(LatticeVerdict { class, destabilizing: None, lattice_size })
}

fn log_norm(g: &Blocks) -> f64 {
    blocks::herm_norm(&blocks::log_metric(g))
}

/// Runs the flow from `h = 1`, sampling each decade, and applies the
/// convergence/divergence thresholds; stops as soon as the verdict is decided.
pub fn flow_verdict(q: &QuiverData, opts: &FlowOptions) -> Result<FlowVerdict> {
    let model = QuiverModel::new(q.clone())?;
    let dims: Vec<usize> = q.vertices.iter().map(|v| v.dim).collect();
    let samples: Vec<f64> = (0..=5).flat_map(|k| [2.0, 5.0, 10.0].map(|c| c * 10f64.powi(k - 1))).filter(|&t| t <= KING_T_MAX).collect();
    let decide = |t: f64, g: &Blocks, residual: f64| -> Option<Stability> {
        let ln = log_norm(g);
        if (t - KING_T0).abs() < 1e-9 * KING_T0 && residual < KING_RESIDUAL {
            Some(Stability::Polystable)
        } else if t >= 10.0 && ln > KING_GROWTH * t.ln() {
            Some(Stability::Unstable)
        } else if t >= KING_T_MAX {
            Some(Stability::SemistableNotPoly)
        } else {
            None
        }
    };
    let tr = integrate_until(&model, blocks::identity(&dims), 0.0, KING_T_MAX, &samples, opts, |t, g, r| decide(t, g, r).is_some())?;
    let g = tr.gauges.last().unwrap();
    let (t, residual) = (tr.last_time(), tr.final_residual());
    let class = decide(t, g, residual).unwrap_or(Stability::SemistableNotPoly);
    let warning = (class == Stability::SemistableNotPoly).then(|| {
        format!("no convergence by t = {KING_T0:e} and no divergence by t = {KING_T_MAX:e}; classified heuristically")
    });
    Ok(FlowVerdict { class, residual, log_norm: log_norm(g), t_final: t, warning })
}

/// Lattice-side and flow-side stability; disagreement is an error.
pub fn king_test(q: &QuiverData, opts: &FlowOptions) -> Result<StabilityVerdict> {
    let pl = projector_lattice(q)?;
    let lattice = lattice_verdict(&pl)?;
    let flow = flow_verdict(q, opts)?;
    if lattice.class != flow.class {
        return internal(format!(
            "King consistency violated: lattice says {:?}, flow says {:?} (residual {:.3e}, ‖log h‖ {:.3e} at t = {:e})",
            lattice.class, flow.class, flow.residual, flow.log_norm, flow.t_final
        ));
    }
    Ok(StabilityVerdict { classification: lattice.class, lattice, flow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lozenge::C;

    #[test]
    fn a2_verdicts() {
        let opts = FlowOptions::default();
        let stable = QuiverData::thin(&[1.0, 1.0], &[0.5, -0.5], &[(0, 1, C::new(1.0, 0.0))]);
        assert_eq!(king_test(&stable, &opts).unwrap().classification, Stability::Polystable);
        let equal = QuiverData::thin(&[1.0, 1.0], &[0.0, 0.0], &[(0, 1, C::new(1.0, 0.0))]);
        assert_eq!(king_test(&equal, &opts).unwrap().classification, Stability::SemistableNotPoly);
        let split = QuiverData::thin(&[1.0, 1.0], &[0.5, -0.5], &[(0, 1, C::new(0.0, 0.0))]);
        let v = king_test(&split, &opts).unwrap();
        assert_eq!(v.classification, Stability::Unstable);
        // The higher-slope vertex splits off.
        assert_eq!(v.lattice.destabilizing, Some(vec![1, 0]));
    }
}
