use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};
use crate::lattice::OrientedCycleGraph;

/// Punctured cylinder `ℝ/Lℤ × ℝ` with weight `ρ = (Σ 1/d_i²)⁻¹`.
///
/// With no punctures the weight is `ρ ≡ 1` and the flow is the heat equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderConfig {
    pub l: f64,
    pub punctures: Vec<f64>,
}

/// The five-puncture cylinder of the wall-crossing example: `L = 5`, segment
/// lengths `(1, 1, 1.2, 0.6, 1.2)`, which is `m = (1, 1.2, 0.6, 1.2, 1)` in the
/// ordering of `walls_5cycle` (middle chamber).
pub const FIG1_PUNCTURES: [f64; 5] = [0.0, 1.0, 2.2, 2.8, 4.0];
pub const FIG1_L: f64 = 5.0;

pub fn fig1_cylinder() -> CylinderConfig {
    build_cylinder(FIG1_L, &FIG1_PUNCTURES).expect("valid fixture")
}

/// Distance on `ℝ/Lℤ`.
pub fn dist_per(x: f64, y: f64, l: f64) -> f64 {
    let d = (x - y).rem_euclid(l);
    d.min(l - d)
}

pub fn build_cylinder(l: f64, punctures: &[f64]) -> Result<CylinderConfig> {
    if !(l > 0.0 && l.is_finite()) {
        return input("circumference must be positive");
    }
    if punctures.iter().any(|&p| !(0.0..l).contains(&p)) {
        return input("punctures must lie in [0, L)");
    }
    if punctures.windows(2).any(|w| w[0] > w[1]) {
        return input("punctures must be sorted");
    }
    if punctures.windows(2).any(|w| w[0] == w[1]) {
        return domain("duplicate punctures");
    }
    let cfg = CylinderConfig { l, punctures: punctures.to_vec() };
    cfg.check_weight()?;
    Ok(cfg)
}

impl CylinderConfig {
    pub fn n(&self) -> usize {
        self.punctures.len()
    }

    /// `m[k] = p_k − p_{k−1}`, the segment ending at puncture `k` (`m[0]` wraps around).
    pub fn masses(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|k| {
                let prev = self.punctures[(k + n - 1) % n];
                let m = self.punctures[k] - prev;
                if m <= 0.0 {
                    m + self.l
                } else {
                    m
                }
            })
            .collect()
    }

    pub fn rho(&self, x: f64, y: f64) -> f64 {
        if self.punctures.is_empty() {
            return 1.0;
        }
        1.0 / self.inv_rho(x, y)
    }

    /// `1/ρ = Σ 1/d_i²`.
    pub fn inv_rho(&self, x: f64, y: f64) -> f64 {
        self.punctures
            .iter()
            .map(|&p| {
                let d = dist_per(x, p, self.l);
                1.0 / (d * d + y * y)
            })
            .sum()
    }

    /// `ρ` and `∂ρ/∂y`.
    pub fn rho_dy(&self, x: f64, y: f64) -> (f64, f64) {
        if self.punctures.is_empty() {
            return (1.0, 0.0);
        }
        let (mut s, mut ds) = (0.0, 0.0);
        for &p in &self.punctures {
            let d = dist_per(x, p, self.l);
            let q = 1.0 / (d * d + y * y);
            s += q;
            ds -= 2.0 * y * q * q;
        }
        (1.0 / s, -ds / (s * s))
    }

    /// The cycle graph read off from the signs of a curve at the punctures:
    /// arrow `k` is puncture `k`, between the segments ending at `p_k` and `p_{k+1}`.
    pub fn graph(&self, eps: &[i8]) -> Result<OrientedCycleGraph> {
        if eps.len() != self.n() {
            return input("one sign per puncture");
        }
        OrientedCycleGraph::new(self.masses(), eps.to_vec())
    }

    fn check_weight(&self) -> Result<()> {
        for k in 0..997 {
            let x = self.l * (k as f64 + 0.5) / 997.0;
            for y in [0.0, 0.1, 1.0] {
                let r = self.rho(x, y);
                if !(r > 0.0 && r.is_finite()) && !self.punctures.iter().any(|&p| dist_per(x, p, self.l) == 0.0) {
                    return domain("weight is not positive");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_puncture_weight() {
        let c = build_cylinder(2.0 * PI, &[0.0]).unwrap();
        assert!((c.rho(PI, 0.0) - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn quadratic_zero_at_punctures() {
        let c = build_cylinder(5.0, &[0.0, 1.0, 2.2, 2.8, 4.0]).unwrap();
        for &p in &c.punctures {
            let d = 1e-3;
            assert!((c.rho(p + d, 0.0) / (d * d) - 1.0).abs() < 1e-4);
            assert!((c.rho(p, d) / (d * d) - 1.0).abs() < 1e-4);
        }
        for (m, e) in c.masses().iter().zip([1.0, 1.0, 1.2, 0.6, 1.2]) {
            assert!((m - e).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let c = build_cylinder(3.0, &[0.5, 2.0]).unwrap();
        let (x, y, h) = (0.7, 0.3, 1e-6);
        let (_, dy) = c.rho_dy(x, y);
        let fd = (c.rho(x, y + h) - c.rho(x, y - h)) / (2.0 * h);
        assert!((dy - fd).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_punctures() {
        assert!(matches!(build_cylinder(1.0, &[0.2, 0.2]), Err(crate::Error::Domain(_))));
        assert!(build_cylinder(1.0, &[0.5, 0.2]).is_err());
        assert!(build_cylinder(1.0, &[1.0]).is_err());
    }
}
