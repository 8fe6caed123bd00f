use serde::{Deserialize, Serialize};

use super::cylinder::CylinderConfig;
use crate::error::{input, Result};

/// Periodic nodes `0 ≤ x_0 < … < x_{N−1} < L`; every puncture is a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub l: f64,
    pub x: Vec<f64>,
    pub puncture_nodes: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridOptions {
    /// Growth ratio of consecutive spacings away from a puncture.
    pub ratio: f64,
    /// Spacing next to a puncture, relative to `L`.
    pub h_min: f64,
    /// Largest spacing, relative to `L`.
    pub h_max: f64,
    /// Node count of the uniform grid used without punctures.
    pub uniform_nodes: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { ratio: 1.15, h_min: 1e-4, h_max: 2e-3, uniform_nodes: 512 }
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Spacings `h_i = x_{i+1} − x_i`, the last one wrapping around.
    pub fn spacings(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| if i + 1 < n { self.x[i + 1] - self.x[i] } else { self.x[0] + self.l - self.x[i] }).collect()
    }

    /// Weights of the periodic trapezoidal rule.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacings();
        let n = h.len();
        (0..n).map(|i| 0.5 * (h[i] + h[(i + n - 1) % n])).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Offsets from one end of a segment of length `m`, geometric from `h0`, capped at `h1`,
/// reaching at most the midpoint.
fn half_offsets(m: f64, h0: f64, h1: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let (mut d, mut h) = (0.0, h0);
    while d + h < 0.5 * m {
        d += h;
        out.push(d);
        h = (h * ratio).min(h1);
    }
    out
}

pub fn build_grid(cfg: &CylinderConfig, opts: &GridOptions) -> Result<Grid> {
    let l = cfg.l;
    if !(opts.ratio >= 1.0 && opts.h_min > 0.0 && opts.h_max >= opts.h_min) {
        return input("grid needs ratio ≥ 1 and 0 < h_min ≤ h_max");
    }
    if cfg.punctures.is_empty() {
        let n = opts.uniform_nodes.max(3);
        let x = (0..n).map(|i| l * i as f64 / n as f64).collect();
        return Ok(Grid { l, x, puncture_nodes: vec![] });
    }
    let (h0, h1) = (opts.h_min * l, opts.h_max * l);
    let masses = cfg.masses();
    let n = cfg.n();
    let mut x = Vec::new();
    for k in 0..n {
        // segment from puncture k to puncture k+1
        let a = cfg.punctures[k];
        let m = masses[(k + 1) % n];
        let half = half_offsets(m, h0, h1, opts.ratio);
        let mut seg: Vec<f64> = half.clone();
        let mut tail: Vec<f64> = half[1..].iter().map(|d| m - d).collect();
        let (last_l, first_r) = (*seg.last().unwrap(), *tail.last().unwrap_or(&m));
        let h_mid = half.windows(2).last().map_or(h0, |w| w[1] - w[0]);
        if first_r - last_l < 0.5 * h_mid && !tail.is_empty() {
            let mid = 0.5 * (last_l + first_r);
            seg.pop();
            tail.pop();
            seg.push(mid);
        }
        tail.reverse();
        seg.extend(tail);
        x.extend(seg.into_iter().map(|d| (a + d).rem_euclid(l)));
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let puncture_nodes = cfg
        .punctures
        .iter()
        .map(|&p| xs.iter().position(|&v| v == p.rem_euclid(l)).expect("puncture node"))
        .collect();
    Ok(Grid { l, x: xs, puncture_nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csf::build_cylinder;

    #[test]
    fn clustered_around_punctures() {
        let c = build_cylinder(5.0, &[0.0, 1.0, 2.2, 2.8, 4.0]).unwrap();
        let g = build_grid(&c, &GridOptions::default()).unwrap();
        assert_eq!(g.puncture_nodes.len(), 5);
        let h = g.spacings();
        assert!(h.iter().all(|&d| d > 0.0));
        assert!((g.min_spacing() - 5e-4).abs() < 1e-12);
        assert!(h.iter().cloned().fold(0.0, f64::max) <= 1.5e-2);
        for &i in &g.puncture_nodes {
            let n = g.len();
            assert!((h[i] - 5e-4).abs() < 1e-12 && (h[(i + n - 1) % n] - 5e-4).abs() < 1e-12);
        }
        for w in h.windows(2) {
            assert!(w[1] / w[0] < 1.6 && w[0] / w[1] < 1.6);
        }
        assert!((g.weights().iter().sum::<f64>() - 5.0).abs() < 1e-12);
    }
}
