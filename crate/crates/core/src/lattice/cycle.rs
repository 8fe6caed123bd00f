use serde::{Deserialize, Serialize};

use super::filtration::IteratedLabel;
use super::graph::{build_ideal_lattice, DirectedGraph, IdealLattice};
use super::weight::{iterated_weight_filtration, weight_filtration};
use crate::error::{domain, input, Result};

/// Orientation of the five-segment example: arrows 1→2, 3→2, 4→3, 4→5, 1→5.
pub const FIG1_EPS: [i8; 5] = [1, -1, -1, 1, -1];

/// Relative band around zero within which a wall polynomial counts as vanishing.
pub const WALL_TOL: f64 = 1e-9;

/// Cycle graph on segments `0..n`; arrow `i` sits between segments `i` and
/// `i+1` and points `i → i+1` when `eps[i] = +1`, else `i+1 → i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedCycleGraph {
    pub m: Vec<f64>,
    pub eps: Vec<i8>,
}

impl OrientedCycleGraph {
    pub fn new(m: Vec<f64>, eps: Vec<i8>) -> Result<Self> {
        if m.len() < 2 || m.len() != eps.len() {
            return input("cycle needs n ≥ 2 segment lengths and as many signs");
        }
        if m.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return input("segment lengths must be positive");
        }
        if eps.iter().any(|&e| e != 1 && e != -1) {
            return input("signs must be ±1");
        }
        if eps.iter().all(|&e| e == eps[0]) {
            return input("signs must not all be equal");
        }
        Ok(OrientedCycleGraph { m, eps })
    }

    pub fn fig1(m: [f64; 5]) -> Result<Self> {
        Self::new(m.to_vec(), FIG1_EPS.to_vec())
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// Arrow `i` as `(source, target)`.
    pub fn arrow(&self, i: usize) -> (usize, usize) {
        let j = (i + 1) % self.n();
        if self.eps[i] > 0 {
            (i, j)
        } else {
            (j, i)
        }
    }

    pub fn graph(&self) -> DirectedGraph {
        DirectedGraph::new(self.m.clone(), (0..self.n()).map(|i| self.arrow(i)).collect())
    }

    pub fn ideal_lattice(&self) -> Result<IdealLattice> {
        build_ideal_lattice(&self.graph())
    }

    /// Per-segment weights of the weight filtration.
    pub fn weight_grading(&self) -> Result<Vec<f64>> {
        let il = self.ideal_lattice()?;
        let f = weight_filtration(&il.polarized)?;
        Ok(il.vertex_weights(&f, self.n()))
    }

    /// Per-segment iterated labels and the recursion depth.
    pub fn iterated_grading(&self) -> Result<(Vec<IteratedLabel>, usize)> {
        let il = self.ideal_lattice()?;
        let it = iterated_weight_filtration(&il.polarized)?;
        let mut out = vec![IteratedLabel::default(); self.n()];
        for (k, lab) in it.labels.iter().enumerate() {
            let added = il.masks[it.chain[k + 1]] & !il.masks[it.chain[k]];
            for (v, o) in out.iter_mut().enumerate() {
                if added >> v & 1 == 1 {
                    *o = lab.clone();
                }
            }
        }
        Ok((out, it.depth))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Chamber {
    Left,
    Middle,
    Right,
    Wall1,
    Wall2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallReport {
    pub d1: f64,
    pub d2: f64,
    pub chamber: Chamber,
}

pub fn d1(m: &[f64; 5]) -> f64 {
    m[0] * m[3] + m[2] * m[4] + 2.0 * m[3] * m[4] - m[0] * m[1]
}

pub fn d2(m: &[f64; 5]) -> f64 {
    m[1] * m[4] + m[0] * m[2] + 2.0 * m[0] * m[1] - m[3] * m[4]
}

/// Wall polynomials and chamber of the five-segment example (masses indexed m₁…m₅).
pub fn walls_5cycle(m: &[f64; 5]) -> Result<WallReport> {
    if m.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return domain("segment lengths must be positive");
    }
    let (d1, d2) = (d1(m), d2(m));
    let band = WALL_TOL * m.iter().map(|x| x * x).sum::<f64>();
    let chamber = if d1.abs() < band {
        Chamber::Wall1
    } else if d2.abs() < band {
        Chamber::Wall2
    } else if d1 < 0.0 {
        Chamber::Left
    } else if d2 < 0.0 {
        Chamber::Right
    } else {
        Chamber::Middle
    };
    Ok(WallReport { d1, d2, chamber })
}

/// Completes `m` to a point of `D₁ = 0` by solving for `m₂` (D₁ is linear in it).
pub fn wall1_point(m1: f64, m3: f64, m4: f64, m5: f64) -> [f64; 5] {
    [m1, (m1 * m4 + m3 * m5 + 2.0 * m4 * m5) / m1, m3, m4, m5]
}

/// Completes `m` to a point of `D₂ = 0` by solving for `m₄`.
pub fn wall2_point(m1: f64, m2: f64, m3: f64, m5: f64) -> [f64; 5] {
    [m1, m2, m3, (m2 * m5 + m1 * m3 + 2.0 * m1 * m2) / m5, m5]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_values() {
        let r = walls_5cycle(&[1.0; 5]).unwrap();
        assert_eq!((r.d1, r.d2, r.chamber), (3.0, 3.0, Chamber::Middle));
        let r = walls_5cycle(&[4.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.d1, r.chamber), (-1.0, Chamber::Left));
        let r = walls_5cycle(&[1.0, 1.0, 1.0, 5.0, 1.0]).unwrap();
        assert_eq!(r.chamber, Chamber::Right);
        assert!(walls_5cycle(&[1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn constructed_walls() {
        assert_eq!(walls_5cycle(&wall1_point(1.0, 1.0, 1.0, 1.0)).unwrap().chamber, Chamber::Wall1);
        assert_eq!(walls_5cycle(&wall2_point(1.0, 1.0, 1.0, 1.0)).unwrap().chamber, Chamber::Wall2);
    }

    #[test]
    fn fig1_arrows() {
        let g = OrientedCycleGraph::fig1([1.0; 5]).unwrap();
        let arrows: Vec<_> = (0..5).map(|i| g.arrow(i)).collect();
        assert_eq!(arrows, vec![(0, 1), (2, 1), (3, 2), (3, 4), (0, 4)]);
        assert_eq!(g.ideal_lattice().unwrap().lattice().len(), 10);
    }

    #[test]
    fn rejects_uniform_signs() {
        assert!(OrientedCycleGraph::new(vec![1.0; 3], vec![1, 1, 1]).is_err());
    }
}
