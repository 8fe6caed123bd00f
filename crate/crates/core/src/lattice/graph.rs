use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::filtration::RFiltration;
use super::order::{FiniteLattice, MAX_ELEMENTS};
use super::polarized::PolarizedLattice;
use crate::error::{input, Error, Result};

/// Directed graph with a positive mass (and optional imaginary part) per vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectedGraph {
    pub masses: Vec<f64>,
    #[serde(default)]
    pub imag: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    pub fn new(masses: Vec<f64>, edges: Vec<(usize, usize)>) -> Self {
        DirectedGraph { masses, imag: Vec::new(), edges }
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || n > 64 {
            return input(format!("graph must have 1..=64 vertices, got {n}"));
        }
        if let Some((v, m)) = self.masses.iter().enumerate().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
            return input(format!("vertex {v} has non-positive mass {m}"));
        }
        if !self.imag.is_empty() && self.imag.len() != n {
            return input("imaginary parts must be given for every vertex or none");
        }
        if let Some(e) = self.edges.iter().find(|(u, v)| *u >= n || *v >= n) {
            return input(format!("edge {e:?} refers to a missing vertex"));
        }
        Ok(())
    }

    fn out_masks(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.n()];
        for &(u, v) in &self.edges {
            out[u] |= 1 << v;
        }
        out
    }

    /// Strongly connected component of each vertex, as a mask.
    fn components(&self) -> Vec<u64> {
        let n = self.n();
        let out = self.out_masks();
        let mut reach: Vec<u64> = (0..n).map(|v| out[v] | 1 << v).collect();
        loop {
            let next: Vec<u64> = (0..n)
                .map(|v| (0..n).filter(|&u| reach[v] >> u & 1 == 1).fold(reach[v], |m, u| m | reach[u]))
                .collect();
            if next == reach {
                break;
            }
            reach = next;
        }
        (0..n).map(|v| (0..n).filter(|&u| reach[v] >> u & 1 == 1 && reach[u] >> v & 1 == 1).fold(0, |m, u| m | 1 << u)).collect()
    }
}

/// Lattice of vertex subsets with no arrow leaving them, ordered by inclusion.
#[derive(Clone, Debug)]
pub struct IdealLattice {
    pub polarized: PolarizedLattice,
    pub masks: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl IdealLattice {
    pub fn lattice(&self) -> &FiniteLattice {
        self.polarized.lattice()
    }

    pub fn element(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    /// Per-vertex label of a filtration: `w_v = λ_k` for `v ∈ a_k ∖ a_{k−1}`.
    pub fn vertex_weights(&self, f: &RFiltration, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for (k, &lam) in f.labels.iter().enumerate() {
            let added = self.masks[f.chain[k + 1]] & !self.masks[f.chain[k]];
            for (v, wv) in w.iter_mut().enumerate() {
                if added >> v & 1 == 1 {
                    *wv = lam;
                }
            }
        }
        w
    }
}

pub fn closed_subsets(g: &DirectedGraph) -> Result<Vec<u64>> {
    g.validate()?;
    let out = g.out_masks();
    let comp = g.components();
    let n = g.n();
    let mut seen = HashMap::new();
    let mut queue = VecDeque::from([0u64]);
    seen.insert(0u64, ());
    let mut found = Vec::new();
    while let Some(s) = queue.pop_front() {
        found.push(s);
        for v in 0..n {
            let c = comp[v];
            let c_out = (0..n).filter(|&u| c >> u & 1 == 1).fold(0, |m, u| m | out[u]);
            if s >> v & 1 == 0 && c_out & !(s | c) == 0 {
                let t = s | c;
                if seen.insert(t, ()).is_none() {
                    if seen.len() > MAX_ELEMENTS {
                        return Err(Error::Size(format!("more than {MAX_ELEMENTS} closed subsets")));
                    }
                    queue.push_back(t);
                }
            }
        }
    }
    found.sort_by_key(|&m| (m.count_ones(), m));
    Ok(found)
}

pub fn build_ideal_lattice(g: &DirectedGraph) -> Result<IdealLattice> {
    let masks = closed_subsets(g)?;
    let index: HashMap<u64, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let k = masks.len();
    let mut meet = vec![0u32; k * k];
    let mut join = vec![0u32; k * k];
    for (i, &a) in masks.iter().enumerate() {
        for (j, &b) in masks.iter().enumerate() {
            meet[i * k + j] = index[&(a & b)] as u32;
            join[i * k + j] = index[&(a | b)] as u32;
        }
    }
    let lat = FiniteLattice::from_tables_trusted(k, meet, join)?;
    let imag = |v: usize| g.imag.get(v).copied().unwrap_or(0.0);
    let polarized = PolarizedLattice::from_cover_values(lat, |a, b| {
        let added = masks[b] & !masks[a];
        (0..g.n()).filter(|&v| added >> v & 1 == 1).map(|v| Complex64::new(g.masses[v], imag(v))).sum()
    })?;
    Ok(IdealLattice { polarized, masks, index })
}
