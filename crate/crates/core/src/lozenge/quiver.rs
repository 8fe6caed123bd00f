use super::elem::{CMat, Elem, Layout, C};
use crate::error::{input, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub dim: usize,
    pub mass: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    /// `α''_a`, a `d_target × d_source` matrix.
    pub alpha: CMat,
}

/// Quiver representation data: Hermitian spaces per vertex with trace masses
/// and central curvature scalars, and one matrix per arrow.
#[derive(Clone, Debug, PartialEq)]
pub struct QuiverData {
    pub vertices: Vec<Vertex>,
    pub arrows: Vec<Arrow>,
}

impl QuiverData {
    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return input("quiver needs at least one vertex");
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.dim == 0 {
                return input(format!("vertex {i} has dimension 0"));
            }
            if !(v.mass > 0.0 && v.mass.is_finite()) {
                return input(format!("vertex {i} has non-positive mass {}", v.mass));
            }
            if !v.rho.is_finite() {
                return input(format!("vertex {i} has non-finite rho"));
            }
        }
        let n = self.vertices.len();
        for (k, a) in self.arrows.iter().enumerate() {
            if a.source >= n || a.target >= n {
                return input(format!("arrow {k} refers to a missing vertex"));
            }
            let (r, c) = (self.vertices[a.target].dim, self.vertices[a.source].dim);
            if a.alpha.shape() != (r, c) {
                return input(format!(
                    "arrow {k} matrix is {:?}, expected {r}×{c}",
                    a.alpha.shape()
                ));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout {
            dims: self.vertices.iter().map(|v| v.dim).collect(),
            masses: self.vertices.iter().map(|v| v.mass).collect(),
            arrows: self.arrows.iter().map(|a| (a.source, a.target)).collect(),
        }
    }

    /// `α''` as an element of `A^{0,1}`.
    pub fn alpha_pp(&self) -> Elem {
        let l = self.layout();
        Elem::from_pp(&l, self.arrows.iter().map(|a| a.alpha.clone()).collect())
    }

    /// `α = α'' − (α'')*`, skew-adjoint.
    pub fn alpha(&self) -> Elem {
        let pp = self.alpha_pp();
        pp.sub(&pp.star())
    }

    /// Sets `ρ_v` so that a vertex block of slope `μ_v` has curvature scalar `μ_v`
    /// shifted to total phase 0: `ρ_v = μ_v − Σ m d μ / Σ m d`.
    pub fn set_rho_from_slopes(&mut self, slopes: &[f64]) -> Result<()> {
        if slopes.len() != self.vertices.len() {
            return input("one slope per vertex required");
        }
        let w: f64 = self.vertices.iter().map(|v| v.mass * v.dim as f64).sum();
        let mean: f64 =
            self.vertices.iter().zip(slopes).map(|(v, s)| v.mass * v.dim as f64 * s).sum::<f64>() / w;
        for (v, s) in self.vertices.iter_mut().zip(slopes) {
            v.rho = s - mean;
        }
        Ok(())
    }

    /// Thin quiver (all dimensions 1) with scalar arrow entries.
    pub fn thin(masses: &[f64], rho: &[f64], arrows: &[(usize, usize, C)]) -> Self {
        QuiverData {
            vertices: masses.iter().zip(rho).map(|(&mass, &rho)| Vertex { dim: 1, mass, rho }).collect(),
            arrows: arrows
                .iter()
                .map(|&(source, target, x)| Arrow { source, target, alpha: CMat::from_element(1, 1, x) })
                .collect(),
        }
    }

    pub fn is_thin(&self) -> bool {
        self.vertices.iter().all(|v| v.dim == 1)
    }

    pub fn total_dim(&self) -> usize {
        self.vertices.iter().map(|v| v.dim).sum()
    }
}
