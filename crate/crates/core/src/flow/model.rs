use super::blocks::{self, Blocks};
use crate::error::{internal, Result};
use crate::lozenge::{gauge_act, hermitian_curvature, CMat, Elem, LozengeAlgebra, QuiverData, C};

/// Hermiticity defect of `K` tolerated before symmetrization, relative to `1 + ‖K‖`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A gauge-flow right-hand side: `K(g) = −i(ΛF(g·α) − λ)`, Hermitian in `A⁰`.
pub trait FlowModel {
    fn block_dims(&self) -> Vec<usize>;

    /// Unsymmetrized `K(g)`.
    fn raw_k(&self, g: &[CMat]) -> Result<Blocks>;

    /// `K(g)`, checked to be Hermitian and then symmetrized.
    fn k(&self, g: &[CMat]) -> Result<Blocks> {
        let k = self.raw_k(g)?;
        let scale = 1.0 + blocks::max_abs(&k);
        if !blocks::is_hermitian(&k, HERMITIAN_TOL * scale) {
            return internal("flow right-hand side lost self-adjointness");
        }
        Ok(k.iter().map(blocks::hermitian_part).collect())
    }

    /// The model for `f·α`, so that `K'(g) = K(g f)`.
    fn rebase(&self, f: &[CMat]) -> Result<Self>
    where
        Self: Sized;
}

/// Direct block formulas for a quiver algebra with `d = 0`:
/// `K_v = ρ̄ − ρ_v − μ_v`, `μ_v = (Σ_{a→v} ββ* − Σ_{v→a} β*β)/m_v`, `β_a = g_t α''_a g_s⁻¹`.
#[derive(Clone, Debug)]
pub struct QuiverModel {
    pub q: QuiverData,
    rho_bar: f64,
}

impl QuiverModel {
    pub fn new(q: QuiverData) -> Result<Self> {
        q.validate()?;
        let w: f64 = q.vertices.iter().map(|v| v.mass * v.dim as f64).sum();
        let rho_bar = q.vertices.iter().map(|v| v.mass * v.dim as f64 * v.rho).sum::<f64>() / w;
        Ok(QuiverModel { q, rho_bar })
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    /// Moment map `μ` of the gauged representation.
    pub fn moment(&self, g: &[CMat]) -> Result<Blocks> {
        let ginv = blocks::inverse(g)?;
        let mut mu: Blocks = self.block_dims().iter().map(|&d| CMat::zeros(d, d)).collect();
        for a in &self.q.arrows {
            let beta = &g[a.target] * &a.alpha * &ginv[a.source];
            mu[a.target] += &beta * beta.adjoint();
            mu[a.source] -= beta.adjoint() * &beta;
        }
        for (m, v) in mu.iter_mut().zip(&self.q.vertices) {
            *m *= C::new(1.0 / v.mass, 0.0);
        }
        Ok(mu)
    }
}

impl FlowModel for QuiverModel {
    fn block_dims(&self) -> Vec<usize> {
        self.q.vertices.iter().map(|v| v.dim).collect()
    }

    fn raw_k(&self, g: &[CMat]) -> Result<Blocks> {
        let mu = self.moment(g)?;
        Ok(mu
            .iter()
            .zip(&self.q.vertices)
            .map(|(m, v)| CMat::identity(v.dim, v.dim) * C::new(self.rho_bar - v.rho, 0.0) - m)
            .collect())
    }

    fn rebase(&self, f: &[CMat]) -> Result<Self> {
        let finv = blocks::inverse(f)?;
        let mut q = self.q.clone();
        for a in q.arrows.iter_mut() {
            a.alpha = &f[a.target] * &a.alpha * &finv[a.source];
        }
        Ok(QuiverModel { q, rho_bar: self.rho_bar })
    }
}

/// The same right-hand side computed through a general lozenge algebra:
/// gauge action, curvature `θ + dα + α²` and `Λ`.
#[derive(Clone, Debug)]
pub struct AlgebraModel {
    pub algebra: LozengeAlgebra,
    pub alpha: Elem,
}

impl AlgebraModel {
    pub fn new(algebra: LozengeAlgebra, alpha: Elem) -> Self {
        AlgebraModel { algebra, alpha }
    }

    pub fn to_elem(&self, g: &[CMat]) -> Elem {
        Elem::from_a0(self.algebra.layout(), g.to_vec())
    }
}

impl FlowModel for AlgebraModel {
    fn block_dims(&self) -> Vec<usize> {
        self.algebra.layout().dims.clone()
    }

    fn raw_k(&self, g: &[CMat]) -> Result<Blocks> {
        let ga = gauge_act(&self.algebra, &self.to_elem(g), &self.alpha)?;
        Ok(hermitian_curvature(&self.algebra, &ga).a0)
    }

    fn rebase(&self, f: &[CMat]) -> Result<Self> {
        let alpha = gauge_act(&self.algebra, &self.to_elem(f), &self.alpha)?;
        Ok(AlgebraModel { algebra: self.algebra.clone(), alpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lozenge::{Arrow, Vertex};

    fn sample() -> QuiverData {
        let m = |r: usize, c: usize, s: f64| CMat::from_fn(r, c, |i, j| C::new((s + i as f64 - j as f64).sin(), (s * (i + 2 * j) as f64).cos()));
        let mut q = QuiverData {
            vertices: vec![
                Vertex { dim: 2, mass: 1.0, rho: 0.0 },
                Vertex { dim: 1, mass: 0.5, rho: 0.0 },
                Vertex { dim: 3, mass: 2.0, rho: 0.0 },
            ],
            arrows: vec![
                Arrow { source: 0, target: 1, alpha: m(1, 2, 0.3) },
                Arrow { source: 1, target: 2, alpha: m(3, 1, 1.1) },
                Arrow { source: 2, target: 0, alpha: m(2, 3, -0.4) },
            ],
        };
        q.set_rho_from_slopes(&[0.3, -0.2, 0.5]).unwrap();
        q
    }

    #[test]
    fn block_formula_matches_algebra_route() {
        let q = sample();
        let fast = QuiverModel::new(q.clone()).unwrap();
        let slow = AlgebraModel::new(LozengeAlgebra::build_from_quiver(&q).unwrap(), q.alpha());
        let g: Blocks = vec![
            CMat::from_fn(2, 2, |i, j| C::new(1.0 + (i == j) as u8 as f64, 0.3 * j as f64 - 0.1)),
            CMat::from_element(1, 1, C::new(0.7, 0.2)),
            CMat::from_fn(3, 3, |i, j| C::new(if i == j { 1.5 } else { 0.2 }, 0.1 * (i as f64 - j as f64))),
        ];
        let a = fast.k(&g).unwrap();
        let b = slow.k(&g).unwrap();
        assert!(blocks::max_abs(&blocks::sub(&a, &b)) < 1e-12);
        // Σ m_v tr K_v = 0.
        let tr: C = a.iter().zip(&q.vertices).map(|(k, v)| k.trace() * v.mass).sum();
        assert!(tr.norm() < 1e-12);
    }
}
