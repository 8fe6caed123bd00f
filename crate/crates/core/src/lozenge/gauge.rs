use super::algebra::LozengeAlgebra;
use super::elem::{mul, CMat, Elem};
use crate::error::{domain, Result};

/// Blockwise inverse of an `A⁰` element.
pub fn inverse_a0(a: &LozengeAlgebra, g: &Elem) -> Result<Elem> {
    let mut blocks = Vec::with_capacity(g.a0.len());
    for (v, b) in g.a0.iter().enumerate() {
        let scale = b.camax().max(1e-300);
        let lu = b.clone().lu();
        let det = lu.determinant().norm();
        if !(det > 1e-13 * scale.powi(b.nrows() as i32)) {
            return domain(format!("gauge element is singular at vertex {v}"));
        }
        match lu.try_inverse() {
            Some(inv) => blocks.push(inv),
            None => return domain(format!("gauge element is singular at vertex {v}")),
        }
    }
    Ok(Elem::from_a0(a.layout(), blocks))
}

/// `g·α = g*⁻¹α'g* + g*⁻¹∂g* + gα''g⁻¹ − ∂̄g g⁻¹` for `g ∈ A⁰` invertible.
pub fn gauge_act(a: &LozengeAlgebra, g: &Elem, alpha: &Elem) -> Result<Elem> {
    let l = a.layout();
    let g = g.part(l, 0);
    let ginv = inverse_a0(a, &g)?;
    let gs = g.star();
    let gsinv = ginv.star();
    let ap = alpha.part(l, 1);
    let app = alpha.part(l, 2);
    let m = |x: &Elem, y: &Elem| mul(l, x, y);
    let t1 = m(&m(&gsinv, &ap), &gs);
    let t2 = m(&gsinv, &a.del(&gs));
    let t3 = m(&m(&g, &app), &ginv);
    let t4 = m(&a.delbar(&g), &ginv);
    Ok(a.project(&t1.add(&t2).add(&t3).sub(&t4)))
}

/// `F = θ + dα + α²`.
pub fn curvature(a: &LozengeAlgebra, alpha: &Elem) -> Elem {
    let alpha = alpha.degree_part(a.layout(), 1);
    a.theta().add(&a.d(&alpha)).add(&a.mul(&alpha, &alpha))
}

/// `K = −i(ΛF − λ)` for the connection `α`, an element of `A⁰`.
pub fn hermitian_curvature(a: &LozengeAlgebra, alpha: &Elem) -> Elem {
    let f = curvature(a, alpha);
    let lam = a.lambda_const();
    let lf = a.lambda(&f).sub(&a.identity().scale(lam));
    lf.scale(-super::elem::I)
}

/// Self-adjoint exponential of a Hermitian `A⁰` element, blockwise.
pub fn exp_hermitian(a: &LozengeAlgebra, x: &Elem, s: f64) -> Elem {
    Elem::from_a0(a.layout(), x.a0.iter().map(|b| herm_fn(b, |e| (s * e).exp())).collect())
}

/// Applies `f` to the spectrum of the Hermitian part of `b`.
pub fn herm_fn(b: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = b.nrows();
    if n == 0 {
        return b.clone();
    }
    if n == 1 {
        return CMat::from_element(1, 1, super::elem::C::new(f(b[(0, 0)].re), 0.0));
    }
    let h = (b + b.adjoint()) * super::elem::C::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|e| super::elem::C::new(f(e), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::super::elem::{C, I};
    use super::super::quiver::QuiverData;
    use super::*;

    fn a2(s: f64, rho: (f64, f64), m: (f64, f64)) -> (LozengeAlgebra, Elem) {
        let q = QuiverData::thin(&[m.0, m.1], &[rho.0, rho.1], &[(0, 1, C::new(s, 0.0))]);
        (LozengeAlgebra::build_from_quiver(&q).unwrap(), q.alpha())
    }

    fn diag(a: &LozengeAlgebra, c: &[C]) -> Elem {
        Elem::from_a0(a.layout(), c.iter().map(|&z| CMat::from_element(1, 1, z)).collect())
    }

    #[test]
    fn identity_and_scalar_gauge() {
        let (a, alpha) = (a2(1.5, (0.0, 0.0), (1.0, 1.0)).0, a2(1.5, (0.0, 0.0), (1.0, 1.0)).1);
        let id = a.identity();
        assert!(gauge_act(&a, &id, &alpha).unwrap().sub(&alpha).max_abs() < 1e-15);
        let g = diag(&a, &[C::new(2.0, 0.0), C::new(3.0, 0.0)]);
        let out = gauge_act(&a, &g, &alpha).unwrap();
        // α'' ↦ c_t c_s⁻¹ α''.
        assert!((out.pp[0][(0, 0)] - C::new(1.5 * 3.0 / 2.0, 0.0)).norm() < 1e-14);
        assert!(out.star().add(&out).max_abs() < 1e-14);
    }

    #[test]
    fn group_action_law() {
        let (a, alpha) = a2(0.7, (0.2, -0.2), (1.0, 2.0));
        let g = diag(&a, &[C::new(1.2, 0.3), C::new(-0.4, 0.9)]);
        let h = diag(&a, &[C::new(0.5, -0.1), C::new(2.0, 0.0)]);
        let gh = a.mul(&g, &h);
        let lhs = gauge_act(&a, &gh, &alpha).unwrap();
        let rhs = gauge_act(&a, &g, &gauge_act(&a, &h, &alpha).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn singular_gauge_rejected() {
        let (a, alpha) = a2(1.0, (0.0, 0.0), (1.0, 1.0));
        let g = diag(&a, &[C::new(0.0, 0.0), C::new(1.0, 0.0)]);
        assert!(gauge_act(&a, &g, &alpha).is_err());
    }

    #[test]
    fn curvature_trace_identity() {
        let (a, alpha) = a2(1.3, (0.4, -0.1), (1.0, 3.0));
        assert!(curvature(&a, &Elem::zero(a.layout())).sub(a.theta()).max_abs() < 1e-15);
        let f = curvature(&a, &alpha);
        assert!(f.star().add(&f).max_abs() < 1e-14);
        assert!((a.tau(&f) - a.tau(a.theta())).norm() < 1e-13);
        // ΛF = −i(ρ + μ): μ₁ = −s²/m₁, μ₂ = s²/m₂.
        let lf = a.lambda(&f);
        let s2 = 1.3f64 * 1.3;
        assert!((lf.a0[0][(0, 0)] - (-I) * (0.4 - s2 / 1.0)).norm() < 1e-14);
        assert!((lf.a0[1][(0, 0)] - (-I) * (-0.1 + s2 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn unitary_gauge_conjugates_curvature() {
        let (a, alpha) = a2(0.9, (0.3, -0.3), (1.0, 1.0));
        let u = diag(&a, &[C::from_polar(1.0, 0.7), C::from_polar(1.0, -1.9)]);
        let f = curvature(&a, &gauge_act(&a, &u, &alpha).unwrap());
        let uinv = inverse_a0(&a, &u).unwrap();
        let g = a.mul(&uinv, &a.mul(&f, &u));
        assert!(g.sub(&curvature(&a, &alpha)).max_abs() < 1e-13);
    }
}
