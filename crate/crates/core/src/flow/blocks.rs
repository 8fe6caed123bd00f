//! Block-diagonal `A⁰` elements as plain `Vec<CMat>`, one block per vertex.

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{domain, Result};
use crate::lozenge::{CMat, C};

pub type Blocks = Vec<CMat>;

pub fn identity(dims: &[usize]) -> Blocks {
    dims.iter().map(|&d| CMat::identity(d, d)).collect()
}

pub fn mul(a: &[CMat], b: &[CMat]) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn adjoint(a: &[CMat]) -> Blocks {
    a.iter().map(|x| x.adjoint()).collect()
}

pub fn inverse(a: &[CMat]) -> Result<Blocks> {
    a.iter()
        .enumerate()
        .map(|(v, b)| match b.clone().try_inverse() {
            Some(inv) if inv.iter().all(|z| z.is_finite()) => Ok(inv),
            _ => domain(format!("block {v} is singular")),
        })
        .collect()
}

/// `g*g`.
pub fn metric(g: &[CMat]) -> Blocks {
    g.iter().map(|b| b.adjoint() * b).collect()
}

/// `log(g*g)` through the singular values of `g`, accurate for badly conditioned gauges.
pub fn log_metric(g: &[CMat]) -> Blocks {
    g.iter()
        .map(|b| {
            let svd = b.clone().svd(false, true);
            let v = svd.v_t.unwrap().adjoint();
            let d = CMat::from_diagonal(&svd.singular_values.map(|s| C::new(2.0 * s.ln(), 0.0)));
            &v * d * v.adjoint()
        })
        .collect()
}

pub fn min_singular_value(g: &[CMat]) -> f64 {
    g.iter().flat_map(|b| b.singular_values().iter().copied().collect::<Vec<_>>()).fold(f64::INFINITY, f64::min)
}

pub fn hermitian_part(b: &CMat) -> CMat {
    (b + b.adjoint()) * C::new(0.5, 0.0)
}

/// Spectral calculus on the Hermitian part of each block.
pub fn herm_apply(a: &[CMat], f: impl Fn(f64) -> f64) -> Blocks {
    a.iter().map(|b| crate::lozenge::herm_fn(b, &f)).collect()
}

pub fn eigenvalues(b: &CMat) -> Vec<f64> {
    if b.nrows() == 1 {
        return vec![b[(0, 0)].re];
    }
    let mut e: Vec<f64> = SymmetricEigen::new(hermitian_part(b)).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Largest absolute eigenvalue over all (Hermitian) blocks.
pub fn herm_norm(a: &[CMat]) -> f64 {
    a.iter().flat_map(eigenvalues).fold(0.0, |m, e| m.max(e.abs()))
}

pub fn max_abs(a: &[CMat]) -> f64 {
    a.iter().flat_map(|b| b.iter()).fold(0.0, |m, z| m.max(z.norm()))
}

pub fn sub(a: &[CMat], b: &[CMat]) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[CMat], s: f64) -> Blocks {
    a.iter().map(|x| x * C::new(s, 0.0)).collect()
}

/// Number of real coordinates of a Hermitian element with these block sizes.
pub fn herm_dim(dims: &[usize]) -> usize {
    dims.iter().map(|d| d * d).sum()
}

/// Real coordinates of the Hermitian part: diagonal, then real and imaginary upper entries.
pub fn pack_herm(a: &[CMat]) -> DVector<f64> {
    let mut out = Vec::new();
    for b in a {
        let n = b.nrows();
        for i in 0..n {
            out.push(b[(i, i)].re);
        }
        for i in 0..n {
            for j in i + 1..n {
                let z = (b[(i, j)] + b[(j, i)].conj()) * 0.5;
                out.push(z.re);
                out.push(z.im);
            }
        }
    }
    DVector::from_vec(out)
}

/// `Σ tr` of a packed Hermitian element.
pub fn packed_trace(dims: &[usize], x: &DVector<f64>) -> f64 {
    let mut k = 0;
    let mut tr = 0.0;
    for &n in dims {
        tr += x.rows(k, n).sum();
        k += n * n;
    }
    tr
}

pub fn unpack_herm(dims: &[usize], x: &DVector<f64>) -> Blocks {
    let mut k = 0;
    let mut out = Vec::with_capacity(dims.len());
    for &n in dims {
        let mut b = CMat::zeros(n, n);
        for i in 0..n {
            b[(i, i)] = C::new(x[k], 0.0);
            k += 1;
        }
        for i in 0..n {
            for j in i + 1..n {
                let z = C::new(x[k], x[k + 1]);
                k += 2;
                b[(i, j)] = z;
                b[(j, i)] = z.conj();
            }
        }
        out.push(b);
    }
    out
}

pub fn is_hermitian(a: &[CMat], tol: f64) -> bool {
    a.iter().all(|b| (b - b.adjoint()).iter().all(|z| z.norm() <= tol))
}

pub fn min_eigenvalue(a: &[CMat]) -> f64 {
    a.iter().flat_map(eigenvalues).fold(f64::INFINITY, f64::min)
}

/// Whether `[a, b] = 0` blockwise.
pub fn commutator_norm(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y - y * x).iter().fold(0.0f64, |m, z| m.max(z.norm()))).fold(0.0, f64::max)
}
