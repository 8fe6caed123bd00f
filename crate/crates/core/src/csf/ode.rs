use nalgebra::{DMatrix, DVector};
use ode_solvers::{Dopri5, OutputType, System};
use serde::Serialize;

use crate::error::{domain, input, Error, Result};
use crate::lattice::OrientedCycleGraph;

/// `v` beyond this means `t·y` is no longer bounded: the run left the decay regime.
pub const V_BLOWUP: f64 = 600.0;
pub const ODE_RTOL: f64 = 1e-11;
pub const ODE_ATOL: f64 = 1e-12;

/// Coefficient matrix `M` of `ẏ_k/y_k = Σ_j M_kj y_j`.
///
/// Puncture `k` separates the segments of lengths `m[k]` and `m[k+1]`.
pub fn coefficient_matrix(g: &OrientedCycleGraph) -> DMatrix<f64> {
    let n = g.n();
    let e = |k: usize| g.eps[k % n] as f64;
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let (ml, mr) = (g.m[k], g.m[(k + 1) % n]);
        let (prev, next) = ((k + n - 1) % n, (k + 1) % n);
        m[(k, prev)] += e(prev) * e(k) / ml;
        m[(k, k)] -= 1.0 / ml + 1.0 / mr;
        m[(k, next)] += e(k) * e(next) / mr;
    }
    m
}

/// Right-hand side of the autonomous system `dv/ds = 1 + M e^v`.
pub fn v_rhs(m: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let u = v.map(f64::exp);
    (m * u).add_scalar(1.0)
}

struct VSystem<'a> {
    m: &'a DMatrix<f64>,
    blown: bool,
}

impl System<f64, DVector<f64>> for VSystem<'_> {
    fn system(&self, _s: f64, v: &DVector<f64>, dv: &mut DVector<f64>) {
        dv.copy_from(&v_rhs(self.m, v));
    }

    fn solout(&mut self, _s: f64, v: &DVector<f64>, _dv: &DVector<f64>) -> bool {
        if v.iter().any(|x| !(x.is_finite() && *x < V_BLOWUP)) {
            self.blown = true;
        }
        self.blown
    }
}

/// Solution of the v-system at the requested values of `s = log t`.
#[derive(Clone, Debug, Serialize)]
pub struct OdeTrajectory {
    pub s: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub eps: Vec<i8>,
}

impl OdeTrajectory {
    pub fn t(&self) -> Vec<f64> {
        self.s.iter().map(|s| s.exp()).collect()
    }

    /// `y_k = e^{v_k}/t`.
    pub fn y(&self, i: usize) -> Vec<f64> {
        let s = self.s[i];
        self.v[i].iter().map(|v| (v - s).exp()).collect()
    }

    /// `log y_k = v_k − s`, without the round trip through `exp`.
    pub fn log_y(&self, i: usize) -> Vec<f64> {
        self.v[i].iter().map(|v| v - self.s[i]).collect()
    }
}

/// Integrates the v-system from `v0` at `s0` and records it at each `s` in `s_out`.
pub fn integrate_v(g: &OrientedCycleGraph, v0: &[f64], s0: f64, s_out: &[f64]) -> Result<OdeTrajectory> {
    if v0.len() != g.n() || v0.iter().any(|v| !v.is_finite()) {
        return input("initial v must be finite with one entry per puncture");
    }
    if s_out.windows(2).any(|w| w[0] > w[1]) || s_out.first().is_some_and(|&s| s < s0) {
        return input("output times must be increasing and not before the start");
    }
    let m = coefficient_matrix(g);
    let mut v = DVector::from_column_slice(v0);
    let mut s = s0;
    let mut out = OdeTrajectory { s: vec![], v: vec![], eps: g.eps.clone() };
    for &target in s_out {
        if target > s {
            let sys = VSystem { m: &m, blown: false };
            let mut solver = Dopri5::from_param(
                sys,
                s,
                target,
                0.0,
                v.clone(),
                ODE_RTOL,
                ODE_ATOL,
                0.9,
                0.04,
                0.2,
                10.0,
                target - s,
                0.0,
                1_000_000,
                1000,
                OutputType::Sparse,
            );
            solver
                .integrate()
                .map_err(|e| Error::Stiffness(format!("v-system integration failed near s = {s:.3}: {e:?}")))?;
            let last = solver.y_out().last().expect("solver output").clone();
            let blown = last.iter().any(|x| !(x.is_finite() && *x < V_BLOWUP));
            let reached = *solver.x_out().last().expect("solver output");
            if blown || (reached - target).abs() > 1e-9 * (1.0 + target.abs()) {
                return domain(format!(
                    "blow-up: v left the decay regime before s = {target:.3} (max v = {:.3e})",
                    last.max()
                ));
            }
            v = last;
            s = target;
        }
        out.s.push(s);
        out.v.push(v.iter().copied().collect());
    }
    Ok(out)
}

/// Integrates from `y0` at time `t0` in the coordinates `v = log(t·y)`, `s = log t`.
pub fn integrate_ode(g: &OrientedCycleGraph, y0: &[f64], t0: f64, t_out: &[f64]) -> Result<OdeTrajectory> {
    if y0.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
        return input("initial y must be positive");
    }
    if !(t0 > 0.0) {
        return input("start time must be positive");
    }
    let v0: Vec<f64> = y0.iter().map(|y| (t0 * y).ln()).collect();
    let s_out: Vec<f64> = t_out.iter().map(|t| t.ln()).collect();
    integrate_v(g, &v0, t0.ln(), &s_out)
}

/// Solves `1 + M e^v = 0` by damped Newton from `guess`. `M` may be singular
/// (e.g. `n = 2`), so steps use the least-squares solution.
pub fn fixed_point(g: &OrientedCycleGraph, guess: &[f64]) -> Result<Vec<f64>> {
    let m = coefficient_matrix(g);
    let mut v = DVector::from_column_slice(guess);
    let mut r = v_rhs(&m, &v);
    for _ in 0..200 {
        if r.amax() < 1e-13 {
            break;
        }
        let u = v.map(f64::exp);
        let j = DMatrix::from_fn(g.n(), g.n(), |i, k| m[(i, k)] * u[k]);
        let step = j.svd(true, true).solve(&(-&r), 1e-12).map_err(|e| Error::Internal(e.to_string()))?;
        let mut lam = 1.0;
        loop {
            let trial = &v + &step * lam;
            let rt = v_rhs(&m, &trial);
            if rt.norm() < r.norm() || lam < 1e-8 {
                v = trial;
                r = rt;
                break;
            }
            lam *= 0.5;
        }
    }
    if !(r.amax() <= 1e-10) {
        return domain(format!("no fixed point near the guess (residual {:.2e})", r.amax()));
    }
    Ok(v.iter().copied().collect())
}

/// Fixed point of the full system when `−M⁻¹1` is positive, i.e. every arrow is tight.
pub fn interior_fixed_point(g: &OrientedCycleGraph) -> Option<Vec<f64>> {
    let m = coefficient_matrix(g);
    let u = m.lu().solve(&DVector::from_element(g.n(), -1.0))?;
    u.iter().all(|&x| x > 0.0).then(|| u.iter().map(|x| x.ln()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_rows() {
        let g = OrientedCycleGraph::new(vec![1.0, 2.0, 4.0], vec![1, -1, 1]).unwrap();
        let m = coefficient_matrix(&g);
        // row 0: prev = 2 with ε₂ε₀ = 1, next = 1 with ε₀ε₁ = −1
        assert_eq!((m[(0, 2)], m[(0, 0)], m[(0, 1)]), (1.0, -1.5, -0.5));
        assert_eq!((m[(1, 0)], m[(1, 1)], m[(1, 2)]), (-0.5, -0.75, -0.25));
    }

    #[test]
    fn two_cycle_symmetric_fixed_point() {
        let g = OrientedCycleGraph::new(vec![1.0, 1.0], vec![1, -1]).unwrap();
        let v = fixed_point(&g, &[0.0, 0.0]).unwrap();
        // 1 − 4e^v = 0 on the diagonal
        assert!((v[0] + 4f64.ln()).abs() < 1e-12 && (v[1] - v[0]).abs() < 1e-12);
        let tr = integrate_ode(&g, &[0.3, 0.3], 1.0, &[1e8]).unwrap();
        assert!((tr.v[0][0] + 4f64.ln()).abs() < 1e-6);
    }
}
