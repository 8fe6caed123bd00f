use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::blocks::{self, Blocks};
use super::model::{FlowModel, QuiverModel};
use crate::error::{domain, input, internal, Error, Result};
use crate::lozenge::{CMat, QuiverData};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    /// Local error tolerance on `log h` per step.
    pub tol: f64,
    pub dt0: f64,
    /// Steps never exceed `max(1, dt_rel·t)`.
    pub dt_rel: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: 1e-8, dt0: 1e-3, dt_rel: 0.25, max_steps: 2_000_000 }
    }
}

/// Samples of a gauge trajectory `g(t)`; the metric is `h = g*g`.
#[derive(Clone, Debug, Default)]
pub struct MetricTrajectory {
    pub times: Vec<f64>,
    pub gauges: Vec<Blocks>,
    /// `‖ΛF − λ‖` at each sample.
    pub residuals: Vec<f64>,
    /// Step size in use when each sample was recorded.
    pub step_sizes: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

impl MetricTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn metric(&self, i: usize) -> Blocks {
        blocks::metric(&self.gauges[i])
    }

    pub fn log_metric(&self, i: usize) -> Blocks {
        blocks::log_metric(&self.gauges[i])
    }

    /// Eigenvalues of `log h`, concatenated over vertices.
    pub fn log_metric_eigs(&self, i: usize) -> Vec<f64> {
        self.log_metric(i).iter().flat_map(blocks::eigenvalues).collect()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }
}

struct Stepper<'a, M: FlowModel + ?Sized> {
    model: &'a M,
    dims: Vec<usize>,
}

const NEWTON_MAX: usize = 25;
const JAC_EPS: f64 = 1e-6;

impl<'a, M: FlowModel + ?Sized> Stepper<'a, M> {
    fn factor(&self, v: &DVector<f64>, frac: f64) -> Blocks {
        blocks::herm_apply(&blocks::unpack_herm(&self.dims, v), |e| (frac * e).exp())
    }

    fn advance(&self, g: &[CMat], v: &DVector<f64>, frac: f64) -> Blocks {
        blocks::mul(&self.factor(v, frac), g)
    }

    /// `∂K(e^{v/4} g)/∂v` at `v = 0`, by forward differences.
    fn jacobian(&self, g: &[CMat], k0: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = k0.len();
        let mut j = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = JAC_EPS;
            let k = blocks::pack_herm(&self.model.k(&self.advance(g, &e, 0.25))?);
            j.set_column(i, &((k - k0) / JAC_EPS));
        }
        Ok(j)
    }

    /// Implicit midpoint in exponential coordinates: solves `v = 2dt·K(e^{v/4} g)`
    /// and returns `v`; the new gauge is `e^{v/2} g`.
    fn step(&self, g: &[CMat], k0: &DVector<f64>, jac: &DMatrix<f64>, dt: f64) -> Result<DVector<f64>> {
        let n = k0.len();
        let lu = (DMatrix::identity(n, n) - jac * (2.0 * dt)).lu();
        let mut x = k0 * (2.0 * dt);
        let mut last = f64::INFINITY;
        for _ in 0..NEWTON_MAX {
            let k = blocks::pack_herm(&self.model.k(&self.advance(g, &x, 0.25))?);
            let phi = &x - k * (2.0 * dt);
            let Some(dx) = lu.solve(&phi) else {
                return Err(Error::Stiffness("singular Newton matrix".into()));
            };
            x -= &dx;
            let size = dx.amax();
            if !size.is_finite() || size > 4.0 * last {
                return Err(Error::Stiffness("Newton iteration diverged".into()));
            }
            if size <= 1e-13 + 1e-12 * x.amax() {
                return Ok(x);
            }
            last = size;
        }
        Err(Error::Stiffness("Newton iteration did not converge".into()))
    }
}

/// Adaptive exponential implicit-midpoint integration of `ġ = K(g) g`.
/// Records `t0` and each of `samples` (sorted, in `(t0, t_end]`), or every
/// accepted step when `samples` is empty.
///
/// After each accepted step the model is rebased onto the current
/// representation and the step restarts from the identity; the gauged
/// representation is thereby updated only by well-conditioned step factors,
/// which keeps `K` accurate while `g` itself degenerates.
pub fn integrate_gauge<M: FlowModel>(
    model: &M,
    g0: Blocks,
    t0: f64,
    t_end: f64,
    samples: &[f64],
    opts: &FlowOptions,
) -> Result<MetricTrajectory> {
    integrate_until(model, g0, t0, t_end, samples, opts, |_, _, _| false)
}

/// As [`integrate_gauge`], stopping after the first recorded sample for
/// which `stop(t, g, residual)` holds.
pub fn integrate_until<M: FlowModel>(
    model: &M,
    g0: Blocks,
    t0: f64,
    t_end: f64,
    samples: &[f64],
    opts: &FlowOptions,
    mut stop: impl FnMut(f64, &Blocks, f64) -> bool,
) -> Result<MetricTrajectory> {
    let dims = model.block_dims();
    if g0.len() != dims.len() || g0.iter().zip(&dims).any(|(b, &d)| b.shape() != (d, d)) {
        return input("initial gauge has the wrong block shapes");
    }
    if !(t_end >= t0) {
        return input("t_end must not precede t0");
    }
    if samples.windows(2).any(|w| w[1] <= w[0]) || samples.iter().any(|&s| s <= t0 || s > t_end) {
        return input("sample times must be increasing and inside (t0, t_end]");
    }
    blocks::inverse(&g0)?;
    let one = blocks::identity(&dims);
    let record_all = samples.is_empty();
    let mut traj = MetricTrajectory::default();
    let mut current = model.rebase(&g0)?;
    let mut g = g0;
    let mut t = t0;
    let mut dt = opts.dt0;
    // g is a product of exponentials of Hermitian steps, so positivity of
    // g*g reduces to finiteness of g and of the exactly accumulated log det.
    let mut log_det: f64 = g.iter().map(|b| b.determinant().norm().ln()).sum();
    let record = |traj: &mut MetricTrajectory, t: f64, g: &Blocks, log_det: f64, k: &Blocks, dt: f64| -> Result<()> {
        if !log_det.is_finite() || g.iter().any(|b| b.iter().any(|z| !z.is_finite())) {
            return internal(format!("metric lost positivity at t = {t}"));
        }
        traj.times.push(t);
        traj.gauges.push(g.clone());
        traj.residuals.push(blocks::herm_norm(k));
        traj.step_sizes.push(dt);
        Ok(())
    };
    let mut k = current.k(&one)?;
    record(&mut traj, t, &g, log_det, &k, dt)?;
    let mut next = 0;
    while t < t_end {
        if traj.accepted + traj.rejected >= opts.max_steps {
            return Err(Error::Stiffness(format!("step budget exhausted at t = {t:.6e}")));
        }
        let target = if record_all { t_end } else { samples[next] };
        let cap = (opts.dt_rel * t).max(1.0);
        let h = dt.min(cap).min(target - t);
        let hits = h >= target - t;
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Stiffness(format!("step size underflow at t = {t:.6e} (dt = {h:.3e})")));
        }
        let stepper = Stepper { model: &current, dims: dims.clone() };
        let dims = &dims;
        let k0 = blocks::pack_herm(&k);
        // Step doubling; the error compares the step factors directly.
        let attempt = (|| -> Result<(Blocks, Blocks, f64)> {
            let jac = stepper.jacobian(&one, &k0)?;
            let big = stepper.step(&one, &k0, &jac, h)?;
            let v1 = stepper.step(&one, &k0, &jac, 0.5 * h)?;
            let half = stepper.factor(&v1, 0.5);
            let kh = blocks::pack_herm(&current.k(&half)?);
            let v2 = stepper.step(&half, &kh, &jac, 0.5 * h)?;
            let two = stepper.advance(&half, &v2, 0.5);
            let rel = blocks::mul(&stepper.factor(&big, 0.5), &blocks::inverse(&two)?);
            let tr_v = 0.5 * (blocks::packed_trace(dims, &v1) + blocks::packed_trace(dims, &v2));
            Ok((two, rel, tr_v))
        })();
        let (f, rel, tr_v) = match attempt {
            Ok(r) => r,
            Err(Error::Stiffness(_)) => {
                traj.rejected += 1;
                dt = h * 0.25;
                continue;
            }
            Err(e) => return Err(e),
        };
        let err = blocks::max_abs(&blocks::sub(&rel, &one));
        let factor = if err > 0.0 { 0.9 * (opts.tol / err).cbrt() } else { 4.0 };
        if err <= opts.tol {
            traj.accepted += 1;
            t = if hits { target } else { t + h };
            if blocks::min_eigenvalue(&f) <= 0.0 {
                return internal(format!("step factor lost positivity at t = {t}"));
            }
            g = blocks::mul(&f, &g);
            log_det += tr_v;
            current = current.rebase(&f)?;
            k = current.k(&one)?;
            if record_all || hits {
                record(&mut traj, t, &g, log_det, &k, h)?;
                if !record_all {
                    next += 1;
                }
                if stop(t, &g, traj.final_residual()) {
                    break;
                }
            }
            if !hits || h >= dt {
                dt = h * factor.clamp(0.2, 4.0);
            }
        } else {
            traj.rejected += 1;
            dt = h * factor.clamp(0.1, 0.9);
        }
    }
    Ok(traj)
}

/// Principal square root of a positive metric.
pub fn metric_sqrt(h0: &[CMat]) -> Result<Blocks> {
    if !blocks::is_hermitian(h0, 1e-12 * (1.0 + blocks::max_abs(h0))) {
        return domain("initial metric is not self-adjoint");
    }
    if !(blocks::min_eigenvalue(h0) > 0.0) {
        return domain("initial metric is not positive definite");
    }
    Ok(blocks::herm_apply(h0, f64::sqrt))
}

/// Integrates the metric flow `h⁻¹ḣ = −2i(ΛF_h − λ)` from `h₀` on a quiver algebra.
pub fn integrate_metric_flow(
    q: &QuiverData,
    h0: &[CMat],
    t_end: f64,
    samples: &[f64],
    opts: &FlowOptions,
) -> Result<MetricTrajectory> {
    let model = QuiverModel::new(q.clone())?;
    if h0.len() != q.vertices.len() {
        return input("one metric block per vertex required");
    }
    integrate_gauge(&model, metric_sqrt(h0)?, 0.0, t_end, samples, opts)
}

/// `n` logarithmically spaced times in `[a, b]`.
pub fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let last = n.saturating_sub(1).max(1);
    (0..n)
        .map(|i| match i {
            0 => a,
            i if i == last => b,
            i => (la + (lb - la) * i as f64 / last as f64).exp(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lozenge::C;

    fn a2(x: f64, rho: (f64, f64)) -> QuiverData {
        QuiverData::thin(&[1.0, 1.0], &[rho.0, rho.1], &[(0, 1, C::new(x, 0.0))])
    }

    #[test]
    fn fixed_point_is_stationary() {
        // ρ₁ − ρ₂ = 2|x|² balances the arrow at h = 1.
        let q = a2(0.5, (0.25, -0.25));
        let h0 = blocks::identity(&[1, 1]);
        let tr = integrate_metric_flow(&q, &h0, 5.0, &[], &FlowOptions::default()).unwrap();
        assert!(tr.final_residual() < 1e-14);
        assert!(tr.log_metric_eigs(tr.len() - 1).iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn scalar_vertex_is_stationary() {
        let q = QuiverData::thin(&[2.0], &[0.7], &[]);
        let h0 = vec![CMat::from_element(1, 1, C::new(3.0, 0.0))];
        let tr = integrate_metric_flow(&q, &h0, 10.0, &[], &FlowOptions::default()).unwrap();
        assert!((tr.metric(tr.len() - 1)[0][(0, 0)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn a2_converges_to_balanced_metric() {
        let q = a2(1.0, (0.5, -0.5));
        let h0 = blocks::identity(&[1, 1]);
        let tr = integrate_metric_flow(&q, &h0, 50.0, &[10.0, 50.0], &FlowOptions::default()).unwrap();
        assert_eq!(tr.times, vec![0.0, 10.0, 50.0]);
        assert!(tr.final_residual() < 1e-6);
        // Closed form: |x|² e^{u₂−u₁} = (ρ₁ − ρ₂)/(1/m₁ + 1/m₂) = 1/2, with m₁u₁ + m₂u₂ = 0.
        let e = tr.log_metric_eigs(2);
        assert!((e[1] - e[0] - 0.5f64.ln()).abs() < 1e-6);
        assert!((e[0] + e[1]).abs() < 1e-9);
    }

    /// Thin A₂ with balanced masses reduces to `ẇ = 4|x|²e^{−w} − 2(ρ₁−ρ₂)`, `w = u₁ − u₂`.
    #[test]
    fn matches_scalar_reduction() {
        let (x, d) = (0.8, 0.3);
        let q = a2(x, (d / 2.0, -d / 2.0));
        let h0 = vec![CMat::from_element(1, 1, C::new(2.0, 0.0)), CMat::from_element(1, 1, C::new(0.5, 0.0))];
        let tr = integrate_metric_flow(&q, &h0, 3.0, &[3.0], &FlowOptions::default()).unwrap();
        let e = tr.log_metric_eigs(1);
        // Reference by RK4 on the scalar equation.
        let f = |w: f64| 4.0 * x * x * (-w).exp() - 2.0 * d;
        let mut w = 4.0f64.ln();
        let n = 30_000;
        let hh = 3.0 / n as f64;
        for _ in 0..n {
            let k1 = f(w);
            let k2 = f(w + 0.5 * hh * k1);
            let k3 = f(w + 0.5 * hh * k2);
            let k4 = f(w + hh * k3);
            w += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!((e[0] - e[1] - w).abs() < 1e-6, "{} vs {}", e[0] - e[1], w);
    }

    #[test]
    fn rejects_non_positive_metric() {
        let q = a2(1.0, (0.0, 0.0));
        let h0 = vec![CMat::from_element(1, 1, C::new(-1.0, 0.0)), CMat::from_element(1, 1, C::new(1.0, 0.0))];
        assert!(integrate_metric_flow(&q, &h0, 1.0, &[], &FlowOptions::default()).is_err());
    }
}
