use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::blocks::{self, Blocks};
use super::integrator::{integrate_gauge, integrate_until, log_times, FlowOptions, MetricTrajectory};
use super::model::{AlgebraModel, FlowModel, QuiverModel};
use super::projector::projector_lattice;
use crate::error::{domain, input, internal, Result};
use crate::lattice::{iterated_weight_filtration, weight_filtration, PolarizedLattice, LABEL_TOL};
use crate::lozenge::{gauge_act, CMat, Elem, LozengeAlgebra, QuiverData, C, I};

/// Power-law exponent below which a residual counts as integrable.
pub const INTEGRABLE_EXPONENT: f64 = -1.05;
/// Residuals below this are treated as exact zeros.
pub const RESIDUAL_FLOOR: f64 = 1e-11;
/// Relative step for centered time derivatives.
pub const FD_REL: f64 = 1e-4;
const DEGREE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Least-squares fit of `log s = log c + p log t`.
pub fn power_law_fit(t: &[f64], s: &[f64]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = t.iter().zip(s).filter(|(_, &v)| v > 0.0).map(|(&a, &b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return domain("power-law fit needs two positive samples");
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return domain("power-law fit needs distinct times");
    }
    let exponent = sxy / sxx;
    Ok(PowerFit { exponent, prefactor: (my - exponent * mx).exp() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepFit {
    /// Coefficients on `(t, log t, log log t, 1)`.
    pub coeffs: [f64; 4],
    pub residual_sup: f64,
    /// Largest change of the `log t` coefficient between the full window and its halves.
    pub drift: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub window: (f64, f64),
    pub steps: Vec<StepFit>,
}

impl AsymptoticFit {
    pub fn log_t_coefficients(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.coeffs[1]).collect()
    }

    pub fn t_coefficients(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.coeffs[0]).collect()
    }
}

/// Mean of `log` of the eigenvalues of `h` compressed to the range of `p`.
pub fn compressed_log_mean(h: &[CMat], p: &[CMat]) -> f64 {
    let (mut total, mut rank) = (0.0, 0usize);
    for (hv, pv) in h.iter().zip(p) {
        let eig = SymmetricEigen::new(blocks::hermitian_part(pv));
        let cols: Vec<_> = (0..pv.nrows())
            .filter(|&i| eig.eigenvalues[i] > 0.5)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        if cols.is_empty() {
            continue;
        }
        let q = CMat::from_columns(&cols);
        let c = q.adjoint() * hv * &q;
        total += blocks::eigenvalues(&c).iter().map(|e| e.ln()).sum::<f64>();
        rank += cols.len();
    }
    if rank == 0 {
        0.0
    } else {
        total / rank as f64
    }
}

fn lsq(ts: &[f64], ys: &[f64]) -> Result<([f64; 4], f64)> {
    let tmax = ts.iter().copied().fold(0.0, f64::max);
    let a = DMatrix::from_fn(ts.len(), 4, |i, j| match j {
        0 => ts[i] / tmax,
        1 => ts[i].ln(),
        2 => ts[i].ln().ln(),
        _ => 1.0,
    });
    let b = DVector::from_column_slice(ys);
    let sol = a.clone().svd(true, true).solve(&b, 1e-12).map_err(|e| crate::Error::Internal(e.to_string()))?;
    let res = (&a * &sol - &b).amax();
    Ok(([sol[0] / tmax, sol[1], sol[2], sol[3]], res))
}

/// Fits `log h` restricted to each step against `(t, log t, log log t, 1)`
/// over the samples with `t ≥ t_min`; the window must span two decades.
pub fn asymptotic_fit(traj: &MetricTrajectory, steps: &[Blocks], t_min: f64) -> Result<AsymptoticFit> {
    let lo = t_min.max(std::f64::consts::E * 1.01);
    let idx: Vec<usize> = (0..traj.len()).filter(|&i| traj.times[i] >= lo).collect();
    if idx.len() < 6 {
        return domain("fit window needs at least six samples");
    }
    let (a, b) = (traj.times[idx[0]], traj.times[*idx.last().unwrap()]);
    if b / a < 100.0 * (1.0 - 1e-9) {
        return domain(format!("fit window [{a:e}, {b:e}] spans less than two decades"));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| traj.times[i]).collect();
    let mid = (a * b).sqrt();
    let mut out = Vec::new();
    for p in steps {
        let ys: Vec<f64> = idx.iter().map(|&i| compressed_log_mean(&traj.metric(i), p)).collect();
        let (coeffs, residual_sup) = lsq(&ts, &ys)?;
        let mut drift = 0.0f64;
        for half in [ts.iter().map(|&t| t <= mid * 1.000001).collect::<Vec<_>>(), ts.iter().map(|&t| t >= mid / 1.000001).collect()] {
            let (ht, hy): (Vec<f64>, Vec<f64>) = ts.iter().zip(&ys).zip(&half).filter(|(_, &k)| k).map(|((&t, &y), _)| (t, y)).unzip();
            if ht.len() >= 4 {
                drift = drift.max((lsq(&ht, &hy)?.0[1] - coeffs[1]).abs());
            }
        }
        out.push(StepFit { coeffs, residual_sup, drift });
    }
    Ok(AsymptoticFit { window: (a, b), steps: out })
}

#[derive(Clone, Debug)]
pub struct Rescaled {
    pub traj: MetricTrajectory,
    /// Largest discrepancy in `ẏy⁻¹ = (2t)⁻¹(r + ẋx⁻¹)` at interior samples (finite differences).
    pub identity_defect: f64,
}

/// `y(t) = (2t)^{r/2} x(½ log 2t)` for a trajectory `x(s)` commuting with `r`.
pub fn rescale_time(x: &MetricTrajectory, r: &[CMat]) -> Result<Rescaled> {
    for g in &x.gauges {
        if blocks::commutator_norm(g, r) > 1e-9 * (1.0 + blocks::max_abs(g)) {
            return domain("trajectory does not commute with the weight grading");
        }
    }
    let times: Vec<f64> = x.times.iter().map(|s| (2.0 * s).exp() / 2.0).collect();
    let gauges: Vec<Blocks> = x
        .gauges
        .iter()
        .zip(&times)
        .map(|(g, &t)| blocks::mul(&blocks::herm_apply(r, |e| (2.0 * t).powf(e / 2.0)), g))
        .collect();
    let mut defect = 0.0f64;
    for i in 1..times.len().saturating_sub(1) {
        let logdiff = |gs: &[Blocks], ts: &[f64]| -> Result<Blocks> {
            let d = blocks::scale(&blocks::sub(&gs[i + 1], &gs[i - 1]), 1.0 / (ts[i + 1] - ts[i - 1]));
            Ok(blocks::mul(&d, &blocks::inverse(&gs[i])?))
        };
        let ydot = logdiff(&gauges, &times)?;
        let xdot = logdiff(&x.gauges, &x.times)?;
        let rhs: Blocks = r.iter().zip(&xdot).map(|(rv, xv)| (rv + xv) * C::new(1.0 / (2.0 * times[i]), 0.0)).collect();
        defect = defect.max(blocks::max_abs(&blocks::sub(&ydot, &rhs)) * times[i]);
    }
    let traj = MetricTrajectory { times, gauges, residuals: x.residuals.clone(), step_sizes: vec![], accepted: 0, rejected: 0 };
    Ok(Rescaled { traj, identity_defect: defect })
}

/// Flow residual `‖herm(ġg⁻¹) − K(g)‖` along a gauge path, with `ġ` by centered differences.
pub fn flow_residual<M: FlowModel + ?Sized>(model: &M, t: f64, path: &dyn Fn(f64) -> Result<Blocks>) -> Result<f64> {
    let (gm, g, gp) = (path(t * (1.0 - FD_REL))?, path(t)?, path(t * (1.0 + FD_REL))?);
    let gdot = blocks::scale(&blocks::sub(&gp, &gm), 1.0 / (2.0 * t * FD_REL));
    let lhs: Blocks = blocks::mul(&gdot, &blocks::inverse(&g)?).iter().map(blocks::hermitian_part).collect();
    Ok(blocks::herm_norm(&blocks::sub(&lhs, &model.k(&g)?)))
}

#[derive(Clone, Debug)]
pub struct ResidualCurve {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Power law fitted on the last decade.
    pub fit: Option<PowerFit>,
    pub integrable: bool,
}

impl ResidualCurve {
    pub fn new(times: Vec<f64>, residuals: Vec<f64>) -> Result<Self> {
        let t_end = *times.last().ok_or_else(|| crate::Error::Input("empty residual curve".into()))?;
        let (ts, rs): (Vec<f64>, Vec<f64>) =
            times.iter().zip(&residuals).filter(|(&t, _)| t >= t_end / 10.0 * (1.0 - 1e-9)).map(|(&t, &r)| (t, r)).unzip();
        if rs.iter().all(|&r| r < RESIDUAL_FLOOR) {
            return Ok(ResidualCurve { times, residuals, fit: None, integrable: true });
        }
        let fit = power_law_fit(&ts, &rs)?;
        Ok(ResidualCurve { times, residuals, fit: Some(fit), integrable: fit.exponent < INTEGRABLE_EXPONENT })
    }

    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.exponent)
    }
}

#[derive(Clone, Debug)]
pub struct GreensCorrection {
    pub times: Vec<f64>,
    pub z: Vec<Blocks>,
    pub residual_y: ResidualCurve,
    pub residual_z: ResidualCurve,
    /// `max ‖[r, w]‖` over the samples.
    pub w_degree_defect: f64,
}

/// `z = y(1 + G(y⁻¹wy))`, `w = −iΛ((y·α₋₁)²)`, with `G` the Green's operator of
/// the (twisted) algebra `a`, and the flow residuals of `y` and `z` under `model`.
pub fn greens_correction<M: FlowModel + ?Sized>(
    y: &dyn Fn(f64) -> Result<Blocks>,
    times: &[f64],
    a: &LozengeAlgebra,
    alpha_m1: &Elem,
    r: &[CMat],
    model: &M,
) -> Result<GreensCorrection> {
    if !a.is_full() {
        return input("Green's correction expects a full quiver-built algebra");
    }
    let l = a.layout().clone();
    let g_op = if a.twist().max_abs() == 0.0 { None } else { Some(a.hodge()?.g) };
    let alpha = alpha_m1.part(&l, 2);
    let alpha = alpha.sub(&alpha.star());
    let w_of = |yv: &Blocks| -> Result<Elem> {
        let ya = gauge_act(a, &Elem::from_a0(&l, yv.clone()), &alpha)?;
        Ok(a.lambda(&a.mul(&ya, &ya)).scale(-I))
    };
    let z_of = |t: f64| -> Result<Blocks> {
        let yv = y(t)?;
        let Some(g) = &g_op else { return Ok(yv) };
        let w = w_of(&yv)?;
        let yinv = blocks::inverse(&yv)?;
        let c = Elem::from_a0(&l, blocks::mul(&blocks::mul(&yinv, &w.a0), &yv));
        let gc = a.embed(&(g * a.coords(&c))).a0;
        let one_plus: Blocks = gc.iter().map(|b| CMat::identity(b.nrows(), b.ncols()) + b).collect();
        Ok(blocks::mul(&yv, &one_plus))
    };
    let mut z = Vec::with_capacity(times.len());
    let (mut ry, mut rz) = (Vec::new(), Vec::new());
    let mut w_degree_defect = 0.0f64;
    for &t in times {
        let yv = y(t)?;
        w_degree_defect = w_degree_defect.max(blocks::commutator_norm(r, &w_of(&yv)?.a0));
        z.push(z_of(t)?);
        ry.push(flow_residual(model, t, y)?);
        rz.push(flow_residual(model, t, &z_of)?);
    }
    Ok(GreensCorrection {
        times: times.to_vec(),
        z,
        residual_y: ResidualCurve::new(times.to_vec(), ry)?,
        residual_z: ResidualCurve::new(times.to_vec(), rz)?,
        w_degree_defect,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AsymptoticOptions {
    pub t_min: f64,
    pub t_end: f64,
    pub samples: usize,
    pub flow: FlowOptions,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions { t_min: 10.0, t_end: 1e4, samples: 25, flow: FlowOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticSolution {
    /// Weight grading `r = Σ λ_k (p_k − p_{k−1})`.
    pub r: Blocks,
    pub labels: Vec<f64>,
    /// Graded pieces `p_k − p_{k−1}` of the weight filtration.
    pub steps: Vec<Blocks>,
    /// Depth of the iterated weight filtration.
    pub depth: usize,
    /// `(λ, ‖α''_λ‖)` for the nonzero degree components of the normalized `α''`.
    pub degrees: Vec<(f64, f64)>,
    /// Gap below degree −1 (∞ when no component lies below −1).
    pub epsilon: f64,
    /// Gauge putting the degree-0 part in balanced form.
    pub king_gauge: Blocks,
    pub diamond_dims: [usize; 4],
    /// Distance of `α''₋₁` from the harmonic part.
    pub harmonic_defect: f64,
    pub times: Vec<f64>,
    /// Constructed gauge `g(t) = z(t)·g₀` acting on the original `α''`.
    pub gauges: Vec<Blocks>,
    pub correction: GreensCorrection,
    pub certified: bool,
}

impl AsymptoticSolution {
    pub fn trajectory(&self) -> MetricTrajectory {
        MetricTrajectory {
            times: self.times.clone(),
            gauges: self.gauges.clone(),
            residuals: self.correction.residual_z.residuals.clone(),
            ..Default::default()
        }
    }
}

/// Sublattice of elements whose polarization is real, with the real polarization.
pub fn phase_zero_part(pl: &PolarizedLattice) -> Result<(PolarizedLattice, Vec<usize>)> {
    let l = pl.lattice();
    let scale = pl.value(l.top()).norm().max(1.0);
    let keep: Vec<bool> = (0..l.len()).map(|x| pl.value(x).im.abs() <= 1e-9 * scale).collect();
    let (sub, map) = l.sublattice(&keep)?;
    let vals: Vec<f64> = map.iter().map(|&x| pl.value(x).re).collect();
    let p = PolarizedLattice::from_cover_values(sub, |a, b| (vals[b] - vals[a]).into())?;
    Ok((p, map))
}

/// Spectral decomposition of `x ∈ A^{0,1}` under `ad_r`.
pub fn degree_parts(a: &LozengeAlgebra, r: &Elem, x: &Elem) -> Vec<(f64, Elem)> {
    let l = a.layout();
    let x = x.part(l, 2);
    let dims = a.dims();
    let (o, n) = (dims[0] + dims[1], dims[2]);
    if n == 0 {
        return vec![];
    }
    let ad = a.op_matrix(|e| a.comm(r, &e.part(l, 2)));
    let block = ad.view((o, o), (n, n)).into_owned();
    let eig = SymmetricEigen::new(blocks::hermitian_part(&block));
    let coords = a.coords(&x);
    let xc = coords.rows(o, n).into_owned();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out: Vec<(f64, Elem)> = Vec::new();
    let mut i = 0;
    while i < n {
        let lam = eig.eigenvalues[order[i]];
        let mut j = i;
        let mut part = nalgebra::DVector::<C>::zeros(n);
        while j < n && (eig.eigenvalues[order[j]] - lam).abs() < DEGREE_TOL {
            let v = eig.eigenvectors.column(order[j]);
            part += v * (v.adjoint() * &xc)[(0, 0)];
            j += 1;
        }
        let mut full = coords.clone() * C::new(0.0, 0.0);
        full.rows_mut(o, n).copy_from(&part);
        let e = a.embed(&full);
        if e.max_abs() > 1e-12 * (1.0 + x.max_abs()) {
            out.push((lam, e));
        }
        i = j;
    }
    out
}

fn with_arrows(q: &QuiverData, pp: &Elem) -> QuiverData {
    let mut out = q.clone();
    for (a, m) in out.arrows.iter_mut().zip(&pp.pp) {
        a.alpha = m.clone();
    }
    out
}

/// Fixed point of the flow from `g = 1`, integrated until the residual is below `tol`.
fn fixed_point<M: FlowModel>(model: &M, tol: f64, opts: &FlowOptions) -> Result<Blocks> {
    let dims = model.block_dims();
    let samples = log_times(0.1, 1e4, 25);
    let tr = integrate_until(model, blocks::identity(&dims), 0.0, 1e4, &samples, opts, |_, _, r| r < tol)?;
    if tr.final_residual() < tol {
        return Ok(tr.gauges.last().unwrap().clone());
    }
    internal("degree-0 part has no balanced metric (King normalization failed)")
}

/// Builds an approximate solution `g(t)` of the flow for a phase-0 semistable
/// representation by the weight-grading recipe, and certifies it through the
/// integrability of its residual.
pub fn construct_asymptotic_solution(q: &QuiverData, opts: &AsymptoticOptions) -> Result<AsymptoticSolution> {
    let model = QuiverModel::new(q.clone())?;
    let pl = projector_lattice(q)?;
    let scale = q.vertices.iter().map(|v| v.mass * v.dim as f64 * (1.0 + v.rho.abs())).sum::<f64>();
    if !pl.polarized.is_semistable() || model.rho_bar().abs() > 1e-12 * scale {
        return domain("representation is not semistable of phase 0; split it by its Harder–Narasimhan filtration first");
    }
    let (real, map) = phase_zero_part(&pl.polarized)?;
    let f = weight_filtration(&real)?;
    let depth = iterated_weight_filtration(&real)?.depth;
    let proj = |k: usize| &pl.projectors[map[f.chain[k]]];
    let steps: Vec<Blocks> = (0..f.steps()).map(|k| blocks::sub(proj(k + 1), proj(k))).collect();
    let dims: Vec<usize> = q.vertices.iter().map(|v| v.dim).collect();
    let mut r: Blocks = dims.iter().map(|&d| CMat::zeros(d, d)).collect();
    for (step, &lam) in steps.iter().zip(&f.labels) {
        r = r.iter().zip(step).map(|(a, b)| a + b * C::new(lam, 0.0)).collect();
    }

    let base = LozengeAlgebra::build_from_quiver(q)?;
    let l = base.layout().clone();
    let r_elem = Elem::from_a0(&l, r.clone());

    // King normalization of the degree-0 part.
    let parts = degree_parts(&base, &r_elem, &q.alpha_pp());
    let zero_pp = parts.iter().filter(|(lam, _)| lam.abs() < LABEL_TOL).fold(Elem::zero(&l), |acc, (_, e)| acc.add(e));
    let q0 = with_arrows(q, &zero_pp);
    let g0 = fixed_point(&QuiverModel::new(q0)?, 1e-12, &opts.flow)?;
    if blocks::commutator_norm(&g0, &r) > 1e-8 {
        return internal("King normalization does not commute with the weight grading");
    }
    let g0_inv = blocks::inverse(&g0)?;
    let mut qn = q.clone();
    for a in qn.arrows.iter_mut() {
        a.alpha = &g0[a.target] * &a.alpha * &g0_inv[a.source];
    }

    let parts = degree_parts(&base, &r_elem, &qn.alpha_pp());
    let norm_tol = 1e-10 * (1.0 + qn.alpha_pp().max_abs());
    let mut degrees = Vec::new();
    let (mut alpha0, mut alpha_m1) = (Elem::zero(&l), Elem::zero(&l));
    let mut epsilon = f64::INFINITY;
    for (lam, e) in &parts {
        let size = e.norm_sq().sqrt();
        if size <= norm_tol {
            continue;
        }
        degrees.push((*lam, size));
        if *lam > LABEL_TOL {
            return internal(format!("α'' has a component of positive degree {lam}"));
        } else if lam.abs() <= LABEL_TOL {
            alpha0 = alpha0.add(e);
        } else if *lam > -1.0 + LABEL_TOL {
            return domain(format!(
                "α'' has a component of degree {lam} in (−1, 0) that a vertexwise gauge cannot remove"
            ));
        } else if (*lam + 1.0).abs() <= LABEL_TOL {
            alpha_m1 = alpha_m1.add(e);
        } else {
            epsilon = epsilon.min(-1.0 - lam);
        }
    }

    let twisted = base.twist_by(&alpha0.sub(&alpha0.star()));
    if twisted.theta().max_abs() > 1e-8 || twisted.d_squared_norm() > 1e-8 {
        return internal("twisting by the balanced degree-0 part is not flat");
    }
    let theta_d = Elem::from_a2(&l, r.iter().map(|b| b * (-I)).collect());
    let diamond = twisted.graded_harmonic_subalgebra(&r_elem, [0.0, 1.0, -1.0, 0.0], theta_d)?;
    let alpha_d = diamond.project(&alpha_m1);
    let harmonic_defect = alpha_d.sub(&alpha_m1).max_abs();
    let x_model = AlgebraModel::new(diamond.clone(), alpha_d.sub(&alpha_d.star()));

    // x(s) at every s needed for y and its centered derivatives.
    let times = log_times(opts.t_min, opts.t_end, opts.samples);
    let mut all_t: Vec<f64> = times.iter().flat_map(|&t| [t * (1.0 - FD_REL), t, t * (1.0 + FD_REL)]).collect();
    all_t.sort_by(f64::total_cmp);
    let s_of = |t: f64| 0.5 * (2.0 * t).ln();
    let s_samples: Vec<f64> = all_t.iter().map(|&t| s_of(t)).collect();
    let s0 = s_samples[0].min(0.0) - 1.0;
    let xs = integrate_gauge(&x_model, blocks::identity(&dims), s0, *s_samples.last().unwrap(), &s_samples, &opts.flow)?;
    let lookup: HashMap<u64, Blocks> = all_t.iter().zip(xs.gauges.iter().skip(1)).map(|(t, g)| (t.to_bits(), g.clone())).collect();
    let r_ref = &r;
    let y = move |t: f64| -> Result<Blocks> {
        let x = lookup.get(&t.to_bits()).ok_or_else(|| crate::Error::Internal(format!("x(s) not sampled at t = {t}")))?;
        Ok(blocks::mul(&blocks::herm_apply(r_ref, |e| (2.0 * t).powf(e / 2.0)), x))
    };
    let norm_model = QuiverModel::new(qn)?;
    let correction = greens_correction(&y, &times, &twisted, &alpha_m1, &r, &norm_model)?;
    let gauges = correction.z.iter().map(|z| blocks::mul(z, &g0)).collect();
    let certified = correction.residual_z.integrable;
    Ok(AsymptoticSolution {
        r,
        labels: f.labels.clone(),
        steps,
        depth,
        degrees,
        epsilon,
        king_gauge: g0,
        diamond_dims: diamond.dims(),
        harmonic_defect,
        times,
        gauges,
        correction,
        certified,
    })
}
