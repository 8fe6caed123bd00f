use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

use super::cylinder::{dist_per, CylinderConfig};
use super::compare::HANDOFF_Y;
use super::grid::Grid;
use super::pde::CurveState;
use crate::error::{domain, input, Result};

/// `φ(x) = x arctan x − ½ log(1+x²)`, the solution of `(1+x²)φ'' = 1`, `φ(0) = φ'(0) = 0`.
pub fn phi(x: f64) -> f64 {
    x * x.atan() - 0.5 * (x * x).ln_1p()
}

pub fn dphi(x: f64) -> f64 {
    x.atan()
}

pub fn ddphi(x: f64) -> f64 {
    1.0 / (1.0 + x * x)
}

const GL_X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];
const PANELS: usize = 400;

fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    GL_X.iter().zip(GL_W).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Solution of `ρ(x,0)χ'' = x − a` on the segment `[a, a+m]`, normalized by `χ(a) = 0`
/// and `χ(x) + m log|x − a − m| → 0` at the far end. The singular part of the
/// right-hand side, `1/v + m/u² + 1/u` with `v = x − a`, `u = x − a − m`, is
/// integrated in closed form; the bounded remainder by Gauss–Legendre panels.
#[derive(Clone, Debug)]
struct SingularSolve {
    cfg: CylinderConfig,
    a: f64,
    m: f64,
    reflect: bool,
    /// Cumulative `∫R` and `∫sR` at the panel boundaries.
    j0: Vec<f64>,
    j1: Vec<f64>,
    c0: f64,
    c1: f64,
}

impl SingularSolve {
    fn new(cfg: &CylinderConfig, a: f64, m: f64, reflect: bool) -> Self {
        let mut s = SingularSolve { cfg: cfg.clone(), a, m, reflect, j0: vec![0.0], j1: vec![0.0], c0: 0.0, c1: 0.0 };
        let h = m / PANELS as f64;
        for k in 0..PANELS {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let i0 = gauss(lo, hi, |x| s.remainder(x));
            let i1 = gauss(lo, hi, |x| x * s.remainder(x));
            s.j0.push(s.j0[k] + i0);
            s.j1.push(s.j1[k] + i1);
        }
        // χ(a) = 0 and regular part zero at a+m
        let fa = -m * m.ln() + m - m * m.ln();
        s.c0 = -fa;
        let fb = m * m.ln() - m;
        let i2b = (a + m) * s.j0[PANELS] - s.j1[PANELS];
        s.c1 = -(fb + i2b + s.c0) / m;
        s
    }

    /// `(x − a)/ρ(x̃, 0) − 1/v − m/u² − 1/u`, with `x̃` the reflected point for `ψ`.
    /// The endpoint punctures contribute exactly the subtracted terms while they
    /// are the nearest images, and are skipped there.
    fn remainder(&self, x: f64) -> f64 {
        let l = self.cfg.l;
        let v = x - self.a;
        let u = v - self.m;
        let (xs, pa, pb) = if self.reflect {
            (2.0 * self.a + self.m - x, self.a + self.m, self.a)
        } else {
            (x, self.a, self.a + self.m)
        };
        let (near_a, near_b) = (v <= 0.5 * l, -u <= 0.5 * l);
        let mut r = 0.0;
        for &p in &self.cfg.punctures {
            if (near_a && dist_per(p, pa, l) < 1e-12) || (near_b && dist_per(p, pb, l) < 1e-12) {
                continue;
            }
            let d = dist_per(xs, p, l);
            r += v / (d * d);
        }
        if !near_a {
            r -= 1.0 / v;
        }
        if !near_b {
            r -= self.m / (u * u) + 1.0 / u;
        }
        r
    }

    fn eval(&self, x: f64) -> f64 {
        let v = (x - self.a).clamp(0.0, self.m);
        let u = v - self.m;
        let xlogx = |z: f64| if z == 0.0 { 0.0 } else { z * z.abs().ln() };
        let sing = xlogx(v) - v + xlogx(u) - u - self.m * u.abs().ln();
        let h = self.m / PANELS as f64;
        let k = ((v / h) as usize).min(PANELS - 1);
        let lo = self.a + k as f64 * h;
        let xx = self.a + v;
        let j0 = self.j0[k] + gauss(lo, xx, |s| self.remainder(s));
        let j1 = self.j1[k] + gauss(lo, xx, |s| s * self.remainder(s));
        sing + (xx * j0 - j1) + self.c0 + self.c1 * v
    }
}

/// Evaluators for `χ_i` and `ψ_i` on the segment `[x_i, x_{i+1}]`.
#[derive(Clone, Debug)]
pub struct SegmentFunctions {
    pub a: f64,
    pub m: f64,
    chi: SingularSolve,
    psi: SingularSolve,
}

impl SegmentFunctions {
    /// `x` is measured on the unwrapped segment `[a, a + m]`.
    pub fn chi(&self, x: f64) -> f64 {
        self.chi.eval(x)
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.psi.eval(2.0 * self.a + self.m - x)
    }
}

/// The segment functions of segment `i`, which starts at puncture `i`.
pub fn ansatz_functions(i: usize, cfg: &CylinderConfig) -> Result<SegmentFunctions> {
    let n = cfg.n();
    if n < 2 || i >= n {
        return input("segment index out of range or fewer than two punctures");
    }
    let a = cfg.punctures[i];
    let m = cfg.masses()[(i + 1) % n];
    Ok(SegmentFunctions { a, m, chi: SingularSolve::new(cfg, a, m, false), psi: SingularSolve::new(cfg, a, m, true) })
}

/// Near-puncture coefficients `f ≈ a₀ + a₁(x−x_i) + a₂ φ((x−x_i)/a₀)` and
/// segment coefficients `f ≈ b₀(x−x_i) + b₁(x_{i+1}−x) + b₂χ_i + b₃ψ_i`.
#[derive(Clone, Debug, Serialize)]
pub struct AnsatzCoeffs {
    pub a: Vec<[f64; 3]>,
    pub b: Vec<[f64; 4]>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitWindows {
    /// Inner window half-width in units of `|a₀|`.
    pub inner: f64,
    /// Fraction of the segment excluded at each end for the segment fit.
    pub outer: f64,
}

impl Default for FitWindows {
    fn default() -> Self {
        FitWindows { inner: 20.0, outer: 0.05 }
    }
}

/// Fits above this relative rms residual mean the asymptotic regime was not reached.
pub const FIT_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct AnsatzFit {
    pub t: f64,
    pub coeffs: AnsatzCoeffs,
    /// Relative rms residual of each local fit: punctures, then segments.
    pub fit_residual: Vec<f64>,
    /// Per puncture, relative residuals of the rows `1`, `x − x_i`, `log|x − x_i|`,
    /// left then right.
    pub matching: Vec<[f64; 6]>,
}

fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = rows.first().map_or(0, |r| r.len());
    if rows.len() < k || k == 0 {
        return domain("too few nodes in the fit window");
    }
    let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    // column scaling keeps the normal problem well posed
    let scale: Vec<f64> = (0..k).map(|j| a.column(j).amax().max(1e-300)).collect();
    let an = DMatrix::from_fn(rows.len(), k, |i, j| a[(i, j)] / scale[j]);
    let x = an.svd(true, true).solve(&b, 1e-14).map_err(|e| crate::Error::Internal(e.to_string()))?;
    let coef: Vec<f64> = (0..k).map(|j| x[j] / scale[j]).collect();
    let res = &a * DVector::from_column_slice(&coef) - &b;
    let rel = (res.norm_squared() / rows.len() as f64).sqrt() / b.amax().max(1e-300);
    Ok((coef, rel))
}

/// Offsets of every node from `x0` on the unwrapped interval `[x0 − L/2, x0 + L/2)`.
fn offset(x: f64, x0: f64, l: f64) -> f64 {
    (x - x0 + 0.5 * l).rem_euclid(l) - 0.5 * l
}

pub fn fit_puncture(cfg: &CylinderConfig, grid: &Grid, f: &[f64], i: usize, w: &FitWindows) -> Result<([f64; 3], f64)> {
    let node = grid.puncture_nodes[i];
    let a0 = f[node];
    let masses = cfg.masses();
    let n = cfg.n();
    let half = (w.inner * a0.abs()).min(0.25 * masses[i].min(masses[(i + 1) % n]));
    let (mut rows, mut rhs) = (vec![], vec![]);
    for (j, &x) in grid.x.iter().enumerate() {
        let d = offset(x, cfg.punctures[i], cfg.l);
        if d.abs() <= half && j != node {
            rows.push(vec![d, phi(d / a0)]);
            rhs.push(f[j] - a0);
        }
    }
    let (c, res) = lstsq(&rows, &rhs)?;
    Ok(([a0, c[0], c[1]], res))
}

pub fn fit_segment(grid: &Grid, f: &[f64], seg: &SegmentFunctions, w: &FitWindows) -> Result<([f64; 4], f64)> {
    let (mut rows, mut rhs) = (vec![], vec![]);
    for (j, &x) in grid.x.iter().enumerate() {
        let v = (x - seg.a).rem_euclid(grid.l);
        if v > w.outer * seg.m && v < (1.0 - w.outer) * seg.m {
            let xx = seg.a + v;
            rows.push(vec![v, seg.m - v, seg.chi(xx), seg.psi(xx)]);
            rhs.push(f[j]);
        }
    }
    let (c, res) = lstsq(&rows, &rhs)?;
    Ok(([c[0], c[1], c[2], c[3]], res))
}

/// Fits both ansatz forms to one snapshot and evaluates the matching equations.
pub fn fit_ansatz(
    cfg: &CylinderConfig,
    grid: &Grid,
    state: &CurveState,
    segs: &[SegmentFunctions],
    w: &FitWindows,
) -> Result<AnsatzFit> {
    let n = cfg.n();
    if segs.len() != n {
        return input("one segment evaluator per segment");
    }
    if let Some(i) = grid.puncture_nodes.iter().position(|&j| !(state.f[j].abs() / PI < HANDOFF_Y)) {
        return domain(format!("asymptotic regime not reached at t = {:.3e}: y_{i} ≥ {HANDOFF_Y}", state.t));
    }
    let mut a = vec![];
    let mut b = vec![];
    let mut fit_residual = vec![];
    for i in 0..n {
        let (c, r) = fit_puncture(cfg, grid, &state.f, i, w)?;
        a.push(c);
        fit_residual.push(r);
    }
    for s in segs {
        let (c, r) = fit_segment(grid, &state.f, s, w)?;
        b.push(c);
        fit_residual.push(r);
    }
    if let Some(worst) = fit_residual.iter().copied().reduce(f64::max).filter(|&r| !(r <= FIT_THRESHOLD)) {
        return domain(format!("asymptotic regime not reached at t = {:.3e}: fit residual {worst:.2e}", state.t));
    }
    let masses = cfg.masses();
    let matching = (0..n)
        .map(|i| {
            let [a0, a1, a2] = a[i];
            let bl = b[(i + n - 1) % n];
            let br = b[i];
            let (ml, mr) = (masses[i], masses[(i + 1) % n]);
            let kink = PI * a2 / (2.0 * a0.abs());
            let slope_scale = a1.abs() + kink.abs() + (bl[0] - bl[1]).abs().max((br[0] - br[1]).abs());
            [
                (ml * bl[0] - a0) / a0.abs(),
                (mr * br[1] - a0) / a0.abs(),
                ((bl[0] - bl[1]) - (a1 - kink)) / slope_scale,
                ((br[0] - br[1]) - (a1 + kink)) / slope_scale,
                (ml * bl[2] - a2) / a2.abs(),
                (mr * br[3] - a2) / a2.abs(),
            ]
        })
        .collect();
    Ok(AnsatzFit { t: state.t, coeffs: AnsatzCoeffs { a, b }, fit_residual, matching })
}

/// Dynamic check at puncture `i` between two fits: the central difference of `a₀`
/// against the mean `a₂`, and `π ȧ₀/|a₀|` against the right-hand side of the y-system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DynamicCheck {
    pub a0_dot: f64,
    pub a2: f64,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn dynamic_check(cfg: &CylinderConfig, before: &AnsatzFit, after: &AnsatzFit, i: usize) -> DynamicCheck {
    let n = cfg.n();
    let dt = after.t - before.t;
    let a0 = |f: &AnsatzFit, k: usize| f.coeffs.a[k][0];
    let a0_dot = (a0(after, i) - a0(before, i)) / dt;
    let mid = |k: usize| 0.5 * (a0(after, k) + a0(before, k));
    let a2 = 0.5 * (after.coeffs.a[i][2] + before.coeffs.a[i][2]);
    let m = cfg.masses();
    let (ml, mr) = (m[i], m[(i + 1) % n]);
    let rhs = mid((i + n - 1) % n) / ml - mid(i) / ml - mid(i) / mr + mid((i + 1) % n) / mr;
    DynamicCheck { a0_dot, a2, lhs: PI * a0_dot / mid(i).abs(), rhs }
}
