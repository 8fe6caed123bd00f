use serde::{Deserialize, Serialize};

use super::cylinder::CylinderConfig;
use super::grid::Grid;
use crate::error::{input, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveState {
    pub t: f64,
    pub f: Vec<f64>,
}

/// Initial graphs `x ↦ f₀(x)` on the cylinder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCurve {
    /// `c₀ + Σ_k a_k cos(2πkx/L) + b_k sin(2πkx/L)`, `k ≥ 1`.
    Fourier { c0: f64, cos: Vec<f64>, sin: Vec<f64> },
    /// Periodic knots joined by half-cosine arcs (zero slope at every knot).
    Knots { x: Vec<f64>, y: Vec<f64> },
}

impl InitialCurve {
    pub fn eval(&self, x: f64, l: f64) -> Result<f64> {
        match self {
            InitialCurve::Fourier { c0, cos, sin } => {
                let w = 2.0 * std::f64::consts::PI * x / l;
                let c: f64 = cos.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * w).cos()).sum();
                let s: f64 = sin.iter().enumerate().map(|(k, b)| b * ((k + 1) as f64 * w).sin()).sum();
                Ok(c0 + c + s)
            }
            InitialCurve::Knots { x: xs, y } => {
                if xs.is_empty() || xs.len() != y.len() || xs.windows(2).any(|w| w[0] >= w[1]) {
                    return input("knots need increasing x and one value each");
                }
                if xs[xs.len() - 1] - xs[0] >= l {
                    return input("knots must span less than one period");
                }
                let x = (x - xs[0]).rem_euclid(l) + xs[0];
                let k = xs.partition_point(|&v| v <= x) - 1;
                let (x0, y0) = (xs[k], y[k]);
                let (x1, y1) = if k + 1 < xs.len() { (xs[k + 1], y[k + 1]) } else { (xs[0] + l, y[0]) };
                let u = (x - x0) / (x1 - x0);
                Ok(y0 + (y1 - y0) * 0.5 * (1.0 - (std::f64::consts::PI * u).cos()))
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.x.iter().map(|&x| self.eval(x, grid.l)).collect()
    }
}

/// Graph over the five-puncture cylinder passing under, over, under, under, over
/// the punctures `0, 1, 2.2, 2.8, 4`.
pub fn fig1_curve() -> InitialCurve {
    InitialCurve::Knots { x: vec![0.0, 1.0, 2.5, 4.0], y: vec![-1.0, 1.0, -1.0, 1.0] }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeOptions {
    pub dt0: f64,
    pub dt_growth: f64,
    /// Cap `dt ≤ dt_rel·t`; backward Euler is first order, so this sets the accuracy.
    pub dt_rel: f64,
    pub dt_max: f64,
    /// Largest accepted relative change of `|f|` at a puncture per step.
    pub max_change: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_steps: usize,
}

impl Default for PdeOptions {
    fn default() -> Self {
        PdeOptions {
            dt0: 1e-6,
            dt_growth: 1.25,
            dt_rel: 0.01,
            dt_max: f64::INFINITY,
            max_change: 0.1,
            newton_tol: 1e-10,
            max_newton: 12,
            max_steps: 2_000_000,
        }
    }
}

/// The curve reached a puncture: `f(x_i)` would change sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignFlip {
    pub t: f64,
    pub puncture: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeTrajectory {
    pub grid: Grid,
    pub states: Vec<CurveState>,
    pub event: Option<SignFlip>,
    pub steps: usize,
    pub rejected: usize,
}

impl PdeTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &CurveState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Second-difference stencil `(lower, diag, upper)` on the periodic nonuniform grid.
pub fn stencil(grid: &Grid) -> Vec<(f64, f64, f64)> {
    let h = grid.spacings();
    let n = h.len();
    (0..n)
        .map(|i| {
            let (hm, hp) = (h[(i + n - 1) % n], h[i]);
            let s = 2.0 / (hm + hp);
            (s / hm, -s / hm - s / hp, s / hp)
        })
        .collect()
}

fn apply(st: &[(f64, f64, f64)], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|i| st[i].0 * f[(i + n - 1) % n] + st[i].1 * f[i] + st[i].2 * f[(i + 1) % n]).collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Solves the cyclic tridiagonal system `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = d_i`
/// (indices mod `n`) by Sherman–Morrison on top of the Thomas algorithm.
pub fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= a[0] * c[n - 1] / gamma;
    let x = thomas(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = thomas(a, &bb, c, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

enum StepOutcome {
    Done(Vec<f64>),
    NoConvergence,
}

fn backward_euler(
    cfg: &CylinderConfig,
    grid: &Grid,
    st: &[(f64, f64, f64)],
    f_old: &[f64],
    dt: f64,
    opts: &PdeOptions,
) -> StepOutcome {
    let n = f_old.len();
    let mut f = f_old.to_vec();
    // absolute floor for nodes where the curve crosses zero
    let floor = if grid.puncture_nodes.is_empty() {
        1e-6 * f_old.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        1e-3 * grid.puncture_nodes.iter().fold(f64::INFINITY, |m, &i| m.min(f_old[i].abs()))
    };
    let (mut a, mut b, mut c, mut r) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..opts.max_newton {
        let df = apply(st, &f);
        for i in 0..n {
            let (rho, drho) = cfg.rho_dy(grid.x[i], f[i]);
            r[i] = -(f[i] - f_old[i] - dt * rho * df[i]);
            a[i] = -dt * rho * st[i].0;
            b[i] = 1.0 - dt * (rho * st[i].1 + drho * df[i]);
            c[i] = -dt * rho * st[i].2;
        }
        let delta = solve_cyclic(&a, &b, &c, &r);
        let mut conv = true;
        for i in 0..n {
            if !delta[i].is_finite() {
                return StepOutcome::NoConvergence;
            }
            f[i] += delta[i];
            if delta[i].abs() > opts.newton_tol * (f[i].abs() + floor) {
                conv = false;
            }
        }
        if conv {
            return StepOutcome::Done(f);
        }
    }
    StepOutcome::NoConvergence
}

/// Integrates `∂_t f = ρ(x, f) ∂_xx f` by backward Euler with Newton iterations,
/// recording the state at each requested sample time. Stops early with an event
/// if the curve would cross a puncture.
pub fn integrate_pde(
    cfg: &CylinderConfig,
    grid: &Grid,
    f0: &[f64],
    samples: &[f64],
    opts: &PdeOptions,
) -> Result<PdeTrajectory> {
    if f0.len() != grid.len() || grid.len() < 3 {
        return input("initial curve must be sampled on the grid (≥ 3 nodes)");
    }
    if samples.windows(2).any(|w| w[0] >= w[1]) || samples.first().is_some_and(|&t| t <= 0.0) {
        return input("sample times must be positive and increasing");
    }
    let punct = &grid.puncture_nodes;
    if punct.iter().any(|&i| f0[i] == 0.0) {
        return input("initial curve passes through a puncture");
    }
    let st = stencil(grid);
    let mut f = f0.to_vec();
    let mut t = 0.0;
    let mut dt = opts.dt0;
    let mut states = vec![CurveState { t, f: f.clone() }];
    let (mut steps, mut rejected) = (0, 0);
    for &target in samples {
        while t < target {
            if steps + rejected >= opts.max_steps {
                return Err(Error::Stiffness(format!("step budget exhausted at t = {t:.3e}")));
            }
            let mut h = dt.min(opts.dt_max);
            if t > 0.0 {
                h = h.min((opts.dt_rel * t).max(opts.dt0));
            }
            let last = t + h >= target * (1.0 - 1e-12);
            if last {
                h = target - t;
            }
            let min_dt = 1e-14 * (1.0 + t);
            let fnew = match backward_euler(cfg, grid, &st, &f, h, opts) {
                StepOutcome::Done(v) => v,
                StepOutcome::NoConvergence => {
                    rejected += 1;
                    dt = h / 4.0;
                    if dt < min_dt {
                        return Err(Error::Stiffness(format!("Newton failed at t = {t:.3e}")));
                    }
                    continue;
                }
            };
            if let Some(&p) = punct.iter().find(|&&i| fnew[i] * f[i] <= 0.0) {
                if h <= 1e3 * min_dt {
                    let puncture = punct.iter().position(|&i| i == p).unwrap();
                    return Ok(PdeTrajectory {
                        grid: grid.clone(),
                        states,
                        event: Some(SignFlip { t: t + h, puncture }),
                        steps,
                        rejected,
                    });
                }
                rejected += 1;
                dt = h / 4.0;
                continue;
            }
            let change = punct.iter().map(|&i| ((fnew[i] - f[i]) / f[i]).abs()).fold(0.0, f64::max);
            if change > opts.max_change && h > 1e3 * min_dt {
                rejected += 1;
                dt = h / 2.0;
                continue;
            }
            f = fnew;
            t = if last { target } else { t + h };
            steps += 1;
            if !last {
                dt = h * opts.dt_growth;
            }
        }
        states.push(CurveState { t, f: f.clone() });
    }
    Ok(PdeTrajectory { grid: grid.clone(), states, event: None, steps, rejected })
}

/// Discrete `L²` norm by the periodic trapezoidal rule.
pub fn l2_norm(grid: &Grid, f: &[f64]) -> f64 {
    grid.weights().iter().zip(f).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
}

/// `y_i(t) = |f(x_i, t)|/π` at every recorded time.
#[derive(Clone, Debug, Serialize)]
pub struct YSeries {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub eps: Vec<i8>,
}

pub fn extract_y(traj: &PdeTrajectory) -> YSeries {
    let p = &traj.grid.puncture_nodes;
    let f0 = &traj.states[0].f;
    let eps = p.iter().map(|&i| if f0[i] > 0.0 { 1 } else { -1 }).collect();
    let y = traj
        .states
        .iter()
        .map(|s| p.iter().map(|&i| s.f[i].abs() / std::f64::consts::PI).collect())
        .collect();
    YSeries { t: traj.times(), y, eps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csf::{build_cylinder, build_grid, GridOptions};

    #[test]
    fn cyclic_solver_matches_dense() {
        let n = 7;
        let a: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let c: Vec<f64> = (0..n).map(|i| -0.5 + 0.02 * i as f64).collect();
        let d: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_cyclic(&a, &b, &c, &d);
        for i in 0..n {
            let lhs = a[i] * x[(i + n - 1) % n] + b[i] * x[i] + c[i] * x[(i + 1) % n];
            assert!((lhs - d[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn knots_interpolate() {
        let k = InitialCurve::Knots { x: vec![0.0, 1.0, 2.5, 4.0], y: vec![-1.0, 1.0, -1.0, 1.0] };
        assert_eq!(k.eval(1.0, 5.0).unwrap(), 1.0);
        assert_eq!(k.eval(5.0, 5.0).unwrap(), -1.0);
        assert!((k.eval(4.5, 5.0).unwrap()).abs() < 1e-15);
        assert!((k.eval(1.75, 5.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn constant_curve_is_stationary() {
        let c = build_cylinder(3.0, &[0.5, 1.7]).unwrap();
        let g = build_grid(&c, &GridOptions { h_min: 1e-3, h_max: 2e-2, ..Default::default() }).unwrap();
        let f0 = vec![0.7; g.len()];
        let tr = integrate_pde(&c, &g, &f0, &[0.5, 2.0], &PdeOptions::default()).unwrap();
        assert!(tr.event.is_none());
        assert!(tr.last().f.iter().all(|&v| (v - 0.7).abs() < 1e-13));
    }

    #[test]
    fn sign_change_at_a_marked_node_is_an_event() {
        // heat flow of sin x − 0.3 crosses zero at x = 0.35 when e^{−t} sin 0.35 = 0.3
        let l = 2.0 * std::f64::consts::PI;
        let c = build_cylinder(l, &[]).unwrap();
        let mut g = build_grid(&c, &GridOptions { uniform_nodes: 400, ..Default::default() }).unwrap();
        let node = g.x.iter().position(|&x| x >= 0.35).unwrap();
        g.puncture_nodes = vec![node];
        let f0: Vec<f64> = g.x.iter().map(|x| x.sin() - 0.3).collect();
        let tr = integrate_pde(&c, &g, &f0, &[1.0], &PdeOptions::default()).unwrap();
        let e = tr.event.expect("sign change");
        let exact = (g.x[node].sin() / 0.3).ln();
        assert_eq!(e.puncture, 0);
        assert!((e.t - exact).abs() < 1e-2 * exact);
    }

    #[test]
    fn y_definition() {
        let c = build_cylinder(4.0, &[1.0, 3.0]).unwrap();
        let g = build_grid(&c, &GridOptions { h_min: 1e-2, h_max: 5e-2, ..Default::default() }).unwrap();
        let pi = std::f64::consts::PI;
        let mut f = vec![0.0; g.len()];
        f[g.puncture_nodes[0]] = pi;
        f[g.puncture_nodes[1]] = -2.0 * pi;
        let tr = PdeTrajectory { grid: g, states: vec![CurveState { t: 0.0, f }], event: None, steps: 0, rejected: 0 };
        let y = extract_y(&tr);
        assert!((y.y[0][0] - 1.0).abs() < 1e-15 && (y.y[0][1] - 2.0).abs() < 1e-15);
        assert_eq!(y.eps, vec![1, -1]);
    }
}
