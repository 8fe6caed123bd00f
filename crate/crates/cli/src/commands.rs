use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use weightflow::csf::{
    build_cylinder, build_grid, coefficient_matrix, compare_pde_ode, extract_y, integrate_ode, integrate_pde,
    integrate_v, interior_fixed_point, predict, v_rhs, wall_asymptotics, CylinderConfig, DriftReport, Grid,
    SignFlip, DRIFT_TOL, HANDOFF_Y, KAPPA_TOL,
};
use weightflow::flow::{
    asymptotic_fit, blocks, construct_asymptotic_solution, integrate_metric_flow, king_test, log_times, Blocks,
    StabilityVerdict,
};
use weightflow::lattice::{
    build_ideal_lattice, iterated_weight_filtration, walls_5cycle, weight_filtration, Chamber, DirectedGraph,
    IdealLattice, OrientedCycleGraph, WallReport, FIG1_EPS,
};
use weightflow::lozenge::{CMat, QuiverData, C};

use crate::config::*;
use crate::output::Artifacts;
use crate::svg::{height_panels, line_plot, Panel, Series};
use crate::CliError;

impl From<weightflow::Error> for CliError {
    fn from(e: weightflow::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub struct Ctx<'a> {
    pub art: &'a mut Artifacts,
    pub seed: u64,
    pub svg: bool,
    pub jobs: usize,
}

fn cols(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

fn header(first: &[&str], rest: Vec<Vec<String>>) -> Vec<String> {
    first.iter().map(|s| s.to_string()).chain(rest.into_iter().flatten()).collect()
}

fn vertices_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|v| mask >> v & 1 == 1).collect()
}

#[derive(Serialize)]
struct HnStep {
    vertices: Vec<usize>,
    phase: f64,
}

#[derive(Serialize)]
struct WeightStep {
    vertices: Vec<usize>,
    label: f64,
}

#[derive(Serialize)]
struct LatticeSummary {
    elements: usize,
    modular: bool,
    distributive: bool,
    semistable: bool,
    harder_narasimhan: Vec<HnStep>,
    /// Present for real polarizations only.
    weight_filtration: Option<Vec<WeightStep>>,
    weights: Option<Vec<f64>>,
    iterated_labels: Option<Vec<Vec<f64>>>,
    depth: Option<usize>,
    walls: Option<WallReport>,
}

fn lattice_summary(il: &IdealLattice, n: usize) -> Result<LatticeSummary, CliError> {
    let pl = &il.polarized;
    let l = pl.lattice();
    let hn = pl.harder_narasimhan();
    let harder_narasimhan = hn
        .chain
        .windows(2)
        .zip(&hn.phases)
        .map(|(w, &phase)| HnStep { vertices: vertices_of(il.masks[w[1]] & !il.masks[w[0]]), phase })
        .collect();
    let mut s = LatticeSummary {
        elements: l.len(),
        modular: l.is_modular(),
        distributive: l.is_distributive(),
        semistable: pl.is_semistable(),
        harder_narasimhan,
        weight_filtration: None,
        weights: None,
        iterated_labels: None,
        depth: None,
        walls: None,
    };
    if pl.is_real() {
        let f = weight_filtration(pl)?;
        s.weights = Some(il.vertex_weights(&f, n));
        s.weight_filtration = Some(
            f.chain
                .windows(2)
                .zip(&f.labels)
                .map(|(w, &label)| WeightStep { vertices: vertices_of(il.masks[w[1]] & !il.masks[w[0]]), label })
                .collect(),
        );
        let it = iterated_weight_filtration(pl)?;
        let mut per_vertex = vec![vec![]; n];
        for (k, lab) in it.labels.iter().enumerate() {
            for v in vertices_of(il.masks[it.chain[k + 1]] & !il.masks[it.chain[k]]) {
                per_vertex[v] = lab.coeffs.clone();
            }
        }
        s.iterated_labels = Some(per_vertex);
        s.depth = Some(it.depth);
    }
    Ok(s)
}

pub fn lattice(ctx: &mut Ctx, p: LatticePayload) -> Result<(), CliError> {
    let (g, cycle) = match &p {
        LatticePayload::Graph(d) => {
            let edges = d.edges.iter().map(|e| (e[0], e[1])).collect();
            (DirectedGraph { masses: d.masses.clone(), imag: d.imag.clone(), edges }, None)
        }
        LatticePayload::Cycle(c) => {
            let g = OrientedCycleGraph::new(c.masses.clone(), c.eps())?;
            (g.graph(), Some(g))
        }
    };
    let il = build_ideal_lattice(&g)?;
    let mut s = lattice_summary(&il, g.n())?;
    if let Some(c) = &cycle {
        if c.eps == FIG1_EPS {
            s.walls = Some(walls_5cycle(&[c.m[0], c.m[1], c.m[2], c.m[3], c.m[4]])?);
        }
    }
    let rows: Vec<Vec<f64>> = (0..g.n())
        .map(|v| {
            let w = s.weights.as_ref().map_or(f64::NAN, |w| w[v]);
            let w2 = s.iterated_labels.as_ref().map_or(f64::NAN, |l| l[v].get(1).copied().unwrap_or(0.0));
            vec![v as f64, g.masses[v], w, w2]
        })
        .collect();
    ctx.art.csv("vertices.csv", &header(&["vertex", "mass", "weight", "weight_level2"], vec![]), &rows)?;
    ctx.art.json("summary.json", &s)
}

fn random_metric(rng: &mut ChaCha8Rng, dims: &[usize], scale: f64) -> Blocks {
    dims.iter()
        .map(|&d| {
            let m = CMat::from_fn(d, d, |_, _| C::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)));
            (&m + m.adjoint()) * C::new(0.5, 0.0)
        })
        .map(|b| blocks::herm_apply(&[b], f64::exp).remove(0))
        .collect()
}

fn initial_metric(p: &FlowPayload, q: &QuiverData, seed: u64) -> Result<Blocks, CliError> {
    let dims: Vec<usize> = q.vertices.iter().map(|v| v.dim).collect();
    match &p.h0 {
        InitialMetric::Identity => Ok(blocks::identity(&dims)),
        InitialMetric::Random { scale } => Ok(random_metric(&mut ChaCha8Rng::seed_from_u64(seed), &dims, *scale)),
        InitialMetric::Blocks(b) => {
            if b.len() != dims.len() {
                return Err(CliError::Schema { path: "payload.h0.blocks".into(), msg: "one block per vertex".into() });
            }
            b.iter()
                .zip(&dims)
                .enumerate()
                .map(|(k, (m, &d))| {
                    if m.len() != d || m.iter().any(|r| r.len() != d) {
                        return Err(CliError::Schema {
                            path: format!("payload.h0.blocks[{k}]"),
                            msg: format!("expected a {d}×{d} matrix"),
                        });
                    }
                    Ok(CMat::from_fn(d, d, |i, j| m[i][j].value()))
                })
                .collect()
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    t_final: f64,
    final_residual: f64,
    accepted: usize,
    rejected: usize,
    min_metric_eigenvalue: f64,
    final_log_metric_eigenvalues: Vec<f64>,
}

#[derive(Serialize)]
struct KingSummary {
    verdict: StabilityVerdict,
}

#[derive(Serialize)]
struct AsymptoticSummary {
    labels: Vec<f64>,
    depth: usize,
    degrees: Vec<(f64, f64)>,
    epsilon: Option<f64>,
    diamond_dims: [usize; 4],
    harmonic_defect: f64,
    residual_exponent_y: Option<f64>,
    residual_exponent_z: Option<f64>,
    certified: bool,
    /// `log t` coefficient of `log h` on each graded piece, fitted on the constructed solution.
    fitted_log_t: Vec<f64>,
}

pub fn flow(ctx: &mut Ctx, p: FlowPayload, task: FlowTask) -> Result<(), CliError> {
    let q = p.quiver.build()?;
    let opts = p.tolerances.options();
    match task {
        FlowTask::Run => {
            if !(p.t_first > 0.0 && p.t_end > p.t_first && p.samples >= 2) {
                return Err(CliError::Schema {
                    path: "payload".into(),
                    msg: "need 0 < t_first < t_end and at least two samples".into(),
                });
            }
            let h0 = initial_metric(&p, &q, ctx.seed)?;
            let tr = integrate_metric_flow(&q, &h0, p.t_end, &log_times(p.t_first, p.t_end, p.samples), &opts)?;
            let k = q.total_dim();
            let mut min_eig = f64::INFINITY;
            let mut rows = vec![];
            for i in 0..tr.len() {
                min_eig = min_eig.min(blocks::min_eigenvalue(&tr.metric(i)));
                let mut r = vec![tr.times[i]];
                r.extend(tr.log_metric_eigs(i));
                r.push(tr.residuals[i]);
                r.push(tr.step_sizes[i]);
                rows.push(r);
            }
            ctx.art.csv("trajectory.csv", &header(&["t"], vec![cols("logh_eig", k), vec!["residual".into(), "step".into()]]), &rows)?;
            if ctx.svg {
                let series: Vec<Series> = (0..k)
                    .map(|j| Series { label: format!("eig {j}"), points: rows.iter().map(|r| (r[0], r[1 + j])).collect() })
                    .collect();
                ctx.art.svg("trajectory.svg", &line_plot("eigenvalues of log h", "t", "log h", &series, true))?;
            }
            let s = RunSummary {
                t_final: tr.last_time(),
                final_residual: tr.final_residual(),
                accepted: tr.accepted,
                rejected: tr.rejected,
                min_metric_eigenvalue: min_eig,
                final_log_metric_eigenvalues: tr.log_metric_eigs(tr.len() - 1),
            };
            ctx.art.json("summary.json", &s)
        }
        FlowTask::King => {
            let verdict = king_test(&q, &opts)?;
            ctx.art.json("summary.json", &KingSummary { verdict })
        }
        FlowTask::Asymptotics => {
            let ao = p.asymptotic_options();
            let sol = construct_asymptotic_solution(&q, &ao)?;
            let fit = asymptotic_fit(&sol.trajectory(), &sol.steps, ao.t_min)?;
            let c = &sol.correction;
            let rows: Vec<Vec<f64>> = (0..c.times.len())
                .map(|i| vec![c.times[i], c.residual_y.residuals[i], c.residual_z.residuals[i]])
                .collect();
            ctx.art.csv("residuals.csv", &header(&["t", "residual_y", "residual_z"], vec![]), &rows)?;
            if ctx.svg {
                let pick = |j: usize, label: &str| Series {
                    label: label.into(),
                    points: rows.iter().filter(|r| r[j] > 0.0).map(|r| (r[0], r[j].log10())).collect(),
                };
                let series = [pick(1, "uncorrected"), pick(2, "corrected")];
                ctx.art.svg("residuals.svg", &line_plot("flow residual", "t", "log10 residual", &series, true))?;
            }
            let s = AsymptoticSummary {
                labels: sol.labels.clone(),
                depth: sol.depth,
                degrees: sol.degrees.clone(),
                epsilon: sol.epsilon.is_finite().then_some(sol.epsilon),
                diamond_dims: sol.diamond_dims,
                harmonic_defect: sol.harmonic_defect,
                residual_exponent_y: c.residual_y.exponent(),
                residual_exponent_z: c.residual_z.exponent(),
                certified: sol.certified,
                fitted_log_t: fit.log_t_coefficients(),
            };
            ctx.art.json("summary.json", &s)
        }
    }
}

fn curve_setup(p: &CurvePayload) -> Result<(CylinderConfig, Grid, Vec<f64>), CliError> {
    let cfg = build_cylinder(p.cylinder.l, &p.cylinder.punctures)?;
    let grid = build_grid(&cfg, &p.grid.options())?;
    let f0 = p.curve.curve().sample(&grid)?;
    Ok((cfg, grid, f0))
}

fn sample_times(p: &CurvePayload) -> Result<Vec<f64>, CliError> {
    if !(p.t_first > 0.0 && p.t_end > p.t_first && p.per_decade > 0) {
        return Err(CliError::Schema { path: "payload".into(), msg: "need 0 < t_first < t_end and per_decade > 0".into() });
    }
    let n = ((p.t_end / p.t_first).log10() * p.per_decade as f64).ceil() as usize + 1;
    let mut t = log_times(p.t_first, p.t_end, n.max(2));
    t.extend(p.snapshots.iter().copied().filter(|&s| s > 0.0 && s <= p.t_end));
    t.sort_by(f64::total_cmp);
    t.dedup();
    Ok(t)
}

#[derive(Serialize)]
struct PdeSummary {
    punctures: usize,
    nodes: usize,
    eps: Vec<i8>,
    event: Option<SignFlip>,
    steps: usize,
    rejected: usize,
    t_final: f64,
    y_final: Vec<f64>,
    /// First sample with every `y_i` below the handoff threshold.
    handoff: Option<f64>,
}

pub fn csf_pde(ctx: &mut Ctx, p: CurvePayload) -> Result<(), CliError> {
    let (cfg, grid, f0) = curve_setup(&p)?;
    let times = sample_times(&p)?;
    let tr = integrate_pde(&cfg, &grid, &f0, &times, &p.pde.options())?;
    let ys = extract_y(&tr);
    let n = cfg.n();
    let rows: Vec<Vec<f64>> = ys
        .t
        .iter()
        .zip(&ys.y)
        .map(|(&t, y)| std::iter::once(t).chain(y.iter().copied()).chain(y.iter().map(|v| (t * v).ln())).collect())
        .collect();
    ctx.art.csv("y.csv", &header(&["t"], vec![cols("y", n), cols("v", n)]), &rows)?;
    let snaps: Vec<usize> = p
        .snapshots
        .iter()
        .filter_map(|&s| tr.states.iter().position(|st| (st.t - s).abs() <= 1e-12 * s.max(1.0)))
        .collect();
    if !snaps.is_empty() {
        let rows: Vec<Vec<f64>> = (0..grid.len())
            .map(|j| std::iter::once(grid.x[j]).chain(snaps.iter().map(|&k| tr.states[k].f[j])).collect())
            .collect();
        let head: Vec<String> = snaps.iter().map(|&k| format!("f_t={}", tr.states[k].t)).collect();
        ctx.art.csv("profiles.csv", &header(&["x"], vec![head]), &rows)?;
        if ctx.svg {
            let series: Vec<Series> = snaps
                .iter()
                .enumerate()
                .map(|(c, &k)| Series {
                    label: format!("t = {}", tr.states[k].t),
                    points: rows.iter().map(|r| (r[0], r[1 + c])).collect(),
                })
                .collect();
            ctx.art.svg("profiles.svg", &line_plot("f(x, t)", "x", "f", &series, false))?;
        }
    }
    if ctx.svg && n > 0 {
        let series: Vec<Series> = (0..n)
            .map(|i| Series { label: format!("y_{i}"), points: rows_log_y(&ys.t, &ys.y, i) })
            .collect();
        ctx.art.svg("y.svg", &line_plot("puncture heights", "t", "log10 y", &series, true))?;
    }
    let handoff = ys.t.iter().zip(&ys.y).skip(1).find(|(_, y)| !y.is_empty() && y.iter().all(|&v| v < HANDOFF_Y)).map(|x| *x.0);
    let s = PdeSummary {
        punctures: n,
        nodes: grid.len(),
        eps: ys.eps.clone(),
        event: tr.event,
        steps: tr.steps,
        rejected: tr.rejected,
        t_final: tr.last().t,
        y_final: ys.y.last().cloned().unwrap_or_default(),
        handoff,
    };
    ctx.art.json("summary.json", &s)
}

fn rows_log_y(t: &[f64], y: &[Vec<f64>], i: usize) -> Vec<(f64, f64)> {
    t.iter().zip(y).filter(|(_, y)| y[i] > 0.0).map(|(&t, y)| (t, y[i].log10())).collect()
}

#[derive(Serialize)]
struct OdeSummary {
    eps: Vec<i8>,
    y0: Vec<f64>,
    t_final: f64,
    v_final: Vec<f64>,
    dv_ds_final: Vec<f64>,
    /// Fixed point of the v-system when it lies in the positive cone of `−M⁻¹1`.
    fixed_point: Option<Vec<f64>>,
    predicted_rates: Vec<f64>,
    walls: Option<WallReport>,
}

pub fn csf_ode(ctx: &mut Ctx, p: OdePayload) -> Result<(), CliError> {
    let g = OrientedCycleGraph::new(p.graph.masses.clone(), p.graph.eps())?;
    let n = g.n();
    let y0 = match &p.y0 {
        Some(y) => y.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            (0..n).map(|_| 10f64.powf(rng.random_range(-2.0..0.0))).collect()
        }
    };
    if !(p.t0 > 0.0 && p.t_end > p.t0 && p.per_decade > 0) {
        return Err(CliError::Schema { path: "payload".into(), msg: "need 0 < t0 < t_end and per_decade > 0".into() });
    }
    let k = ((p.t_end / p.t0).log10() * p.per_decade as f64).ceil() as usize + 1;
    let t = log_times(p.t0, p.t_end, k.max(2));
    let tr = integrate_ode(&g, &y0, p.t0, &t)?;
    let rows: Vec<Vec<f64>> = tr
        .s
        .iter()
        .zip(&tr.v)
        .map(|(&s, v)| {
            let tt = s.exp();
            [tt, s].into_iter().chain(v.iter().map(|x| x.exp() / tt)).chain(v.iter().copied()).collect()
        })
        .collect();
    ctx.art.csv("v.csv", &header(&["t", "s"], vec![cols("y", n), cols("v", n)]), &rows)?;
    if ctx.svg {
        let series: Vec<Series> = (0..n)
            .map(|i| Series { label: format!("v_{i}"), points: tr.s.iter().zip(&tr.v).map(|(&s, v)| (s, v[i])).collect() })
            .collect();
        ctx.art.svg("v.svg", &line_plot("v-coordinates", "s = log t", "v", &series, false))?;
    }
    let m = coefficient_matrix(&g);
    let v_final = tr.v.last().cloned().unwrap_or_default();
    let dv = v_rhs(&m, &DVector::from_column_slice(&v_final));
    let walls = (n == 5 && g.eps == FIG1_EPS).then(|| walls_5cycle(&[g.m[0], g.m[1], g.m[2], g.m[3], g.m[4]])).transpose()?;
    let s = OdeSummary {
        eps: g.eps.clone(),
        y0,
        t_final: *t.last().unwrap(),
        v_final,
        dv_ds_final: dv.iter().copied().collect(),
        fixed_point: interior_fixed_point(&g),
        predicted_rates: predict(&g)?.rate,
        walls,
    };
    ctx.art.json("summary.json", &s)
}

#[derive(Serialize)]
struct CompareSummary {
    handoff: f64,
    eps: Vec<i8>,
    sup_log_gap: Vec<f64>,
    final_decade_drift: Vec<f64>,
    drift_tol: f64,
    bounded: bool,
    pde_steps: usize,
}

pub fn compare(ctx: &mut Ctx, p: CurvePayload) -> Result<(), CliError> {
    let (cfg, grid, f0) = curve_setup(&p)?;
    let r = compare_pde_ode(&cfg, &grid, &f0, p.t_end, &p.compare_options())?;
    let n = cfg.n();
    let rows: Vec<Vec<f64>> = (0..r.t.len())
        .map(|k| {
            let gap = (0..n).map(|i| r.y_pde[k][i].ln() - r.y_ode[k][i].ln());
            std::iter::once(r.t[k]).chain(r.y_pde[k].iter().copied()).chain(r.y_ode[k].iter().copied()).chain(gap).collect()
        })
        .collect();
    ctx.art.csv("compare.csv", &header(&["t"], vec![cols("y_pde", n), cols("y_ode", n), cols("log_gap", n)]), &rows)?;
    if ctx.svg {
        let series: Vec<Series> = (0..n)
            .map(|i| Series { label: format!("gap_{i}"), points: rows.iter().map(|row| (row[0], row[1 + 2 * n + i])).collect() })
            .collect();
        ctx.art.svg("compare.svg", &line_plot("log y_pde − log y_ode", "t", "log gap", &series, true))?;
    }
    let s = CompareSummary {
        handoff: r.handoff,
        eps: r.eps,
        sup_log_gap: r.sup,
        final_decade_drift: r.final_decade_drift,
        drift_tol: DRIFT_TOL,
        bounded: r.bounded,
        pde_steps: r.pde_steps,
    };
    ctx.art.json("summary.json", &s)
}

#[derive(Serialize)]
struct WallRun {
    masses: [f64; 5],
    walls: WallReport,
    weights: Vec<f64>,
    kappa_tol: f64,
    report: DriftReport,
    partition_matches: bool,
}

struct WallOutput {
    run: WallRun,
    rows: Vec<Vec<f64>>,
}

fn wall_run(m: [f64; 5], v0: [f64; 5], w: &WallsPayload) -> Result<WallOutput, CliError> {
    let g = OrientedCycleGraph::fig1(m)?;
    let opts = w.window.options();
    let report = wall_asymptotics(&g, &v0, &opts)?;
    let steps = (2.0 * opts.s_hi).ceil() as usize;
    let s: Vec<f64> = (0..=steps).map(|k| k as f64 * 0.5).collect();
    let tr = integrate_v(&g, &v0, 0.0, &s)?;
    let mm = coefficient_matrix(&g);
    let rows = tr
        .s
        .iter()
        .zip(&tr.v)
        .map(|(&s, v)| {
            let dv = v_rhs(&mm, &DVector::from_column_slice(v));
            std::iter::once(s).chain(v.iter().copied()).chain(dv.iter().copied()).collect()
        })
        .collect();
    let run = WallRun {
        masses: m,
        walls: walls_5cycle(&m)?,
        weights: g.weight_grading()?,
        kappa_tol: KAPPA_TOL,
        partition_matches: report.partition_matches(),
        report,
    };
    Ok(WallOutput { run, rows })
}

#[derive(Serialize)]
struct WallsSummary {
    runs: Vec<WallRun>,
}

pub fn walls(ctx: &mut Ctx, p: WallsPayload) -> Result<(), CliError> {
    if p.masses.is_empty() {
        return Err(CliError::Schema { path: "payload.masses".into(), msg: "at least one mass vector".into() });
    }
    let v0 = p.v0.unwrap_or([0.0; 5]);
    let jobs = ctx.jobs.clamp(1, p.masses.len());
    let mut results: Vec<Option<Result<WallOutput, CliError>>> = (0..p.masses.len()).map(|_| None).collect();
    std::thread::scope(|sc| {
        let chunk = p.masses.len().div_ceil(jobs);
        let handles: Vec<_> = p
            .masses
            .chunks(chunk)
            .map(|ms| sc.spawn(|| ms.iter().map(|&m| wall_run(m, v0, &p)).collect::<Vec<_>>()))
            .collect();
        let mut k = 0;
        for h in handles {
            for r in h.join().expect("worker panicked") {
                results[k] = Some(r);
                k += 1;
            }
        }
    });
    let mut runs = vec![];
    for (k, r) in results.into_iter().enumerate() {
        let out = r.expect("every run is scheduled")?;
        let name = if p.masses.len() == 1 { "v_series".to_string() } else { format!("v_series_{k}") };
        ctx.art.csv(&format!("{name}.csv"), &header(&["s"], vec![cols("v", 5), cols("dv_ds", 5)]), &out.rows)?;
        if ctx.svg {
            let series: Vec<Series> = (0..5)
                .map(|i| Series { label: format!("dv_{i}/ds"), points: out.rows.iter().map(|r| (r[0], r[6 + i])).collect() })
                .collect();
            ctx.art.svg(&format!("{name}.svg"), &line_plot("v-system slopes", "s = log t", "dv/ds", &series, false))?;
        }
        runs.push(out.run);
    }
    ctx.art.json("summary.json", &WallsSummary { runs })
}

/// Representative mass vectors of the three chambers; RIGHT mirrors LEFT.
pub const CHAMBER_REPRESENTATIVES: [(Chamber, [f64; 5]); 3] = [
    (Chamber::Left, [2.0, 4.0, 1.0, 1.0, 1.0]),
    (Chamber::Middle, [1.0, 1.0, 1.0, 1.0, 1.0]),
    (Chamber::Right, [1.0, 1.0, 1.0, 4.0, 2.0]),
];

/// Layout columns of the diagram: `m₁, m₅` on the left, `m₂, m₃, m₄` on the right.
const COLUMNS: [f64; 5] = [0.0, 1.5, 1.5, 1.5, 0.0];

#[derive(Clone, Debug, Serialize)]
pub struct DiagramEdge {
    pub source: usize,
    pub target: usize,
    /// Drawn dashed when the weight drop along the arrow exceeds 1.
    pub dashed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagramPanel {
    pub chamber: Chamber,
    pub masses: [f64; 5],
    pub d1: f64,
    pub d2: f64,
    pub heights: Vec<f64>,
    pub edges: Vec<DiagramEdge>,
}

pub fn chamber_panels() -> Result<Vec<DiagramPanel>, CliError> {
    CHAMBER_REPRESENTATIVES
        .iter()
        .map(|&(want, m)| {
            let walls = walls_5cycle(&m)?;
            if walls.chamber != want {
                return Err(CliError::Runtime(format!("representative {m:?} lies in {:?}, not {want:?}", walls.chamber)));
            }
            let g = OrientedCycleGraph::fig1(m)?;
            let heights = g.weight_grading()?;
            let edges = (0..5)
                .map(|i| {
                    let (s, t) = g.arrow(i);
                    DiagramEdge { source: s, target: t, dashed: (heights[s] - heights[t]).abs() > 1.0 + 1e-9 }
                })
                .collect();
            Ok(DiagramPanel { chamber: want, masses: m, d1: walls.d1, d2: walls.d2, heights, edges })
        })
        .collect()
}

#[derive(Serialize)]
struct DiagramSummary {
    panels: Vec<DiagramPanel>,
}

pub fn chamber_diagrams(art: &mut Artifacts) -> Result<(), CliError> {
    let panels = chamber_panels()?;
    let svg_panels: Vec<Panel> = panels
        .iter()
        .map(|p| Panel {
            title: format!("{:?} (D1 = {}, D2 = {})", p.chamber, p.d1, p.d2).to_uppercase(),
            vertices: COLUMNS.iter().zip(&p.heights).map(|(&c, &h)| (c, h)).collect(),
            edges: p.edges.iter().map(|e| (e.source, e.target, e.dashed)).collect(),
        })
        .collect();
    art.svg("chamber_diagrams.svg", &height_panels(&svg_panels))?;
    let rows: Vec<Vec<f64>> = panels
        .iter()
        .enumerate()
        .flat_map(|(k, p)| (0..5).map(move |v| vec![k as f64, v as f64, p.masses[v], p.heights[v]]))
        .collect();
    art.csv("heights.csv", &header(&["panel", "vertex", "mass", "height"], vec![]), &rows)?;
    art.json("chamber_diagrams.json", &DiagramSummary { panels })
}
