
//! Acceptance suite: one line per criterion, nonzero exit if any fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weightflow::csf::*;
use weightflow::flow::{blocks, *};
use weightflow::lattice::*;
use weightflow::lozenge::*;

const HN_INSTANCES: usize = 200;
const HN_MAX_ELEMENTS: usize = 64;
const KAEHLER_INSTANCES: usize = 100;
const KAEHLER_TOL: f64 = 1e-10;
const MONO_INSTANCES: usize = 100;
const MONO_TOL: f64 = -1e-8;
const MONO_T_END: f64 = 50.0;
const KING_MIN_CASES: usize = 20;
const WALL_FORMULA_TOL: f64 = 1e-12;
const INTERIOR_POINTS_PER_CHAMBER: usize = 10;
const WALL_POINTS: usize = 20;
const INTERIOR_DRIFT_TOL: f64 = 1e-3;
const INTERIOR_DRIFT_S: f64 = 20.0;
const HEAT_TOL: f64 = 0.01;
const ASYM_MIN_REPS: usize = 5;
const ASYM_LOG_TOL: f64 = 0.02;
const HEIGHT_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1 ────────────────────────────────────────────────────────────────────────

fn random_dag(rng: &mut ChaCha8Rng) -> DirectedGraph {
    loop {
        let n = rng.random_range(2..=7);
        let p = rng.random_range(0.15..0.7);
        let mut edges = vec![];
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let masses = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let imag = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = DirectedGraph { masses, imag, edges };
        if closed_subsets(&g).map(|s| s.len() <= HN_MAX_ELEMENTS).unwrap_or(false) {
            return g;
        }
    }
}

fn lattice_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut largest = 0;
    for k in 0..HN_INSTANCES {
        let g = random_dag(&mut rng);
        let il = build_ideal_lattice(&g).map_err(e2s)?;
        let pl = &il.polarized;
        largest = largest.max(pl.lattice().len());
        if !pl.lattice().is_modular() {
            return Err(format!("instance {k}: ideal lattice not modular"));
        }
        let hn = pl.harder_narasimhan();
        let found = pl.hn_candidates_by_search(10_000).map_err(e2s)?;
        if found != vec![hn] {
            return Err(format!("instance {k}: HN differs from exhaustive search ({} candidates)", found.len()));
        }
        let real = pl.real_part();
        let f = weight_filtration(&real).map_err(e2s)?;
        if !f.is_paracomplemented(real.lattice()) {
            return Err(format!("instance {k}: weight filtration not paracomplemented"));
        }
        if !is_phase_zero_semistable(&associated_lattice(&real, &f).map_err(e2s)?) {
            return Err(format!("instance {k}: associated lattice not phase-0 semistable"));
        }
    }
    Ok(format!("{HN_INSTANCES} DAGs, up to {largest} elements"))
}

// 2 ────────────────────────────────────────────────────────────────────────

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).qr().q()
}

/// Arrows between equal dimensions are scaled unitaries, the rest zero, and
/// `ρ = −μ`, so the twisted algebra is flat.
fn flat_quiver(rng: &mut ChaCha8Rng) -> QuiverData {
    let n = rng.random_range(1..=4);
    let vertices: Vec<Vertex> = (0..n)
        .map(|_| Vertex { dim: rng.random_range(1..=3), mass: rng.random_range(0.5..2.0), rho: 0.0 })
        .collect();
    let mut arrows = Vec::new();
    for _ in 0..rng.random_range(0..=4) {
        let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
        if s == t {
            continue;
        }
        let (ds, dt) = (vertices[s].dim, vertices[t].dim);
        let alpha = if ds == dt {
            random_unitary(rng, ds) * C::new(rng.random_range(0.2..1.5), 0.0)
        } else {
            CMat::zeros(dt, ds)
        };
        arrows.push(Arrow { source: s, target: t, alpha });
    }
    let mut mu = vec![0.0; n];
    for a in &arrows {
        let s2 = a.alpha.norm_squared() / vertices[a.source].dim as f64;
        mu[a.target] += s2 / vertices[a.target].mass;
        mu[a.source] -= s2 / vertices[a.source].mass;
    }
    let mut q = QuiverData { vertices, arrows };
    for (v, m) in q.vertices.iter_mut().zip(&mu) {
        v.rho = -m;
    }
    q
}

fn kaehler_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut e_del, mut e_lap) = (0.0f64, 0.0f64);
    for k in 0..KAEHLER_INSTANCES {
        let q = flat_quiver(&mut rng);
        let a = LozengeAlgebra::build_from_quiver(&q).map_err(e2s)?.twist_by(&q.alpha());
        let (d, del, delbar) = (a.d_mat(), a.del_mat(), a.delbar_mat());
        // Commutator route against adjoints taken through the Gram matrix.
        let adj = a.adjoints();
        let del_star = a.gram_adjoint(&del).map_err(e2s)?;
        let delbar_star = a.gram_adjoint(&delbar).map_err(e2s)?;
        let d_star = a.gram_adjoint(&d).map_err(e2s)?;
        e_del = e_del.max(op_norm(&(&del_star - &adj.del_star)));
        let lap = &d * &d_star + &d_star * &d;
        let lap_delbar = &delbar * &delbar_star + &delbar_star * &delbar;
        e_lap = e_lap.max(op_norm(&(&lap - &lap_delbar * C::new(2.0, 0.0))));
        let l = a.laplacians().map_err(e2s)?;
        e_lap = e_lap.max(op_norm(&(&l.full - &l.delbar * C::new(2.0, 0.0))));
        if !(e_del < KAEHLER_TOL && e_lap < KAEHLER_TOL) {
            return Err(format!("instance {k}: ‖∂* − i[Λ,∂̄]‖ = {e_del:.2e}, ‖Δ − 2Δ_∂̄‖ = {e_lap:.2e}"));
        }
    }
    Ok(format!("{KAEHLER_INSTANCES} algebras, ‖∂* − i[Λ,∂̄]‖ ≤ {e_del:.1e}, ‖Δ − 2Δ_∂̄‖ ≤ {e_lap:.1e}"))
}

// 3 ────────────────────────────────────────────────────────────────────────

/// Slopes in `[−0.1, 0.1]` keep unstable flows inside double range up to `t = 50`.
fn random_quiver(rng: &mut ChaCha8Rng, max_dim: usize, slope: f64) -> QuiverData {
    let n = rng.random_range(1..=4);
    let vertices: Vec<Vertex> = (0..n)
        .map(|_| Vertex {
            dim: rng.random_range(1..=max_dim),
            mass: rng.random_range(0.5..2.0),
            rho: rng.random_range(-slope..slope),
        })
        .collect();
    let arrows = (0..rng.random_range(0..=4))
        .filter_map(|_| {
            let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
            (s != t).then(|| Arrow {
                source: s,
                target: t,
                alpha: CMat::from_fn(vertices[t].dim, vertices[s].dim, |_, _| {
                    C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }),
            })
        })
        .collect();
    QuiverData { vertices, arrows }
}

fn random_hermitian(rng: &mut ChaCha8Rng, dims: &[usize], scale: f64) -> Blocks {
    dims.iter()
        .map(|&d| {
            let m = CMat::from_fn(d, d, |_, _| C::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)));
            (&m + m.adjoint()) * C::new(0.5, 0.0)
        })
        .collect()
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = log_times(0.1, MONO_T_END, 12);
    let mut worst = f64::INFINITY;
    for k in 0..MONO_INSTANCES {
        let q = random_quiver(&mut rng, 2, 0.1);
        let dims: Vec<usize> = q.vertices.iter().map(|v| v.dim).collect();
        // g₀ = h₀^{1/2} c h₀^{1/2} with 0 < c ≤ 1.
        let h0 = blocks::herm_apply(&random_hermitian(&mut rng, &dims, 1.0), f64::exp);
        let c = blocks::herm_apply(&random_hermitian(&mut rng, &dims, 1.5), |e| (-e.abs()).exp());
        let s = blocks::herm_apply(&h0, f64::sqrt);
        let g0: Blocks = blocks::mul(&blocks::mul(&s, &c), &s).iter().map(blocks::hermitian_part).collect();
        let r = check_monotonicity(&q, &g0, &h0, &samples, &FlowOptions::default()).map_err(|e| format!("instance {k}: {e}"))?;
        worst = worst.min(r.min_gap);
        if r.min_gap < MONO_TOL {
            return Err(format!("instance {k}: min gap {:.3e}", r.min_gap));
        }
    }
    Ok(format!("{MONO_INSTANCES} pairs to t = {MONO_T_END}, min relative gap {worst:.2e} ≥ {MONO_TOL:e}"))
}

// 4 ────────────────────────────────────────────────────────────────────────

fn king_cases() -> Vec<(&'static str, QuiverData, Stability)> {
    use Stability::*;
    let one = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    let thin = QuiverData::thin;
    let rep = |v: &[(usize, f64, f64)], a: Vec<(usize, usize, CMat)>| QuiverData {
        vertices: v.iter().map(|&(dim, mass, rho)| Vertex { dim, mass, rho }).collect(),
        arrows: a.into_iter().map(|(source, target, alpha)| Arrow { source, target, alpha }).collect(),
    };
    vec![
        ("A2 stable", thin(&[1.0, 1.0], &[0.3, -0.3], &[(0, 1, one)]), Polystable),
        ("A2 stable, weak arrow", thin(&[1.0, 1.0], &[0.05, -0.05], &[(0, 1, C::new(0.2, 0.1))]), Polystable),
        ("A2 stable, unequal masses", thin(&[1.0, 2.0], &[0.4, -0.2], &[(0, 1, C::new(1.5, 0.0))]), Polystable),
        ("A2 reversed slopes", thin(&[1.0, 1.0], &[-0.3, 0.3], &[(0, 1, one)]), Unstable),
        ("A2 reversed, unequal masses", thin(&[2.0, 1.0], &[-0.1, 0.2], &[(0, 1, one)]), Unstable),
        ("A2 split", thin(&[1.0, 1.0], &[0.5, -0.5], &[(0, 1, C::new(0.0, 0.0))]), Unstable),
        ("A2 equal slopes", thin(&[1.0, 2.0], &[0.0, 0.0], &[(0, 1, one)]), SemistableNotPoly),
        ("A2 equal slopes, complex arrow", thin(&[1.0, 1.0], &[0.0, 0.0], &[(0, 1, C::new(0.3, -0.7))]), SemistableNotPoly),
        ("two points", thin(&[1.0, 1.0], &[0.0, 0.0], &[]), Polystable),
        ("two points, unequal slopes", thin(&[1.0, 3.0], &[0.3, -0.1], &[]), Unstable),
        ("oriented 2-cycle", thin(&[1.0, 1.0], &[0.0, 0.0], &[(0, 1, one), (1, 0, C::new(0.4, 0.2))]), Polystable),
        ("2-cycle with slopes", thin(&[1.0, 1.0], &[0.2, -0.2], &[(0, 1, one), (1, 0, C::new(0.5, 0.0))]), Polystable),
        ("A3 stable", thin(&[1.0, 1.0, 1.0], &[0.5, 0.0, -0.5], &[(0, 1, one), (1, 2, one)]), Polystable),
        ("A3 flat", thin(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0], &[(0, 1, one), (1, 2, one)]), SemistableNotPoly),
        ("A3 middle split", thin(&[1.0, 1.0, 1.0], &[0.2, 0.4, -0.6], &[(0, 1, one), (1, 2, C::new(0.0, 0.0))]), Unstable),
        ("3-cycle", thin(&[1.0, 1.0, 1.0], &[0.0; 3], &[(0, 1, one), (1, 2, one), (2, 0, one)]), Polystable),
        (
            "1→2 generic line",
            rep(&[(1, 1.0, 0.5), (2, 1.0, -0.25)], vec![(0, 1, CMat::from_column_slice(2, 1, &[one, C::new(0.5, 0.5)]))]),
            // {v₀} ⊕ image line has slope 1/8 > 0.
            Unstable,
        ),
        (
            "2→2 invertible",
            rep(&[(2, 1.0, 0.3), (2, 1.0, -0.3)], vec![(0, 1, CMat::from_row_slice(2, 2, &[one, i, i, one]))]),
            Polystable,
        ),
        (
            "2→2 invertible, unequal masses",
            rep(&[(2, 1.0, 0.2), (2, 2.0, -0.1)], vec![(0, 1, CMat::from_row_slice(2, 2, &[one, C::new(0.3, 0.0), i, one]))]),
            Polystable,
        ),
        (
            "2→1 with kernel",
            rep(&[(2, 1.0, 0.3), (1, 1.0, -0.6)], vec![(0, 1, CMat::from_row_slice(1, 2, &[one, i]))]),
            // The kernel line at v₀ has slope 0.3.
            Unstable,
        ),
        (
            "2→2 zero",
            rep(&[(2, 1.0, -0.2), (2, 1.0, 0.2)], vec![(0, 1, CMat::zeros(2, 2))]),
            Unstable,
        ),
        (
            "2-point twice",
            rep(&[(2, 1.0, 0.0), (2, 1.0, 0.0)], vec![]),
            Polystable,
        ),
    ]
}

fn king_consistency() -> Outcome {
    let cases = king_cases();
    let mut counts = [0usize; 3];
    let mut worst = 0.0f64;
    for (name, q, want) in &cases {
        // king_test itself errors when the lattice and flow verdicts disagree.
        let v = king_test(q, &FlowOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        if v.classification != *want || v.lattice.class != v.flow.class {
            return Err(format!("{name}: expected {want:?}, lattice {:?}, flow {:?}", v.lattice.class, v.flow.class));
        }
        counts[*want as usize] += 1;
        if *want == Stability::Polystable {
            worst = worst.max(v.flow.residual);
            if !(v.flow.residual < KING_RESIDUAL && v.flow.t_final <= KING_T0) {
                return Err(format!("{name}: residual {:.2e} at t = {:e}", v.flow.residual, v.flow.t_final));
            }
        }
    }
    check(
        cases.len() >= KING_MIN_CASES && counts.iter().all(|&c| c > 0),
        format!(
            "{} reps ({} polystable, {} semistable, {} unstable), polystable residual ≤ {worst:.1e} < {KING_RESIDUAL:e} at t = {KING_T0:e}",
            cases.len(),
            counts[0],
            counts[1],
            counts[2]
        ),
    )
}

// 5 ────────────────────────────────────────────────────────────────────────

fn chamber_walls() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let m: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.1..5.0));
        let [m1, m2, m3, m4, m5] = m;
        let p1 = m1 * m4 + m3 * m5 + 2.0 * m4 * m5 - m1 * m2;
        let p2 = m2 * m5 + m1 * m3 + 2.0 * m1 * m2 - m4 * m5;
        let w = walls_5cycle(&m).map_err(e2s)?;
        if (w.d1 - p1).abs() > WALL_FORMULA_TOL * (1.0 + p1.abs()) || (w.d2 - p2).abs() > WALL_FORMULA_TOL * (1.0 + p2.abs()) {
            return Err(format!("{m:?}: D₁, D₂ = {}, {} vs {p1}, {p2}", w.d1, w.d2));
        }
    }

    // Interior points at least a fixed relative distance from both walls.
    let interior = WallOptions { s_lo: INTERIOR_DRIFT_S, s_hi: 200.0, points: 91 };
    let mut counts = [0usize; 3];
    let mut worst_drift = 0.0f64;
    let mut attempts = 0;
    while counts.iter().sum::<usize>() < 3 * INTERIOR_POINTS_PER_CHAMBER {
        attempts += 1;
        if attempts > 100_000 {
            return Err(format!("could not sample interior points: {counts:?}"));
        }
        let m: [f64; 5] = std::array::from_fn(|_| 0.3 * (4.0f64 / 0.3).powf(rng.random_range(0.0..1.0)));
        let w = walls_5cycle(&m).map_err(e2s)?;
        let norm: f64 = m.iter().map(|x| x * x).sum();
        let (slot, margin, need) = match w.chamber {
            Chamber::Left => (0, -w.d1 / norm, 0.3),
            Chamber::Middle => (1, w.d1.min(w.d2) / norm, 0.4),
            Chamber::Right => (2, -w.d2 / norm, 0.3),
            _ => continue,
        };
        if margin < need || counts[slot] >= INTERIOR_POINTS_PER_CHAMBER {
            continue;
        }
        counts[slot] += 1;
        let r = wall_asymptotics(&OrientedCycleGraph::fig1(m).map_err(e2s)?, &[0.0; 5], &interior).map_err(e2s)?;
        worst_drift = worst_drift.max(r.drift_at_start);
        if r.drift_at_start >= INTERIOR_DRIFT_TOL {
            return Err(format!("{m:?}: drift {:.2e} at s = {INTERIOR_DRIFT_S}", r.drift_at_start));
        }
    }

    let mut worst_kappa = f64::INFINITY;
    for k in 0..WALL_POINTS {
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.5..2.0));
        let m = if k % 2 == 0 { wall1_point(a[0], a[1], a[2], a[3]) } else { wall2_point(a[0], a[1], a[2], a[3]) };
        let g = OrientedCycleGraph::fig1(m).map_err(e2s)?;
        let r = wall_asymptotics(&g, &[0.0; 5], &WallOptions::default()).map_err(e2s)?;
        let top = r.kappa.iter().fold(0.0f64, |a, k| a.max(k.abs()));
        worst_kappa = worst_kappa.min(top);
        if top <= KAPPA_TOL {
            return Err(format!("{m:?}: largest |log s coefficient| {top:.3}"));
        }
        if !r.partition_matches() {
            return Err(format!("{m:?}: drifting {:?}, predicted {:?}", r.drifting, r.predicted_drifting));
        }
    }
    Ok(format!(
        "walls exact on 1000 points; {} interior points, drift ≤ {worst_drift:.1e} < {INTERIOR_DRIFT_TOL:e} at s = {INTERIOR_DRIFT_S}; \
         {WALL_POINTS} wall points, max |κ| ≥ {worst_kappa:.3} > {KAPPA_TOL}, partitions match",
        counts.iter().sum::<usize>()
    ))
}

// 6 ────────────────────────────────────────────────────────────────────────

fn heat_limit() -> Outcome {
    let l = 2.0 * std::f64::consts::PI;
    let c = build_cylinder(l, &[]).map_err(e2s)?;
    let g = build_grid(&c, &GridOptions { uniform_nodes: 256, ..Default::default() }).map_err(e2s)?;
    let f0 = InitialCurve::Fourier { c0: 0.0, cos: vec![], sin: vec![1.0] }.sample(&g).map_err(e2s)?;
    let tr = integrate_pde(&c, &g, &f0, &[1.0], &PdeOptions::default()).map_err(e2s)?;
    let s = tr.last();
    let exact: Vec<f64> = g.x.iter().map(|x| x.sin() * (-s.t).exp()).collect();
    let err: Vec<f64> = s.f.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let rel = l2_norm(&g, &err) / l2_norm(&g, &exact);
    check(rel < HEAT_TOL, format!("relative L² error {rel:.2e} < {HEAT_TOL} at t = {}", s.t))
}

// 7 ────────────────────────────────────────────────────────────────────────

fn pde_ode_reduction() -> Outcome {
    let c = fig1_cylinder();
    let chamber = walls_5cycle(&c.masses().try_into().map_err(|_| "five punctures expected".to_string())?).map_err(e2s)?.chamber;
    if matches!(chamber, Chamber::Wall1 | Chamber::Wall2) {
        return Err(format!("configuration lies on {chamber:?}"));
    }
    let g = build_grid(&c, &GridOptions { h_min: 2e-8, h_max: 3e-4, ..Default::default() }).map_err(e2s)?;
    let f0 = fig1_curve().sample(&g).map_err(e2s)?;
    let r = compare_pde_ode(&c, &g, &f0, 1e4, &CompareOptions::default()).map_err(e2s)?;
    let drift = r.final_decade_drift.iter().fold(0.0f64, |a, &b| a.max(b));
    check(
        r.bounded && drift < DRIFT_TOL,
        format!("{chamber:?} chamber, {} nodes, handoff t = {:.3}, final-decade drift {drift:.3} < {DRIFT_TOL}", g.len(), r.handoff),
    )
}

// 8 ────────────────────────────────────────────────────────────────────────

fn cycle_rep(m: [f64; 5]) -> (QuiverData, Vec<(usize, usize)>) {
    let g = OrientedCycleGraph::fig1(m).unwrap();
    let edges: Vec<(usize, usize)> = (0..5).map(|i| g.arrow(i)).collect();
    let arrows: Vec<_> = edges.iter().map(|&(s, t)| (s, t, C::new(1.0, 0.0))).collect();
    (QuiverData::thin(&m, &[0.0; 5], &arrows), edges)
}

fn thin_rep(m: &[f64], edges: &[(usize, usize)], alpha: &[C]) -> (QuiverData, Vec<(usize, usize)>) {
    let arrows: Vec<_> = edges.iter().zip(alpha).map(|(&(s, t), &a)| (s, t, a)).collect();
    (QuiverData::thin(m, &vec![0.0; m.len()], &arrows), edges.to_vec())
}

fn asymptotic_certificate() -> Outcome {
    let one = C::new(1.0, 0.0);
    let reps = [
        ("5-cycle MIDDLE", cycle_rep([1.0; 5])),
        ("5-cycle LEFT", cycle_rep([2.0, 4.0, 1.0, 1.0, 1.0])),
        ("5-cycle RIGHT", cycle_rep([1.0, 1.0, 1.0, 4.0, 2.0])),
        ("A2", thin_rep(&[1.0, 1.0], &[(0, 1)], &[one])),
        ("A2 unequal masses", thin_rep(&[1.0, 2.0], &[(0, 1)], &[one])),
        ("A3", thin_rep(&[1.0, 1.0, 1.0], &[(0, 1), (1, 2)], &[one, C::new(0.7, 0.2)])),
        ("5-cycle MIDDLE, m₁ = 1.5", cycle_rep([1.5, 1.0, 1.0, 1.0, 1.0])),
        ("5-cycle MIDDLE, m₃ = 2", cycle_rep([1.0, 1.0, 2.0, 1.0, 1.0])),
        ("2-cycle with tail, unequal masses", thin_rep(&[1.0, 2.0, 0.5], &[(0, 1), (1, 0), (1, 2)], &[one, one, C::new(0.5, 0.5)])),
        ("2-cycle with tail", thin_rep(&[1.0, 1.0, 1.0], &[(0, 1), (1, 0), (1, 2)], &[one, C::new(0.6, 0.3), C::new(0.8, 0.0)])),
    ];
    let (mut lines, mut fitted) = (vec![], 0);
    for (name, (q, edges)) in &reps {
        let n = q.vertices.len();
        let opts = AsymptoticOptions::default();
        let sol = construct_asymptotic_solution(q, &opts).map_err(|e| format!("{name}: {e}"))?;
        // Residuals below the floor on the last decade mean the ansatz is exact.
        let p = sol.correction.residual_z.exponent();
        match p {
            Some(p) if p < INTEGRABLE_EXPONENT => fitted += 1,
            None if sol.correction.residual_z.integrable => {}
            _ => return Err(format!("{name}: residual exponent {p:?}")),
        }
        // Weights from the ideal lattice of the underlying graph.
        let masses: Vec<f64> = q.vertices.iter().map(|v| v.mass).collect();
        let il = build_ideal_lattice(&DirectedGraph::new(masses, edges.clone())).map_err(e2s)?;
        let w = il.vertex_weights(&weight_filtration(&il.polarized).map_err(e2s)?, n);
        let steps: Vec<Blocks> = (0..n)
            .map(|v| (0..n).map(|u| if u == v { CMat::identity(1, 1) } else { CMat::zeros(1, 1) }).collect())
            .collect();
        let fit = asymptotic_fit(&sol.trajectory(), &steps, opts.t_min).map_err(|e| format!("{name}: {e}"))?;
        let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-12);
        let err = fit.log_t_coefficients().iter().zip(&w).fold(0.0f64, |a, (c, x)| a.max((c - x).abs())) / scale;
        if !(err < ASYM_LOG_TOL) {
            return Err(format!("{name}: log t coefficients {:?} vs weights {w:?}", fit.log_t_coefficients()));
        }
        let p = p.map_or("exact".to_string(), |p| format!("p = {p:.2}"));
        lines.push(format!("{name} {p}, err {err:.1e}"));
    }
    check(
        fitted >= ASYM_MIN_REPS,
        format!(
            "{} reps ({fitted} with fitted exponent < {INTEGRABLE_EXPONENT}), log t within {ASYM_LOG_TOL}: {}",
            reps.len(),
            lines.join("; ")
        ),
    )
}

// 9 ────────────────────────────────────────────────────────────────────────

fn svg_heights(svg: &str) -> Vec<Vec<f64>> {
    svg.split(r#"<g class="panel""#)
        .skip(1)
        .map(|panel| {
            panel
                .split(r#"data-height=""#)
                .skip(1)
                .map(|s| s[..s.find('"').unwrap()].parse().unwrap())
                .collect()
        })
        .collect()
}

fn figure_reproduction() -> Outcome {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let out = Command::new(env!("CARGO_BIN_EXE_weightflow"))
        .arg("--out")
        .arg(dir.path())
        .args(["reproduce", "chamber-diagrams"])
        .output()
        .map_err(e2s)?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("chamber_diagrams.json")).map_err(e2s)?).map_err(e2s)?;
    let svg = std::fs::read_to_string(dir.path().join("chamber_diagrams.svg")).map_err(e2s)?;
    let drawn = svg_heights(&svg);
    let panels = json["panels"].as_array().ok_or("no panels")?;
    if panels.len() != 3 || drawn.len() != 3 {
        return Err(format!("{} panels in JSON, {} in SVG", panels.len(), drawn.len()));
    }
    let mut seen = vec![];
    for (p, svg_h) in panels.iter().zip(&drawn) {
        let chamber = p["chamber"].as_str().unwrap_or_default().to_string();
        let m: [f64; 5] = serde_json::from_value(p["masses"].clone()).map_err(e2s)?;
        let h: Vec<f64> = serde_json::from_value(p["heights"].clone()).map_err(e2s)?;
        let g = OrientedCycleGraph::fig1(m).map_err(e2s)?;
        let il = g.ideal_lattice().map_err(e2s)?;
        let f = weight_filtration(&il.polarized).map_err(e2s)?;
        if !certify_weight_filtration(&il.polarized, &f).map_err(e2s)? {
            return Err(format!("{chamber}: weight filtration fails its certificate"));
        }
        let w = il.vertex_weights(&f, 5);
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < HEIGHT_TOL);
        if !close(&h, &w) || !close(svg_h, &w) {
            return Err(format!("{chamber}: heights {h:?}, drawn {svg_h:?}, grading {w:?}"));
        }
        let expected = serde_json::to_value(walls_5cycle(&m).map_err(e2s)?.chamber).map_err(e2s)?;
        if p["chamber"] != expected {
            return Err(format!("panel {chamber} has masses in {expected}"));
        }
        if chamber == "MIDDLE" && (m != [1.0; 5] || !close(&h, &[0.5, -1.0, 0.0, 1.0, -0.5])) {
            return Err(format!("MIDDLE panel at {m:?} has heights {h:?}"));
        }
        seen.push(chamber);
    }
    check(seen == ["LEFT", "MIDDLE", "RIGHT"], format!("panels {seen:?} match the weight grading; MIDDLE = (½, −1, 0, 1, −½)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("lattice oracle equivalence", lattice_oracles),
        ("Kähler identities", kaehler_identities),
        ("monotonicity", monotonicity),
        ("King consistency", king_consistency),
        ("chamber/wall reproduction", chamber_walls),
        ("PDE heat limit", heat_limit),
        ("PDE/ODE reduction", pde_ode_reduction),
        ("asymptotic-solution certificate", asymptotic_certificate),
        ("figure reproduction", figure_reproduction),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {}: PASS  {name} ({secs:.1} s): {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1} s): {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
