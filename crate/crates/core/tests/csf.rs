use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use weightflow::csf::*;
use weightflow::lattice::{wall1_point, wall2_point, walls_5cycle, Chamber, OrientedCycleGraph};

fn fig1_grid(h_min: f64, h_max: f64) -> (CylinderConfig, Grid, Vec<f64>) {
    let c = fig1_cylinder();
    let g = build_grid(&c, &GridOptions { h_min, h_max, ..Default::default() }).unwrap();
    let f0 = fig1_curve().sample(&g).unwrap();
    (c, g, f0)
}

#[test]
fn weight_is_positive_off_punctures() {
    let c = fig1_cylinder();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let (x, y) = (rng.random_range(0.0..c.l), rng.random_range(-2.0..2.0));
        assert!(c.rho(x, y) > 0.0);
    }
}

#[test]
fn heat_mode_decays_exactly() {
    let l = 2.0 * PI;
    let c = build_cylinder(l, &[]).unwrap();
    let g = build_grid(&c, &GridOptions { uniform_nodes: 256, ..Default::default() }).unwrap();
    let f0 = InitialCurve::Fourier { c0: 0.0, cos: vec![], sin: vec![1.0] }.sample(&g).unwrap();
    let tr = integrate_pde(&c, &g, &f0, &[0.25, 1.0], &PdeOptions::default()).unwrap();
    for s in &tr.states[1..] {
        let exact: Vec<f64> = g.x.iter().map(|x| x.sin() * (-s.t).exp()).collect();
        let err: Vec<f64> = s.f.iter().zip(&exact).map(|(a, b)| a - b).collect();
        assert!(l2_norm(&g, &err) / l2_norm(&g, &exact) < 0.01);
    }
}

#[allow(clippy::needless_range_loop)]
#[test]
fn puncture_heights_decrease_on_fig1_curve() {
    let (c, g, f0) = fig1_grid(1e-4, 2e-3);
    let samples: Vec<f64> = (0..=40).map(|k| 10f64.powf(-3.0 + k as f64 * 0.125)).collect();
    let tr = integrate_pde(&c, &g, &f0, &samples, &PdeOptions::default()).unwrap();
    assert!(tr.event.is_none());
    let y = extract_y(&tr);
    assert_eq!(y.eps, vec![-1, 1, -1, -1, 1]);
    for w in y.y.windows(2) {
        for i in 0..5 {
            assert!(w[1][i] < w[0][i] && w[1][i] > 0.0);
        }
    }
}

#[test]
fn comparison_principle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = build_cylinder(3.0, &[0.4, 1.5, 2.3]).unwrap();
    let g = build_grid(&c, &GridOptions { h_min: 1e-3, h_max: 1e-2, ..Default::default() }).unwrap();
    for _ in 0..10 {
        let mut cos: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..0.3)).collect();
        cos[0] += 1.0;
        let sin: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..0.3)).collect();
        let base = InitialCurve::Fourier { c0: rng.random_range(-0.2..0.2), cos, sin };
        let f0 = base.sample(&g).unwrap();
        if g.puncture_nodes.iter().any(|&i| f0[i].abs() < 0.2) {
            continue;
        }
        let (mu, w) = (rng.random_range(0.0..3.0), rng.random_range(0.3..1.0));
        let g0: Vec<f64> = f0.iter().zip(&g.x).map(|(f, x)| f + 0.1 * (-((x - mu) / w).powi(2)).exp()).collect();
        let samples = [0.01, 0.1, 0.5, 1.0];
        let a = integrate_pde(&c, &g, &f0, &samples, &PdeOptions::default()).unwrap();
        let b = integrate_pde(&c, &g, &g0, &samples, &PdeOptions::default()).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            assert!(sa.f.iter().zip(&sb.f).all(|(x, y)| x <= &(y + 1e-12)));
        }
    }
}

#[test]
fn two_punctures_follow_the_reduced_system() {
    let c = build_cylinder(2.0, &[0.0, 1.0]).unwrap();
    let g = build_grid(&c, &GridOptions { h_min: 1e-7, h_max: 2e-3, ..Default::default() }).unwrap();
    let f0 = InitialCurve::Fourier { c0: 0.0, cos: vec![1.0], sin: vec![] }.sample(&g).unwrap();
    let r = compare_pde_ode(&c, &g, &f0, 1e3, &CompareOptions::default()).unwrap();
    assert_eq!(r.eps, vec![1, -1]);
    let start = r.t.iter().position(|&t| t >= 100.0 * r.handoff).unwrap_or(0);
    for k in start..r.t.len() {
        for i in 0..2 {
            assert!((r.y_pde[k][i] / r.y_ode[k][i]).ln().abs() < 0.5);
        }
    }
    // symmetric data stays symmetric, and t·y tends to e^{v*} = 1/4
    let last = r.y_ode.last().unwrap();
    assert!((last[0] - last[1]).abs() < 1e-9 * last[0]);
    assert!((1e3 * last[0] - 0.25).abs() < 0.01);
}

#[test]
fn late_time_profile_matches_the_ansatz() {
    let (c, g, f0) = fig1_grid(2e-8, 2e-3);
    let ts = [980.0, 1000.0, 1020.0];
    let tr = integrate_pde(&c, &g, &f0, &ts, &PdeOptions { dt_rel: 0.002, ..Default::default() }).unwrap();
    let segs: Vec<_> = (0..5).map(|i| ansatz_functions(i, &c).unwrap()).collect();
    let w = FitWindows::default();
    let fits: Vec<AnsatzFit> = tr.states[1..].iter().map(|s| fit_ansatz(&c, &g, s, &segs, &w).unwrap()).collect();
    for row in &fits[1].matching {
        assert!(row[0].abs() < 0.05 && row[1].abs() < 0.05, "{row:?}");
        assert!(row.iter().all(|r| r.abs() < 0.05), "{row:?}");
    }
    for i in 0..5 {
        let d = dynamic_check(&c, &fits[0], &fits[2], i);
        assert!((d.a0_dot - d.a2).abs() < 0.1 * d.a2.abs());
        assert!((d.lhs - d.rhs).abs() < 0.1 * d.rhs.abs());
    }
    // an early snapshot is rejected
    let early = integrate_pde(&c, &g, &f0, &[1e-3], &PdeOptions::default()).unwrap();
    assert!(fit_ansatz(&c, &g, early.last(), &segs, &w).is_err());
}

#[test]
fn scaling_masses_rescales_time() {
    let g1 = OrientedCycleGraph::fig1([1.0, 1.3, 0.7, 1.1, 0.9]).unwrap();
    let cm = 2.5;
    let g2 = OrientedCycleGraph::fig1([1.0 * cm, 1.3 * cm, 0.7 * cm, 1.1 * cm, 0.9 * cm]).unwrap();
    let y0 = [0.2, 0.05, 0.1, 0.3, 0.15];
    let t: Vec<f64> = vec![2.0, 10.0, 100.0, 1e4];
    let a = integrate_ode(&g1, &y0, 1.0, &t).unwrap();
    let tc: Vec<f64> = t.iter().map(|x| x * cm).collect();
    let b = integrate_ode(&g2, &y0, cm, &tc).unwrap();
    for k in 0..t.len() {
        for (p, q) in a.y(k).iter().zip(b.y(k)) {
            assert!((p / q - 1.0).abs() < 1e-7);
        }
    }
}

#[test]
fn interior_points_converge_to_predicted_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = [0usize; 3];
    while counts.iter().sum::<usize>() < 30 {
        let m: [f64; 5] = std::array::from_fn(|_| 0.3 * (4.0f64 / 0.3).powf(rng.random_range(0.0..1.0)));
        let w = walls_5cycle(&m).unwrap();
        let norm: f64 = m.iter().map(|x| x * x).sum();
        let (slot, margin, need) = match w.chamber {
            Chamber::Left => (0, -w.d1 / norm, 0.3),
            Chamber::Middle => (1, w.d1.min(w.d2) / norm, 0.4),
            Chamber::Right => (2, -w.d2 / norm, 0.3),
            _ => continue,
        };
        if margin < need || counts[slot] >= 10 {
            continue;
        }
        counts[slot] += 1;
        let g = OrientedCycleGraph::fig1(m).unwrap();
        let r = wall_asymptotics(&g, &[0.0; 5], &WallOptions::default()).unwrap();
        assert!(r.drift_at_start < 1e-3, "{m:?}: {}", r.drift_at_start);
        assert!(r.kappa.iter().all(|k| k.abs() < KAPPA_TOL), "{m:?}");
        // fitted rates are ordered as the lattice predicts
        for a in 0..5 {
            for b in 0..5 {
                if r.predicted.rate[a] < r.predicted.rate[b] - 1e-9 {
                    assert!(r.rate[a] < r.rate[b], "{m:?}");
                }
            }
        }
    }
}

#[test]
fn wall_points_drift_where_the_grading_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..40 {
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.5..2.0));
        let m = if k % 2 == 0 { wall1_point(a[0], a[1], a[2], a[3]) } else { wall2_point(a[0], a[1], a[2], a[3]) };
        let g = OrientedCycleGraph::fig1(m).unwrap();
        let r = wall_asymptotics(&g, &[0.0; 5], &WallOptions::default()).unwrap();
        assert!(r.kappa.iter().any(|k| k.abs() > KAPPA_TOL), "{m:?}");
        assert!(r.partition_matches(), "{m:?}: {:?} vs {:?}", r.kappa, r.predicted.kappa);
    }
}

fn arb_cycle() -> impl Strategy<Value = OrientedCycleGraph> {
    (2usize..=6)
        .prop_flat_map(|n| (prop::collection::vec(0.3f64..3.0, n), prop::collection::vec(prop::bool::ANY, n)))
        .prop_filter_map("signs must not all agree", |(m, s)| {
            let eps: Vec<i8> = s.iter().map(|&b| if b { 1 } else { -1 }).collect();
            OrientedCycleGraph::new(m, eps).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_stay_positive_and_limits_are_fixed_points(g in arb_cycle(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y0: Vec<f64> = (0..g.n()).map(|_| rng.random_range(0.01..1.0)).collect();
        let t = [10.0, 1e3, 1e6, 1e12];
        let tr = integrate_ode(&g, &y0, 1.0, &t).unwrap();
        for k in 0..t.len() {
            prop_assert!(tr.y(k).iter().all(|&y| y > 0.0 && y.is_finite()));
        }
        if let Ok(v) = fixed_point(&g, tr.v.last().unwrap()) {
            let m = coefficient_matrix(&g);
            let r = v_rhs(&m, &nalgebra::DVector::from_vec(v));
            prop_assert!(r.amax() <= 1e-10);
        }
        if let Some(v) = interior_fixed_point(&g) {
            let m = coefficient_matrix(&g);
            prop_assert!(v_rhs(&m, &nalgebra::DVector::from_vec(v)).amax() <= 1e-10);
        }
    }
}
