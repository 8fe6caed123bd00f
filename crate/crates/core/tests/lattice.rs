use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weightflow::lattice::*;

/// Random DAG (edges only from lower to higher index) whose ideal lattice has at
/// most 64 elements, with random central charges in the right half-plane.
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
        if closed_subsets(&g).map(|s| s.len() <= 64).unwrap_or(false) {
            return g;
        }
    }
}

#[test]
fn hn_and_weight_filtrations_on_random_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let g = random_dag(&mut rng);
        let il = build_ideal_lattice(&g).unwrap();
        let pl = &il.polarized;
        assert!(pl.lattice().is_modular());
        let hn = pl.harder_narasimhan();
        assert_eq!(pl.hn_candidates_by_search(1000).unwrap(), vec![hn], "{g:?}");

        let real = pl.real_part();
        let f = weight_filtration(&real).unwrap();
        assert!(f.is_paracomplemented(real.lattice()));
        assert!(is_phase_zero_semistable(&associated_lattice(&real, &f).unwrap()));
    }
}

#[test]
fn weight_grading_is_balanced() {
    // Σ m_v w_v = 0 follows from M(a, λ) having phase 0.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let mut g = random_dag(&mut rng);
        g.imag.clear();
        let il = build_ideal_lattice(&g).unwrap();
        let f = weight_filtration(&il.polarized).unwrap();
        let w = il.vertex_weights(&f, g.n());
        let s: f64 = w.iter().zip(&g.masses).map(|(w, m)| w * m).sum();
        assert!(s.abs() < 1e-9, "{s}");
    }
}

#[test]
fn fig1_middle_heights() {
    let g = OrientedCycleGraph::fig1([1.0; 5]).unwrap();
    let w = g.weight_grading().unwrap();
    let expect = [0.5, -1.0, 0.0, 1.0, -0.5];
    for (a, b) in w.iter().zip(expect) {
        assert!((a - b).abs() < 1e-9, "{w:?}");
    }
}

#[test]
fn wall_formulas_match_their_polynomials() {
    let m = [1.3, 2.1, 0.7, 1.9, 0.4];
    let [m1, m2, m3, m4, m5] = m;
    assert!((d1(&m) - (m1 * m4 + m3 * m5 + 2.0 * m4 * m5 - m1 * m2)).abs() < 1e-14);
    assert!((d2(&m) - (m2 * m5 + m1 * m3 + 2.0 * m1 * m2 - m4 * m5)).abs() < 1e-14);
    let p = wall1_point(1.0, 1.5, 0.5, 2.0);
    assert!(d1(&p).abs() < 1e-9);
    let q = wall2_point(1.0, 1.5, 0.5, 2.0);
    assert!(d2(&q).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hn_phases_strictly_decrease(seed in any::<u64>()) {
        let g = random_dag(&mut ChaCha8Rng::seed_from_u64(seed));
        let hn = build_ideal_lattice(&g).unwrap().polarized.harder_narasimhan();
        prop_assert!(hn.phases.windows(2).all(|p| p[0] > p[1]));
    }
}
