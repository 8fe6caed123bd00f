use criterion::{black_box, criterion_group, criterion_main, Criterion};
use weightflow::csf::*;
use weightflow::flow::{blocks, integrate_metric_flow, log_times, FlowOptions};
use weightflow::lattice::*;
use weightflow::lozenge::*;

fn lattice(c: &mut Criterion) {
    let g = OrientedCycleGraph::fig1([2.0, 4.0, 1.0, 1.0, 1.0]).unwrap();
    let mut graph = g.graph();
    graph.imag = vec![0.3, -0.1, 0.2, -0.4, 0.1];
    let il = build_ideal_lattice(&graph).unwrap();
    c.bench_function("ideal_lattice_5cycle", |b| b.iter(|| build_ideal_lattice(black_box(&graph)).unwrap()));
    c.bench_function("harder_narasimhan_5cycle", |b| b.iter(|| il.polarized.harder_narasimhan()));
    let real = il.polarized.real_part();
    c.bench_function("weight_filtration_5cycle", |b| b.iter(|| weight_filtration(black_box(&real)).unwrap()));
    c.bench_function("iterated_grading_wall", |b| {
        let w = OrientedCycleGraph::fig1(wall1_point(1.0, 1.0, 1.0, 1.0)).unwrap();
        b.iter(|| w.iterated_grading().unwrap())
    });
}

fn lozenge(c: &mut Criterion) {
    let one = C::new(1.0, 0.0);
    let q = QuiverData {
        vertices: vec![Vertex { dim: 3, mass: 1.0, rho: 0.0 }, Vertex { dim: 3, mass: 1.0, rho: 0.0 }],
        arrows: vec![Arrow { source: 0, target: 1, alpha: CMat::identity(3, 3) * one }],
    };
    let a = LozengeAlgebra::build_from_quiver(&q).unwrap();
    c.bench_function("laplacians_dim3", |b| b.iter(|| a.laplacians().unwrap()));
    c.bench_function("hodge_dim3", |b| b.iter(|| a.hodge().unwrap()));
}

fn flow(c: &mut Criterion) {
    let q = QuiverData::thin(&[1.0, 1.0, 1.0], &[0.5, 0.0, -0.5], &[(0, 1, C::new(1.0, 0.0)), (1, 2, C::new(0.7, 0.2))]);
    let h0 = blocks::identity(&[1, 1, 1]);
    let samples = log_times(0.1, 10.0, 8);
    c.bench_function("metric_flow_a3_t10", |b| {
        b.iter(|| integrate_metric_flow(&q, &h0, 10.0, &samples, &FlowOptions::default()).unwrap())
    });
}

fn csf(c: &mut Criterion) {
    let g = OrientedCycleGraph::fig1([1.0; 5]).unwrap();
    c.bench_function("wall_asymptotics_middle", |b| {
        b.iter(|| wall_asymptotics(&g, &[0.0; 5], &WallOptions::default()).unwrap())
    });
    let cyl = fig1_cylinder();
    let grid = build_grid(&cyl, &GridOptions::default()).unwrap();
    let f0 = fig1_curve().sample(&grid).unwrap();
    let mut group = c.benchmark_group("pde");
    group.sample_size(10);
    group.bench_function("fig1_to_t0.1", |b| {
        b.iter(|| integrate_pde(&cyl, &grid, &f0, &[0.1], &PdeOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, lattice, lozenge, flow, csf);
criterion_main!(benches);
