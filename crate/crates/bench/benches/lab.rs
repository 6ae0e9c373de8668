use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sclab::completeness::{dirichlet_resolvent, simulate_batch, ChainLimits};
use sclab::families::{anti_tree, birth_death, random_graph};
use sclab::growth::volume_profile;
use sclab::metric_graph::{ibp_check, interpolate, woymp_extend, MetricGraph};
use sclab::{ball_window, degree_metric, EdgeLengths, GraphWindow, PathMetric, VertexFunction, VertexId};

fn resolvent(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirichlet_resolvent");
    let g = birth_death(3.0);
    for r in [250.0, 1000.0] {
        let w = ball_window(&g, &EdgeLengths::unit(), VertexId(0), r, 10_000).unwrap();
        group.bench_with_input(BenchmarkId::new("birth_death_3", r), &w, |b, w| {
            b.iter(|| dirichlet_resolvent(w, 1.0).unwrap())
        });
    }
    let lattice = sclab::WeightedGraph::new(sclab::families::Lattice);
    let w = ball_window(&lattice, &EdgeLengths::unit(), VertexId(0), 30.0, 100_000).unwrap();
    group.bench_function("lattice_r30", |b| b.iter(|| dirichlet_resolvent(&w, 1.0).unwrap()));
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let g = birth_death(3.0);
    let limits = ChainLimits::new(10.0, 100_000);
    c.bench_function("simulate_batch_alpha3_x100", |b| {
        b.iter(|| simulate_batch(&g, VertexId(0), &limits, 100, 42).unwrap())
    });
}

fn volume(c: &mut Criterion) {
    let g = anti_tree(3.0, 9).unwrap();
    let d = PathMetric::new(&g, EdgeLengths::unit());
    c.bench_function("anti_tree_volume_r8", |b| {
        b.iter(|| volume_profile(&g, &d, VertexId(0), 8.0, 8).unwrap())
    });
}

fn metric_graph(c: &mut Criterion) {
    let g = random_graph(50, 0.2, (0.5, 2.0), 7).into_graph();
    let d = PathMetric::new(&g, degree_metric(&g, 1.0));
    let w = GraphWindow::whole(&g).unwrap();
    let x = MetricGraph::build(&g, &d, &w).unwrap();
    let u: VertexFunction = x.vertices().map(|v| (v, (v.0 % 7) as f64 / 7.0)).collect();
    c.bench_function("metric_graph_build_n50", |b| {
        b.iter(|| MetricGraph::build(&g, &d, &w).unwrap())
    });
    c.bench_function("woymp_extend_and_ibp_n50", |b| {
        b.iter(|| {
            let v = woymp_extend(&x, &u, 0.5).unwrap();
            ibp_check(&x, &v, &interpolate(&x, &u))
        })
    });
}

criterion_group!(benches, resolvent, monte_carlo, volume, metric_graph);
criterion_main!(benches);
