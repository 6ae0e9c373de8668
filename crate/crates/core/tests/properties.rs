use proptest::prelude::*;

use sclab::completeness::{dirichlet_resolvent, extrapolate_deficiency};
use sclab::families::{random_graph, random_tree, AntiTree};
use sclab::growth::{grigoryan_integral, volume_profile, VolumeProfile};
use sclab::io::{parse_graph, write_graph};
use sclab::metric_graph::{energy_form, ibp_check, interpolate, woymp_extend, MetricGraph};
use sclab::poly::Quadratic;
use sclab::{
    ball_window, check_adapted, degree_metric, energy, formal_laplacian, Adaptedness, EdgeLengths, FiniteGraph,
    GraphWindow, PathMetric, VertexFunction, VertexId, WeightedGraph,
};

fn graph_strategy() -> impl Strategy<Value = FiniteGraph> {
    (3usize..30, 0.1f64..0.8, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, (0.25, 4.0), seed))
}

fn values(g: &FiniteGraph, seed: u64) -> VertexFunction {
    // cheap deterministic pseudo-values without pulling in an rng
    g.vertices()
        .map(|x| {
            let h = (x.0 ^ seed).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            (x, (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_symmetric_and_matches_green(g in graph_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (u, v) = (values(&g, s1), values(&g, s2));
        let wg = g.clone().into_graph();
        let uv = energy(&wg, &u, &v).unwrap();
        prop_assert!((uv - energy(&wg, &v, &u).unwrap()).abs() <= 1e-12 * uv.abs().max(1.0));
        // on a finite graph ε(u,v) = Σ μ u Δv
        let green: f64 = g
            .vertices()
            .map(|x| g.measure_of(x).unwrap() * u.value(x) * formal_laplacian(&wg, &v, x).unwrap())
            .sum();
        prop_assert!((uv - green).abs() <= 1e-10 * uv.abs().max(1.0));
        prop_assert!(energy(&wg, &u, &u).unwrap() >= 0.0);
    }

    #[test]
    fn laplacian_kills_constants(g in graph_strategy(), c in -5.0f64..5.0) {
        let wg = g.clone().into_graph();
        let u = VertexFunction::constant(g.vertices(), c);
        for x in g.vertices() {
            prop_assert!(formal_laplacian(&wg, &u, x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn degree_metric_is_adapted(g in graph_strategy(), c0 in 0.1f64..3.0) {
        let wg = g.into_graph();
        let d = PathMetric::new(&wg, degree_metric(&wg, c0));
        let rep = check_adapted(&wg, &d, c0, &GraphWindow::whole(&wg).unwrap()).unwrap();
        prop_assert_eq!(rep.verdict, Adaptedness::Adapted);
    }

    #[test]
    fn resolvent_stays_in_unit_interval(n in 3usize..40, seed in any::<u64>(), lambda in 0.1f64..10.0) {
        let wg = random_tree(n, (0.5, 2.0), seed).into_graph();
        let w = ball_window(&wg, &EdgeLengths::unit(), VertexId(0), 3.0, 10_000).unwrap();
        let sol = dirichlet_resolvent(&w, lambda).unwrap();
        for (_, v) in sol.u.iter() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn extrapolation_is_clamped(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let e = extrapolate_deficiency(&[a, b, c]);
        prop_assert!(e >= 0.0 && e <= c.max(0.0) + 1e-15);
    }

    #[test]
    fn graph_text_round_trips(g in graph_strategy()) {
        let back = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(write_graph(&back), write_graph(&g));
    }

    #[test]
    fn metric_graph_calculus(g in graph_strategy(), s1 in any::<u64>(), s2 in any::<u64>(), level in -1.0f64..1.0) {
        let wg = g.clone().into_graph();
        let d = PathMetric::new(&wg, degree_metric(&wg, 1.0));
        let x = MetricGraph::build(&wg, &d, &GraphWindow::whole(&wg).unwrap()).unwrap();
        let v = woymp_extend(&x, &values(&g, s1), level).unwrap();
        let what = interpolate(&x, &values(&g, s2));
        prop_assert!(ibp_check(&x, &v, &what) < 1e-12);
        let e = energy_form(&x, &v, &what);
        prop_assert!((e - energy_form(&x, &what, &v)).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn volume_profiles_are_monotone(g in graph_strategy(), r in 0.5f64..5.0) {
        let wg = g.into_graph();
        let d = PathMetric::new(&wg, degree_metric(&wg, 1.0));
        let root = wg.finite_vertices().unwrap()[0];
        let p = volume_profile(&wg, &d, root, r, 16).unwrap();
        prop_assert!(p.is_monotone());
    }

    #[test]
    fn grigoryan_shrinks_with_volume(k in 0.5f64..3.0, extra in 0.0f64..2.0) {
        let small = VolumeProfile::synthetic(1.0, 10.0, 64, |r| (k * r * r).exp());
        let big = VolumeProfile::synthetic(1.0, 10.0, 64, |r| (k * r * r + extra * r).exp());
        prop_assert!(grigoryan_integral(&big, 1.0).value <= grigoryan_integral(&small, 1.0).value + 1e-12);
    }

    #[test]
    fn quadratic_integrals(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, l in 0.01f64..4.0) {
        let q = Quadratic::new(a, b, c);
        let exact = a * l.powi(3) / 3.0 + b * l * l / 2.0 + c * l;
        prop_assert!((q.integral(l) - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        let r = q.reversed(l);
        prop_assert!((r.integral(l) - q.integral(l)).abs() <= 1e-12 * exact.abs().max(1.0));
    }
}

#[test]
fn anti_tree_layers_match_sphere_products() {
    for a in [1.0, 2.0, 2.5, 3.0] {
        let t = AntiTree::new(a, 6).unwrap();
        for k in 1..=5 {
            assert_eq!(
                t.layer_weight(k).unwrap(),
                (t.sphere_len(k) * t.sphere_len(k + 1)) as f64
            );
        }
    }
}

#[test]
fn window_on_infinite_graph_is_finite() {
    let g = WeightedGraph::new(sclab::families::Lattice);
    let w = ball_window(&g, &EdgeLengths::unit(), VertexId(0), 3.0, 1000).unwrap();
    assert_eq!(w.len(), 25);
}
