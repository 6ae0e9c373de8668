//! Seeded property suites over random and hand-built instances.
//!
//! Each suite reports the worst violation it saw against its tolerance. The
//! CLI `verify-all` command and the acceptance tests run the same code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::completeness::{
    dirichlet_resolvent, fot_probe, lambda_harmonic_residual, simulate_chain, special_measure, woymp_check,
    ChainLimits, FotTrend, WoympCertificate, WoympStatus,
};
use crate::error::LabError;
use crate::families::{anti_tree, birth_death, random_graph, random_tree, AntiTree, Lattice};
use crate::graph::{
    ball_window, energy, formal_laplacian, truncate_by_jump_size, validate, FiniteGraph, GraphWindow, VertexFunction,
    VertexId, WeightedGraph,
};
use crate::growth::{grigoryan_integral, metric_graph_profile, volume_profile, VolumeProfile};
use crate::metric::{check_adapted, degree_metric, Adaptedness, EdgeLengths, PathMetric};
use crate::metric_graph::{
    ball_measure, boundary_derivatives, compare_lemma, energy_form, hat, ibp_check, interpolate,
    interpolation_bounds_check, interval_sobolev_ratio, point_distance, sobolev_check, woymp_extend,
    woymp_inequality_check, EdgePoint, InequalityStatus, MetricGraph, PiecewisePoly,
};
use crate::poly::Quadratic;
use crate::solver::{pcg_jacobi, CgOptions, SparseSymmetric};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    /// Largest violation seen: a residual, a negative margin, or a count.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteOutcome {
    pub fn new(name: &str, cases: usize, worst: f64, tolerance: f64) -> Self {
        SuiteOutcome {
            name: name.to_string(),
            cases,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }

    fn counted(name: &str, cases: usize, failures: usize) -> Self {
        SuiteOutcome::new(name, cases, failures as f64, 0.0)
    }
}

pub fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Connected random graph with the degree metric, scaled by a factor in
/// `[0.3, 1]`; the metric is adapted with the returned jump size.
#[derive(Clone, Debug)]
pub struct AdaptedInstance {
    pub graph: WeightedGraph,
    pub finite: FiniteGraph,
    pub metric: PathMetric,
    pub c0: f64,
}

impl AdaptedInstance {
    /// Smallest vertex id; random graphs keep only their largest component.
    pub fn root(&self) -> VertexId {
        self.finite.vertices().next().unwrap_or(VertexId(0))
    }
}

pub fn random_adapted(rng: &mut ChaCha8Rng, max_n: usize) -> AdaptedInstance {
    let n = rng.random_range(4..=max_n.max(4));
    let p = rng.random_range(0.1..0.5);
    let finite = random_graph(n, p, (0.5, 2.0), rng.random());
    let graph = finite.clone().into_graph();
    let c0 = rng.random_range(0.5..2.0);
    let scale = rng.random_range(0.3..=1.0);
    let metric = PathMetric::new(&graph, degree_metric(&graph, c0).scaled(scale));
    AdaptedInstance {
        graph,
        finite,
        metric,
        c0,
    }
}

fn random_function(
    rng: &mut ChaCha8Rng,
    vertices: impl IntoIterator<Item = VertexId>,
    lo: f64,
    hi: f64,
) -> VertexFunction {
    vertices.into_iter().map(|x| (x, rng.random_range(lo..hi))).collect()
}

fn metric_graph_of(inst: &AdaptedInstance) -> Result<(GraphWindow, MetricGraph), LabError> {
    let w = GraphWindow::whole(&inst.graph)?;
    let x = MetricGraph::build(&inst.graph, &inst.metric, &w)?;
    Ok((w, x))
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.abs().max(1.0)
}

/// Discrete Green identity `ε(u,u) = Σ μ u Δu` for `u` vanishing off the
/// interior of a ball window.
pub fn green_identity(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let inst = random_adapted(&mut rng, 30);
        let r = rng.random_range(1..=3) as f64;
        let win = ball_window(&inst.graph, &EdgeLengths::unit(), inst.root(), r, 10_000)?;
        let mut u = VertexFunction::constant(inst.finite.vertices(), 0.0);
        for x in win.interior() {
            u.set(x, rng.random_range(-1.0..1.0));
        }
        let lhs = energy(&inst.graph, &u, &u)?;
        let mut rhs = 0.0;
        for x in win.vertices() {
            rhs += inst.graph.measure(*x)? * u.value(*x) * formal_laplacian(&inst.graph, &u, *x)?;
        }
        worst = worst.max(relative((lhs - rhs).abs(), lhs));
    }
    Ok(SuiteOutcome::new("green_identity", cases, worst, 1e-12))
}

/// Linearity of `Δ` and bilinearity, symmetry and positivity of `ε`.
pub fn laplacian_and_energy(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let inst = random_adapted(&mut rng, 30);
        let vs: Vec<VertexId> = inst.finite.vertices().collect();
        let u = random_function(&mut rng, vs.iter().copied(), -1.0, 1.0);
        let v = random_function(&mut rng, vs.iter().copied(), -1.0, 1.0);
        let w = random_function(&mut rng, vs.iter().copied(), -1.0, 1.0);
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let comb = u.combine(a, &v, b);
        for &x in &vs {
            let lhs = formal_laplacian(&inst.graph, &comb, x)?;
            let rhs = a * formal_laplacian(&inst.graph, &u, x)? + b * formal_laplacian(&inst.graph, &v, x)?;
            worst = worst.max(relative((lhs - rhs).abs(), rhs));
        }
        let g = &inst.graph;
        let e_uv = energy(g, &u, &v)?;
        worst = worst.max(relative((e_uv - energy(g, &v, &u)?).abs(), e_uv));
        let lhs = energy(g, &comb, &w)?;
        let rhs = a * energy(g, &u, &w)? + b * energy(g, &v, &w)?;
        worst = worst.max(relative((lhs - rhs).abs(), rhs));
        worst = worst.max(-energy(g, &u, &u)?);
    }
    Ok(SuiteOutcome::new("laplacian_energy_linearity", cases, worst, 1e-12))
}

/// Truncation is idempotent, and truncating a weakly adapted metric at `c0`
/// leaves it adapted.
pub fn truncation(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 3);
    let mut failures = 0;
    for _ in 0..cases {
        let f = random_graph(
            rng.random_range(4..=40),
            rng.random_range(0.1..0.5),
            (0.5, 2.0),
            rng.random(),
        );
        let g = f.clone().into_graph();
        // weakly adapted: the degree rule with no effective jump bound
        let d = PathMetric::new(&g, degree_metric(&g, 1e6));
        let c0 = rng.random_range(0.2..1.0);
        let once = truncate_by_jump_size(&g, &d, c0)?;
        let twice = truncate_by_jump_size(&once, &d, c0)?;
        let w = GraphWindow::whole(&once)?;
        for x in f.vertices() {
            if once.neighbors(x)? != twice.neighbors(x)? {
                failures += 1;
            }
        }
        if check_adapted(&once, &d, c0, &w)?.verdict != Adaptedness::Adapted {
            failures += 1;
        }
    }
    Ok(SuiteOutcome::counted("truncation", cases, failures))
}

/// The degree metric is adapted on random graphs.
pub fn degree_metric_adapted(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 4);
    let mut failures = 0;
    for _ in 0..cases {
        let inst = random_adapted(&mut rng, 50);
        let w = GraphWindow::whole(&inst.graph)?;
        if check_adapted(&inst.graph, &inst.metric, inst.c0, &w)?.verdict != Adaptedness::Adapted {
            failures += 1;
        }
    }
    Ok(SuiteOutcome::counted("degree_metric_adapted", cases, failures))
}

/// Metric axioms of the path metric on random triples.
pub fn metric_axioms(seed: u64, triples: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 5);
    let mut worst = 0.0f64;
    let per_graph = 100;
    for _ in 0..triples.div_ceil(per_graph) {
        let inst = random_adapted(&mut rng, 40);
        let vs: Vec<VertexId> = inst.finite.vertices().collect();
        for _ in 0..per_graph {
            let pick = |rng: &mut ChaCha8Rng| vs[rng.random_range(0..vs.len())];
            let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let d = |a, b| inst.metric.distance(a, b).map(|o| o.unwrap_or(f64::INFINITY));
            let (dxy, dyz, dxz, dyx) = (d(x, y)?, d(y, z)?, d(x, z)?, d(y, x)?);
            worst = worst.max(dxz - dxy - dyz).max((dxy - dyx).abs()).max(d(x, x)?);
            if x != y && !(dxy > 0.0) {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(SuiteOutcome::new("metric_axioms", triples, worst, 1e-12))
}

/// Dirichlet resolvent range, domain monotonicity and λ-harmonicity of `1 − u`.
pub fn resolvent_invariants(seed: u64, cases: usize) -> Result<Vec<SuiteOutcome>, LabError> {
    let mut rng = suite_rng(seed, 6);
    let (mut range, mut mono, mut harmonic) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..cases {
        let (g, root) = if i % 4 == 3 {
            (birth_death(rng.random_range(0.0..3.5)), VertexId(0))
        } else {
            let inst = random_adapted(&mut rng, 50);
            let root = inst.root();
            (inst.graph, root)
        };
        let lambda = rng.random_range(0.1..5.0);
        let r = rng.random_range(1..=4) as f64;
        let small = ball_window(&g, &EdgeLengths::unit(), root, r, 100_000)?;
        let big = ball_window(&g, &EdgeLengths::unit(), root, r + 1.0, 100_000)?;
        let us = dirichlet_resolvent(&small, lambda)?;
        let ub = dirichlet_resolvent(&big, lambda)?;
        for &v in &us.values {
            range = range.max(-v).max(v - 1.0);
        }
        for &x in small.vertices() {
            mono = mono.max(us.u.value(x) - ub.u.value(x));
        }
        let w: Vec<f64> = us.values.iter().map(|v| 1.0 - v).collect();
        harmonic = harmonic.max(lambda_harmonic_residual(&small, &w, lambda));
    }
    Ok(vec![
        SuiteOutcome::new("resolvent_range", cases, range, 1e-10),
        SuiteOutcome::new("domain_monotonicity", cases, mono, 1e-10),
        SuiteOutcome::new("lambda_harmonic_residual", cases, harmonic, 1e-9),
    ])
}

/// Solves `Δu = −c` on the interior of `window` with the given boundary values.
pub fn subharmonic_certificate(
    g: &WeightedGraph,
    window: &GraphWindow,
    c: f64,
    boundary: &VertexFunction,
) -> Result<VertexFunction, LabError> {
    let interior = window.interior();
    let index: std::collections::HashMap<VertexId, usize> = interior.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut rows = Vec::with_capacity(interior.len());
    let mut rhs = Vec::with_capacity(interior.len());
    for &x in &interior {
        let i = index[&x];
        let mut row = vec![];
        let mut diag = 0.0;
        let mut b = -c * g.measure(x)?;
        for (y, w) in g.neighbors(x)? {
            diag += w;
            match index.get(&y) {
                Some(&j) => row.push((j, -w)),
                None => b += w * boundary.value(y),
            }
        }
        row.push((i, diag));
        rows.push(row);
        rhs.push(b);
    }
    let mut u: VertexFunction = window.vertices().iter().map(|&x| (x, boundary.value(x))).collect();
    if !interior.is_empty() {
        let sol = pcg_jacobi(&SparseSymmetric::from_rows(rows), &rhs, CgOptions::default())?;
        for (x, v) in interior.iter().zip(sol.solution) {
            u.set(*x, v);
        }
    }
    Ok(u)
}

/// A window with a function satisfying `Δu ≤ −1` on its interior.
#[derive(Clone, Debug)]
pub struct WoympWindow {
    pub label: String,
    pub graph: WeightedGraph,
    pub metric: PathMetric,
    pub window: GraphWindow,
    pub u: VertexFunction,
}

/// Twenty windows across the families, each with `Δu = −c ≤ −1` on the
/// interior and a measure scaled so that `{u > sup u − 1}` meets the interior.
pub fn woymp_windows(seed: u64) -> Result<Vec<WoympWindow>, LabError> {
    let mut rng = suite_rng(seed, 7);
    let mut specs: Vec<(String, WeightedGraph, VertexId, f64)> = vec![
        ("path alpha=0".into(), birth_death(0.0), VertexId(3), 2.0),
        ("birth-death alpha=1".into(), birth_death(1.0), VertexId(0), 3.0),
        ("birth-death alpha=3".into(), birth_death(3.0), VertexId(2), 2.0),
        ("birth-death alpha=3 wide".into(), birth_death(3.0), VertexId(0), 6.0),
        (
            "lattice r=2".into(),
            WeightedGraph::new(Lattice),
            Lattice::id(0, 0),
            2.0,
        ),
        (
            "lattice r=3".into(),
            WeightedGraph::new(Lattice),
            Lattice::id(1, -1),
            3.0,
        ),
        ("anti-tree a=2".into(), anti_tree(2.0, 8)?, VertexId(0), 2.0),
        ("anti-tree a=1".into(), anti_tree(1.0, 12)?, VertexId(0), 4.0),
    ];
    for k in 0..6 {
        let t = random_tree(rng.random_range(20..60), (0.5, 2.0), rng.random());
        specs.push((format!("random tree {k}"), t.into_graph(), VertexId(0), 2.0));
    }
    for k in 0..6 {
        let f = random_graph(
            rng.random_range(30..60),
            rng.random_range(0.05..0.12),
            (0.5, 2.0),
            rng.random(),
        );
        let root = f.vertices().next().unwrap_or(VertexId(0));
        specs.push((format!("random graph {k}"), f.into_graph(), root, 1.0));
    }
    let mut out = Vec::with_capacity(specs.len());
    for (label, g, root, r) in specs {
        let window = ball_window(&g, &EdgeLengths::unit(), root, r, 100_000)?;
        // Rescale μ so the shallowest interior point of the Green potential
        // sits at depth ½; then Ω₁ meets the interior for c < 1.4.
        let depth = subharmonic_certificate(&g, &window, 1.0, &VertexFunction::new())?;
        let shallowest = window
            .interior()
            .iter()
            .map(|&x| -depth.value(x))
            .fold(f64::INFINITY, f64::min);
        let scale = 0.5 / shallowest;
        let base = g.clone();
        let g = g.with_measure(move |x| Ok(base.measure(x)? * scale));
        let window = GraphWindow::new(&g, window.vertices().iter().copied())?;
        let c = rng.random_range(1.0..1.3);
        let boundary = random_function(&mut rng, window.boundary(), 0.0, 0.3);
        let u = subharmonic_certificate(&g, &window, c, &boundary)?;
        let metric = PathMetric::new(&g, degree_metric(&g, 1.0));
        out.push(WoympWindow {
            label,
            graph: g,
            metric,
            window,
            u,
        });
    }
    Ok(out)
}

/// `ε̂(v, φ_x) ≤ −∫_{Ω̂₁} φ_x dμ̂` on the constructed windows.
pub fn woymp_inequality(seed: u64) -> Result<SuiteOutcome, LabError> {
    let windows = woymp_windows(seed)?;
    let mut worst = f64::NEG_INFINITY;
    for w in &windows {
        let x = MetricGraph::build(&w.graph, &w.metric, &w.window)?;
        let rep = woymp_inequality_check(&w.graph, &x, &w.u, 1.0, &w.window)?;
        match (rep.status, rep.worst_margin) {
            (InequalityStatus::Inapplicable, _) | (_, None) => worst = f64::INFINITY,
            (_, Some(m)) => worst = worst.max(m).max(rep.identity_residual),
        }
    }
    Ok(SuiteOutcome::new("woymp_inequality", windows.len(), worst, 1e-10))
}

/// Violating certificates stay violating under `ν ≤ μ`, and the special
/// measure of an adapted metric is below `μ`.
pub fn measure_reduction(seed: u64) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 8);
    let windows = woymp_windows(seed)?;
    let mut failures = 0;
    for w in &windows {
        let cert = WoympCertificate::on_window(w.u.clone(), 1.0, &w.window)?;
        if woymp_check(&w.graph, &cert, &w.window)?.status != WoympStatus::Violating {
            failures += 1;
            continue;
        }
        let factors: std::collections::HashMap<VertexId, f64> = w
            .window
            .vertices()
            .iter()
            .map(|&x| (x, rng.random_range(0.1..=1.0)))
            .collect();
        let base = w.graph.clone();
        let reduced = w
            .graph
            .with_measure(move |x| Ok(base.measure(x)? * factors.get(&x).copied().unwrap_or(1.0)));
        let special = crate::completeness::with_special_measure(&w.metric);
        for g in [reduced, special] {
            let win = GraphWindow::new(&g, w.window.vertices().iter().copied())?;
            if woymp_check(&g, &cert, &win)?.status != WoympStatus::Violating {
                failures += 1;
            }
        }
        for &x in w.window.vertices() {
            if special_measure(&w.metric, x)? > w.graph.measure(x)? * (1.0 + 1e-12) {
                failures += 1;
            }
        }
    }
    Ok(SuiteOutcome::counted("measure_reduction", windows.len(), failures))
}

/// `ε(v_R, w) → 0` on the complete `α = 1` chain.
pub fn fot_vanishing(seed: u64) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 9);
    let g = birth_death(1.0);
    let d = PathMetric::new(&g, EdgeLengths::unit());
    let radii = [4.0, 8.0, 16.0, 32.0];
    let mut tests = vec![
        [(VertexId(0), 1.0)].into_iter().collect::<VertexFunction>(),
        (0..=6).map(|k| (VertexId(k), 1.0)).collect(),
    ];
    for _ in 0..8 {
        let len = rng.random_range(1..12u64);
        tests.push((0..len).map(|k| (VertexId(k), rng.random_range(-1.0..1.0))).collect());
    }
    let mut failures = 0;
    for w in &tests {
        let probe = fot_probe(&g, VertexId(0), &radii, w, &d)?;
        if probe.trend != FotTrend::Vanishing {
            failures += 1;
        }
    }
    Ok(SuiteOutcome::counted("fot_vanishing", tests.len(), failures))
}

/// 0.1% critical values of χ² with 9 and 3 degrees of freedom.
pub const CHI2_CRITICAL_DF9: f64 = 27.877;
pub const CHI2_CRITICAL_DF3: f64 = 16.266;

/// χ² statistic of counts against expected probabilities.
pub fn chi_square(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Holding times `Exp(Deg)` and the jump law `∝ ω` at the centre of a star,
/// by χ² at the 0.001 level. Returns the two statistics and the mean holding time.
pub fn monte_carlo_laws(seed: u64, samples: usize) -> Result<(f64, f64, f64), LabError> {
    let mut star = FiniteGraph::new();
    star.add_vertex(VertexId(0), 5.0);
    for k in 1..=4u64 {
        star.add_vertex(VertexId(k), 1.0);
        star.add_edge(VertexId(0), VertexId(k), k as f64);
    }
    let g = star.into_graph();
    let limits = ChainLimits::new(f64::INFINITY, 1);
    let runs: Vec<(f64, VertexId)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let t = simulate_chain(&g, VertexId(0), &limits, seed, i)?;
            Ok((t.times[1], t.vertices[1]))
        })
        .collect::<Result<_, LabError>>()?;
    // Deg = (1+2+3+4)/5 = 2; deciles of Exp(2)
    let rate = 2.0;
    let mut time_bins = [0usize; 10];
    let mut jump_bins = [0usize; 4];
    for &(t, y) in &runs {
        let u = 1.0 - (-rate * t).exp();
        time_bins[((u * 10.0) as usize).min(9)] += 1;
        jump_bins[y.0 as usize - 1] += 1;
    }
    let time_stat = chi_square(&time_bins, &[0.1; 10]);
    let jump_stat = chi_square(&jump_bins, &[0.1, 0.2, 0.3, 0.4]);
    let mean = runs.iter().map(|r| r.0).sum::<f64>() / samples as f64;
    Ok((time_stat, jump_stat, mean))
}

pub fn monte_carlo_suite(seed: u64) -> Result<SuiteOutcome, LabError> {
    let (t, j, _) = monte_carlo_laws(seed, 10_000)?;
    let failures = usize::from(t > CHI2_CRITICAL_DF9) + usize::from(j > CHI2_CRITICAL_DF3);
    Ok(SuiteOutcome::counted("monte_carlo_laws", 2, failures))
}

/// Random metric graph with a random extension `v`, a random linear `ŵ`
/// and the hats at its vertices.
struct CalculusCase {
    x: MetricGraph,
    v: PiecewisePoly,
    w: VertexFunction,
}

fn calculus_case(rng: &mut ChaCha8Rng) -> Result<CalculusCase, LabError> {
    let inst = random_adapted(rng, 20);
    let (_, x) = metric_graph_of(&inst)?;
    let vs: Vec<VertexId> = x.vertices().collect();
    let u = random_function(rng, vs.iter().copied(), -1.0, 1.0);
    let v = woymp_extend(&x, &u, rng.random_range(-1.0..1.0))?;
    let w = random_function(rng, vs.iter().copied(), -1.0, 1.0);
    Ok(CalculusCase { x, v, w })
}

/// Exact identities: integration by parts, the interpolation formulas,
/// `μ̂(I(e)) = ωd²` and the boundary derivative formulas.
pub fn exact_identities(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 10);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let CalculusCase { x, v, w } = calculus_case(&mut rng)?;
        let what = interpolate(&x, &w);
        for z in x.vertices() {
            worst = worst.max(ibp_check(&x, &v, &hat(&x, z)));
        }
        worst = worst.max(ibp_check(&x, &v, &what));
        worst = worst.max(ibp_check(&x, &what, &v));
        for (k, e) in x.edges().iter().enumerate() {
            worst = worst.max((e.measure() - e.omega * e.length * e.length).abs());
            let q = v.on_edge(k);
            let (a, b) = (q.eval(0.0), q.eval(e.length));
            let slope = (b - a) / e.length;
            let bend = if q.a == 0.5 { 0.5 * e.length } else { 0.0 };
            let (d0, dl) = boundary_derivatives(&x, &v, k);
            worst = worst.max((d0 - (slope - bend)).abs()).max((dl - (slope + bend)).abs());
        }
        let rep = interpolation_bounds_check(&x, &w);
        worst = worst
            .max(rep.third_formula_error)
            .max(-rep.half_bound_margin)
            .max(rep.energy_error);
        let positive = w.map(f64::abs);
        let rep = interpolation_bounds_check(&x, &positive);
        worst = worst.max((rep.l1_metric - rep.l1_vertex_half).abs());
    }
    Ok(SuiteOutcome::new("exact_identities", cases, worst, 1e-12))
}

/// `d ≤ d_l` on vertex pairs and `μ̂(B_{d_l}) ≤ μ(B_d)` at 16 radii.
pub fn comparison_lemma(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 11);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let inst = random_adapted(&mut rng, 50);
        let (_, x) = metric_graph_of(&inst)?;
        let x0 = inst.root();
        let reach = inst.metric.ball(x0, f64::INFINITY)?.last().map_or(0.0, |p| p.1);
        let radii: Vec<f64> = (0..16).map(|k| 1.2 * reach * k as f64 / 15.0).collect();
        let rep = compare_lemma(&inst.graph, &inst.metric, &x, x0, &radii)?;
        worst = worst.max(-rep.distance_margin);
        for m in rep.ball_margins {
            worst = worst.max(-m);
        }
    }
    Ok(SuiteOutcome::new("comparison_lemma", cases, worst, 1e-12))
}

/// Ball measure monotone in `r` and exhausting `μ̂(X)`, triangle inequality
/// of `d_l` on edge points, and orientation independence of the form.
pub fn metric_graph_properties(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 12);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let CalculusCase { x, v, w } = calculus_case(&mut rng)?;
        if x.edge_count() == 0 {
            continue;
        }
        let x0 = x.edge(0).source;
        let total = x.total_measure();
        let mut prev = 0.0;
        for k in 0..=40 {
            let m = ball_measure(&x, x0, 0.1 * k as f64);
            worst = worst.max(prev - m);
            prev = m;
        }
        worst = worst.max((ball_measure(&x, x0, 1e9) - total).abs());
        let pt = |rng: &mut ChaCha8Rng| {
            let e = rng.random_range(0..x.edge_count());
            EdgePoint {
                edge: e,
                t: rng.random_range(0.0..=x.edge(e).length),
            }
        };
        for _ in 0..10 {
            let (a, b, c) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
            if let (Some(ab), Some(bc), Some(ac)) = (
                point_distance(&x, a, b),
                point_distance(&x, b, c),
                point_distance(&x, a, c),
            ) {
                worst = worst.max(ac - ab - bc);
            }
        }
        let what = interpolate(&x, &w);
        let xf = x.flipped();
        let e1 = energy_form(&x, &v, &what);
        let e2 = energy_form(&xf, &v.flipped(&x), &what.flipped(&x));
        worst = worst.max(relative((e1 - e2).abs(), e1));
    }
    Ok(SuiteOutcome::new("metric_graph_properties", cases, worst, 1e-12))
}

/// Interval, weighted and vertex-trace Sobolev bounds.
pub fn sobolev(seed: u64, samples: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 13);
    let mut violations = 0;
    let mut done = 0;
    while done < samples {
        let inst = random_adapted(&mut rng, 20);
        let (_, x) = metric_graph_of(&inst)?;
        let vs: Vec<VertexId> = x.vertices().collect();
        let batch = 20.min(samples - done);
        let fs: Vec<PiecewisePoly> = (0..batch)
            .map(|_| {
                let u = random_function(&mut rng, vs.iter().copied(), -2.0, 2.0);
                woymp_extend(&x, &u, rng.random_range(-2.0..2.0))
            })
            .collect::<Result<_, _>>()?;
        violations += sobolev_check(&x, &fs, inst.c0).violations;
        done += batch;
    }
    for _ in 0..samples {
        let q = Quadratic::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let l = rng.random_range(1e-3..=3.0);
        if interval_sobolev_ratio(&q, l) > 1.0 + 1e-12 {
            violations += 1;
        }
    }
    Ok(SuiteOutcome::counted("sobolev", 2 * samples, violations))
}

/// Profile monotonicity, the metric-graph profile below the graph profile,
/// and the Grigor'yan integral growing when volumes shrink.
pub fn growth_properties(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 14);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let inst = random_adapted(&mut rng, 40);
        let (_, x) = metric_graph_of(&inst)?;
        let x0 = inst.root();
        let gp = volume_profile(&inst.graph, &inst.metric, x0, 3.0, 32)?;
        let mp = metric_graph_profile(&x, x0, 3.0, 32);
        if !gp.is_monotone() || !mp.is_monotone() {
            worst = f64::INFINITY;
        }
        for (a, b) in gp.points.iter().zip(&mp.points) {
            worst = worst.max(b.1 - a.1);
        }
        let k = rng.random_range(1.0..3.0);
        let big = VolumeProfile::synthetic(1.0, 10.0, 64, |r| (k * r * r).exp());
        let shrink = rng.random_range(0.0..1.0);
        let small = VolumeProfile::synthetic(1.0, 10.0, 64, |r| (k * r * r).exp() * (-shrink * r).exp());
        worst = worst.max(grigoryan_integral(&big, 1.0).value - grigoryan_integral(&small, 1.0).value);
    }
    Ok(SuiteOutcome::new("growth_properties", cases, worst, 1e-12))
}

/// Generated graphs validate; the anti-tree layer weights are `|S_k||S_{k+1}|`.
pub fn families_properties(seed: u64, cases: usize) -> Result<SuiteOutcome, LabError> {
    let mut rng = suite_rng(seed, 15);
    let mut failures = 0;
    for _ in 0..cases {
        let n = rng.random_range(2..60);
        for f in [
            random_graph(n, rng.random_range(0.05..1.0), (0.5, 2.0), rng.random()),
            random_tree(n, (0.5, 2.0), rng.random()),
        ] {
            let g = f.into_graph();
            if !validate(&g, &GraphWindow::whole(&g)?).is_empty() {
                failures += 1;
            }
        }
    }
    let infinite = [birth_death(3.0), WeightedGraph::new(Lattice), anti_tree(2.0, 10)?];
    for g in infinite {
        let w = ball_window(&g, &EdgeLengths::unit(), VertexId(0), 4.0, 100_000)?;
        if !validate(&g, &w).is_empty() {
            failures += 1;
        }
    }
    for a in [0.0, 1.0, 2.0, 3.0] {
        let t = AntiTree::new(a, 7)?;
        for k in 1..=6 {
            if t.layer_weight(k)? != (t.sphere_len(k) * t.sphere_len(k + 1)) as f64 {
                failures += 1;
            }
        }
    }
    Ok(SuiteOutcome::counted("families", cases, failures))
}

/// Lemma margins, exact-identity residuals and Sobolev violations on one
/// metric graph, with seeded random test functions.
#[derive(Clone, Debug, Serialize)]
pub struct MetricGraphAudit {
    pub seed: u64,
    pub samples: usize,
    pub radii: Vec<f64>,
    pub comparison: crate::metric_graph::CompareReport,
    pub ibp_residual: f64,
    pub interpolation_residual: f64,
    pub sobolev: crate::metric_graph::SobolevReport,
}

impl MetricGraphAudit {
    pub fn holds(&self, tol: f64) -> bool {
        self.comparison.holds(tol)
            && self.ibp_residual <= tol
            && self.interpolation_residual <= tol
            && self.sobolev.violations == 0
    }
}

pub fn audit_metric_graph(
    g: &WeightedGraph,
    d: &PathMetric,
    x: &MetricGraph,
    x0: VertexId,
    c0: f64,
    seed: u64,
    samples: usize,
) -> Result<MetricGraphAudit, LabError> {
    let mut rng = suite_rng(seed, 20);
    let reach = x.vertex_distances(x0).values().copied().fold(0.0, f64::max);
    let radii: Vec<f64> = (0..16).map(|k| 1.2 * reach * k as f64 / 15.0).collect();
    let comparison = compare_lemma(g, d, x, x0, &radii)?;
    let vs: Vec<VertexId> = x.vertices().collect();
    let mut ibp_residual = 0.0f64;
    let mut interpolation_residual = 0.0f64;
    let mut fs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = random_function(&mut rng, vs.iter().copied(), -1.0, 1.0);
        let v = woymp_extend(x, &u, rng.random_range(-1.0..1.0))?;
        let w = random_function(&mut rng, vs.iter().copied(), -1.0, 1.0);
        let what = interpolate(x, &w);
        ibp_residual = ibp_residual.max(ibp_check(x, &v, &what));
        for z in x.vertices() {
            ibp_residual = ibp_residual.max(ibp_check(x, &v, &hat(x, z)));
        }
        let rep = interpolation_bounds_check(x, &w);
        interpolation_residual = interpolation_residual
            .max(rep.third_formula_error)
            .max(-rep.half_bound_margin)
            .max(rep.energy_error);
        fs.push(v);
    }
    let sobolev = sobolev_check(x, &fs, c0);
    Ok(MetricGraphAudit {
        seed,
        samples,
        radii,
        comparison,
        ibp_residual,
        interpolation_residual,
        sobolev,
    })
}

/// Every suite at its default size.
pub fn verify_all(seed: u64) -> Result<Vec<SuiteOutcome>, LabError> {
    type Suite = fn(u64) -> Result<Vec<SuiteOutcome>, LabError>;
    let suites: Vec<Suite> = vec![
        |s| Ok(vec![green_identity(s, 100)?]),
        |s| Ok(vec![laplacian_and_energy(s, 100)?]),
        |s| Ok(vec![truncation(s, 100)?]),
        |s| Ok(vec![degree_metric_adapted(s, 100)?]),
        |s| Ok(vec![metric_axioms(s, 1000)?]),
        |s| resolvent_invariants(s, 100),
        |s| Ok(vec![woymp_inequality(s)?]),
        |s| Ok(vec![measure_reduction(s)?]),
        |s| Ok(vec![fot_vanishing(s)?]),
        |s| Ok(vec![monte_carlo_suite(s)?]),
        |s| Ok(vec![exact_identities(s, 200)?]),
        |s| Ok(vec![comparison_lemma(s, 100)?]),
        |s| Ok(vec![metric_graph_properties(s, 100)?]),
        |s| Ok(vec![sobolev(s, 1000)?]),
        |s| Ok(vec![growth_properties(s, 50)?]),
        |s| Ok(vec![families_properties(s, 50)?]),
    ];
    let nested: Vec<Vec<SuiteOutcome>> = suites.par_iter().map(|f| f(seed)).collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_of_exact_counts_is_zero() {
        assert_eq!(chi_square(&[10, 20, 30, 40], &[0.1, 0.2, 0.3, 0.4]), 0.0);
        assert!((chi_square(&[20, 0], &[0.5, 0.5]) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn certificate_solves_poisson_problem() {
        let g = birth_death(0.0);
        let w = ball_window(&g, &EdgeLengths::unit(), VertexId(0), 2.0, 100).unwrap();
        let u = subharmonic_certificate(&g, &w, 1.0, &VertexFunction::new()).unwrap();
        // interior {0, 1}, u(2) = 0: u0 − u1 = −1, 2u1 − u0 = −1 → u = (−3, −2)
        assert!((u.value(VertexId(0)) + 3.0).abs() < 1e-12);
        assert!((u.value(VertexId(1)) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_suites_pass() {
        for s in [
            green_identity(1, 10).unwrap(),
            exact_identities(1, 10).unwrap(),
            comparison_lemma(1, 5).unwrap(),
        ] {
            assert!(s.passed, "{s:?}");
        }
    }
}
