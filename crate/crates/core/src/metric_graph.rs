//! The metric graph of `(V, ω, μ, d)`: every edge `(x, y)` becomes an
//! interval of length `d(x, y)` with weights `p = q = ω·d`, so the interval
//! carries measure `ω·d²`. Functions on it are continuous and polynomial of
//! degree at most two on each edge, which keeps every integral exact.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use ordered_float::OrderedFloat;
use serde::Serialize;

use crate::completeness::{woymp_check, WoympCertificate, WoympStatus};
use crate::error::{GraphError, LabError};
use crate::graph::{GraphWindow, VertexFunction, VertexId, WeightedGraph};
use crate::metric::{check_adapted, Adaptedness, PathMetric};
use crate::poly::{linear_abs_integral, Quadratic};

/// Tolerance for vertex continuity of piecewise polynomials.
pub const CONTINUITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricEdge {
    pub source: VertexId,
    pub target: VertexId,
    pub length: f64,
    pub p: f64,
    pub q: f64,
    pub omega: f64,
}

impl MetricEdge {
    /// `μ̂(I(e)) = q·l`.
    pub fn measure(&self) -> f64 {
        self.q * self.length
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.source {
            self.target
        } else {
            self.source
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    edges: Vec<MetricEdge>,
    incident: BTreeMap<VertexId, Vec<usize>>,
    warnings: Vec<String>,
}

/// A point `t ∈ [0, l(e)]` on edge `e`, measured from the source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgePoint {
    pub edge: usize,
    pub t: f64,
}

impl MetricGraph {
    /// One edge per window edge, oriented from the smaller id, with
    /// `l = d(x, y)` and `p = q = ω·d`. A metric that is not adapted on the
    /// window is recorded as a warning.
    pub fn build(g: &WeightedGraph, d: &PathMetric, window: &GraphWindow) -> Result<MetricGraph, GraphError> {
        let mut edges = Vec::new();
        let vs = window.vertices();
        for (i, j, w) in window.edges() {
            let (x, y) = (vs[i].min(vs[j]), vs[i].max(vs[j]));
            let l = d.distance(x, y)?.ok_or(GraphError::MissingLength(x, y))?;
            edges.push(MetricEdge {
                source: x,
                target: y,
                length: l,
                p: w * l,
                q: w * l,
                omega: w,
            });
        }
        edges.sort_by_key(|e| (e.source, e.target));
        let mut warnings = Vec::new();
        let report = check_adapted(g, d, d.lengths().c0(), window)?;
        if report.verdict != Adaptedness::Adapted {
            warnings.push(format!(
                "metric is not adapted on the window (max normalized sum {:.6}, longest edge {:.6}, c0 {})",
                report.max_sum, report.max_edge_distance, report.c0
            ));
        }
        Ok(MetricGraph::from_edges(vs.iter().copied(), edges, warnings))
    }

    /// Assembles a metric graph from explicit edges (isolated vertices listed separately).
    pub fn from_edges(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: Vec<MetricEdge>,
        warnings: Vec<String>,
    ) -> MetricGraph {
        let mut incident: BTreeMap<VertexId, Vec<usize>> = vertices.into_iter().map(|x| (x, vec![])).collect();
        for (k, e) in edges.iter().enumerate() {
            incident.entry(e.source).or_default().push(k);
            incident.entry(e.target).or_default().push(k);
        }
        MetricGraph {
            edges,
            incident,
            warnings,
        }
    }

    pub fn edges(&self) -> &[MetricEdge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &MetricEdge {
        &self.edges[k]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.incident.keys().copied()
    }

    pub fn incident(&self, x: VertexId) -> &[usize] {
        self.incident.get(&x).map_or(&[], Vec::as_slice)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `μ̂(X) = Σ_e q(e)·l(e)`.
    pub fn total_measure(&self) -> f64 {
        self.edges.iter().map(MetricEdge::measure).sum()
    }

    /// Same graph with every edge reversed.
    pub fn flipped(&self) -> MetricGraph {
        let mut out = self.clone();
        for e in &mut out.edges {
            std::mem::swap(&mut e.source, &mut e.target);
        }
        out
    }

    /// Vertex distances `d_l(x0, ·)` along edge lengths.
    pub fn vertex_distances(&self, x0: VertexId) -> BTreeMap<VertexId, f64> {
        let mut dist = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((OrderedFloat(0.0), x0)));
        while let Some(Reverse((OrderedFloat(r), x))) = heap.pop() {
            if dist.contains_key(&x) {
                continue;
            }
            dist.insert(x, r);
            for &k in self.incident(x) {
                let e = &self.edges[k];
                let y = e.other(x);
                if !dist.contains_key(&y) {
                    heap.push(Reverse((OrderedFloat(r + e.length), y)));
                }
            }
        }
        dist
    }

    pub fn point(&self, edge: usize, t: f64) -> Result<EdgePoint, GraphError> {
        let l = self
            .edges
            .get(edge)
            .ok_or_else(|| GraphError::InvalidArgument(format!("no edge {edge}")))?
            .length;
        if !(0.0..=l).contains(&t) {
            return Err(GraphError::InvalidArgument(format!("t = {t} outside [0, {l}]")));
        }
        Ok(EdgePoint { edge, t })
    }
}

/// `d_l(x0, pt)`; `None` when the edge is unreachable from `x0`.
pub fn quotient_distance(x: &MetricGraph, x0: VertexId, pt: EdgePoint) -> Option<f64> {
    point_distance_from(x, &x.vertex_distances(x0), pt)
}

fn point_distance_from(x: &MetricGraph, dist: &BTreeMap<VertexId, f64>, pt: EdgePoint) -> Option<f64> {
    let e = x.edge(pt.edge);
    let via_source = dist.get(&e.source).map(|a| a + pt.t);
    let via_target = dist.get(&e.target).map(|b| b + e.length - pt.t);
    match (via_source, via_target) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// `d_l(p1, p2)` between two edge points.
pub fn point_distance(x: &MetricGraph, p1: EdgePoint, p2: EdgePoint) -> Option<f64> {
    let e = x.edge(p1.edge);
    let from_source = point_distance_from(x, &x.vertex_distances(e.source), p2).map(|d| d + p1.t);
    let from_target = point_distance_from(x, &x.vertex_distances(e.target), p2).map(|d| d + e.length - p1.t);
    let mut best = match (from_source, from_target) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if p1.edge == p2.edge {
        let direct = (p1.t - p2.t).abs();
        best = Some(best.map_or(direct, |b| b.min(direct)));
    }
    best
}

/// `μ̂(B_{d_l}(x0, r))` with exact partial coverage of edges.
pub fn ball_measure(x: &MetricGraph, x0: VertexId, r: f64) -> f64 {
    let dist = x.vertex_distances(x0);
    x.edges()
        .iter()
        .filter_map(|e| {
            let a = dist.get(&e.source)?;
            let b = dist.get(&e.target)?;
            let covered = ((r - a).max(0.0) + (r - b).max(0.0)).min(e.length);
            Some(e.q * covered)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub pairs_checked: usize,
    /// `min (d_l(x, y) − d(x, y))` over checked pairs.
    pub distance_margin: f64,
    /// `μ(B_d(x0, r)) − μ̂(B_{d_l}(x0, r))` per radius.
    pub ball_margins: Vec<f64>,
}

impl CompareReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.distance_margin >= -tol && self.ball_margins.iter().all(|m| *m >= -tol)
    }
}

/// Largest vertex count for which all pairs are compared; above it only
/// pairs through `x0` are.
pub const ALL_PAIRS_LIMIT: usize = 64;

/// Checks `d ≤ d_l` on vertex pairs and `μ̂(B_{d_l}(x0, r)) ≤ μ(B_d(x0, r))`.
pub fn compare_lemma(
    g: &WeightedGraph,
    d: &PathMetric,
    x: &MetricGraph,
    x0: VertexId,
    radii: &[f64],
) -> Result<CompareReport, GraphError> {
    let vertices: Vec<VertexId> = x.vertices().collect();
    let sources: Vec<VertexId> = if vertices.len() <= ALL_PAIRS_LIMIT {
        vertices.clone()
    } else {
        vec![x0]
    };
    let mut margin = f64::INFINITY;
    let mut pairs = 0;
    for &s in &sources {
        let dl = x.vertex_distances(s);
        let targets: Vec<VertexId> = dl.keys().copied().filter(|&y| y != s).collect();
        let dd = d.distances_to(s, &targets)?;
        for (y, dy) in targets.iter().zip(dd) {
            let graph_d = dy.ok_or(GraphError::MissingLength(s, *y))?;
            margin = margin.min(dl[y] - graph_d);
            pairs += 1;
        }
    }
    let mut ball_margins = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut mass = 0.0;
        for (y, _) in d.ball(x0, r)? {
            mass += g.measure(y)?;
        }
        ball_margins.push(mass - ball_measure(x, x0, r));
    }
    Ok(CompareReport {
        pairs_checked: pairs,
        distance_margin: if pairs == 0 { 0.0 } else { margin },
        ball_margins,
    })
}

/// Continuous function on a metric graph, a quadratic of leading
/// coefficient `0` or `½` on each edge.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly {
    polys: Vec<Quadratic>,
    vertex_values: BTreeMap<VertexId, f64>,
}

impl PiecewisePoly {
    /// Validates the leading coefficients and continuity at shared vertices.
    pub fn from_edge_polys(x: &MetricGraph, polys: Vec<Quadratic>) -> Result<PiecewisePoly, GraphError> {
        if polys.len() != x.edge_count() {
            return Err(GraphError::InvalidArgument(format!(
                "{} polynomials for {} edges",
                polys.len(),
                x.edge_count()
            )));
        }
        let mut vertex_values: BTreeMap<VertexId, f64> = BTreeMap::new();
        for (k, (e, q)) in x.edges().iter().zip(&polys).enumerate() {
            if q.a != 0.0 && q.a != 0.5 {
                return Err(GraphError::InvalidArgument(format!(
                    "edge {k}: leading coefficient {} is neither 0 nor 1/2",
                    q.a
                )));
            }
            for (z, val) in [(e.source, q.eval(0.0)), (e.target, q.eval(e.length))] {
                match vertex_values.get(&z) {
                    Some(&prev) if (prev - val).abs() > CONTINUITY_TOLERANCE * prev.abs().max(1.0) => {
                        return Err(GraphError::InvalidArgument(format!(
                            "discontinuous at vertex {z}: {prev} vs {val}"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        vertex_values.insert(z, val);
                    }
                }
            }
        }
        Ok(PiecewisePoly { polys, vertex_values })
    }

    pub fn edge_polys(&self) -> &[Quadratic] {
        &self.polys
    }

    pub fn on_edge(&self, k: usize) -> &Quadratic {
        &self.polys[k]
    }

    pub fn eval(&self, pt: EdgePoint) -> f64 {
        self.polys[pt.edge].eval(pt.t)
    }

    pub fn vertex_value(&self, x: VertexId) -> Option<f64> {
        self.vertex_values.get(&x).copied()
    }

    /// The same function expressed on `x.flipped()`.
    pub fn flipped(&self, x: &MetricGraph) -> PiecewisePoly {
        PiecewisePoly {
            polys: self
                .polys
                .iter()
                .zip(x.edges())
                .map(|(q, e)| q.reversed(e.length))
                .collect(),
            vertex_values: self.vertex_values.clone(),
        }
    }
}

/// Vertex values of `f`.
pub fn restrict(f: &PiecewisePoly) -> VertexFunction {
    f.vertex_values.iter().map(|(&x, &v)| (x, v)).collect()
}

/// Linear interpolation of `w` (zero off its support) along every edge.
pub fn interpolate(x: &MetricGraph, w: &VertexFunction) -> PiecewisePoly {
    PiecewisePoly {
        polys: x
            .edges()
            .iter()
            .map(|e| Quadratic::linear(w.value(e.source), w.value(e.target), e.length))
            .collect(),
        vertex_values: x.vertices().map(|z| (z, w.value(z))).collect(),
    }
}

/// `v = u` on vertices; `v″ = 1` on edges with an endpoint in
/// `Ω = {u > threshold}`, linear elsewhere.
pub fn woymp_extend(x: &MetricGraph, u: &VertexFunction, threshold: f64) -> Result<PiecewisePoly, GraphError> {
    let mut polys = Vec::with_capacity(x.edge_count());
    for e in x.edges() {
        let (a, b) = (u.require(e.source)?, u.require(e.target)?);
        polys.push(if a > threshold || b > threshold {
            Quadratic::unit_convex(a, b, e.length)
        } else {
            Quadratic::linear(a, b, e.length)
        });
    }
    let vertex_values = x
        .vertices()
        .map(|z| Ok((z, u.require(z)?)))
        .collect::<Result<_, GraphError>>()?;
    Ok(PiecewisePoly { polys, vertex_values })
}

/// `(v′(0), v′(l))` on edge `k`.
pub fn boundary_derivatives(x: &MetricGraph, v: &PiecewisePoly, k: usize) -> (f64, f64) {
    let q = v.on_edge(k);
    (q.derivative_at(0.0), q.derivative_at(x.edge(k).length))
}

/// `ε̂(f, g) = Σ_e p(e) ∫ f′g′`.
pub fn energy_form(x: &MetricGraph, f: &PiecewisePoly, g: &PiecewisePoly) -> f64 {
    x.edges()
        .iter()
        .enumerate()
        .map(|(k, e)| e.p * f.on_edge(k).derivative_product_integral(g.on_edge(k), e.length))
        .sum()
}

/// Hat function at `z`: 1 at `z`, 0 at every other vertex, linear on edges.
pub fn hat(x: &MetricGraph, z: VertexId) -> PiecewisePoly {
    let w: VertexFunction = [(z, 1.0)].into_iter().collect();
    interpolate(x, &w)
}

/// `|ε̂(v, φ) − (−Σ p∫v″φ + Σ p(v′(l)φ(l) − v′(0)φ(0)))|`.
pub fn ibp_check(x: &MetricGraph, v: &PiecewisePoly, phi: &PiecewisePoly) -> f64 {
    let lhs = energy_form(x, v, phi);
    let rhs: f64 = x
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (q, f) = (v.on_edge(k), phi.on_edge(k));
            let l = e.length;
            let bulk = q.second_derivative() * f.integral(l);
            e.p * (-bulk + q.derivative_at(l) * f.eval(l) - q.derivative_at(0.0) * f.eval(0.0))
        })
        .sum();
    (lhs - rhs).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityStatus {
    Holds,
    Fails,
    /// `Δu ≤ −α` does not hold on the interior superlevel set.
    Inapplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct WoympInequalityReport {
    pub status: InequalityStatus,
    pub centers: Vec<VertexId>,
    /// `max (ε̂(v, φ_x) + ∫_{Ω̂₁} φ_x dμ̂)` over centers; must be ≤ 0.
    pub worst_margin: Option<f64>,
    /// Largest gap between the edge-sum and vertex-sum forms of the boundary terms.
    pub identity_residual: f64,
}

/// For each interior vertex `x` of `Ω = {u/α > sup(u/α) − 1}`, checks
/// `ε̂(v, φ_x) ≤ −∫_{Ω̂₁} φ_x dμ̂` with `v` the extension of `u/α` and `φ_x` the
/// hat at `x`.
pub fn woymp_inequality_check(
    g: &WeightedGraph,
    x: &MetricGraph,
    u: &VertexFunction,
    alpha: f64,
    window: &GraphWindow,
) -> Result<WoympInequalityReport, LabError> {
    let scaled = u.map(|s| s / alpha);
    let cert = WoympCertificate::on_window(scaled.clone(), 1.0, window)?;
    let outcome = woymp_check(g, &cert, window)?;
    if outcome.status != WoympStatus::Violating {
        return Ok(WoympInequalityReport {
            status: InequalityStatus::Inapplicable,
            centers: outcome.witnesses,
            worst_margin: None,
            identity_residual: 0.0,
        });
    }
    let level = cert.u_star - 1.0;
    let v = woymp_extend(x, &scaled, level)?;
    let mut worst = f64::NEG_INFINITY;
    let mut identity = 0.0f64;
    for &c in &outcome.witnesses {
        let phi = hat(x, c);
        let lhs = energy_form(x, &v, &phi);
        let mut superlevel_mass = 0.0;
        let mut edge_terms = 0.0;
        let mut vertex_terms = 0.0;
        let uc = scaled.require(c)?;
        for &k in x.incident(c) {
            let e = x.edge(k);
            let (q, f) = (v.on_edge(k), phi.on_edge(k));
            let intervals = q.superlevel_intervals(level, e.length);
            superlevel_mass += e.q * Quadratic::constant(1.0).product_integral_on(f, &intervals);
            let (d0, dl) = boundary_derivatives(x, &v, k);
            edge_terms += e.p * (dl * f.eval(e.length) - d0 * f.eval(0.0));
            let uy = scaled.require(e.other(c))?;
            vertex_terms += e.omega * (uc - uy) + 0.5 * e.omega * e.length * e.length;
        }
        identity = identity.max((edge_terms - vertex_terms).abs());
        worst = worst.max(lhs + superlevel_mass);
    }
    Ok(WoympInequalityReport {
        status: if worst <= 1e-10 {
            InequalityStatus::Holds
        } else {
            InequalityStatus::Fails
        },
        centers: outcome.witnesses,
        worst_margin: Some(worst),
        identity_residual: identity,
    })
}

/// `μ_special(x) = Σ_e ω d²` over edges of `x` at the vertex.
pub fn special_vertex_measure(x: &MetricGraph, z: VertexId) -> f64 {
    x.incident(z)
        .iter()
        .map(|&k| {
            let e = x.edge(k);
            e.omega * e.length * e.length
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationReport {
    /// Largest `|ωd∫ŵ² − ⅓ωd²(w_x² + w_x w_y + w_y²)|`.
    pub third_formula_error: f64,
    /// Smallest `½ωd²(w_x² + w_y²) − ωd∫ŵ²`.
    pub half_bound_margin: f64,
    /// `|ε̂(ŵ, ŵ) − ε(w, w)|`.
    pub energy_error: f64,
    /// `‖ŵ‖_{L¹(μ̂)}` and `½‖w‖_{L¹(μ_special)}`.
    pub l1_metric: f64,
    pub l1_vertex_half: f64,
    /// Edges where `w` changes sign; there the L¹ relation is only an inequality.
    pub sign_change_edges: usize,
}

impl InterpolationReport {
    pub fn holds(&self, tol: f64) -> bool {
        let scale = self.l1_vertex_half.max(1.0);
        let l1 = if self.sign_change_edges == 0 {
            (self.l1_metric - self.l1_vertex_half).abs() <= tol * scale
        } else {
            self.l1_metric <= self.l1_vertex_half + tol * scale
        };
        self.third_formula_error <= tol && self.half_bound_margin >= -tol && self.energy_error <= tol && l1
    }
}

pub fn interpolation_bounds_check(x: &MetricGraph, w: &VertexFunction) -> InterpolationReport {
    let hat_w = interpolate(x, w);
    let mut third = 0.0f64;
    let mut half = f64::INFINITY;
    let mut graph_energy = 0.0;
    let mut l1_metric = 0.0;
    let mut sign_changes = 0;
    for (k, e) in x.edges().iter().enumerate() {
        let (a, b) = (w.value(e.source), w.value(e.target));
        let q = hat_w.on_edge(k);
        let direct = e.q * q.product_integral(q, e.length);
        let scale = e.omega * e.length * e.length;
        third = third.max((direct - scale / 3.0 * (a * a + a * b + b * b)).abs());
        half = half.min(0.5 * scale * (a * a + b * b) - direct);
        graph_energy += e.omega * (a - b) * (a - b);
        l1_metric += e.q * linear_abs_integral(a, b, e.length);
        if a * b < 0.0 {
            sign_changes += 1;
        }
    }
    let l1_vertex_half = 0.5
        * x.vertices()
            .map(|z| w.value(z).abs() * special_vertex_measure(x, z))
            .sum::<f64>();
    InterpolationReport {
        third_formula_error: third,
        half_bound_margin: if x.edge_count() == 0 { 0.0 } else { half },
        energy_error: (energy_form(x, &hat_w, &hat_w) - graph_energy).abs(),
        l1_metric,
        l1_vertex_half,
        sign_change_edges: sign_changes,
    }
}

/// `sup_{[0,l]} u² / (coth(l)·∫(u² + u′²))`; at most 1 by the optimal
/// Sobolev embedding on an interval.
pub fn interval_sobolev_ratio(u: &Quadratic, l: f64) -> f64 {
    let norm = u.product_integral(u, l) + u.derivative_product_integral(u, l);
    let sup = u.sup_abs(l);
    if norm == 0.0 {
        return if sup == 0.0 { 0.0 } else { f64::INFINITY };
    }
    sup * sup / (norm / l.tanh())
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolevReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` over the interval, weighted and trace forms.
    pub worst_interval_ratio: f64,
    pub worst_weighted_ratio: f64,
    pub worst_trace_ratio: f64,
    pub trace_constant: f64,
}

/// `2 sup_{t ∈ (0, c0]} t·coth(t) = 2 c0 coth(c0)`.
pub fn trace_constant(c0: f64) -> f64 {
    2.0 * c0 / c0.tanh()
}

/// Checks the three Sobolev bounds on each sample function; tolerance is
/// relative `1e-12`.
pub fn sobolev_check(x: &MetricGraph, samples: &[PiecewisePoly], c0: f64) -> SobolevReport {
    let c = trace_constant(c0);
    let mut report = SobolevReport {
        samples: samples.len(),
        violations: 0,
        worst_interval_ratio: 0.0,
        worst_weighted_ratio: 0.0,
        worst_trace_ratio: 0.0,
        trace_constant: c,
    };
    let tol = 1.0 + 1e-12;
    for f in samples {
        let mut bad = false;
        let mut total_norm = 0.0;
        for (k, e) in x.edges().iter().enumerate() {
            let q = f.on_edge(k);
            let l = e.length;
            let r = interval_sobolev_ratio(q, l);
            let w_norm = e.p * (q.product_integral(q, l) + q.derivative_product_integral(q, l));
            total_norm += w_norm;
            let sup = q.sup_abs(l);
            let weighted = if w_norm > 0.0 {
                sup * sup / (w_norm / (l.tanh() * e.omega * l))
            } else if sup == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            report.worst_interval_ratio = report.worst_interval_ratio.max(r);
            report.worst_weighted_ratio = report.worst_weighted_ratio.max(weighted);
            bad |= r > tol || weighted > tol;
        }
        let trace: f64 = x
            .vertices()
            .map(|z| f.vertex_value(z).unwrap_or(0.0).powi(2) * special_vertex_measure(x, z))
            .sum();
        let ratio = if total_norm > 0.0 {
            trace / (c * total_norm)
        } else if trace == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        report.worst_trace_ratio = report.worst_trace_ratio.max(ratio);
        bad |= ratio > tol;
        if bad {
            report.violations += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiniteGraph;
    use crate::metric::EdgeLengths;

    fn v(i: u64) -> VertexId {
        VertexId(i)
    }

    fn edge(s: u64, t: u64, l: f64, omega: f64) -> MetricEdge {
        MetricEdge {
            source: v(s),
            target: v(t),
            length: l,
            p: omega * l,
            q: omega * l,
            omega,
        }
    }

    fn built(f: FiniteGraph, lengths: EdgeLengths) -> (WeightedGraph, PathMetric, GraphWindow, MetricGraph) {
        let g = f.into_graph();
        let d = PathMetric::new(&g, lengths);
        let w = GraphWindow::whole(&g).unwrap();
        let x = MetricGraph::build(&g, &d, &w).unwrap();
        (g, d, w, x)
    }

    #[test]
    fn single_edge_construction() {
        let mut f = FiniteGraph::new();
        f.add_vertex(v(0), 1.0);
        f.add_vertex(v(1), 1.0);
        f.add_edge(v(1), v(0), 2.0);
        let lengths = EdgeLengths::from_table([((v(0), v(1)), 0.5)], 1.0);
        let (_, _, _, x) = built(f, lengths);
        let e = x.edge(0);
        assert_eq!((e.source, e.target), (v(0), v(1)));
        assert_eq!((e.length, e.p, e.q), (0.5, 1.0, 1.0));
        assert_eq!(e.measure(), 0.5);
        assert!(x.warnings().is_empty());
    }

    #[test]
    fn empty_and_non_adapted() {
        let mut f = FiniteGraph::new();
        f.add_vertex(v(0), 1.0);
        let (_, _, _, x) = built(f, EdgeLengths::unit());
        assert_eq!(x.edge_count(), 0);
        assert_eq!(x.total_measure(), 0.0);

        let (_, _, _, x) = built(FiniteGraph::path(3), EdgeLengths::unit());
        assert_eq!(x.warnings().len(), 1);
    }

    #[test]
    fn quotient_distances() {
        let x = MetricGraph::from_edges([], vec![edge(0, 1, 2.0, 1.0)], vec![]);
        assert_eq!(quotient_distance(&x, v(0), EdgePoint { edge: 0, t: 1.0 }), Some(1.0));
        assert_eq!(quotient_distance(&x, v(0), EdgePoint { edge: 0, t: 0.0 }), Some(0.0));

        let tri = MetricGraph::from_edges(
            [],
            vec![edge(0, 1, 1.0, 1.0), edge(0, 2, 3.0, 1.0), edge(1, 2, 1.0, 1.0)],
            vec![],
        );
        // the far endpoint is 2 away through vertex 1
        let d = quotient_distance(&tri, v(0), EdgePoint { edge: 1, t: 2.9 }).unwrap();
        assert!((d - 2.1).abs() < 1e-15);
        let lone = MetricGraph::from_edges([v(0)], vec![edge(1, 2, 1.0, 1.0)], vec![]);
        assert_eq!(quotient_distance(&lone, v(0), EdgePoint { edge: 0, t: 0.5 }), None);
    }

    #[test]
    fn star_ball_measure() {
        let star = MetricGraph::from_edges(
            [],
            vec![edge(0, 1, 1.0, 2.0), edge(0, 2, 1.0, 2.0), edge(0, 3, 1.0, 2.0)],
            vec![],
        );
        assert_eq!(ball_measure(&star, v(0), 0.5), 3.0);
        assert_eq!(ball_measure(&star, v(0), 0.0), 0.0);
        assert_eq!(ball_measure(&star, v(0), 10.0), star.total_measure());
    }

    #[test]
    fn lemma_on_triangle() {
        let mut f = FiniteGraph::new();
        for i in 0..3 {
            f.add_vertex(v(i), 4.0);
        }
        f.add_edge(v(0), v(1), 1.0);
        f.add_edge(v(1), v(2), 1.0);
        f.add_edge(v(0), v(2), 1.0);
        let lengths = EdgeLengths::from_table([((v(0), v(1)), 0.5), ((v(1), v(2)), 0.6), ((v(0), v(2)), 0.7)], 1.0);
        let (g, d, _, x) = built(f, lengths);
        // strict triangle inequality: every edge length is the path distance
        assert_eq!(x.edge(1).length, 0.7);
        let rep = compare_lemma(&g, &d, &x, v(0), &[0.1, 0.5, 0.7, 2.0]).unwrap();
        assert_eq!(rep.pairs_checked, 6);
        assert_eq!(rep.distance_margin, 0.0);
        assert!(rep.holds(1e-12), "{rep:?}");
    }

    #[test]
    fn woymp_extension_on_edge() {
        let x = MetricGraph::from_edges([], vec![edge(0, 1, 2.0, 1.0)], vec![]);
        let u: VertexFunction = [(v(0), 0.0), (v(1), 0.0)].into_iter().collect();
        let ext = woymp_extend(&x, &u, -1.0).unwrap();
        assert_eq!(*ext.on_edge(0), Quadratic::new(0.5, -1.0, 0.0));
        assert_eq!(boundary_derivatives(&x, &ext, 0), (-1.0, 1.0));
        let h = 1e-4;
        let fd = (ext.on_edge(0).eval(h) - ext.on_edge(0).eval(0.0)) / h;
        assert!((fd - -1.0).abs() <= h / 2.0 + 1e-12);

        let x = MetricGraph::from_edges([], vec![edge(0, 1, 1.0, 1.0)], vec![]);
        let u: VertexFunction = [(v(0), 0.0), (v(1), 1.0)].into_iter().collect();
        let ext = woymp_extend(&x, &u, 5.0).unwrap();
        assert_eq!(*ext.on_edge(0), Quadratic::new(0.0, 1.0, 0.0));
        assert_eq!(boundary_derivatives(&x, &ext, 0), (1.0, 1.0));
        assert_eq!(restrict(&ext), u);
    }

    #[test]
    fn energy_of_linear_edge() {
        let x = MetricGraph::from_edges([], vec![edge(0, 1, 1.5, 2.0)], vec![]);
        let f: VertexFunction = [(v(0), 1.0), (v(1), 4.0)].into_iter().collect();
        let fh = interpolate(&x, &f);
        // p·s²·l with p = 3, s = 2
        assert!((energy_form(&x, &fh, &fh) - 3.0 * 4.0 * 1.5).abs() < 1e-12);
        let c = interpolate(&x, &VertexFunction::constant([v(0), v(1)], 3.0));
        assert_eq!(energy_form(&x, &c, &fh), 0.0);
    }

    #[test]
    fn interpolation_examples() {
        let x = MetricGraph::from_edges([], vec![edge(0, 1, 1.0, 1.0)], vec![]);
        let w: VertexFunction = [(v(0), 0.0), (v(1), 1.0)].into_iter().collect();
        let rep = interpolation_bounds_check(&x, &w);
        assert!(rep.holds(1e-12));
        assert!((rep.l1_metric - 0.5).abs() < 1e-15);
        assert!((rep.l1_vertex_half - 0.5).abs() < 1e-15);
        let hw = interpolate(&x, &w);
        assert!((energy_form(&x, &hw, &hw) - 1.0).abs() < 1e-15);
        assert!((hw.on_edge(0).product_integral(hw.on_edge(0), 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(restrict(&hw), w);

        let ones = VertexFunction::constant([v(0), v(1)], 1.0);
        let rep = interpolation_bounds_check(&x, &ones);
        assert_eq!(rep.third_formula_error, 0.0);
        let signed: VertexFunction = [(v(0), -1.0), (v(1), 1.0)].into_iter().collect();
        let rep = interpolation_bounds_check(&x, &signed);
        assert_eq!(rep.sign_change_edges, 1);
        assert!(rep.l1_metric < rep.l1_vertex_half);
        assert!(rep.holds(1e-12));
    }

    #[test]
    fn sobolev_examples() {
        assert!((interval_sobolev_ratio(&Quadratic::constant(1.0), 1.0) - 1.0f64.tanh()).abs() < 1e-15);
        let r = interval_sobolev_ratio(&Quadratic::new(0.0, 1.0, 0.0), 1.0);
        assert!((r - 1.0f64.tanh() / (4.0 / 3.0)).abs() < 1e-15);
        assert!((trace_constant(1.0) - 2.0 / 1.0f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn hand_built_inequality() {
        let lengths = EdgeLengths::from_table((0..4).map(|i| ((v(i), v(i + 1)), 0.5)), 1.0);
        let g = FiniteGraph::path(5).into_graph();
        let d = PathMetric::new(&g, lengths);
        let w = GraphWindow::new(&g, [v(1), v(2), v(3)]).unwrap();
        let x = MetricGraph::build(&g, &d, &w).unwrap();
        let u: VertexFunction = [(v(1), 1.0), (v(2), 0.25), (v(3), 1.0)].into_iter().collect();
        let rep = woymp_inequality_check(&g, &x, &u, 1.0, &w).unwrap();
        assert_eq!(rep.status, InequalityStatus::Holds);
        assert_eq!(rep.centers, vec![v(2)]);
        // ε̂(v, φ) = −1.5 by hand; the superlevel set is the whole star, ∫φ dμ̂ = 0.25
        assert!((rep.worst_margin.unwrap() - (-1.5 + 0.25)).abs() < 1e-13);
        assert!(rep.identity_residual < 1e-14);

        let constant = VertexFunction::constant((1..4).map(v), 2.0);
        let rep = woymp_inequality_check(&g, &x, &constant, 1.0, &w).unwrap();
        assert_eq!(rep.status, InequalityStatus::Inapplicable);
    }

    #[test]
    fn continuity_is_enforced() {
        let x = MetricGraph::from_edges([], vec![edge(0, 1, 1.0, 1.0), edge(1, 2, 1.0, 1.0)], vec![]);
        let ok = PiecewisePoly::from_edge_polys(
            &x,
            vec![Quadratic::linear(0.0, 1.0, 1.0), Quadratic::unit_convex(1.0, 0.0, 1.0)],
        );
        assert!(ok.is_ok());
        let jump = PiecewisePoly::from_edge_polys(
            &x,
            vec![Quadratic::linear(0.0, 1.0, 1.0), Quadratic::linear(2.0, 0.0, 1.0)],
        );
        assert!(jump.is_err());
        let bad_a = PiecewisePoly::from_edge_polys(
            &x,
            vec![Quadratic::new(1.0, 0.0, 0.0), Quadratic::linear(0.0, 0.0, 1.0)],
        );
        assert!(bad_a.is_err());
    }

    #[test]
    fn flipped_orientation_gives_same_energy() {
        let x = MetricGraph::from_edges([], vec![edge(0, 1, 0.7, 1.3), edge(1, 2, 0.4, 2.0)], vec![]);
        let u: VertexFunction = [(v(0), 0.3), (v(1), 1.0), (v(2), -0.2)].into_iter().collect();
        let a = woymp_extend(&x, &u, 0.5).unwrap();
        let phi = hat(&x, v(1));
        let xf = x.flipped();
        let (af, pf) = (a.flipped(&x), phi.flipped(&x));
        assert!((energy_form(&x, &a, &phi) - energy_form(&xf, &af, &pf)).abs() < 1e-14);
        assert!(ibp_check(&x, &a, &phi) < 1e-12);
        assert!(ibp_check(&xf, &af, &pf) < 1e-12);
    }
}
