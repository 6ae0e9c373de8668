//! Weighted graphs, finite windows, the formal Laplacian and the graph energy form.
//!
//! A graph is given by a deterministic neighbor enumerator, so infinite
//! graphs can be explored lazily. Every numerical computation happens on a
//! finite [`GraphWindow`]; functions are extended by zero outside it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::metric::{search, EdgeLengths, PathMetric};

/// Largest neighbor list accepted from a source.
pub const DEFAULT_DEGREE_CAP: usize = 10_000_000;

/// Default vertex cap for ball searches.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

/// Opaque vertex identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// A neighbor enumerator together with a vertex measure.
///
/// Implementations must be pure: the same vertex always yields the same
/// neighbor list. Lists should be sorted by id; [`WeightedGraph`] sorts
/// them otherwise.
pub trait GraphSource: Send + Sync + fmt::Debug {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError>;

    fn measure(&self, x: VertexId) -> Result<f64, GraphError>;

    /// `Deg(x) = (1/μ(x)) Σ_y ω(x,y)`. Sources with a closed form override this.
    fn weighted_degree(&self, x: VertexId) -> Result<f64, GraphError> {
        let total: f64 = self.neighbors(x)?.iter().map(|&(_, w)| w).sum();
        Ok(total / self.measure(x)?)
    }

    /// All vertices, when the graph is finite.
    fn finite_vertices(&self) -> Option<Vec<VertexId>> {
        None
    }

    fn describe(&self) -> String;
}

/// Shared handle to a graph source.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    source: Arc<dyn GraphSource>,
    degree_cap: usize,
}

impl WeightedGraph {
    pub fn new<S: GraphSource + 'static>(source: S) -> Self {
        WeightedGraph {
            source: Arc::new(source),
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn from_arc(source: Arc<dyn GraphSource>) -> Self {
        WeightedGraph {
            source,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn with_degree_cap(mut self, cap: usize) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn source(&self) -> &Arc<dyn GraphSource> {
        &self.source
    }

    pub fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let mut list = self.source.neighbors(x)?;
        if list.len() > self.degree_cap {
            return Err(GraphError::DegreeCapExceeded {
                vertex: x,
                count: list.len(),
                cap: self.degree_cap,
            });
        }
        if !list.windows(2).all(|w| w[0].0 <= w[1].0) {
            list.sort_by_key(|&(y, _)| y);
        }
        Ok(list)
    }

    pub fn measure(&self, x: VertexId) -> Result<f64, GraphError> {
        self.source.measure(x)
    }

    pub fn weighted_degree(&self, x: VertexId) -> Result<f64, GraphError> {
        self.source.weighted_degree(x)
    }

    pub fn finite_vertices(&self) -> Option<Vec<VertexId>> {
        self.source.finite_vertices()
    }

    pub fn describe(&self) -> String {
        self.source.describe()
    }

    /// Same edges, measure replaced by `mu`.
    pub fn with_measure<F>(&self, mu: F) -> WeightedGraph
    where
        F: Fn(VertexId) -> Result<f64, GraphError> + Send + Sync + 'static,
    {
        WeightedGraph::new(Remeasured {
            inner: self.clone(),
            mu: Arc::new(mu),
        })
    }

    /// Edge weight, zero when `x` and `y` are not adjacent.
    pub fn weight(&self, x: VertexId, y: VertexId) -> Result<f64, GraphError> {
        Ok(self
            .neighbors(x)?
            .into_iter()
            .find(|&(z, _)| z == y)
            .map_or(0.0, |(_, w)| w))
    }
}

/// Explicit finite graph. Arcs are stored as given, so asymmetric input can
/// be represented and reported by [`validate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteGraph {
    measure: BTreeMap<VertexId, f64>,
    arcs: BTreeMap<VertexId, BTreeMap<VertexId, f64>>,
}

impl FiniteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit-weight path `0 - 1 - ... - (n-1)` with unit measure.
    pub fn path(n: u64) -> Self {
        let mut g = FiniteGraph::new();
        for i in 0..n {
            g.add_vertex(VertexId(i), 1.0);
        }
        for i in 1..n {
            g.add_edge(VertexId(i - 1), VertexId(i), 1.0);
        }
        g
    }

    pub fn add_vertex(&mut self, x: VertexId, mu: f64) {
        self.measure.insert(x, mu);
        self.arcs.entry(x).or_default();
    }

    /// Inserts both orientations of an undirected edge.
    pub fn add_edge(&mut self, x: VertexId, y: VertexId, w: f64) {
        self.insert_arc(x, y, w);
        self.insert_arc(y, x, w);
    }

    /// Inserts a single orientation only.
    pub fn insert_arc(&mut self, x: VertexId, y: VertexId, w: f64) {
        self.arcs.entry(x).or_default().insert(y, w);
        self.arcs.entry(y).or_default();
    }

    pub fn remove_edge(&mut self, x: VertexId, y: VertexId) {
        if let Some(m) = self.arcs.get_mut(&x) {
            m.remove(&y);
        }
        if let Some(m) = self.arcs.get_mut(&y) {
            m.remove(&x);
        }
    }

    pub fn set_measure(&mut self, x: VertexId, mu: f64) {
        self.measure.insert(x, mu);
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.arcs.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.arcs.len()
    }

    /// Undirected edges `(x, y, ω)` with `x < y`, taken from the `x → y` arc.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, f64)> {
        self.arcs
            .iter()
            .flat_map(|(&x, m)| m.iter().filter(move |(&y, _)| x < y).map(move |(&y, &w)| (x, y, w)))
            .collect()
    }

    pub fn measure_of(&self, x: VertexId) -> Option<f64> {
        self.measure.get(&x).copied()
    }

    pub fn into_graph(self) -> WeightedGraph {
        WeightedGraph::new(self)
    }
}

impl GraphSource for FiniteGraph {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        self.arcs
            .get(&x)
            .map(|m| m.iter().map(|(&y, &w)| (y, w)).collect())
            .ok_or(GraphError::UnknownVertex(x))
    }

    fn measure(&self, x: VertexId) -> Result<f64, GraphError> {
        match self.measure.get(&x) {
            Some(&m) => Ok(m),
            None if self.arcs.contains_key(&x) => Ok(1.0),
            None => Err(GraphError::UnknownVertex(x)),
        }
    }

    fn finite_vertices(&self) -> Option<Vec<VertexId>> {
        Some(self.arcs.keys().copied().collect())
    }

    fn describe(&self) -> String {
        format!(
            "finite graph: {} vertices, {} edges",
            self.arcs.len(),
            self.edges().len()
        )
    }
}

type MeasureFn = Arc<dyn Fn(VertexId) -> Result<f64, GraphError> + Send + Sync>;

struct Remeasured {
    inner: WeightedGraph,
    mu: MeasureFn,
}

impl fmt::Debug for Remeasured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Remeasured")
            .field("inner", &self.inner)
            .finish_non_exhaustive()
    }
}

impl GraphSource for Remeasured {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        self.inner.neighbors(x)
    }

    fn measure(&self, x: VertexId) -> Result<f64, GraphError> {
        (self.mu)(x)
    }

    fn finite_vertices(&self) -> Option<Vec<VertexId>> {
        self.inner.finite_vertices()
    }

    fn describe(&self) -> String {
        format!("{} (measure replaced)", self.inner.describe())
    }
}

/// Graph with every edge of metric length above `c0` removed.
#[derive(Debug)]
struct Truncated {
    inner: WeightedGraph,
    metric: PathMetric,
    c0: f64,
}

impl GraphSource for Truncated {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let within: HashMap<VertexId, f64> = self.metric.neighbor_distances(x)?.into_iter().collect();
        let mut kept = Vec::new();
        for (y, w) in self.inner.neighbors(x)? {
            let d = match within.get(&y) {
                Some(&d) => d,
                None => self.metric.distance(x, y)?.unwrap_or(f64::INFINITY),
            };
            if d <= self.c0 {
                kept.push((y, w));
            }
        }
        Ok(kept)
    }

    fn measure(&self, x: VertexId) -> Result<f64, GraphError> {
        self.inner.measure(x)
    }

    fn finite_vertices(&self) -> Option<Vec<VertexId>> {
        self.inner.finite_vertices()
    }

    fn describe(&self) -> String {
        format!("{} truncated at jump size {}", self.inner.describe(), self.c0)
    }
}

/// `(V, ω′, μ)` with `ω′ = ω` where `d ≤ c0` and `ω′ = 0` otherwise.
///
/// `d` is the path metric of the original graph; truncation may disconnect
/// the result.
pub fn truncate_by_jump_size(g: &WeightedGraph, d: &PathMetric, c0: f64) -> Result<WeightedGraph, GraphError> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(GraphError::InvalidArgument(format!(
            "jump size must be positive, got {c0}"
        )));
    }
    Ok(WeightedGraph::new(Truncated {
        inner: g.clone(),
        metric: d.clone(),
        c0,
    }))
}

/// Real function on vertices; absent vertices read as zero where a
/// Dirichlet extension is wanted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction {
    values: BTreeMap<VertexId, f64>,
}

impl VertexFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant<I: IntoIterator<Item = VertexId>>(vertices: I, c: f64) -> Self {
        vertices.into_iter().map(|x| (x, c)).collect()
    }

    pub fn from_window(window: &GraphWindow, values: &[f64]) -> Self {
        debug_assert_eq!(window.len(), values.len());
        window.vertices().iter().copied().zip(values.iter().copied()).collect()
    }

    pub fn get(&self, x: VertexId) -> Option<f64> {
        self.values.get(&x).copied()
    }

    /// Value with zero extension outside the domain.
    pub fn value(&self, x: VertexId) -> f64 {
        self.get(x).unwrap_or(0.0)
    }

    pub fn require(&self, x: VertexId) -> Result<f64, GraphError> {
        self.get(x).ok_or(GraphError::MissingValue(x))
    }

    pub fn set(&mut self, x: VertexId, v: f64) {
        self.values.insert(x, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.values.iter().map(|(&x, &v)| (x, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Vertices with a nonzero value.
    pub fn support(&self) -> BTreeSet<VertexId> {
        self.iter().filter(|&(_, v)| v != 0.0).map(|(x, _)| x).collect()
    }

    pub fn sup(&self) -> Option<f64> {
        self.values.values().copied().reduce(f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.values().all(|v| v.is_finite())
    }

    /// Values in window order, zero where undefined.
    pub fn on_window(&self, window: &GraphWindow) -> Vec<f64> {
        window.vertices().iter().map(|&x| self.value(x)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.iter().map(|(x, v)| (x, f(v))).collect()
    }

    /// Pointwise `a·self + b·other` over the union of domains.
    pub fn combine(&self, a: f64, other: &VertexFunction, b: f64) -> Self {
        let keys: BTreeSet<VertexId> = self.values.keys().chain(other.values.keys()).copied().collect();
        keys.into_iter()
            .map(|x| (x, a * self.value(x) + b * other.value(x)))
            .collect()
    }
}

impl FromIterator<(VertexId, f64)> for VertexFunction {
    fn from_iter<T: IntoIterator<Item = (VertexId, f64)>>(iter: T) -> Self {
        VertexFunction {
            values: iter.into_iter().collect(),
        }
    }
}

/// Finite induced piece of a graph.
///
/// Interior vertices have their whole neighbor list inside the window; the
/// rest form the boundary. The total weight each vertex sends outside the
/// window is kept so Dirichlet problems can be assembled without going back
/// to the source.
#[derive(Clone, Debug)]
pub struct GraphWindow {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    interior: Vec<bool>,
    mu: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    exterior_weight: Vec<f64>,
}

impl GraphWindow {
    /// Window on the given vertices, in the given order. Duplicates are dropped.
    pub fn new<I>(g: &WeightedGraph, vertices: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = VertexId>,
    {
        let mut order = Vec::new();
        let mut index = HashMap::new();
        for x in vertices {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(x) {
                e.insert(order.len());
                order.push(x);
            }
        }
        let mut interior = Vec::with_capacity(order.len());
        let mut mu = Vec::with_capacity(order.len());
        let mut adjacency = Vec::with_capacity(order.len());
        let mut exterior_weight = Vec::with_capacity(order.len());
        for &x in &order {
            mu.push(g.measure(x)?);
            let mut inside = Vec::new();
            let mut outside = 0.0;
            let mut leaves = false;
            for (y, w) in g.neighbors(x)? {
                match index.get(&y) {
                    Some(&j) => inside.push((j, w)),
                    None => {
                        outside += w;
                        leaves = true;
                    }
                }
            }
            let boundary_free = !leaves;
            interior.push(boundary_free);
            adjacency.push(inside);
            exterior_weight.push(outside);
        }
        Ok(GraphWindow {
            vertices: order,
            index,
            interior,
            mu,
            adjacency,
            exterior_weight,
        })
    }

    /// Window on every vertex of a finite graph.
    pub fn whole(g: &WeightedGraph) -> Result<Self, GraphError> {
        let vertices = g
            .finite_vertices()
            .ok_or_else(|| GraphError::InvalidArgument("whole-graph window needs a finite graph".into()))?;
        GraphWindow::new(g, vertices)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn index_of(&self, x: VertexId) -> Option<usize> {
        self.index.get(&x).copied()
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.index.contains_key(&x)
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    pub fn interior(&self) -> Vec<VertexId> {
        self.filter_vertices(true)
    }

    pub fn boundary(&self) -> Vec<VertexId> {
        self.filter_vertices(false)
    }

    fn filter_vertices(&self, interior: bool) -> Vec<VertexId> {
        self.vertices
            .iter()
            .zip(&self.interior)
            .filter(|(_, &i)| i == interior)
            .map(|(&x, _)| x)
            .collect()
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.mu
    }

    /// Neighbors of the `i`-th vertex that lie in the window, as indices.
    pub fn adjacent(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Total weight from the `i`-th vertex to vertices outside the window.
    pub fn exterior_weight(&self, i: usize) -> f64 {
        self.exterior_weight[i]
    }

    /// `Σ_y ω(x,y)` over all neighbors, inside or not.
    pub fn total_weight(&self, i: usize) -> f64 {
        self.adjacency[i].iter().map(|&(_, w)| w).sum::<f64>() + self.exterior_weight[i]
    }

    /// Undirected edges inside the window as index pairs `(i, j, ω)`, `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&(j, _)| i < j).map(move |&(j, w)| (i, j, w)))
            .collect()
    }

    /// Total vertex measure of the window.
    pub fn volume(&self) -> f64 {
        self.mu.iter().sum()
    }
}

/// One invariant violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Symmetry {
        x: VertexId,
        y: VertexId,
        forward: f64,
        backward: f64,
    },
    EdgePositivity {
        x: VertexId,
        y: VertexId,
        weight: f64,
    },
    Loop {
        x: VertexId,
    },
    MeasurePositivity {
        x: VertexId,
        mu: f64,
    },
    DuplicateNeighbor {
        x: VertexId,
        y: VertexId,
    },
    LocalFiniteness {
        x: VertexId,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Symmetry {
                x,
                y,
                forward,
                backward,
            } => write!(f, "symmetry violation at ({x},{y}): {forward} vs {backward}"),
            Violation::EdgePositivity { x, y, weight } => {
                write!(f, "edge positivity at ({x},{y}): weight {weight}")
            }
            Violation::Loop { x } => write!(f, "loop at {x}"),
            Violation::MeasurePositivity { x, mu } => {
                write!(f, "measure positivity at {x}: mu = {mu}")
            }
            Violation::DuplicateNeighbor { x, y } => {
                write!(f, "duplicate neighbor {y} of {x}")
            }
            Violation::LocalFiniteness { x, reason } => {
                write!(f, "local finiteness at {x}: {reason}")
            }
        }
    }
}

/// Checks symmetry, positivity, absence of loops and local finiteness on
/// every window vertex. An empty list means the window is valid.
pub fn validate(g: &WeightedGraph, window: &GraphWindow) -> Vec<Violation> {
    let mut out = Vec::new();
    for &x in window.vertices() {
        match g.measure(x) {
            Ok(mu) if mu > 0.0 && mu.is_finite() => {}
            Ok(mu) => out.push(Violation::MeasurePositivity { x, mu }),
            Err(e) => out.push(Violation::LocalFiniteness {
                x,
                reason: e.to_string(),
            }),
        }
        let list = match g.neighbors(x) {
            Ok(list) => list,
            Err(e) => {
                out.push(Violation::LocalFiniteness {
                    x,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        for pair in list.windows(2) {
            if pair[0].0 == pair[1].0 {
                out.push(Violation::DuplicateNeighbor { x, y: pair[0].0 });
            }
        }
        for &(y, w) in &list {
            if y == x {
                out.push(Violation::Loop { x });
                continue;
            }
            if !(w > 0.0) || !w.is_finite() {
                out.push(Violation::EdgePositivity { x, y, weight: w });
            }
            // report each asymmetric pair once, from its smaller endpoint
            let back = g.weight(y, x).unwrap_or(0.0);
            if back != w && (x < y || !window.contains(y)) {
                out.push(Violation::Symmetry {
                    x,
                    y,
                    forward: w,
                    backward: back,
                });
            }
        }
    }
    // arcs y → x whose reverse x → y is missing and where only y lies in the window
    // are caught when y is scanned; arcs into x from outside are not enumerable.
    out
}

/// `Δu(x) = (1/μ(x)) Σ_y ω(x,y)(u(x) − u(y))`.
pub fn formal_laplacian(g: &WeightedGraph, u: &VertexFunction, x: VertexId) -> Result<f64, GraphError> {
    let ux = u.require(x)?;
    let mut acc = 0.0;
    for (y, w) in g.neighbors(x)? {
        acc += w * (ux - u.require(y)?);
    }
    Ok(acc / g.measure(x)?)
}

/// `½ Σ_x Σ_y ω(x,y)(u(x)−u(y))(v(x)−v(y))` for finitely supported `u`, `v`.
pub fn energy(g: &WeightedGraph, u: &VertexFunction, v: &VertexFunction) -> Result<f64, GraphError> {
    let domain: BTreeSet<VertexId> = u.support().union(&v.support()).copied().collect();
    let mut acc = 0.0;
    for &x in &domain {
        for (y, w) in g.neighbors(x)? {
            if domain.contains(&y) && y < x {
                continue;
            }
            acc += w * (u.value(x) - u.value(y)) * (v.value(x) - v.value(y));
        }
    }
    Ok(acc)
}

/// Window `{y : d(x0, y) ≤ r}` for the path metric of `lengths`, in settle order.
pub fn ball_window(
    g: &WeightedGraph,
    lengths: &EdgeLengths,
    x0: VertexId,
    r: f64,
    cap: usize,
) -> Result<GraphWindow, GraphError> {
    if !(r >= 0.0) {
        return Err(GraphError::InvalidArgument(format!(
            "radius must be non-negative, got {r}"
        )));
    }
    let outcome = search(g, lengths, x0, r, cap, |_| false)?;
    if !outcome.complete {
        return Err(GraphError::BallCapExceeded { cap, radius: r });
    }
    GraphWindow::new(g, outcome.settled.into_iter().map(|(x, _)| x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u64) -> VertexId {
        VertexId(i)
    }

    fn path3() -> WeightedGraph {
        FiniteGraph::path(3).into_graph()
    }

    #[test]
    fn valid_path_has_no_violations() {
        let g = path3();
        let w = GraphWindow::whole(&g).unwrap();
        assert!(validate(&g, &w).is_empty());
    }

    #[test]
    fn asymmetric_weight_is_reported() {
        let mut f = FiniteGraph::path(3);
        f.insert_arc(v(0), v(1), 1.0);
        f.insert_arc(v(1), v(0), 2.0);
        let g = f.into_graph();
        let w = GraphWindow::whole(&g).unwrap();
        let found = validate(&g, &w);
        assert_eq!(
            found,
            vec![Violation::Symmetry {
                x: v(0),
                y: v(1),
                forward: 1.0,
                backward: 2.0
            }]
        );
        assert_eq!(found[0].to_string(), "symmetry violation at (0,1): 1 vs 2");
    }

    #[test]
    fn zero_measure_is_reported() {
        let mut f = FiniteGraph::path(3);
        f.set_measure(v(0), 0.0);
        let g = f.into_graph();
        let w = GraphWindow::whole(&g).unwrap();
        assert_eq!(
            validate(&g, &w),
            vec![Violation::MeasurePositivity { x: v(0), mu: 0.0 }]
        );
    }

    #[test]
    fn loops_and_nonpositive_weights_are_reported() {
        let mut f = FiniteGraph::path(2);
        f.insert_arc(v(0), v(0), 1.0);
        f.add_edge(v(0), v(1), -1.0);
        let g = f.into_graph();
        let w = GraphWindow::whole(&g).unwrap();
        let found = validate(&g, &w);
        assert!(found.contains(&Violation::Loop { x: v(0) }));
        assert!(found.contains(&Violation::EdgePositivity {
            x: v(0),
            y: v(1),
            weight: -1.0
        }));
    }

    #[test]
    fn laplacian_on_path_peak() {
        let g = path3();
        let u: VertexFunction = [(v(0), 0.0), (v(1), 1.0), (v(2), 0.0)].into_iter().collect();
        assert_eq!(formal_laplacian(&g, &u, v(1)).unwrap(), 2.0);
        let c = VertexFunction::constant((0..3).map(v), 4.2);
        assert_eq!(formal_laplacian(&g, &c, v(1)).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_names_missing_neighbor() {
        let g = path3();
        let u: VertexFunction = [(v(0), 0.0), (v(1), 1.0)].into_iter().collect();
        assert_eq!(formal_laplacian(&g, &u, v(1)), Err(GraphError::MissingValue(v(2))));
    }

    #[test]
    fn single_edge_energy() {
        let mut f = FiniteGraph::new();
        f.add_vertex(v(0), 1.0);
        f.add_vertex(v(1), 1.0);
        f.add_edge(v(0), v(1), 1.0);
        let g = f.into_graph();
        let u: VertexFunction = [(v(0), 0.0), (v(1), 1.0)].into_iter().collect();
        assert_eq!(energy(&g, &u, &u).unwrap(), 1.0);
        let c = VertexFunction::constant([v(0), v(1)], 3.0);
        assert_eq!(energy(&g, &c, &u).unwrap(), 0.0);
    }

    #[test]
    fn window_interior_and_boundary() {
        let g = FiniteGraph::path(5).into_graph();
        let w = GraphWindow::new(&g, [v(0), v(1), v(2)]).unwrap();
        assert_eq!(w.interior(), vec![v(0), v(1)]);
        assert_eq!(w.boundary(), vec![v(2)]);
        assert_eq!(w.exterior_weight(2), 1.0);
        assert_eq!(w.edges(), vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn ball_windows_on_path() {
        let g = FiniteGraph::path(6).into_graph();
        let unit = EdgeLengths::unit();
        let w = ball_window(&g, &unit, v(0), 1.0, 100).unwrap();
        assert_eq!(w.vertices(), &[v(0), v(1)]);
        assert_eq!(w.interior(), vec![v(0)]);
        let w0 = ball_window(&g, &unit, v(0), 0.0, 100).unwrap();
        assert_eq!(w0.vertices(), &[v(0)]);
        let all = ball_window(&g, &unit, v(2), 10.0, 100).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all.interior().len(), 6);
    }

    #[test]
    fn ball_cap_is_enforced() {
        let g = FiniteGraph::path(50).into_graph();
        let err = ball_window(&g, &EdgeLengths::unit(), v(0), 40.0, 10).unwrap_err();
        assert!(matches!(err, GraphError::BallCapExceeded { cap: 10, .. }));
    }

    #[test]
    fn truncation_filters_long_edges() {
        let mut f = FiniteGraph::path(3);
        f.set_measure(v(0), 1.0);
        let g = f.into_graph();
        let lengths = EdgeLengths::from_table([((v(0), v(1)), 0.5), ((v(1), v(2)), 2.0)], 1.0);
        let d = PathMetric::new(&g, lengths);
        let t = truncate_by_jump_size(&g, &d, 1.0).unwrap();
        assert_eq!(t.neighbors(v(1)).unwrap(), vec![(v(0), 1.0)]);
        assert!(t.neighbors(v(2)).unwrap().is_empty());
        assert!(truncate_by_jump_size(&g, &d, 0.0).is_err());
        let none = truncate_by_jump_size(&g, &d, 0.1).unwrap();
        assert!(none.neighbors(v(1)).unwrap().is_empty());
        let same = truncate_by_jump_size(&g, &d, 5.0).unwrap();
        assert_eq!(same.neighbors(v(1)).unwrap(), g.neighbors(v(1)).unwrap());
    }
}
