//! Edge lengths, induced path metrics and the adaptedness test.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use ordered_float::OrderedFloat;
use serde::Serialize;

use crate::error::GraphError;
use crate::graph::{GraphWindow, VertexId, WeightedGraph, DEFAULT_BALL_CAP};

/// Jump size used when none is supplied.
pub const DEFAULT_C0: f64 = 1.0;

/// Slack allowed on the adaptedness sums, which equal 1 exactly in exact
/// arithmetic for the extremal metrics.
pub const ADAPTED_TOLERANCE: f64 = 1e-12;

#[derive(Clone)]
enum LengthRule {
    Unit,
    Degree,
    Table(Arc<HashMap<(VertexId, VertexId), f64>>),
    Scaled(Box<EdgeLengths>, f64),
}

/// Length assignment `σ` on edges plus the jump size `c0`.
#[derive(Clone)]
pub struct EdgeLengths {
    rule: LengthRule,
    c0: f64,
}

impl fmt::Debug for EdgeLengths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeLengths({}, c0 = {})", self.tag(), self.c0)
    }
}

impl EdgeLengths {
    /// Unit lengths: the combinatorial graph metric `d_0`.
    pub fn unit() -> Self {
        EdgeLengths {
            rule: LengthRule::Unit,
            c0: DEFAULT_C0,
        }
    }

    /// Explicit lengths keyed by unordered vertex pairs.
    pub fn from_table<I>(entries: I, c0: f64) -> Self
    where
        I: IntoIterator<Item = ((VertexId, VertexId), f64)>,
    {
        let table = entries
            .into_iter()
            .map(|((x, y), l)| ((x.min(y), x.max(y)), l))
            .collect();
        EdgeLengths {
            rule: LengthRule::Table(Arc::new(table)),
            c0,
        }
    }

    /// All lengths multiplied by `factor`; the jump size is kept.
    pub fn scaled(&self, factor: f64) -> Self {
        EdgeLengths {
            rule: LengthRule::Scaled(Box::new(self.clone()), factor),
            c0: self.c0,
        }
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn tag(&self) -> String {
        match &self.rule {
            LengthRule::Unit => "unit".into(),
            LengthRule::Degree => "degree".into(),
            LengthRule::Table(t) => format!("table[{}]", t.len()),
            LengthRule::Scaled(inner, s) => format!("{}*{}", inner.tag(), s),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.rule, LengthRule::Unit)
    }

    /// `σ(x, y)` for adjacent `x`, `y`.
    pub fn length(&self, g: &WeightedGraph, x: VertexId, y: VertexId) -> Result<f64, GraphError> {
        match &self.rule {
            LengthRule::Unit => Ok(1.0),
            LengthRule::Degree => {
                let dx = g.weighted_degree(x)?;
                let dy = g.weighted_degree(y)?;
                Ok(self.c0.min(dx.max(dy).sqrt().recip()))
            }
            LengthRule::Table(t) => t
                .get(&(x.min(y), x.max(y)))
                .copied()
                .ok_or(GraphError::MissingLength(x, y)),
            LengthRule::Scaled(inner, s) => Ok(inner.length(g, x, y)? * s),
        }
    }

    /// Explicit table of these lengths on the given edges, same jump size.
    pub fn tabulate<I>(&self, g: &WeightedGraph, edges: I) -> Result<EdgeLengths, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let entries = edges
            .into_iter()
            .map(|(x, y)| Ok(((x, y), self.length(g, x, y)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        Ok(EdgeLengths::from_table(entries, self.c0))
    }

    /// Table entries in key order, if this is an explicit table.
    pub fn table_entries(&self) -> Option<Vec<((VertexId, VertexId), f64)>> {
        match &self.rule {
            LengthRule::Table(t) => {
                let mut v: Vec<_> = t.iter().map(|(&k, &l)| (k, l)).collect();
                v.sort_by_key(|e| e.0);
                Some(v)
            }
            _ => None,
        }
    }
}

/// `σ(x,y) = min(c0, Deg(x)^{-1/2}, Deg(y)^{-1/2})`.
///
/// Since `Σ_y ω(x,y)/Deg(x) = μ(x)`, the induced path metric is adapted
/// with jump size `c0`.
pub fn degree_metric(_g: &WeightedGraph, c0: f64) -> EdgeLengths {
    EdgeLengths {
        rule: LengthRule::Degree,
        c0,
    }
}

/// Result of a bounded shortest-path search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Vertices with their distance, in settle order (distance, then id).
    pub settled: Vec<(VertexId, f64)>,
    /// False when the vertex cap stopped the search early.
    pub complete: bool,
}

/// Dijkstra from `root` over lengths `σ`, settling vertices with distance
/// `≤ radius` until `stop` returns true. Ties are broken by vertex id.
pub fn search<F>(
    g: &WeightedGraph,
    lengths: &EdgeLengths,
    root: VertexId,
    radius: f64,
    cap: usize,
    mut stop: F,
) -> Result<SearchOutcome, GraphError>
where
    F: FnMut(VertexId) -> bool,
{
    let mut best: HashMap<VertexId, f64> = HashMap::new();
    let mut done: HashSet<VertexId> = HashSet::new();
    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    g.measure(root)?;
    best.insert(root, 0.0);
    heap.push(Reverse((OrderedFloat(0.0), root)));
    while let Some(Reverse((OrderedFloat(dist), x))) = heap.pop() {
        if dist > radius {
            break;
        }
        if !done.insert(x) {
            continue;
        }
        if settled.len() == cap {
            return Ok(SearchOutcome {
                settled,
                complete: false,
            });
        }
        settled.push((x, dist));
        if stop(x) {
            break;
        }
        for (y, _) in g.neighbors(x)? {
            if done.contains(&y) {
                continue;
            }
            let candidate = dist + lengths.length(g, x, y)?;
            if candidate > radius {
                continue;
            }
            let improves = best.get(&y).is_none_or(|&b| candidate < b);
            if improves {
                best.insert(y, candidate);
                heap.push(Reverse((OrderedFloat(candidate), y)));
            }
        }
    }
    Ok(SearchOutcome {
        settled,
        complete: true,
    })
}

#[derive(Debug, Default)]
struct RootCache {
    distances: HashMap<VertexId, f64>,
    exhausted: bool,
}

/// Shortest-path metric induced by edge lengths on a graph.
///
/// Distances from each queried root are cached; caches are shared between
/// clones and never mutated once a larger search replaces them.
#[derive(Clone)]
pub struct PathMetric {
    graph: WeightedGraph,
    lengths: EdgeLengths,
    cap: usize,
    cache: Arc<Mutex<HashMap<VertexId, Arc<RootCache>>>>,
}

impl fmt::Debug for PathMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathMetric")
            .field("lengths", &self.lengths)
            .field("cap", &self.cap)
            .finish_non_exhaustive()
    }
}

impl PathMetric {
    pub fn new(g: &WeightedGraph, lengths: EdgeLengths) -> Self {
        PathMetric {
            graph: g.clone(),
            lengths,
            cap: DEFAULT_BALL_CAP,
            cache: Arc::default(),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn lengths(&self) -> &EdgeLengths {
        &self.lengths
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn cached(&self, root: VertexId) -> Option<Arc<RootCache>> {
        self.cache.lock().expect("metric cache poisoned").get(&root).cloned()
    }

    fn store(&self, root: VertexId, outcome: &SearchOutcome, exhausted: bool) {
        let mut cache = self.cache.lock().expect("metric cache poisoned");
        let larger = cache
            .get(&root)
            .is_none_or(|c| c.distances.len() < outcome.settled.len());
        if larger {
            cache.insert(
                root,
                Arc::new(RootCache {
                    distances: outcome.settled.iter().copied().collect(),
                    exhausted,
                }),
            );
        }
    }

    /// Shortest-path distance; `None` when `y` is in another component.
    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<Option<f64>, GraphError> {
        if x == y {
            return Ok(Some(0.0));
        }
        if let Some(c) = self.cached(x) {
            if let Some(&d) = c.distances.get(&y) {
                return Ok(Some(d));
            }
            if c.exhausted {
                return Ok(None);
            }
        }
        let outcome = search(&self.graph, &self.lengths, x, f64::INFINITY, self.cap, |z| z == y)?;
        let found = outcome.settled.last().filter(|(z, _)| *z == y).map(|&(_, d)| d);
        if !outcome.complete {
            return Err(GraphError::BallCapExceeded {
                cap: self.cap,
                radius: f64::INFINITY,
            });
        }
        self.store(x, &outcome, found.is_none());
        Ok(found)
    }

    /// Distances from `x` to each target, `None` for unreachable targets.
    pub fn distances_to(&self, x: VertexId, targets: &[VertexId]) -> Result<Vec<Option<f64>>, GraphError> {
        let mut pending: HashSet<VertexId> = targets.iter().copied().collect();
        if let Some(c) = self.cached(x) {
            if c.exhausted || pending.iter().all(|t| c.distances.contains_key(t)) {
                return Ok(targets.iter().map(|t| c.distances.get(t).copied()).collect());
            }
        }
        pending.remove(&x);
        let outcome = if pending.is_empty() {
            SearchOutcome {
                settled: vec![(x, 0.0)],
                complete: true,
            }
        } else {
            search(&self.graph, &self.lengths, x, f64::INFINITY, self.cap, |z| {
                pending.remove(&z);
                pending.is_empty()
            })?
        };
        if !outcome.complete {
            return Err(GraphError::BallCapExceeded {
                cap: self.cap,
                radius: f64::INFINITY,
            });
        }
        let found: HashMap<VertexId, f64> = outcome.settled.iter().copied().collect();
        let out = targets.iter().map(|t| found.get(t).copied()).collect::<Vec<_>>();
        self.store(x, &outcome, out.iter().any(Option::is_none));
        Ok(out)
    }

    /// `d(x, y)` for each neighbor `y` of `x`, in neighbor order.
    pub fn neighbor_distances(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let neighbors = self.graph.neighbors(x)?;
        let mut reach = 0.0f64;
        for &(y, _) in &neighbors {
            reach = reach.max(self.lengths.length(&self.graph, x, y)?);
        }
        let outcome = search(&self.graph, &self.lengths, x, reach, self.cap, |_| false)?;
        let found: HashMap<VertexId, f64> = outcome.settled.into_iter().collect();
        neighbors
            .into_iter()
            .map(|(y, _)| {
                found.get(&y).map(|&d| (y, d)).ok_or(GraphError::BallCapExceeded {
                    cap: self.cap,
                    radius: reach,
                })
            })
            .collect()
    }

    /// Ball `{y : d(x, y) ≤ r}` in settle order.
    pub fn ball(&self, x: VertexId, r: f64) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let outcome = search(&self.graph, &self.lengths, x, r, self.cap, |_| false)?;
        if !outcome.complete {
            return Err(GraphError::BallCapExceeded {
                cap: self.cap,
                radius: r,
            });
        }
        Ok(outcome.settled)
    }
}

/// `d(x, y)` via the path metric; `None` marks an unreachable pair.
pub fn path_distance(m: &PathMetric, x: VertexId, y: VertexId) -> Result<Option<f64>, GraphError> {
    m.distance(x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Adaptedness {
    Adapted,
    WeaklyAdapted,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptednessReport {
    pub verdict: Adaptedness,
    pub c0: f64,
    /// Largest `(1/μ(x)) Σ_y ω(x,y)(d(x,y) ∧ c0)²` over interior vertices.
    pub max_sum: f64,
    pub argmax: Option<VertexId>,
    /// Largest `d(x, y)` over edges touching the window.
    pub max_edge_distance: f64,
    pub longest_edge: Option<(VertexId, VertexId)>,
    pub interior_checked: usize,
}

/// Weak adaptedness on the interior of `window`, plus the jump-size
/// condition on edges touching it.
///
/// Edge weights and measure come from `g`, distances from `d`, which may be
/// the path metric of a different graph on the same vertices.
pub fn check_adapted(
    g: &WeightedGraph,
    d: &PathMetric,
    c0: f64,
    window: &GraphWindow,
) -> Result<AdaptednessReport, GraphError> {
    let mut max_sum = 0.0f64;
    let mut argmax = None;
    let mut max_edge = 0.0f64;
    let mut longest = None;
    let mut checked = 0;
    for (i, &x) in window.vertices().iter().enumerate() {
        let neighbors = g.neighbors(x)?;
        if neighbors.is_empty() {
            continue;
        }
        let targets: Vec<VertexId> = neighbors.iter().map(|&(y, _)| y).collect();
        let dist = d.distances_to(x, &targets)?;
        let mut sum = 0.0;
        for (&(y, w), dy) in neighbors.iter().zip(&dist) {
            let dy = dy.unwrap_or(f64::INFINITY);
            if dy > max_edge {
                max_edge = dy;
                longest = Some((x.min(y), x.max(y)));
            }
            sum += w * dy.min(c0).powi(2);
        }
        if window.is_interior(i) {
            checked += 1;
            let normalized = sum / window.measure(i);
            if argmax.is_none() || normalized > max_sum {
                max_sum = normalized;
                argmax = Some(x);
            }
        }
    }
    let weakly = max_sum <= 1.0 + ADAPTED_TOLERANCE;
    let verdict = match (weakly, max_edge <= c0 * (1.0 + ADAPTED_TOLERANCE)) {
        (true, true) => Adaptedness::Adapted,
        (true, false) => Adaptedness::WeaklyAdapted,
        _ => Adaptedness::Neither,
    };
    Ok(AdaptednessReport {
        verdict,
        c0,
        max_sum,
        argmax,
        max_edge_distance: max_edge,
        longest_edge: longest,
        interior_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiniteGraph;

    fn v(i: u64) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn degree_lengths_on_path() {
        let g = FiniteGraph::path(4).into_graph();
        let l = degree_metric(&g, 1.0);
        let s = l.length(&g, v(1), v(2)).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
        // endpoint has Deg = 1 but its neighbor has Deg = 2
        assert!((l.length(&g, v(0), v(1)).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);

        let single = FiniteGraph::path(2).into_graph();
        assert_eq!(degree_metric(&single, 1.0).length(&single, v(0), v(1)).unwrap(), 1.0);
        assert_eq!(degree_metric(&single, 0.3).length(&single, v(0), v(1)).unwrap(), 0.3);
    }

    #[test]
    fn path_sums_and_detours() {
        let g = FiniteGraph::path(3).into_graph();
        let l = EdgeLengths::from_table([((v(0), v(1)), 0.5), ((v(1), v(2)), 2.0)], 1.0);
        let m = PathMetric::new(&g, l);
        assert_eq!(path_distance(&m, v(0), v(2)).unwrap(), Some(2.5));
        assert_eq!(path_distance(&m, v(1), v(1)).unwrap(), Some(0.0));

        let mut t = FiniteGraph::new();
        for i in 0..3 {
            t.add_vertex(v(i), 1.0);
        }
        t.add_edge(v(0), v(1), 1.0);
        t.add_edge(v(1), v(2), 1.0);
        t.add_edge(v(0), v(2), 1.0);
        let t = t.into_graph();
        let l = EdgeLengths::from_table([((v(0), v(1)), 1.0), ((v(1), v(2)), 1.0), ((v(0), v(2)), 3.0)], 5.0);
        let m = PathMetric::new(&t, l);
        assert_eq!(m.distance(v(0), v(2)).unwrap(), Some(2.0));
        assert_eq!(m.neighbor_distances(v(0)).unwrap(), vec![(v(1), 1.0), (v(2), 2.0)]);
    }

    #[test]
    fn unreachable_pair_is_marked() {
        let mut f = FiniteGraph::path(2);
        f.add_vertex(v(7), 1.0);
        let g = f.into_graph();
        let m = PathMetric::new(&g, EdgeLengths::unit());
        assert_eq!(m.distance(v(0), v(7)).unwrap(), None);
        assert_eq!(m.distance(v(0), v(1)).unwrap(), Some(1.0));
    }

    #[test]
    fn adaptedness_verdicts_on_path() {
        let g = FiniteGraph::path(5).into_graph();
        let w = GraphWindow::whole(&g).unwrap();

        let unit = PathMetric::new(&g, EdgeLengths::unit());
        let r = check_adapted(&g, &unit, 1.0, &w).unwrap();
        assert_eq!(r.verdict, Adaptedness::Neither);
        assert_eq!(r.max_sum, 2.0);

        let half = PathMetric::new(&g, EdgeLengths::unit().scaled(0.5f64.sqrt()));
        let r = check_adapted(&g, &half, 1.0, &w).unwrap();
        assert_eq!(r.verdict, Adaptedness::Adapted);
        assert!((r.max_sum - 1.0).abs() < 1e-12);

        let deg = PathMetric::new(&g, degree_metric(&g, 1.0));
        assert_eq!(check_adapted(&g, &deg, 1.0, &w).unwrap().verdict, Adaptedness::Adapted);
    }

    #[test]
    fn long_edges_give_weak_adaptedness() {
        let g = FiniteGraph::path(3).into_graph();
        let w = GraphWindow::whole(&g).unwrap();
        // every edge longer than c0: sums are Σ ω c0² = 2 c0² at the middle
        let m = PathMetric::new(&g, EdgeLengths::unit().scaled(3.0));
        let r = check_adapted(&g, &m, 0.5, &w).unwrap();
        assert_eq!(r.verdict, Adaptedness::WeaklyAdapted);
        assert_eq!(r.max_edge_distance, 3.0);
    }
}
