//! Deterministic generators: birth-death chains, anti-trees, the square
//! lattice and seeded random graphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{FiniteGraph, GraphSource, VertexId, WeightedGraph};

/// Birth-death chain on ℕ with `ω(n, n+1) = (n+1)^α` and `μ ≡ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirthDeath {
    alpha: f64,
}

impl BirthDeath {
    pub fn new(alpha: f64) -> Self {
        BirthDeath { alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ω(n, n+1)`.
    pub fn rate(&self, n: u64) -> f64 {
        ((n + 1) as f64).powf(self.alpha)
    }

    /// `(μ(0..n), ω(k, k+1) for k < n)` for the oracle.
    pub fn sequences(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![1.0; n], (0..n as u64).map(|k| self.rate(k)).collect())
    }
}

impl GraphSource for BirthDeath {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let n = x.0;
        let mut out = Vec::with_capacity(2);
        if n > 0 {
            out.push((VertexId(n - 1), self.rate(n - 1)));
        }
        out.push((VertexId(n + 1), self.rate(n)));
        Ok(out)
    }

    fn measure(&self, _x: VertexId) -> Result<f64, GraphError> {
        Ok(1.0)
    }

    fn weighted_degree(&self, x: VertexId) -> Result<f64, GraphError> {
        let n = x.0;
        let down = if n > 0 { self.rate(n - 1) } else { 0.0 };
        Ok(down + self.rate(n))
    }

    fn describe(&self) -> String {
        format!("birth-death chain, omega(n,n+1) = (n+1)^{}", self.alpha)
    }
}

/// `birth_death(α)` as a shareable graph.
pub fn birth_death(alpha: f64) -> WeightedGraph {
    WeightedGraph::new(BirthDeath::new(alpha))
}

/// Nearest-neighbor chain `0 - 1 - 2 - ...` with explicit measure and
/// weight sequences, `ω(n, n+1) = omega[n]`. Vertices past the end of the
/// sequences are not generated.
#[derive(Clone, Debug, PartialEq)]
pub struct NearestNeighborChain {
    mu: Vec<f64>,
    omega: Vec<f64>,
}

impl NearestNeighborChain {
    pub fn new(mu: Vec<f64>, omega: Vec<f64>) -> Self {
        NearestNeighborChain { mu, omega }
    }

    pub fn measures(&self) -> &[f64] {
        &self.mu
    }

    pub fn weights(&self) -> &[f64] {
        &self.omega
    }
}

impl GraphSource for NearestNeighborChain {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let n = x.0 as usize;
        if n >= self.mu.len() || n >= self.omega.len() {
            return Err(GraphError::DepthCapExceeded(self.omega.len().min(self.mu.len())));
        }
        let mut out = Vec::with_capacity(2);
        if n > 0 {
            out.push((VertexId(x.0 - 1), self.omega[n - 1]));
        }
        out.push((VertexId(x.0 + 1), self.omega[n]));
        Ok(out)
    }

    fn measure(&self, x: VertexId) -> Result<f64, GraphError> {
        self.mu
            .get(x.0 as usize)
            .copied()
            .ok_or(GraphError::DepthCapExceeded(self.mu.len()))
    }

    fn describe(&self) -> String {
        format!("nearest-neighbor chain of length {}", self.mu.len())
    }
}

/// Anti-tree: spheres `S_1, S_2, ...` of sizes `⌈k^a⌉`, every vertex of
/// `S_k` joined to every vertex of `S_{k+1}`, `ω ≡ 1`, `μ ≡ 1`.
///
/// Ids are assigned sphere by sphere, the root (`S_1`) is vertex 0.
/// Spheres up to `depth_cap + 1` are laid out; asking for the neighbors of a
/// vertex in the last laid-out sphere fails with `DepthCapExceeded`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiTree {
    a: f64,
    depth_cap: usize,
    neighbor_cap: usize,
    /// offsets[k - 1] = first id of S_k; one extra entry closes the last sphere
    offsets: Vec<u64>,
}

impl AntiTree {
    pub fn new(a: f64, depth_cap: usize) -> Result<Self, GraphError> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(GraphError::InvalidArgument(format!(
                "anti-tree exponent must be >= 0, got {a}"
            )));
        }
        if depth_cap == 0 {
            return Err(GraphError::InvalidArgument(
                "anti-tree depth cap must be positive".into(),
            ));
        }
        let mut offsets = vec![0u64];
        for k in 1..=depth_cap + 1 {
            let size = sphere_size(a, k);
            offsets.push(offsets[k - 1] + size);
        }
        Ok(AntiTree {
            a,
            depth_cap,
            neighbor_cap: 1_000_000,
            offsets,
        })
    }

    pub fn with_neighbor_cap(mut self, cap: usize) -> Self {
        self.neighbor_cap = cap;
        self
    }

    pub fn exponent(&self) -> f64 {
        self.a
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    /// `|S_k|` for `1 ≤ k ≤ depth_cap + 1`.
    pub fn sphere_len(&self, k: usize) -> u64 {
        self.offsets[k] - self.offsets[k - 1]
    }

    /// Ids of `S_k`.
    pub fn sphere(&self, k: usize) -> std::ops::Range<u64> {
        self.offsets[k - 1]..self.offsets[k]
    }

    /// Sphere index of a vertex, if it is laid out.
    pub fn sphere_of(&self, x: VertexId) -> Option<usize> {
        if x.0 >= *self.offsets.last().expect("offsets never empty") {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= x.0))
    }

    /// Radial quotient: vertex `j` stands for `S_{j+1}`, with
    /// `μ(j) = |S_{j+1}|` and `ω(j, j+1) = |S_{j+1}|·|S_{j+2}|`.
    ///
    /// Radial functions have the same formal Laplacian on both graphs, so
    /// Dirichlet resolvents on combinatorial balls around the root agree.
    pub fn radial_quotient(&self) -> NearestNeighborChain {
        let mu: Vec<f64> = (1..=self.depth_cap).map(|k| self.sphere_len(k) as f64).collect();
        let omega = (1..=self.depth_cap)
            .map(|k| self.sphere_len(k) as f64 * self.sphere_len(k + 1) as f64)
            .collect();
        NearestNeighborChain::new(mu, omega)
    }

    /// Total edge weight between `S_k` and `S_{k+1}`, summed edge by edge.
    pub fn layer_weight(&self, k: usize) -> Result<f64, GraphError> {
        let next = self.sphere(k + 1);
        let mut total = 0.0;
        for x in self.sphere(k) {
            total += self
                .neighbors(VertexId(x))?
                .into_iter()
                .filter(|(y, _)| next.contains(&y.0))
                .map(|(_, w)| w)
                .sum::<f64>();
        }
        Ok(total)
    }
}

fn sphere_size(a: f64, k: usize) -> u64 {
    ((k as f64).powf(a).ceil() as u64).max(1)
}

impl GraphSource for AntiTree {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let k = self.sphere_of(x).ok_or(GraphError::UnknownVertex(x))?;
        if k > self.depth_cap {
            return Err(GraphError::DepthCapExceeded(self.depth_cap));
        }
        let below = if k > 1 { self.sphere(k - 1) } else { 0..0 };
        let above = self.sphere(k + 1);
        let count = (below.end - below.start + above.end - above.start) as usize;
        if count > self.neighbor_cap {
            return Err(GraphError::DegreeCapExceeded {
                vertex: x,
                count,
                cap: self.neighbor_cap,
            });
        }
        Ok(below.chain(above).map(|y| (VertexId(y), 1.0)).collect())
    }

    fn measure(&self, x: VertexId) -> Result<f64, GraphError> {
        self.sphere_of(x).map(|_| 1.0).ok_or(GraphError::UnknownVertex(x))
    }

    fn weighted_degree(&self, x: VertexId) -> Result<f64, GraphError> {
        let k = self.sphere_of(x).ok_or(GraphError::UnknownVertex(x))?;
        if k > self.depth_cap {
            return Err(GraphError::DepthCapExceeded(self.depth_cap));
        }
        let below = if k > 1 { self.sphere_len(k - 1) } else { 0 };
        Ok((below + self.sphere_len(k + 1)) as f64)
    }

    fn describe(&self) -> String {
        format!("anti-tree, |S_k| = ceil(k^{}), depth cap {}", self.a, self.depth_cap)
    }
}

pub fn anti_tree(a: f64, depth_cap: usize) -> Result<WeightedGraph, GraphError> {
    Ok(WeightedGraph::new(AntiTree::new(a, depth_cap)?))
}

/// Square lattice ℤ² with unit weights and measure.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Lattice;

impl Lattice {
    pub fn id(i: i32, j: i32) -> VertexId {
        let zig = |v: i32| ((v << 1) ^ (v >> 31)) as u32 as u64;
        VertexId((zig(i) << 32) | zig(j))
    }

    pub fn coords(x: VertexId) -> (i32, i32) {
        let unzig = |z: u32| ((z >> 1) as i32) ^ -((z & 1) as i32);
        (unzig((x.0 >> 32) as u32), unzig(x.0 as u32))
    }
}

impl GraphSource for Lattice {
    fn neighbors(&self, x: VertexId) -> Result<Vec<(VertexId, f64)>, GraphError> {
        let (i, j) = Lattice::coords(x);
        let mut out: Vec<(VertexId, f64)> = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
            .into_iter()
            .map(|(a, b)| (Lattice::id(a, b), 1.0))
            .collect();
        out.sort_by_key(|&(y, _)| y);
        Ok(out)
    }

    fn measure(&self, _x: VertexId) -> Result<f64, GraphError> {
        Ok(1.0)
    }

    fn weighted_degree(&self, _x: VertexId) -> Result<f64, GraphError> {
        Ok(4.0)
    }

    fn describe(&self) -> String {
        "square lattice Z^2".into()
    }
}

/// Erdős–Rényi graph on `0..n` with weights and measures drawn uniformly
/// from `weight_range`; only the largest connected component is kept.
pub fn random_graph(n: usize, edge_prob: f64, weight_range: (f64, f64), seed: u64) -> FiniteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = weight_range;
    let draw = |rng: &mut ChaCha8Rng| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let mut g = FiniteGraph::new();
    for i in 0..n as u64 {
        let mu = draw(&mut rng);
        g.add_vertex(VertexId(i), mu);
    }
    for i in 0..n as u64 {
        for j in i + 1..n as u64 {
            if rng.random::<f64>() < edge_prob {
                let w = draw(&mut rng);
                g.add_edge(VertexId(i), VertexId(j), w);
            }
        }
    }
    largest_component(&g)
}

/// Random recursive tree: vertex `i` attaches to a uniform earlier vertex.
pub fn random_tree(n: usize, weight_range: (f64, f64), seed: u64) -> FiniteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = weight_range;
    let draw = |rng: &mut ChaCha8Rng| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let mut g = FiniteGraph::new();
    for i in 0..n as u64 {
        let mu = draw(&mut rng);
        g.add_vertex(VertexId(i), mu);
        if i > 0 {
            let parent = rng.random_range(0..i);
            let w = draw(&mut rng);
            g.add_edge(VertexId(parent), VertexId(i), w);
        }
    }
    g
}

/// Largest connected component; ties go to the component with the smallest id.
pub fn largest_component(g: &FiniteGraph) -> FiniteGraph {
    let mut seen = BTreeSet::new();
    let mut best: Vec<VertexId> = Vec::new();
    for start in g.vertices() {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(x) = queue.pop_front() {
            for (y, _) in GraphSource::neighbors(g, x).unwrap_or_default() {
                if seen.insert(y) {
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    let keep: BTreeSet<VertexId> = best.into_iter().collect();
    let mut out = FiniteGraph::new();
    for &x in &keep {
        out.add_vertex(x, g.measure_of(x).unwrap_or(1.0));
    }
    for (x, y, w) in g.edges() {
        if keep.contains(&x) {
            out.add_edge(x, y, w);
        }
    }
    out
}

/// Which family to build, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    BirthDeath {
        alpha: f64,
    },
    AntiTree {
        a: f64,
        depth_cap: usize,
    },
    Lattice,
    RandomTree {
        n: usize,
        weight_lo: f64,
        weight_hi: f64,
        seed: u64,
    },
    RandomGraph {
        n: usize,
        edge_prob: f64,
        weight_lo: f64,
        weight_hi: f64,
        seed: u64,
    },
    File {
        path: String,
    },
}

impl FamilySpec {
    /// Parses a kind name with `key=value` parameters. Missing parameters
    /// take documented defaults.
    pub fn from_params(kind: &str, params: &BTreeMap<String, String>, seed: u64) -> Result<Self, GraphError> {
        let num = |key: &str, default: f64| -> Result<f64, GraphError> {
            match params.get(key) {
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| GraphError::InvalidArgument(format!("parameter {key}: not a number: {s}"))),
                None => Ok(default),
            }
        };
        let spec = match kind {
            "birth_death" => FamilySpec::BirthDeath {
                alpha: num("alpha", 3.0)?,
            },
            "anti_tree" => FamilySpec::AntiTree {
                a: num("a", 3.0)?,
                depth_cap: num("depth_cap", 64.0)? as usize,
            },
            "lattice" => FamilySpec::Lattice,
            "random_tree" => FamilySpec::RandomTree {
                n: num("n", 50.0)? as usize,
                weight_lo: num("weight_lo", 0.5)?,
                weight_hi: num("weight_hi", 2.0)?,
                seed: num("seed", seed as f64)? as u64,
            },
            "random_graph" | "random" => FamilySpec::RandomGraph {
                n: num("n", 50.0)? as usize,
                edge_prob: num("edge_prob", 0.1)?,
                weight_lo: num("weight_lo", 0.5)?,
                weight_hi: num("weight_hi", 2.0)?,
                seed: num("seed", seed as f64)? as u64,
            },
            "file" => FamilySpec::File {
                path: params
                    .get("path")
                    .cloned()
                    .ok_or_else(|| GraphError::InvalidArgument("file family needs path=...".into()))?,
            },
            other => return Err(GraphError::InvalidArgument(format!("unknown family kind {other}"))),
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), GraphError> {
        let bad = |m: String| Err(GraphError::InvalidArgument(m));
        match *self {
            FamilySpec::AntiTree { a, depth_cap } if !(a >= 0.0) || depth_cap == 0 => bad(format!(
                "anti_tree needs a >= 0 and depth_cap > 0, got a={a}, depth_cap={depth_cap}"
            )),
            FamilySpec::RandomGraph { n, edge_prob, .. } if n > 10_000 || !(0.0..=1.0).contains(&edge_prob) => bad(
                format!("random_graph needs n <= 10^4 and edge_prob in [0,1], got n={n}, p={edge_prob}"),
            ),
            FamilySpec::RandomTree { n, .. } if n > 10_000 || n == 0 => {
                bad(format!("random_tree needs 0 < n <= 10^4, got {n}"))
            }
            FamilySpec::BirthDeath { alpha } if !alpha.is_finite() => bad("alpha must be finite".into()),
            _ => Ok(()),
        }
    }

    /// Builds the graph; `File` specs are read through [`crate::io`].
    pub fn build(&self) -> Result<WeightedGraph, crate::error::LabError> {
        Ok(match self {
            FamilySpec::BirthDeath { alpha } => birth_death(*alpha),
            FamilySpec::AntiTree { a, depth_cap } => anti_tree(*a, *depth_cap)?,
            FamilySpec::Lattice => WeightedGraph::new(Lattice),
            FamilySpec::RandomTree {
                n,
                weight_lo,
                weight_hi,
                seed,
            } => random_tree(*n, (*weight_lo, *weight_hi), *seed).into_graph(),
            FamilySpec::RandomGraph {
                n,
                edge_prob,
                weight_lo,
                weight_hi,
                seed,
            } => random_graph(*n, *edge_prob, (*weight_lo, *weight_hi), *seed).into_graph(),
            FamilySpec::File { path } => crate::io::load_graph_file(path)?.into_graph(),
        })
    }

    /// Natural root vertex of the family.
    pub fn root(&self) -> VertexId {
        match self {
            FamilySpec::Lattice => Lattice::id(0, 0),
            _ => VertexId(0),
        }
    }
}
