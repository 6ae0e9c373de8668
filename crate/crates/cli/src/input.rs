use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sclab::families::FamilySpec;
use sclab::io::{parse_graph, parse_metric};
use sclab::{ball_window, degree_metric, EdgeLengths, FiniteGraph, GraphWindow, VertexId, WeightedGraph};

use crate::args::InputArgs;

/// Metric used when `--metric` and `--unit-metric` are both absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefaultMetric {
    Unit,
    Degree,
}

pub struct LoadedInput {
    pub graph: WeightedGraph,
    pub finite: Option<FiniteGraph>,
    pub family: Option<FamilySpec>,
    pub center: VertexId,
    pub lengths: EdgeLengths,
    pub c0: f64,
    /// Human-readable source and metric, for the report.
    pub source: String,
    pub metric: String,
    pub fingerprint_parts: Vec<Vec<u8>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn family_spec(kind: &str, params: &[(String, String)], alpha: Option<f64>, seed: u64) -> Result<FamilySpec> {
    let mut map: BTreeMap<String, String> = params.iter().cloned().collect();
    if let Some(alpha) = alpha {
        let key = if kind == "anti_tree" { "a" } else { "alpha" };
        map.insert(key.to_string(), alpha.to_string());
    }
    Ok(FamilySpec::from_params(kind, &map, seed)?)
}

pub fn load(args: &InputArgs, default_metric: DefaultMetric) -> Result<LoadedInput> {
    let mut parts: Vec<Vec<u8>> = vec![];
    let (graph, finite, family, source) = match (&args.graph, &args.family) {
        (Some(path), None) => {
            let text = read(path)?;
            let g = parse_graph(&text).with_context(|| format!("parsing {}", path.display()))?;
            parts.push(b"graph".to_vec());
            parts.push(text.into_bytes());
            (
                g.clone().into_graph(),
                Some(g),
                None,
                format!("file {}", path.display()),
            )
        }
        (None, Some(kind)) => {
            let spec = family_spec(kind, &args.params, args.alpha, args.seed)?;
            let json = serde_json::to_string(&spec)?;
            parts.push(b"family".to_vec());
            parts.push(json.clone().into_bytes());
            if let FamilySpec::File { path } = &spec {
                parts.push(read(Path::new(path))?.into_bytes());
            }
            (spec.build()?, None, Some(spec), json)
        }
        (None, None) => bail!("one of --graph or --family is required"),
        (Some(_), Some(_)) => bail!("--graph and --family are mutually exclusive"),
    };
    let center = match (args.center, &finite, &family) {
        (Some(c), _, _) => VertexId(c),
        (None, Some(g), _) => g.vertices().next().context("graph file has no vertices")?,
        (None, None, Some(spec)) => spec.root(),
        (None, None, None) => unreachable!("graph source resolved above"),
    };
    if graph.measure(center).is_err() {
        bail!("center vertex {center} does not exist");
    }
    let (lengths, metric) = match (&args.metric, args.unit_metric, default_metric) {
        (Some(path), _, _) => {
            let text = read(path)?;
            let lengths = parse_metric(&text).with_context(|| format!("parsing {}", path.display()))?;
            parts.push(b"metric".to_vec());
            parts.push(text.into_bytes());
            (lengths, format!("file {}", path.display()))
        }
        (None, true, _) | (None, false, DefaultMetric::Unit) => (EdgeLengths::unit(), "unit".to_string()),
        (None, false, DefaultMetric::Degree) => (degree_metric(&graph, args.c0), format!("degree, c0 = {}", args.c0)),
    };
    parts.push(metric.clone().into_bytes());
    let c0 = lengths.c0();
    Ok(LoadedInput {
        graph,
        finite,
        family,
        center,
        lengths,
        c0,
        source,
        metric,
        fingerprint_parts: parts,
    })
}

impl LoadedInput {
    /// Whole graph when finite, otherwise the combinatorial ball around the center.
    pub fn window(&self, radius: f64, cap: usize) -> Result<GraphWindow> {
        Ok(match &self.finite {
            Some(_) => GraphWindow::whole(&self.graph)?,
            None => ball_window(&self.graph, &EdgeLengths::unit(), self.center, radius, cap)?,
        })
    }
}
