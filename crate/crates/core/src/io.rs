//! Line-oriented text formats.
//!
//! Graphs: `vertex <id> <mu>` and `edge <id1> <id2> <omega>`, each
//! undirected edge listed once. Metrics: `len <id1> <id2> <length>` plus an
//! optional single `c0 <value>`. Metric graphs are dumped as
//! `medge <id1> <id2> <l> <p> <q>` and piecewise polynomials as
//! `poly <eid> <a> <b> <c>`. Blank lines and `#` comments are ignored.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, ParseError};
use crate::graph::{FiniteGraph, GraphWindow, VertexId};
use crate::metric::{EdgeLengths, DEFAULT_C0};
use crate::metric_graph::{MetricGraph, PiecewisePoly};
use crate::poly::Quadratic;

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (i + 1, body.split_whitespace().collect()))
    })
}

fn field<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| ParseError::new(line, format!("invalid {what}: {s:?}")))
}

fn arity(line: usize, fields: &[&str], n: usize) -> Result<(), ParseError> {
    if fields.len() != n {
        return Err(ParseError::new(
            line,
            format!("`{}` expects {} fields, found {}", fields[0], n - 1, fields.len() - 1),
        ));
    }
    Ok(())
}

fn positive(line: usize, what: &str, v: f64) -> Result<f64, ParseError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ParseError::new(
            line,
            format!("{what} must be positive and finite, got {v}"),
        ))
    }
}

/// Parses the text graph format into a symmetric finite graph.
pub fn parse_graph(text: &str) -> Result<FiniteGraph, ParseError> {
    let mut g = FiniteGraph::new();
    let mut declared = HashSet::new();
    let mut edges = Vec::new();
    let mut seen_edges = HashSet::new();
    for (line, f) in records(text) {
        match f[0] {
            "vertex" => {
                arity(line, &f, 3)?;
                let x = VertexId(field(line, "vertex id", f[1])?);
                let mu = positive(line, "vertex measure", field(line, "measure", f[2])?)?;
                if !declared.insert(x) {
                    return Err(ParseError::new(line, format!("vertex {x} declared twice")));
                }
                g.add_vertex(x, mu);
            }
            "edge" => {
                arity(line, &f, 4)?;
                let x = VertexId(field(line, "vertex id", f[1])?);
                let y = VertexId(field(line, "vertex id", f[2])?);
                let w = positive(line, "edge weight", field(line, "weight", f[3])?)?;
                if x == y {
                    return Err(ParseError::new(line, format!("loop at vertex {x}")));
                }
                if !seen_edges.insert((x.min(y), x.max(y))) {
                    return Err(ParseError::new(line, format!("edge ({x},{y}) listed twice")));
                }
                edges.push((line, x, y, w));
            }
            other => return Err(ParseError::new(line, format!("unknown record `{other}`"))),
        }
    }
    for (line, x, y, w) in edges {
        for z in [x, y] {
            if !declared.contains(&z) {
                return Err(ParseError::new(line, format!("edge uses undeclared vertex {z}")));
            }
        }
        g.add_edge(x, y, w);
    }
    Ok(g)
}

pub fn load_graph_file(path: impl AsRef<Path>) -> Result<FiniteGraph, LabError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| LabError::Analysis(format!("{}: {e}", path.as_ref().display())))?;
    Ok(parse_graph(&text)?)
}

/// Writes vertices then edges, both in id order.
pub fn write_graph(g: &FiniteGraph) -> String {
    let mut out = String::new();
    for x in g.vertices() {
        let mu = g.measure_of(x).unwrap_or(1.0);
        let _ = writeln!(out, "vertex {x} {mu}");
    }
    for (x, y, w) in g.edges() {
        let _ = writeln!(out, "edge {x} {y} {w}");
    }
    out
}

/// Finite graph induced by a window, with its vertex measures.
pub fn window_graph(window: &GraphWindow) -> FiniteGraph {
    let mut g = FiniteGraph::new();
    for (i, &x) in window.vertices().iter().enumerate() {
        g.add_vertex(x, window.measure(i));
    }
    for (i, j, w) in window.edges() {
        g.add_edge(window.vertices()[i], window.vertices()[j], w);
    }
    g
}

/// Parses a metric file into explicit edge lengths.
pub fn parse_metric(text: &str) -> Result<EdgeLengths, ParseError> {
    let mut table = BTreeMap::new();
    let mut c0 = None;
    for (line, f) in records(text) {
        match f[0] {
            "len" => {
                arity(line, &f, 4)?;
                let x = VertexId(field(line, "vertex id", f[1])?);
                let y = VertexId(field(line, "vertex id", f[2])?);
                let l = positive(line, "edge length", field(line, "length", f[3])?)?;
                if table.insert((x.min(y), x.max(y)), l).is_some() {
                    return Err(ParseError::new(line, format!("length for ({x},{y}) given twice")));
                }
            }
            "c0" => {
                arity(line, &f, 2)?;
                if c0.is_some() {
                    return Err(ParseError::new(line, "c0 given twice"));
                }
                c0 = Some(positive(line, "c0", field(line, "c0", f[1])?)?);
            }
            other => return Err(ParseError::new(line, format!("unknown record `{other}`"))),
        }
    }
    Ok(EdgeLengths::from_table(table, c0.unwrap_or(DEFAULT_C0)))
}

pub fn load_metric_file(path: impl AsRef<Path>) -> Result<EdgeLengths, LabError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| LabError::Analysis(format!("{}: {e}", path.as_ref().display())))?;
    Ok(parse_metric(&text)?)
}

pub fn write_metric(lengths: &EdgeLengths) -> Option<String> {
    let entries = lengths.table_entries()?;
    let mut out = format!("c0 {}\n", lengths.c0());
    for ((x, y), l) in entries {
        let _ = writeln!(out, "len {x} {y} {l}");
    }
    Some(out)
}

/// `medge <source> <target> <l> <p> <q>` per oriented edge, in edge order.
pub fn write_metric_graph(x: &MetricGraph) -> String {
    let mut out = String::new();
    for e in x.edges() {
        let _ = writeln!(out, "medge {} {} {} {} {}", e.source, e.target, e.length, e.p, e.q);
    }
    out
}

/// `poly <eid> <a> <b> <c>` per edge.
pub fn write_poly(f: &PiecewisePoly) -> String {
    let mut out = String::new();
    for (eid, q) in f.edge_polys().iter().enumerate() {
        let _ = writeln!(out, "poly {eid} {} {} {}", q.a, q.b, q.c);
    }
    out
}

/// Reads `poly` records back onto a metric graph; every edge must appear once.
pub fn parse_poly(x: &MetricGraph, text: &str) -> Result<PiecewisePoly, ParseError> {
    let mut polys: Vec<Option<Quadratic>> = vec![None; x.edge_count()];
    let mut last_line = 0;
    for (line, f) in records(text) {
        last_line = line;
        if f[0] != "poly" {
            return Err(ParseError::new(line, format!("unknown record `{}`", f[0])));
        }
        arity(line, &f, 5)?;
        let eid: usize = field(line, "edge id", f[1])?;
        let q = Quadratic::new(
            field(line, "coefficient", f[2])?,
            field(line, "coefficient", f[3])?,
            field(line, "coefficient", f[4])?,
        );
        match polys.get_mut(eid) {
            Some(slot @ None) => *slot = Some(q),
            Some(Some(_)) => return Err(ParseError::new(line, format!("edge {eid} given twice"))),
            None => return Err(ParseError::new(line, format!("edge {eid} out of range"))),
        }
    }
    let polys: Vec<Quadratic> = polys
        .into_iter()
        .enumerate()
        .map(|(eid, p)| p.ok_or_else(|| ParseError::new(last_line, format!("edge {eid} missing"))))
        .collect::<Result<_, _>>()?;
    PiecewisePoly::from_edge_polys(x, polys).map_err(|e| ParseError::new(last_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSource;

    #[test]
    fn graph_text_roundtrip() {
        let text = "# a path\nvertex 0 1\nvertex 1 2.5\nvertex 2 1\nedge 0 1 3\nedge 2 1 0.5 # trailing\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(
            g.neighbors(VertexId(1)).unwrap(),
            vec![(VertexId(0), 3.0), (VertexId(2), 0.5)]
        );
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn malformed_graphs_report_lines() {
        let cases = [
            ("vertex 0 1\nvertex 0 1\n", 2),
            ("vertex 0 1\nedge 0 0 1\n", 2),
            ("vertex 0 1\nvertex 1 1\nedge 0 1 x\n", 3),
            ("vertex 0 1\nedge 0 1 1\n", 2),
            ("vertex 0 1\nvertex 1 1\nedge 0 1 1\nedge 1 0 1\n", 4),
            ("vertex 0 -1\n", 1),
            ("\n\nnode 1\n", 3),
            ("vertex 0\n", 1),
        ];
        for (text, line) in cases {
            let err = parse_graph(text).unwrap_err();
            assert_eq!(err.line, line, "{text:?}: {err}");
        }
    }

    #[test]
    fn metric_file() {
        let m = parse_metric("c0 0.5\nlen 1 0 0.25\n").unwrap();
        assert_eq!(m.c0(), 0.5);
        assert_eq!(m.table_entries().unwrap(), vec![((VertexId(0), VertexId(1)), 0.25)]);
        assert_eq!(
            parse_metric(&write_metric(&m).unwrap()).unwrap().table_entries(),
            m.table_entries()
        );
        assert_eq!(parse_metric("len 0 1 1\n").unwrap().c0(), DEFAULT_C0);
        assert_eq!(parse_metric("c0 1\nc0 2\n").unwrap_err().line, 2);
        assert_eq!(parse_metric("len 0 1 0\n").unwrap_err().line, 1);
    }
}
