//! Numerical laboratory for stochastic completeness of weighted graphs.
//!
//! The crate is organised around the objects the analyses pass between
//! each other:
//!
//! * [`graph`]: lazily enumerated weighted graphs, finite windows, the
//!   formal Laplacian and the energy form;
//! * [`metric`]: edge lengths, path metrics and the adaptedness test;
//! * [`completeness`]: Dirichlet resolvent exhaustion, WOYMP certificates,
//!   Monte Carlo of the minimal chain, FOT probes and the birth-death oracle;
//! * [`metric_graph`]: the associated metric graph and its exact
//!   piecewise-polynomial calculus;
//! * [`growth`]: volume profiles and growth diagnostics;
//! * [`families`]: deterministic graph generators;
//! * [`io`], [`report`], [`verify`]: file formats, JSON reports and the
//!   bundled property suites.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod completeness;
pub mod error;
pub mod families;
pub mod graph;
pub mod growth;
pub mod io;
pub mod metric;
pub mod metric_graph;
pub mod poly;
pub mod report;
pub mod solver;
pub mod verify;

pub use error::{GraphError, LabError, ParseError, SolverError};
pub use graph::{
    ball_window, energy, formal_laplacian, truncate_by_jump_size, validate, FiniteGraph, GraphSource, GraphWindow,
    VertexFunction, VertexId, Violation, WeightedGraph,
};
pub use metric::{check_adapted, degree_metric, path_distance, Adaptedness, EdgeLengths, PathMetric};
