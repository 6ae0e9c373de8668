use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use sclab::completeness::{
    incompleteness_defect, nearest_neighbor_oracle, simulate_batch, ChainLimits, OracleReport, OracleVerdict,
    Termination, Verdict,
};
use sclab::families::{AntiTree, BirthDeath, FamilySpec};
use sclab::growth::{grigoryan_integral, growth_fit, volume_profile};
use sclab::io::{window_graph, write_graph, write_metric};
use sclab::metric_graph::MetricGraph;
use sclab::report::{fingerprint, resolvent_block, AnalysisReport};
use sclab::verify::{audit_metric_graph, verify_all};
use sclab::{ball_window, check_adapted, degree_metric, Adaptedness, EdgeLengths, PathMetric, VertexId, WeightedGraph};
use serde_json::json;

use crate::args::{FamilyAction, InputArgs, WindowArgs};
use crate::input::{family_spec, load, DefaultMetric, LoadedInput};

/// What a command produced: a JSON report or raw text.
pub enum Output {
    Report(AnalysisReport),
    Text(String),
}

/// Oracle sequence length for birth-death chains.
const ORACLE_TERMS: usize = 10_000;

struct Timer {
    enabled: bool,
    start: Instant,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Timer {
            enabled,
            start: Instant::now(),
        }
    }

    fn record(&mut self, report: &mut AnalysisReport, name: &str) {
        if self.enabled {
            report.record_timing(name, self.start.elapsed().as_secs_f64() * 1e3);
        }
        self.start = Instant::now();
    }
}

fn new_report(command: &str, input: &LoadedInput, params: &serde_json::Value) -> AnalysisReport {
    let mut parts = vec![command.as_bytes().to_vec()];
    parts.extend(input.fingerprint_parts.iter().cloned());
    parts.push(params.to_string().into_bytes());
    let mut report = AnalysisReport::new(command, fingerprint(parts));
    report.insert(
        "input",
        json!({
            "source": input.source,
            "metric": input.metric,
            "center": input.center,
        }),
    );
    report
}

pub fn check_adapted_cmd(args: &InputArgs, window: &WindowArgs) -> Result<Output> {
    let mut timer = Timer::new(args.timings);
    let input = load(args, DefaultMetric::Degree)?;
    let params = json!({ "radius": window.radius, "c0": input.c0 });
    let mut report = new_report("check-adapted", &input, &params);
    let w = input.window(window.radius, args.ball_cap)?;
    let d = PathMetric::new(&input.graph, input.lengths.clone()).with_cap(args.ball_cap);
    let rep = check_adapted(&input.graph, &d, input.c0, &w)?;
    if rep.verdict != Adaptedness::Adapted {
        report.warn(format!("metric is {:?} on the window", rep.verdict).to_lowercase());
    }
    report.insert(
        "adaptedness",
        json!({ "params": params, "window_size": w.len(), "report": rep }),
    );
    timer.record(&mut report, "check_adapted");
    Ok(Output::Report(report))
}

fn oracle_for(spec: Option<&FamilySpec>) -> Option<OracleReport> {
    match spec? {
        FamilySpec::BirthDeath { alpha } => {
            let (mu, om) = BirthDeath::new(*alpha).sequences(ORACLE_TERMS);
            Some(nearest_neighbor_oracle(&mu, &om))
        }
        FamilySpec::AntiTree { a, .. } => {
            let q = AntiTree::new(*a, ORACLE_TERMS).ok()?.radial_quotient();
            Some(nearest_neighbor_oracle(q.measures(), q.weights()))
        }
        _ => None,
    }
}

pub fn resolvent_cmd(args: &InputArgs, lambda: f64, radii: &[f64]) -> Result<Output> {
    let mut timer = Timer::new(args.timings);
    let input = load(args, DefaultMetric::Unit)?;
    let params = json!({ "lambda": lambda, "radii": radii });
    let mut report = new_report("resolvent", &input, &params);

    // Anti-tree balls around the root are too large to solve directly; radial
    // functions see the same resolvent on the radial quotient.
    let (graph, center, reduction) = match &input.family {
        Some(FamilySpec::AntiTree { a, .. }) if input.center == VertexId(0) && input.lengths.is_unit() => {
            let depth = radii.last().map_or(1, |r| r.ceil() as usize + 2);
            let q = AntiTree::new(*a, depth)?.radial_quotient();
            (WeightedGraph::new(q), VertexId(0), Some("radial_quotient"))
        }
        _ => (input.graph.clone(), input.center, None),
    };
    let (profile, verdict) = incompleteness_defect(&graph, &input.lengths, center, lambda, radii, args.ball_cap)?;
    timer.record(&mut report, "resolvent");

    if !verdict.monotone {
        report.warn("deficiency is not monotone in the radius");
    }
    if let Some(worst) = profile.residuals.iter().copied().reduce(f64::max) {
        if worst > 1e-9 {
            report.warn(format!("solver residual {worst:.2e} above 1e-9"));
        }
    }
    let mut block = resolvent_block(&profile, &verdict, args.seed);
    block["reduction"] = json!(reduction);
    report.insert("resolvent", block);

    if let Some(oracle) = oracle_for(input.family.as_ref()) {
        let agrees = match oracle.verdict {
            OracleVerdict::Incomplete => verdict.verdict == Verdict::Incomplete,
            OracleVerdict::Complete => verdict.verdict == Verdict::CompleteUpToEvidence,
            OracleVerdict::Indeterminate => true,
        };
        if !agrees {
            report.warn(format!(
                "resolvent verdict {:?} disagrees with the nearest-neighbor oracle {:?}",
                verdict.verdict, oracle.verdict
            ));
        }
        report.insert(
            "oracle",
            json!({ "terms": ORACLE_TERMS, "report": oracle, "agrees": agrees }),
        );
        timer.record(&mut report, "oracle");
    }
    Ok(Output::Report(report))
}

pub fn simulate_cmd(
    args: &InputArgs,
    trajectories: usize,
    horizon: f64,
    jump_cap: u64,
    escape_radius: Option<f64>,
) -> Result<Output> {
    let mut timer = Timer::new(args.timings);
    let input = load(args, DefaultMetric::Unit)?;
    let params = json!({
        "trajectories": trajectories,
        "horizon": horizon,
        "jump_cap": jump_cap,
        "escape_radius": escape_radius,
        "seed": args.seed,
    });
    let mut report = new_report("simulate", &input, &params);
    let mut limits = ChainLimits::new(horizon, jump_cap);
    limits.ball_cap = args.ball_cap;
    if let Some(r) = escape_radius {
        limits = limits.with_radius(input.lengths.clone(), r);
    }
    let batch = simulate_batch(&input.graph, input.center, &limits, trajectories, args.seed)?;
    timer.record(&mut report, "simulate");
    report.insert(
        "monte_carlo",
        json!({
            "params": params,
            "summary": batch,
            "fraction_jump_cap": batch.fraction(Termination::JumpCap),
            "fraction_horizon": batch.fraction(Termination::HorizonReached),
            "fraction_escape": batch.fraction(Termination::RadiusEscape),
        }),
    );
    Ok(Output::Report(report))
}

pub fn metric_verify_cmd(args: &InputArgs, window: &WindowArgs, samples: usize) -> Result<Output> {
    let mut timer = Timer::new(args.timings);
    let input = load(args, DefaultMetric::Degree)?;
    let params = json!({ "radius": window.radius, "samples": samples, "seed": args.seed, "c0": input.c0 });
    let mut report = new_report("metric-verify", &input, &params);
    let w = input.window(window.radius, args.ball_cap)?;
    let d = PathMetric::new(&input.graph, input.lengths.clone()).with_cap(args.ball_cap);
    let x = MetricGraph::build(&input.graph, &d, &w)?;
    for warning in x.warnings() {
        report.warn(warning.clone());
    }
    let audit = audit_metric_graph(&input.graph, &d, &x, input.center, input.c0, args.seed, samples)?;
    timer.record(&mut report, "metric_verify");
    if !audit.holds(1e-10) {
        report.warn("metric-graph audit found a violation above 1e-10");
    }
    report.insert(
        "metric_graph",
        json!({
            "params": params,
            "vertices": x.vertices().count(),
            "edges": x.edge_count(),
            "total_measure": x.total_measure(),
            "audit": audit,
        }),
    );
    Ok(Output::Report(report))
}

pub fn volume_cmd(
    args: &InputArgs,
    r_max: f64,
    r_min: Option<f64>,
    steps: usize,
    csv: Option<&Path>,
) -> Result<Output> {
    let mut timer = Timer::new(args.timings);
    let input = load(args, DefaultMetric::Degree)?;
    let r_min = r_min.unwrap_or(r_max / steps.max(1) as f64);
    let params = json!({ "r_max": r_max, "r_min": r_min, "steps": steps });
    let mut report = new_report("volume", &input, &params);
    let d = PathMetric::new(&input.graph, input.lengths.clone()).with_cap(args.ball_cap);
    let profile = volume_profile(&input.graph, &d, input.center, r_max, steps)?;
    if profile.truncated {
        report.warn(format!(
            "ball cap reached; profile stops at r = {}",
            profile.points.last().map_or(0.0, |p| p.0)
        ));
    }
    let integral = grigoryan_integral(&profile, r_min);
    let fit = match growth_fit(&profile) {
        Ok(f) => Some(f),
        Err(e) => {
            report.warn(e.to_string());
            None
        }
    };
    timer.record(&mut report, "volume");
    if let Some(path) = csv {
        fs::write(path, profile.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    report.insert(
        "volume",
        json!({ "params": params, "profile": profile, "grigoryan": integral, "growth_fit": fit }),
    );
    Ok(Output::Report(report))
}

pub fn family_cmd(action: &FamilyAction) -> Result<Output> {
    let FamilyAction::Gen {
        kind,
        params,
        seed,
        radius,
        metric_out,
        c0,
        ..
    } = action;
    let spec = family_spec(kind, params, None, *seed)?;
    let g = spec.build()?;
    let finite = match g.finite_vertices() {
        Some(_) => sclab::GraphWindow::whole(&g)?,
        None => ball_window(
            &g,
            &EdgeLengths::unit(),
            spec.root(),
            *radius,
            sclab::graph::DEFAULT_BALL_CAP,
        )?,
    };
    let mut text = format!("# {}\n", serde_json::to_string(&spec)?);
    if g.finite_vertices().is_none() {
        text.push_str(&format!("# ball of radius {radius} around {}\n", spec.root()));
    }
    let emitted = window_graph(&finite);
    text.push_str(&write_graph(&emitted));
    if let Some(path) = metric_out {
        // lengths come from the emitted graph, so a cut window gets its own degrees
        let h = emitted.clone().into_graph();
        let table = degree_metric(&h, *c0).tabulate(&h, emitted.edges().into_iter().map(|(x, y, _)| (x, y)))?;
        let body = write_metric(&table).expect("tabulated lengths are a table");
        fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Output::Text(text))
}

pub fn verify_all_cmd(seed: u64, timings: bool) -> Result<Output> {
    let mut timer = Timer::new(timings);
    let mut report = AnalysisReport::new(
        "verify-all",
        fingerprint([b"verify-all".to_vec(), seed.to_le_bytes().to_vec()]),
    );
    let suites = verify_all(seed)?;
    timer.record(&mut report, "verify_all");
    for s in suites.iter().filter(|s| !s.passed) {
        report.warn(format!(
            "suite {} failed: worst {:.3e} > {:.1e}",
            s.name, s.worst, s.tolerance
        ));
    }
    report.insert("suites", json!({ "seed": seed, "results": suites }));
    Ok(Output::Report(report))
}
