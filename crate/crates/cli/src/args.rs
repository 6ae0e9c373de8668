use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "sclab",
    version,
    about = "Stochastic completeness diagnostics for weighted graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Adaptedness of a metric on a finite graph or a ball window.
    CheckAdapted {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Dirichlet resolvent exhaustion and the completeness verdict.
    Resolvent {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', default_values_t = [100.0, 200.0, 400.0])]
        radii: Vec<f64>,
    },
    /// Monte Carlo of the minimal chain.
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1000)]
        trajectories: usize,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 100_000)]
        jump_cap: u64,
        /// Stop trajectories leaving this ball.
        #[arg(long)]
        escape_radius: Option<f64>,
    },
    /// Comparison-lemma margins and exact identities on the metric graph.
    MetricVerify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Volume profile, Grigor'yan integral and log-volume growth fit.
    Volume {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        /// Lower end of the integral; defaults to the first positive radius.
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        /// Also write the profile as `r,volume` CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Graph families.
    Family {
        #[command(subcommand)]
        action: FamilyAction,
    },
    /// Every bundled property suite.
    VerifyAll {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum FamilyAction {
    /// Emit a family member in the text graph format.
    Gen {
        #[arg(long)]
        kind: String,
        /// `key=value`, repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Ball radius used to cut infinite families down to a finite window.
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        /// Also write the degree metric of the emitted graph to this file.
        #[arg(long)]
        metric_out: Option<PathBuf>,
        /// Jump size for `--metric-out`.
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Text graph file.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    /// Family kind: birth_death, anti_tree, lattice, random_tree, random_graph.
    #[arg(long)]
    pub family: Option<String>,
    /// Family parameter `key=value`, repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
    /// Shorthand for the birth-death `alpha` or the anti-tree `a`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Metric file; without it the analysis picks its default metric.
    #[arg(long, conflicts_with = "unit_metric")]
    pub metric: Option<PathBuf>,
    /// Use the combinatorial (unit length) metric.
    #[arg(long)]
    pub unit_metric: bool,
    /// Jump size for the degree metric.
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long)]
    pub center: Option<u64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = sclab::graph::DEFAULT_BALL_CAP)]
    pub ball_cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings (makes reports run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Combinatorial ball radius used when the graph is infinite.
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}
