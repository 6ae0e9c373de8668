//! Numerical tests for stochastic (in)completeness.
//!
//! The main detector solves `(Δ + λ)u = λ` on growing balls with `u = 0`
//! outside. The deficiency `1 − u(x0)` decreases to the value at `x0` of the
//! largest bounded solution of `Δw + λw = 0` with `0 ≤ w ≤ 1`, which is
//! nonzero exactly when the graph is stochastically incomplete.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GraphError, LabError};
use crate::graph::{ball_window, energy, formal_laplacian, GraphWindow, VertexFunction, VertexId, WeightedGraph};
use crate::metric::{EdgeLengths, PathMetric};
use crate::solver::{pcg_jacobi, CgOptions, SparseSymmetric};

/// Deficiency above which a stabilised profile is called incomplete.
pub const INCOMPLETE_THRESHOLD: f64 = 1e-2;
/// Largest change between the last two radii for the profile to count as stabilised.
pub const STABILITY_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub u: VertexFunction,
    /// Values in window order.
    pub values: Vec<f64>,
    /// `max |(Δ+λ)u − λ| / (λ + Deg)` over the window.
    pub scaled_residual: f64,
    /// `max |(Δ+λ)u − λ|` over the window.
    pub residual: f64,
    pub iterations: usize,
}

fn resolvent_system(window: &GraphWindow, lambda: f64) -> (SparseSymmetric, Vec<f64>) {
    let rows = (0..window.len())
        .map(|i| {
            let mut row = Vec::with_capacity(window.adjacent(i).len() + 1);
            row.push((i, lambda * window.measure(i) + window.total_weight(i)));
            row.extend(window.adjacent(i).iter().map(|&(j, w)| (j, -w)));
            row
        })
        .collect();
    let rhs = (0..window.len()).map(|i| lambda * window.measure(i)).collect();
    (SparseSymmetric::from_rows(rows), rhs)
}

/// Solves `(Δ + λ)u = λ` on the window with `u = 0` outside it.
pub fn dirichlet_resolvent(window: &GraphWindow, lambda: f64) -> Result<ResolventSolution, LabError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(GraphError::InvalidArgument(format!("lambda must be positive, got {lambda}")).into());
    }
    if window.is_empty() {
        return Ok(ResolventSolution {
            u: VertexFunction::new(),
            values: vec![],
            scaled_residual: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    let (a, b) = resolvent_system(window, lambda);
    let out = pcg_jacobi(&a, &b, CgOptions::default())?;
    let r = a.residual(&out.solution, &b);
    let residual = r
        .iter()
        .enumerate()
        .map(|(i, ri)| ri.abs() / window.measure(i))
        .fold(0.0, f64::max);
    Ok(ResolventSolution {
        u: VertexFunction::from_window(window, &out.solution),
        values: out.solution,
        scaled_residual: out.scaled_residual,
        residual,
        iterations: out.iterations,
    })
}

/// `max |Δw + λw| / (λ + Deg)` for `w` given on the window and `w = 1` outside.
pub fn lambda_harmonic_residual(window: &GraphWindow, w: &[f64], lambda: f64) -> f64 {
    (0..window.len())
        .map(|i| {
            let mu = window.measure(i);
            let mut acc: f64 = window.adjacent(i).iter().map(|&(j, wt)| wt * (w[i] - w[j])).sum();
            acc += window.exterior_weight(i) * (w[i] - 1.0);
            let lhs = acc / mu + lambda * w[i];
            lhs.abs() / (lambda + window.total_weight(i) / mu)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolventProfile {
    pub lambda: f64,
    pub center: VertexId,
    pub radii: Vec<f64>,
    pub window_sizes: Vec<usize>,
    pub deficiency: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    #[serde(skip)]
    pub u_values: Vec<VertexFunction>,
}

impl ResolventProfile {
    /// Deficiency never increases with the radius (up to `tol`).
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.deficiency.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Incomplete,
    CompleteUpToEvidence,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub extrapolated: f64,
    pub last_change: Option<f64>,
    pub threshold: f64,
    pub stability_tolerance: f64,
    pub monotone: bool,
}

/// Aitken extrapolation of the last three deficiencies when they contract
/// geometrically, clamped to `[0, last]`; the last value otherwise.
pub fn extrapolate_deficiency(deficiency: &[f64]) -> f64 {
    let n = deficiency.len();
    let Some(&last) = deficiency.last() else {
        return 0.0;
    };
    if n < 3 {
        return last;
    }
    let (a, b, c) = (deficiency[n - 3], deficiency[n - 2], last);
    let (d1, d2) = (a - b, b - c);
    if d1 > 0.0 && d2 > 0.0 && d2 < d1 {
        let q = d2 / d1;
        (c - d2 * q / (1.0 - q)).clamp(0.0, c.max(0.0))
    } else {
        last
    }
}

pub fn decide(profile: &ResolventProfile) -> VerdictReport {
    let d = &profile.deficiency;
    let extrapolated = extrapolate_deficiency(d);
    let last_change = (d.len() >= 2).then(|| (d[d.len() - 1] - d[d.len() - 2]).abs());
    let stable = last_change.is_some_and(|c| c < STABILITY_TOLERANCE);
    let verdict = if extrapolated > INCOMPLETE_THRESHOLD && stable {
        Verdict::Incomplete
    } else {
        Verdict::CompleteUpToEvidence
    };
    VerdictReport {
        verdict,
        extrapolated,
        last_change,
        threshold: INCOMPLETE_THRESHOLD,
        stability_tolerance: STABILITY_TOLERANCE,
        monotone: profile.is_monotone(1e-10),
    }
}

/// Resolvent deficiency at `x0` on the balls of the given radii.
pub fn incompleteness_defect(
    g: &WeightedGraph,
    lengths: &EdgeLengths,
    x0: VertexId,
    lambda: f64,
    radii: &[f64],
    cap: usize,
) -> Result<(ResolventProfile, VerdictReport), LabError> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GraphError::InvalidArgument("radii must be strictly increasing".into()).into());
    }
    let solved: Vec<(usize, ResolventSolution)> = radii
        .par_iter()
        .map(|&r| {
            let window = ball_window(g, lengths, x0, r, cap)?;
            let sol = dirichlet_resolvent(&window, lambda)?;
            Ok::<_, LabError>((window.len(), sol))
        })
        .collect::<Result<_, _>>()?;
    let mut profile = ResolventProfile {
        lambda,
        center: x0,
        radii: radii.to_vec(),
        window_sizes: vec![],
        deficiency: vec![],
        residuals: vec![],
        iterations: vec![],
        u_values: vec![],
    };
    for (size, sol) in solved {
        profile.window_sizes.push(size);
        profile.deficiency.push(1.0 - sol.u.value(x0));
        profile.residuals.push(sol.scaled_residual);
        profile.iterations.push(sol.iterations);
        profile.u_values.push(sol.u);
    }
    let verdict = decide(&profile);
    Ok((profile, verdict))
}

/// Candidate WOYMP-violating function with its level parameters.
#[derive(Clone, Debug)]
pub struct WoympCertificate {
    pub u: VertexFunction,
    pub alpha: f64,
    pub u_star: f64,
}

impl WoympCertificate {
    /// Certificate with `u_star` the supremum of `u` over the window.
    pub fn on_window(u: VertexFunction, alpha: f64, window: &GraphWindow) -> Result<Self, GraphError> {
        if !(alpha > 0.0) {
            return Err(GraphError::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let mut u_star = f64::NEG_INFINITY;
        for &x in window.vertices() {
            u_star = u_star.max(u.require(x)?);
        }
        Ok(WoympCertificate { u, alpha, u_star })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WoympStatus {
    Violating,
    NotViolating,
    /// No interior vertex lies in the superlevel set.
    Vacuous,
}

#[derive(Clone, Debug, Serialize)]
pub struct WoympOutcome {
    pub status: WoympStatus,
    /// Interior vertices of `Ω_α = {u > u* − α}`.
    pub witnesses: Vec<VertexId>,
    /// Witnesses where `Δu > −α`.
    pub failures: Vec<VertexId>,
    pub max_laplacian: Option<f64>,
}

/// Checks `Δu ≤ −α` on every interior vertex of `Ω_α`.
pub fn woymp_check(
    g: &WeightedGraph,
    cert: &WoympCertificate,
    window: &GraphWindow,
) -> Result<WoympOutcome, GraphError> {
    let level = cert.u_star - cert.alpha;
    let mut witnesses = Vec::new();
    let mut failures = Vec::new();
    let mut max_lap: Option<f64> = None;
    for &x in &window.interior() {
        if cert.u.require(x)? > level {
            witnesses.push(x);
            let lap = formal_laplacian(g, &cert.u, x)?;
            max_lap = Some(max_lap.map_or(lap, |m| m.max(lap)));
            if lap > -cert.alpha {
                failures.push(x);
            }
        }
    }
    let status = if witnesses.is_empty() {
        WoympStatus::Vacuous
    } else if failures.is_empty() {
        WoympStatus::Violating
    } else {
        WoympStatus::NotViolating
    };
    Ok(WoympOutcome {
        status,
        witnesses,
        failures,
        max_laplacian: max_lap,
    })
}

/// `ν(x) = Σ_y ω(x,y) d²(x,y)`.
pub fn special_measure(d: &PathMetric, x: VertexId) -> Result<f64, GraphError> {
    let g = d.graph();
    let weights = g.neighbors(x)?;
    let dist = d.neighbor_distances(x)?;
    Ok(weights.iter().zip(dist).map(|(&(_, w), (_, l))| w * l * l).sum())
}

/// The graph `(V, ω, ν)` with the special measure of `d`.
pub fn with_special_measure(d: &PathMetric) -> WeightedGraph {
    let metric = d.clone();
    d.graph().with_measure(move |x| special_measure(&metric, x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    JumpCap,
    RadiusEscape,
}

#[derive(Clone, Debug)]
pub struct ChainLimits {
    pub horizon: f64,
    pub jump_cap: u64,
    /// Stop when the chain leaves this ball (`lengths`, radius).
    pub radius_cap: Option<(EdgeLengths, f64)>,
    pub ball_cap: usize,
}

impl ChainLimits {
    pub fn new(horizon: f64, jump_cap: u64) -> Self {
        ChainLimits {
            horizon,
            jump_cap,
            radius_cap: None,
            ball_cap: crate::graph::DEFAULT_BALL_CAP,
        }
    }

    pub fn with_radius(mut self, lengths: EdgeLengths, radius: f64) -> Self {
        self.radius_cap = Some((lengths, radius));
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub vertices: Vec<VertexId>,
    /// `times[k]` is the time of arrival at `vertices[k]`; `times[0] = 0`.
    pub times: Vec<f64>,
    pub status: Termination,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub status: Termination,
    pub jumps: u64,
    pub final_time: f64,
    pub final_vertex: VertexId,
}

/// Independent stream for trajectory `index`: ChaCha8 keyed by `seed`,
/// stream number `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_chain(
    g: &WeightedGraph,
    x0: VertexId,
    limits: &ChainLimits,
    region: Option<&GraphWindow>,
    rng: &mut ChaCha8Rng,
    mut record: impl FnMut(VertexId, f64),
) -> Result<TrajectorySummary, GraphError> {
    let mut x = x0;
    let mut t = 0.0;
    let mut jumps = 0u64;
    record(x, t);
    let status = loop {
        if region.is_some_and(|w| !w.contains(x)) {
            break Termination::RadiusEscape;
        }
        if jumps >= limits.jump_cap {
            break Termination::JumpCap;
        }
        let neighbors = g.neighbors(x)?;
        let total: f64 = neighbors.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            break Termination::HorizonReached;
        }
        let rate = total / g.measure(x)?;
        let hold: f64 = rng.sample::<f64, _>(Exp1) / rate;
        if t + hold > limits.horizon {
            break Termination::HorizonReached;
        }
        t += hold;
        let mut target = rng.random::<f64>() * total;
        let mut next = neighbors[neighbors.len() - 1].0;
        for &(y, w) in &neighbors {
            if target < w {
                next = y;
                break;
            }
            target -= w;
        }
        x = next;
        jumps += 1;
        record(x, t);
    };
    Ok(TrajectorySummary {
        status,
        jumps,
        final_time: t,
        final_vertex: x,
    })
}

fn escape_region(g: &WeightedGraph, x0: VertexId, limits: &ChainLimits) -> Result<Option<GraphWindow>, GraphError> {
    match &limits.radius_cap {
        Some((lengths, r)) if r.is_finite() => Ok(Some(ball_window(g, lengths, x0, *r, limits.ball_cap)?)),
        _ => Ok(None),
    }
}

/// One trajectory of the minimal chain: holding rate `Deg(x)`, jumps to `y`
/// with probability `ω(x,y)/Σ_z ω(x,z)`, stopped by the first limit hit.
pub fn simulate_chain(
    g: &WeightedGraph,
    x0: VertexId,
    limits: &ChainLimits,
    seed: u64,
    index: u64,
) -> Result<Trajectory, GraphError> {
    let region = escape_region(g, x0, limits)?;
    let mut rng = trajectory_rng(seed, index);
    let mut vertices = Vec::new();
    let mut times = Vec::new();
    let summary = run_chain(g, x0, limits, region.as_ref(), &mut rng, |x, t| {
        vertices.push(x);
        times.push(t);
    })?;
    Ok(Trajectory {
        vertices,
        times,
        status: summary.status,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchSummary {
    pub seed: u64,
    pub trajectories: usize,
    pub horizon_reached: usize,
    pub jump_cap: usize,
    pub radius_escape: usize,
    pub mean_final_time: f64,
    #[serde(skip)]
    pub runs: Vec<TrajectorySummary>,
}

impl BatchSummary {
    pub fn fraction(&self, status: Termination) -> f64 {
        let n = match status {
            Termination::HorizonReached => self.horizon_reached,
            Termination::JumpCap => self.jump_cap,
            Termination::RadiusEscape => self.radius_escape,
        };
        n as f64 / self.trajectories.max(1) as f64
    }
}

/// `count` independent trajectories; trajectory `i` uses stream `i`.
pub fn simulate_batch(
    g: &WeightedGraph,
    x0: VertexId,
    limits: &ChainLimits,
    count: usize,
    seed: u64,
) -> Result<BatchSummary, GraphError> {
    let region = escape_region(g, x0, limits)?;
    let runs: Vec<TrajectorySummary> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i);
            run_chain(g, x0, limits, region.as_ref(), &mut rng, |_, _| {})
        })
        .collect::<Result<_, _>>()?;
    let tally = |s: Termination| runs.iter().filter(|r| r.status == s).count();
    Ok(BatchSummary {
        seed,
        trajectories: count,
        horizon_reached: tally(Termination::HorizonReached),
        jump_cap: tally(Termination::JumpCap),
        radius_escape: tally(Termination::RadiusEscape),
        mean_final_time: runs.iter().map(|r| r.final_time).sum::<f64>() / count.max(1) as f64,
        runs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FotTrend {
    /// The energy at the largest radius is negligible.
    Vanishing,
    /// Magnitudes non-increasing but not yet negligible.
    Decreasing,
    NotDecreasing,
}

#[derive(Clone, Debug, Serialize)]
pub struct FotProbe {
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    pub trend: FotTrend,
}

/// Cut-off `v_R(x) = clamp((2R − d(x0,x))/R, 0, 1)`.
pub fn cutoff(distance: Option<f64>, radius: f64) -> f64 {
    match distance {
        Some(d) => ((2.0 * radius - d) / radius).clamp(0.0, 1.0),
        None => 0.0,
    }
}

/// `ε(v_R, w)` for each cut-off radius `R`.
pub fn fot_probe(
    g: &WeightedGraph,
    x0: VertexId,
    radii: &[f64],
    w: &VertexFunction,
    d: &PathMetric,
) -> Result<FotProbe, GraphError> {
    let mut targets: Vec<VertexId> = w.support().into_iter().collect();
    for x in w.support() {
        targets.extend(g.neighbors(x)?.into_iter().map(|(y, _)| y));
    }
    targets.sort();
    targets.dedup();
    let dist = d.distances_to(x0, &targets)?;
    let mut energies = Vec::with_capacity(radii.len());
    for &r in radii {
        let v: VertexFunction = targets.iter().zip(&dist).map(|(&x, &dx)| (x, cutoff(dx, r))).collect();
        // v − 1 has the same differences and vanishes on the ball, keeping
        // the energy sum finite
        let shifted = v.map(|s| s - 1.0);
        energies.push(energy(g, &shifted, w)?);
    }
    let mags: Vec<f64> = energies.iter().map(|e| e.abs()).collect();
    let nonincreasing = mags.windows(2).all(|p| p[1] <= p[0] + 1e-15);
    let scale = mags.first().copied().unwrap_or(0.0).max(1.0);
    let trend = match mags.last() {
        Some(&last) if last <= 1e-10 * scale => FotTrend::Vanishing,
        _ if nonincreasing => FotTrend::Decreasing,
        _ => FotTrend::NotDecreasing,
    };
    Ok(FotProbe {
        radii: radii.to_vec(),
        energies,
        trend,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleVerdict {
    Complete,
    Incomplete,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub verdict: OracleVerdict,
    /// Fitted decay exponent `p` of the terms, `a_n ≈ C n^{-p}`.
    pub exponent: f64,
    /// Ratio `N·a_N / (N/4)·a_{N/4}` used for the harmonic comparison.
    pub harmonic_ratio: f64,
    pub partial_sum: f64,
}

/// Exponent above which the terms are summable.
pub const ORACLE_CONVERGENT_EXPONENT: f64 = 1.5;
/// Exponent below which the terms are not summable.
pub const ORACLE_DIVERGENT_EXPONENT: f64 = 0.9;
/// In the borderline band, `n·a_n` may shrink by at most this factor over
/// the tail for the series to count as harmonic-like divergent.
pub const ORACLE_HARMONIC_RATIO: f64 = 0.9;

/// Reuter–Feller summability test for a birth-death chain on ℕ: the chain
/// is complete iff `Σ_n μ({0..n})/ω(n, n+1) = ∞`.
///
/// Only finitely many terms are available, so the decision fits the decay
/// exponent of the terms over the last three quarters of the sequence and
/// compares against the harmonic series in the borderline band.
pub fn nearest_neighbor_oracle(mu: &[f64], omega: &[f64]) -> OracleReport {
    let n = omega.len().min(mu.len());
    let mut volume = 0.0;
    let terms: Vec<f64> = (0..n)
        .map(|k| {
            volume += mu[k];
            volume / omega[k]
        })
        .collect();
    let partial_sum = terms.iter().sum();
    if n < 16 {
        return OracleReport {
            verdict: OracleVerdict::Indeterminate,
            exponent: f64::NAN,
            harmonic_ratio: f64::NAN,
            partial_sum,
        };
    }
    let start = n / 4;
    let pts: Vec<(f64, f64)> = (start..n).map(|k| (((k + 1) as f64).ln(), terms[k].ln())).collect();
    let slope = least_squares_slope(&pts);
    let exponent = -slope;
    let harmonic_ratio = (n as f64 * terms[n - 1]) / ((start + 1) as f64 * terms[start]);
    let verdict = if exponent >= ORACLE_CONVERGENT_EXPONENT {
        OracleVerdict::Incomplete
    } else if exponent <= ORACLE_DIVERGENT_EXPONENT || harmonic_ratio >= ORACLE_HARMONIC_RATIO {
        OracleVerdict::Complete
    } else {
        OracleVerdict::Indeterminate
    };
    OracleReport {
        verdict,
        exponent,
        harmonic_ratio,
        partial_sum,
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    least_squares(pts).1
}

/// `(intercept, slope)` of the ordinary least-squares line.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
