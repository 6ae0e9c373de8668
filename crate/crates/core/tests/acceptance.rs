//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sclab::completeness::{
    incompleteness_defect, nearest_neighbor_oracle, simulate_batch, ChainLimits, OracleVerdict, Termination, Verdict,
};
use sclab::families::{anti_tree, birth_death, AntiTree, BirthDeath};
use sclab::growth::{grigoryan_integral, growth_fit, volume_profile, IntegralTrend, VolumeProfile};
use sclab::verify;
use sclab::{EdgeLengths, LabError, PathMetric, VertexId, WeightedGraph};

type Criterion = fn() -> Result<Outcome, LabError>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Result<Outcome, LabError> {
    Ok(Outcome { passed, detail })
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

fn dichotomy() -> Result<Outcome, LabError> {
    let t = Instant::now();
    let unit = EdgeLengths::unit();
    let oracle = |alpha: f64| {
        let (mu, om) = BirthDeath::new(alpha).sequences(10_000);
        nearest_neighbor_oracle(&mu, &om).verdict
    };

    let (p3, v3) = incompleteness_defect(
        &birth_death(3.0),
        &unit,
        VertexId(0),
        1.0,
        &[250.0, 500.0, 1000.0],
        10_000,
    )?;
    let d3 = &p3.deficiency;
    let stable = (d3[1] - d3[2]).abs() < 1e-3 && d3[2] > 1e-2;
    let agree3 = v3.verdict == Verdict::Incomplete && oracle(3.0) == OracleVerdict::Incomplete;

    let (p1, v1) = incompleteness_defect(
        &birth_death(1.0),
        &unit,
        VertexId(0),
        1.0,
        &[250.0, 500.0, 1000.0],
        10_000,
    )?;
    let small1 = p1.deficiency[2] < 1e-2;
    let agree1 = v1.verdict == Verdict::CompleteUpToEvidence && oracle(1.0) == OracleVerdict::Complete;

    let (p2, v2) = incompleteness_defect(
        &birth_death(2.0),
        &unit,
        VertexId(0),
        1.0,
        &[250.0, 500.0, 1000.0],
        10_000,
    )?;
    let boundary2 = v2.verdict == Verdict::CompleteUpToEvidence;

    let elapsed = t.elapsed();
    check(
        stable && agree3 && small1 && agree1 && boundary2 && within_budget(elapsed, 10.0),
        format!(
            "alpha=3 defect {:.4}/{:.4}/{:.4}; alpha=1 defect(1000) {:.2e}; alpha=2 defect(1000) {:.4} ({:?}); {:.2?}",
            d3[0], d3[1], d3[2], p1.deficiency[2], p2.deficiency[2], v2.verdict, elapsed
        ),
    )
}

fn anti_tree_showcase() -> Result<Outcome, LabError> {
    let t = Instant::now();
    let unit = EdgeLengths::unit();

    // The radial quotient reproduces the full graph's resolvent at the root.
    let full = anti_tree(3.0, 6)?;
    let small_quotient = WeightedGraph::new(AntiTree::new(3.0, 6)?.radial_quotient());
    let (pf, _) = incompleteness_defect(&full, &unit, VertexId(0), 1.0, &[2.0, 5.0], 100_000)?;
    let (pq, _) = incompleteness_defect(&small_quotient, &unit, VertexId(0), 1.0, &[2.0, 5.0], 100_000)?;
    let quotient_gap = pf
        .deficiency
        .iter()
        .zip(&pq.deficiency)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let quotient = WeightedGraph::new(AntiTree::new(3.0, 60)?.radial_quotient());
    let radii = [10.0, 20.0, 30.0, 40.0, 50.0];
    let (p, v) = incompleteness_defect(&quotient, &unit, VertexId(0), 1.0, &radii, 1_000)?;

    // Graph-metric volume grows like a polynomial: |B_n| = (Σ_{k ≤ n+1} k³).
    let depth = 10;
    let g = anti_tree(3.0, depth + 1)?;
    let d = PathMetric::new(&g, unit.clone()).with_cap(10_000_000);
    let profile = volume_profile(&g, &d, VertexId(0), depth as f64, depth)?;
    let exact = profile.points.iter().all(|&(r, vol)| {
        let m = r as u64 + 1;
        vol == ((m * (m + 1) / 2).pow(2)) as f64
    });
    let fit = growth_fit(&profile)?;

    let elapsed = t.elapsed();
    check(
        quotient_gap < 1e-10
            && v.verdict == Verdict::Incomplete
            && fit.polynomial_trend
            && exact
            && within_budget(elapsed, 20.0),
        format!(
            "quotient gap {quotient_gap:.1e}; defect(50) {:.4} ({:?}); fit b {:.3} early {:.3} late {:.3} polynomial_trend {}; {:.2?}",
            p.deficiency.last().unwrap(),
            v.verdict,
            fit.b,
            fit.b_early.unwrap_or(f64::NAN),
            fit.b_late.unwrap_or(f64::NAN),
            fit.polynomial_trend,
            elapsed
        ),
    )
}

fn monte_carlo_explosion() -> Result<Outcome, LabError> {
    let t = Instant::now();
    let limits = ChainLimits::new(10.0, 100_000);
    let b3 = simulate_batch(&birth_death(3.0), VertexId(0), &limits, 1000, 42)?;
    let b1 = simulate_batch(&birth_death(1.0), VertexId(0), &limits, 1000, 42)?;
    let f3 = b3.fraction(Termination::JumpCap);
    let f1 = b1.fraction(Termination::JumpCap);
    let elapsed = t.elapsed();
    check(
        f3 >= 0.9 && f1 <= 0.01 && within_budget(elapsed, 30.0),
        format!(
            "jump cap hit: alpha=3 {:.1}%, alpha=1 {:.1}%; {:.2?}",
            100.0 * f3,
            100.0 * f1,
            elapsed
        ),
    )
}

fn suite(outcome: verify::SuiteOutcome, budget_s: Option<(f64, Instant)>) -> Result<Outcome, LabError> {
    let elapsed = budget_s.map(|(_, t)| t.elapsed());
    let on_time = budget_s.is_none_or(|(b, t)| within_budget(t.elapsed(), b));
    check(
        outcome.passed && on_time,
        format!(
            "{} cases, worst {:.3e} (tolerance {:.1e}){}",
            outcome.cases,
            outcome.worst,
            outcome.tolerance,
            elapsed.map(|e| format!("; {e:.2?}")).unwrap_or_default()
        ),
    )
}

fn exact_identities() -> Result<Outcome, LabError> {
    let t = Instant::now();
    suite(verify::exact_identities(42, 200)?, Some((5.0, t)))
}

fn comparison_lemma() -> Result<Outcome, LabError> {
    suite(verify::comparison_lemma(42, 100)?, None)
}

fn woymp_chain() -> Result<Outcome, LabError> {
    let windows = verify::woymp_windows(42)?;
    let nonempty = windows.len() == 20;
    let mut out = suite(verify::woymp_inequality(42)?, None)?;
    out.passed &= nonempty;
    Ok(out)
}

fn sobolev() -> Result<Outcome, LabError> {
    suite(verify::sobolev(42, 1000)?, None)
}

fn grigoryan() -> Result<Outcome, LabError> {
    let sq = grigoryan_integral(&VolumeProfile::synthetic(1.0, 20.0, 256, |r| (r * r).exp()), 1.0);
    let sq_exact = 20f64.ln();
    let cube = grigoryan_integral(&VolumeProfile::synthetic(1.0, 8.0, 256, |r| (r * r * r).exp()), 1.0);
    let cube_exact = 1.0 - 1.0 / 8.0;
    let e_sq = (sq.value / sq_exact - 1.0).abs();
    let e_cube = (cube.value / cube_exact - 1.0).abs();
    check(
        sq.diagnostic == IntegralTrend::DivergingTrend
            && cube.diagnostic == IntegralTrend::ConvergingTrend
            && e_sq < 0.02
            && e_cube < 0.02,
        format!(
            "exp(r^2): {:.5} vs {:.5} ({:?}); exp(r^3): {:.5} vs {:.5} ({:?})",
            sq.value, sq_exact, sq.diagnostic, cube.value, cube_exact, cube.diagnostic
        ),
    )
}

fn invariants() -> Result<Outcome, LabError> {
    let mut all = verify::resolvent_invariants(42, 100)?;
    all.push(verify::measure_reduction(42)?);
    all.push(verify::fot_vanishing(42)?);
    let passed = all.iter().all(|s| s.passed);
    let detail = all
        .iter()
        .map(|s| format!("{} {:.1e}", s.name, s.worst))
        .collect::<Vec<_>>()
        .join(", ");
    check(passed, detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("1 dichotomy reproduction", dichotomy),
        ("2 anti-tree showcase", anti_tree_showcase),
        ("3 monte carlo explosion", monte_carlo_explosion),
        ("4 exact identity suite", exact_identities),
        ("5 comparison lemma", comparison_lemma),
        ("6 woymp inequality chain", woymp_chain),
        ("7 sobolev suite", sobolev),
        ("8 grigoryan integral", grigoryan),
        ("9 invariant suites", invariants),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (tag, detail) = match run() {
            Ok(o) if o.passed => ("PASS", o.detail),
            Ok(o) => ("FAIL", o.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} criterion {name}: {detail}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
