//! Volume profiles and volume-growth diagnostics.

use std::fmt::Write as _;

use serde::Serialize;

use crate::completeness::least_squares;
use crate::error::{GraphError, LabError};
use crate::graph::{VertexId, WeightedGraph};
use crate::metric::{search, PathMetric};
use crate::metric_graph::{ball_measure, MetricGraph};

pub const DEFAULT_STEPS: usize = 64;

/// Tail exponent of the integrand at or below which the trend is divergent.
pub const DIVERGING_EXPONENT: f64 = 1.1;
/// Tail exponent at or above which the trend is convergent.
pub const CONVERGING_EXPONENT: f64 = 1.2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeProfile {
    pub center: VertexId,
    pub metric: String,
    /// `(r, volume)` with `r` strictly increasing.
    pub points: Vec<(f64, f64)>,
    /// The ball cap was hit; points stop at the last radius known exactly.
    pub truncated: bool,
}

impl VolumeProfile {
    /// Profile of a closed-form volume function at `steps + 1` equally spaced radii.
    pub fn synthetic(r_min: f64, r_max: f64, steps: usize, volume: impl Fn(f64) -> f64) -> Self {
        let points = (0..=steps)
            .map(|k| {
                let r = r_min + (r_max - r_min) * k as f64 / steps as f64;
                (r, volume(r))
            })
            .collect();
        VolumeProfile {
            center: VertexId(0),
            metric: "synthetic".into(),
            points,
            truncated: false,
        }
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,volume\n");
        for (r, v) in &self.points {
            let _ = writeln!(out, "{r},{v}");
        }
        out
    }
}

fn radii(r_max: f64, steps: usize) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |k| r_max * k as f64 / steps as f64)
}

/// `μ(B_d(x0, r))` at `r = k·r_max/steps`, `k = 0..=steps`.
pub fn volume_profile(
    g: &WeightedGraph,
    d: &PathMetric,
    x0: VertexId,
    r_max: f64,
    steps: usize,
) -> Result<VolumeProfile, GraphError> {
    if steps == 0 || !(r_max >= 0.0) {
        return Err(GraphError::InvalidArgument("need steps >= 1 and r_max >= 0".into()));
    }
    let outcome = search(g, d.lengths(), x0, r_max, d.cap(), |_| false)?;
    // everything strictly closer than the last settled vertex is known
    let exact_below = if outcome.complete {
        f64::INFINITY
    } else {
        outcome.settled.last().map_or(0.0, |s| s.1)
    };
    let mut cumulative = Vec::with_capacity(outcome.settled.len());
    let mut mass = 0.0;
    for &(x, r) in &outcome.settled {
        mass += g.measure(x)?;
        cumulative.push((r, mass));
    }
    let points = radii(r_max, steps)
        .take_while(|&r| r < exact_below)
        .map(|r| {
            let k = cumulative.partition_point(|&(dist, _)| dist <= r);
            (r, cumulative[k - 1].1)
        })
        .collect();
    Ok(VolumeProfile {
        center: x0,
        metric: d.lengths().tag(),
        points,
        truncated: !outcome.complete,
    })
}

/// `μ̂(B_{d_l}(x0, r))` on the metric graph at the same radii as [`volume_profile`].
pub fn metric_graph_profile(x: &MetricGraph, x0: VertexId, r_max: f64, steps: usize) -> VolumeProfile {
    VolumeProfile {
        center: x0,
        metric: "metric_graph".into(),
        points: radii(r_max, steps).map(|r| (r, ball_measure(x, x0, r))).collect(),
        truncated: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralTrend {
    DivergingTrend,
    ConvergingTrend,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrigoryanIntegral {
    pub value: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Fitted `p` in `r/log V(r) ≈ C r^{-p}` over the upper half of the range.
    pub tail_exponent: Option<f64>,
    pub diagnostic: IntegralTrend,
}

fn integrand(r: f64, volume: f64) -> f64 {
    r / volume.ln().max(1.0)
}

/// Trapezoid value of `∫ r / max(log V(r), 1) dr` from `r_min` to the end of
/// the profile, with a heuristic tail trend.
pub fn grigoryan_integral(profile: &VolumeProfile, r_min: f64) -> GrigoryanIntegral {
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for w in profile.points.windows(2) {
        let ((r0, v0), (r1, v1)) = (w[0], w[1]);
        if r0 < r_min && r1 > r_min {
            let s = (r_min - r0) / (r1 - r0);
            let f0 = integrand(r0, v0);
            samples.push((r_min, f0 + s * (integrand(r1, v1) - f0)));
        }
    }
    samples.extend(
        profile
            .points
            .iter()
            .filter(|p| p.0 >= r_min)
            .map(|&(r, v)| (r, integrand(r, v))),
    );
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r_max = samples.last().map_or(r_min, |s| s.0);
    let value = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    let tail: Vec<(f64, f64)> = samples[samples.len() / 2..]
        .iter()
        .filter(|s| s.0 > 0.0 && s.1 > 0.0)
        .map(|s| (s.0.ln(), s.1.ln()))
        .collect();
    let tail_exponent = (samples.len() >= 3 && tail.len() >= 2).then(|| -least_squares(&tail).1);
    let diagnostic = match tail_exponent {
        Some(p) if p <= DIVERGING_EXPONENT => IntegralTrend::DivergingTrend,
        Some(p) if p >= CONVERGING_EXPONENT => IntegralTrend::ConvergingTrend,
        _ => IntegralTrend::Indeterminate,
    };
    GrigoryanIntegral {
        value,
        r_min,
        r_max,
        tail_exponent,
        diagnostic,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    /// `log V ≈ a·r^b` over the tail.
    pub a: f64,
    pub b: f64,
    pub b_early: Option<f64>,
    pub b_late: Option<f64>,
    /// `b` decays along the tail, as for polynomial volume.
    pub polynomial_trend: bool,
    /// `b ≤ 2`: growth no faster than `exp(C r²)`.
    pub completeness_regime: bool,
    pub points_used: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

fn loglog(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    points.iter().map(|&(r, v)| (r.ln(), v.ln().ln())).collect()
}

/// Least-squares fit of `log log V` against `log r` on points with `r > 0`, `V > e`.
pub fn growth_fit(profile: &VolumeProfile) -> Result<GrowthFit, LabError> {
    let tail: Vec<(f64, f64)> = profile
        .points
        .iter()
        .copied()
        .filter(|&(r, v)| r > 0.0 && v > std::f64::consts::E && v.is_finite())
        .collect();
    if tail.len() < MIN_FIT_POINTS {
        return Err(LabError::FitFailed(format!(
            "{} points with volume > e, need {MIN_FIT_POINTS}",
            tail.len()
        )));
    }
    let pts = loglog(&tail);
    if pts.iter().all(|p| p.0 == pts[0].0) {
        return Err(LabError::FitFailed("all radii equal".into()));
    }
    let (intercept, b) = least_squares(&pts);
    let (b_early, b_late) = if pts.len() >= 6 {
        let half = pts.len() / 2;
        (Some(least_squares(&pts[..half]).1), Some(least_squares(&pts[half..]).1))
    } else {
        (None, None)
    };
    let polynomial_trend = matches!((b_early, b_late), (Some(e), Some(l)) if l < 0.9 * e);
    Ok(GrowthFit {
        a: intercept.exp(),
        b,
        b_early,
        b_late,
        polynomial_trend,
        completeness_regime: b <= 2.0 + 1e-9,
        points_used: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::birth_death;
    use crate::graph::FiniteGraph;
    use crate::metric::EdgeLengths;

    #[test]
    fn path_profile_counts_vertices() {
        let g = birth_death(0.0);
        let d = PathMetric::new(&g, EdgeLengths::unit());
        let p = volume_profile(&g, &d, VertexId(0), 10.0, 40).unwrap();
        for &(r, v) in &p.points {
            assert_eq!(v, r.floor() + 1.0);
        }
        assert!(p.is_monotone());
        assert!(!p.truncated);
        let p = volume_profile(&g, &d, VertexId(0), 0.5, 4).unwrap();
        assert!(p.points.iter().all(|pt| pt.1 == 1.0));
    }

    #[test]
    fn truncated_profile_is_flagged() {
        let g = birth_death(0.0);
        let d = PathMetric::new(&g, EdgeLengths::unit()).with_cap(5);
        let p = volume_profile(&g, &d, VertexId(0), 20.0, 20).unwrap();
        assert!(p.truncated);
        assert_eq!(p.points.last().unwrap().0, 3.0);
    }

    #[test]
    fn synthetic_integrals() {
        let sq = VolumeProfile::synthetic(1.0, 20.0, 256, |r| (r * r).exp());
        let gi = grigoryan_integral(&sq, 1.0);
        assert!((gi.value / 20f64.ln() - 1.0).abs() < 0.02);
        assert_eq!(gi.diagnostic, IntegralTrend::DivergingTrend);

        let cube = VolumeProfile::synthetic(1.0, 8.0, 256, |r| (r * r * r).exp());
        let gi = grigoryan_integral(&cube, 1.0);
        assert!((gi.value / (1.0 - 1.0 / 8.0) - 1.0).abs() < 0.02);
        assert_eq!(gi.diagnostic, IntegralTrend::ConvergingTrend);

        let flat = VolumeProfile::synthetic(0.0, 4.0, 64, |_| 2.0);
        let gi = grigoryan_integral(&flat, 1.0);
        assert!((gi.value - 7.5).abs() < 1e-12);
        assert_eq!(gi.diagnostic, IntegralTrend::DivergingTrend);

        let short = VolumeProfile::synthetic(1.0, 2.0, 1, |_| 2.0);
        assert_eq!(grigoryan_integral(&short, 1.0).diagnostic, IntegralTrend::Indeterminate);
    }

    #[test]
    fn fits() {
        let f = growth_fit(&VolumeProfile::synthetic(2.0, 10.0, 64, |r| (r * r).exp())).unwrap();
        assert!((f.b - 2.0).abs() < 0.05);
        assert!(f.completeness_regime && !f.polynomial_trend);
        let f = growth_fit(&VolumeProfile::synthetic(2.0, 6.0, 64, |r| (r * r * r).exp())).unwrap();
        assert!((f.b - 3.0).abs() < 0.05);
        assert!(!f.completeness_regime);
        let f = growth_fit(&VolumeProfile::synthetic(2.0, 1000.0, 64, |r| r.powi(4))).unwrap();
        assert!(f.polynomial_trend, "{f:?}");
        assert!(f.b < 0.5);
        assert!(matches!(
            growth_fit(&VolumeProfile::synthetic(0.0, 1.0, 64, |_| 2.0)),
            Err(LabError::FitFailed(_))
        ));
    }

    #[test]
    fn metric_graph_profile_below_graph_profile() {
        let lengths = EdgeLengths::from_table((0..5).map(|i| ((VertexId(i), VertexId(i + 1)), 0.5)), 1.0);
        let g = FiniteGraph::path(6).into_graph();
        let d = PathMetric::new(&g, lengths);
        let w = crate::graph::GraphWindow::whole(&g).unwrap();
        let x = MetricGraph::build(&g, &d, &w).unwrap();
        let gp = volume_profile(&g, &d, VertexId(0), 3.0, 12).unwrap();
        let mp = metric_graph_profile(&x, VertexId(0), 3.0, 12);
        for (a, b) in gp.points.iter().zip(&mp.points) {
            assert!(b.1 <= a.1 + 1e-12);
        }
        assert!((mp.points.last().unwrap().1 - x.total_measure()).abs() < 1e-12);
    }
}
