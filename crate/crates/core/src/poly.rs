//! Quadratic polynomials on `[0, l]` with exact integrals.

use serde::{Deserialize, Serialize};

/// `a·t² + b·t + c`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `∫₀^l Σ_k coeffs[k]·t^k dt`.
fn integrate_power_series(coeffs: &[f64], l: f64) -> f64 {
    // Horner on l·Σ c_k l^k/(k+1)
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * l + c / (k as f64 + 1.0))
        * l
}

impl Quadratic {
    pub const ZERO: Quadratic = Quadratic { a: 0.0, b: 0.0, c: 0.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Quadratic { a, b, c }
    }

    pub fn constant(c: f64) -> Self {
        Quadratic::new(0.0, 0.0, c)
    }

    /// Line through `(0, v0)` and `(l, vl)`.
    pub fn linear(v0: f64, vl: f64, l: f64) -> Self {
        Quadratic::new(0.0, (vl - v0) / l, v0)
    }

    /// Solution of `v″ = 1` on `(0, l)` with `v(0) = v0`, `v(l) = vl`:
    /// `½t² + ((vl − v0)/l − ½l)·t + v0`.
    pub fn unit_convex(v0: f64, vl: f64, l: f64) -> Self {
        Quadratic::new(0.5, (vl - v0) / l - 0.5 * l, v0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    pub fn derivative_at(&self, t: f64) -> f64 {
        2.0 * self.a * t + self.b
    }

    pub fn second_derivative(&self) -> f64 {
        2.0 * self.a
    }

    fn coeffs(&self) -> [f64; 3] {
        [self.c, self.b, self.a]
    }

    fn derivative_coeffs(&self) -> [f64; 2] {
        [self.b, 2.0 * self.a]
    }

    /// `∫₀^l self(t) dt`.
    pub fn integral(&self, l: f64) -> f64 {
        integrate_power_series(&self.coeffs(), l)
    }

    /// `∫₀^l self(t)·other(t) dt`.
    pub fn product_integral(&self, other: &Quadratic, l: f64) -> f64 {
        let (p, q) = (self.coeffs(), other.coeffs());
        let mut prod = [0.0; 5];
        for (i, &pi) in p.iter().enumerate() {
            for (j, &qj) in q.iter().enumerate() {
                prod[i + j] += pi * qj;
            }
        }
        integrate_power_series(&prod, l)
    }

    /// `∫₀^l self′(t)·other′(t) dt`.
    pub fn derivative_product_integral(&self, other: &Quadratic, l: f64) -> f64 {
        let (p, q) = (self.derivative_coeffs(), other.derivative_coeffs());
        let prod = [p[0] * q[0], p[0] * q[1] + p[1] * q[0], p[1] * q[1]];
        integrate_power_series(&prod, l)
    }

    /// `sup_{[0,l]} |self|`, checking endpoints and the interior critical point.
    pub fn sup_abs(&self, l: f64) -> f64 {
        let mut m = self.eval(0.0).abs().max(self.eval(l).abs());
        if self.a != 0.0 {
            let t = -self.b / (2.0 * self.a);
            if t > 0.0 && t < l {
                m = m.max(self.eval(t).abs());
            }
        }
        m
    }

    /// `max_{[0,l]} self`.
    pub fn max_on(&self, l: f64) -> f64 {
        let mut m = self.eval(0.0).max(self.eval(l));
        if self.a < 0.0 {
            let t = -self.b / (2.0 * self.a);
            if t > 0.0 && t < l {
                m = m.max(self.eval(t));
            }
        }
        m
    }

    /// Intervals of `[0, l]` where `self(t) > level`, as `(start, end)` pairs.
    pub fn superlevel_intervals(&self, level: f64, l: f64) -> Vec<(f64, f64)> {
        let shifted = Quadratic::new(self.a, self.b, self.c - level);
        let mut cuts: Vec<f64> = shifted.roots().into_iter().filter(|&t| t > 0.0 && t < l).collect();
        cuts.sort_by(f64::total_cmp);
        let mut points = vec![0.0];
        points.extend(cuts);
        points.push(l);
        points
            .windows(2)
            .filter(|w| w[1] > w[0] && shifted.eval(0.5 * (w[0] + w[1])) > 0.0)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Real roots, numerically stable form.
    pub fn roots(&self) -> Vec<f64> {
        let Quadratic { a, b, c } = *self;
        if a == 0.0 {
            return if b == 0.0 { vec![] } else { vec![-c / b] };
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return vec![];
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / a, c / q]
    }

    /// Same polynomial in the reversed coordinate `s = l − t`.
    pub fn reversed(&self, l: f64) -> Quadratic {
        // a(l−s)² + b(l−s) + c
        Quadratic::new(self.a, -2.0 * self.a * l - self.b, self.a * l * l + self.b * l + self.c)
    }

    /// Integral of `self·φ` restricted to the given sub-intervals, `φ` any quadratic.
    pub fn product_integral_on(&self, other: &Quadratic, intervals: &[(f64, f64)]) -> f64 {
        intervals
            .iter()
            .map(|&(s, e)| self.product_integral(other, e) - self.product_integral(other, s))
            .sum()
    }
}

/// `∫₀^l |line(t)| dt` for a linear polynomial, exact at sign changes.
pub fn linear_abs_integral(v0: f64, vl: f64, l: f64) -> f64 {
    if v0 * vl >= 0.0 {
        0.5 * l * (v0.abs() + vl.abs())
    } else {
        0.5 * l * (v0 * v0 + vl * vl) / (v0.abs() + vl.abs())
    }
}
