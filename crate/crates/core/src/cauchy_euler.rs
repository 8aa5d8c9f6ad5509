//! The radial equation `r^2 u'' + (d-1) r u' - lambda u = r^2 f` and its
//! nested integral representation
//! `u(r) = r^{gamma+} int_b^r s^{-2 delta - 1} int_a^s t^{delta + d/2} f(t) dt ds`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{derivative4, second_derivative4};

/// `coeff * r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn eval(&self, r: f64) -> f64 {
        self.coeff * r.powf(self.exponent)
    }
}

pub fn eval_powers(terms: &[PowerTerm], r: f64) -> f64 {
    terms.iter().map(|t| t.eval(r)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    R0,
    Infinity,
}

impl Limit {
    pub fn flipped(self) -> Self {
        match self {
            Limit::R0 => Limit::Infinity,
            Limit::Infinity => Limit::R0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Lower limit of the inner integral.
    pub a: Limit,
    /// Lower limit of the outer integral.
    pub b: Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyEuler {
    pub dim: usize,
    pub lambda: f64,
    pub delta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl CauchyEuler {
    /// Requires real, distinct homogeneities.
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        let half = (dim as f64 - 2.0) / 2.0;
        let radicand = half * half + lambda;
        if !(radicand > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lambda = {lambda} has no pair of distinct real homogeneities"
            )));
        }
        let delta = radicand.sqrt();
        Ok(Self {
            dim,
            lambda,
            delta,
            gamma_plus: -half + delta,
            gamma_minus: -half - delta,
        })
    }

    /// `(d/2 + delta - beta, d/2 - delta - beta)`.
    pub fn exponents(&self, beta: f64) -> (f64, f64) {
        let h = self.dim as f64 / 2.0;
        (h + self.delta - beta, h - self.delta - beta)
    }

    /// `a = R0` iff `d/2 + delta - beta > 0`, `b = R0` iff
    /// `d/2 - delta - beta > 0`.
    pub fn limits(&self, beta: f64, tol: f64) -> Result<Limits> {
        let (e1, e2) = self.exponents(beta);
        for e in [e1, e2] {
            if e.abs() <= tol {
                return Err(Error::ResonantExponent {
                    mode: format!("lambda = {}", self.lambda),
                    exponent: e,
                });
            }
        }
        let pick = |e: f64| if e > 0.0 { Limit::R0 } else { Limit::Infinity };
        Ok(Limits { a: pick(e1), b: pick(e2) })
    }

    /// Nested representation for `f = coeff t^s`, as power terms in `r`.
    pub fn solve_power(&self, term: PowerTerm, limits: Limits, r0: f64) -> Result<Vec<PowerTerm>> {
        if term.coeff == 0.0 {
            return Ok(Vec::new());
        }
        let two_delta = 2.0 * self.delta;
        let m1 = self.delta + self.dim as f64 / 2.0 + term.exponent + 1.0;
        let m2 = m1 - two_delta;
        for m in [m1, m2] {
            if m == 0.0 {
                return Err(Error::ResonantExponent {
                    mode: format!("lambda = {}", self.lambda),
                    exponent: m,
                });
            }
        }
        if limits.a == Limit::Infinity && m1 > 0.0 {
            return Err(Error::TailDivergence { exponent: m1 });
        }
        if limits.b == Limit::Infinity && m2 > 0.0 {
            return Err(Error::TailDivergence { exponent: m2 });
        }
        // inner = k (s^m1 - A), outer = int_b^r s^{-2 delta - 1} inner
        let k = term.coeff / m1;
        let a_const = if limits.a == Limit::R0 { r0.powf(m1) } else { 0.0 };
        let mut out = vec![PowerTerm {
            coeff: k / m2,
            exponent: self.gamma_plus + m2,
        }];
        if a_const != 0.0 {
            out.push(PowerTerm {
                coeff: k * a_const / two_delta,
                exponent: self.gamma_minus,
            });
        }
        if limits.b == Limit::R0 {
            let c = -k * r0.powf(m2) / m2 - k * a_const * r0.powf(-two_delta) / two_delta;
            out.push(PowerTerm {
                coeff: c,
                exponent: self.gamma_plus,
            });
        }
        Ok(out)
    }

    /// The nested representation by adaptive quadrature on the sorted
    /// radial grid `r` (with `r[0] = R0`). Infinite limits close with the
    /// analytic tail of the power law that `f` follows beyond the grid.
    pub fn solve_quadrature(&self, f: &dyn Fn(f64) -> f64, limits: Limits, r: &[f64], tol: f64) -> Result<Vec<f64>> {
        let n = r.len();
        let r_max = r[n - 1];
        let c_in = self.delta + self.dim as f64 / 2.0;
        let two_delta = 2.0 * self.delta;
        let tail = power_tail(f, r_max)?;
        let m1 = c_in + tail.exponent + 1.0;
        let k = tail.coeff * r_max.powf(-tail.exponent) / m1;

        // inner(s) = int_a^s t^{c_in} f(t) dt
        let inner_density = |t: f64| t.powf(c_in + 1.0) * f(t);
        let inner = match limits.a {
            Limit::R0 => cumulate(&inner_density, r, 0.0, tol),
            Limit::Infinity => {
                if tail.coeff != 0.0 && m1 >= 0.0 {
                    return Err(Error::TailDivergence { exponent: m1 });
                }
                let beyond = if tail.coeff == 0.0 { 0.0 } else { -k * r_max.powf(m1) };
                cumulate_back(&inner_density, r, -beyond, tol)
            }
        };
        let inner_at = |s: f64| {
            if s >= r_max {
                inner[n - 1] + k * (s.powf(m1) - r_max.powf(m1))
            } else {
                let i = r.partition_point(|&x| x <= s).clamp(1, n) - 1;
                inner[i] + log_adaptive(&inner_density, r[i], s, tol)
            }
        };

        let outer_density = |s: f64| s.powf(-two_delta) * inner_at(s);
        let outer = match limits.b {
            Limit::R0 => cumulate(&outer_density, r, 0.0, tol),
            Limit::Infinity => {
                let m2 = m1 - two_delta;
                if tail.coeff != 0.0 && m2 >= 0.0 {
                    return Err(Error::TailDivergence { exponent: m2 });
                }
                let base = inner[n - 1] - k * r_max.powf(m1);
                let mut beyond = base * r_max.powf(-two_delta) / two_delta;
                if tail.coeff != 0.0 {
                    beyond -= k * r_max.powf(m2) / m2;
                }
                cumulate_back(&outer_density, r, -beyond, tol)
            }
        };
        Ok(r.iter().zip(&outer).map(|(&x, &o)| x.powf(self.gamma_plus) * o).collect())
    }

    /// Max of `|r^2 u'' + (d-1) r u' - lambda u - r^2 f|` over the upper
    /// half of a geometric grid (in `ln r`), relative to the largest term.
    /// Derivatives are fourth-order differences in `ln r`; nearer `R0` they
    /// cannot resolve steep `r^{gamma-}` components.
    pub fn residual(&self, r: &[f64], u: &[f64], f: &[f64]) -> f64 {
        let h = (r[1] / r[0]).ln();
        let us = derivative4(u, h);
        let uss = second_derivative4(u, h);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in r.len() / 2..r.len() - 2 {
            let rhs = r[i] * r[i] * f[i];
            let lhs = uss[i] + (self.dim as f64 - 2.0) * us[i] - self.lambda * u[i];
            worst = worst.max((lhs - rhs).abs());
            scale = scale.max(rhs.abs()).max((self.lambda * u[i]).abs()).max(uss[i].abs());
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

/// `int_{r[0]}^{r[i]}` plus `start`.
fn cumulate(density: &dyn Fn(f64) -> f64, r: &[f64], start: f64, tol: f64) -> Vec<f64> {
    let mut out = vec![start; r.len()];
    for i in 1..r.len() {
        out[i] = out[i - 1] + log_adaptive(density, r[i - 1], r[i], tol);
    }
    out
}

/// `-int_{r[i]}^{r[n-1]}` plus `end`.
fn cumulate_back(density: &dyn Fn(f64) -> f64, r: &[f64], end: f64, tol: f64) -> Vec<f64> {
    let n = r.len();
    let mut out = vec![end; n];
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] - log_adaptive(density, r[i], r[i + 1], tol);
    }
    out
}

/// Power law `coeff (t / r)^exponent` matched by `f` at and beyond `r`.
fn power_tail(f: &dyn Fn(f64) -> f64, r: f64) -> Result<PowerTerm> {
    let (f0, f1, f2) = (f(r), f(2.0 * r), f(4.0 * r));
    if f0 == 0.0 && f1 == 0.0 && f2 == 0.0 {
        return Ok(PowerTerm { coeff: 0.0, exponent: 0.0 });
    }
    let s1 = (f1 / f0).log2();
    let s2 = (f2 / f1).log2();
    if !(s1.is_finite() && s2.is_finite()) || (s1 - s2).abs() > 1e-8 * s1.abs().max(1.0) {
        return Err(Error::TailDivergence { exponent: s1 });
    }
    Ok(PowerTerm { coeff: f0, exponent: s1 })
}

/// `int_a^b g(t) dt` via adaptive Simpson in `x = ln t`, where `density`
/// returns `t g(t)`.
fn log_adaptive(density: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (x0, x1) = (a.ln(), b.ln());
    let g = |x: f64| density(x.exp());
    let (f0, f1) = (g(x0), g(x1));
    let xm = 0.5 * (x0 + x1);
    let fm = g(xm);
    let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    simpson_rec(&g, x0, x1, f0, fm, f1, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(g: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol * (left + right).abs().max(f64::MIN_POSITIVE) {
        return left + right + delta / 15.0;
    }
    simpson_rec(g, a, m, fa, flm, fm, left, tol, depth - 1) + simpson_rec(g, m, b, fm, frm, fb, right, tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::geometric_grid;

    #[test]
    fn power_ansatz_closed_form() {
        for (d, lambda, beta) in [(7usize, 0.0, 0.5), (7, 6.0, 0.7), (7, -5.69, 0.7), (3, 4.0, 0.3), (10, 20.0, 1.5)] {
            let ce = CauchyEuler::new(d, lambda).unwrap();
            let lim = ce.limits(beta, 1e-7).unwrap();
            let c = (1.0 - beta) * (d as f64 - 1.0 - beta);
            let terms = ce
                .solve_power(PowerTerm { coeff: 1.0, exponent: -1.0 - beta }, lim, 1.0)
                .unwrap();
            let lead = terms.iter().find(|t| (t.exponent - (1.0 - beta)).abs() < 1e-12).unwrap();
            assert!((lead.coeff - 1.0 / (c - lambda)).abs() < 1e-12);
            for t in &terms[1..] {
                assert!(t.exponent <= 1.0 - beta);
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let r = geometric_grid(1.0, 4096.0);
        let (d, beta) = (7, 0.5);
        let ce = CauchyEuler::new(d, 0.0).unwrap();
        let lim = ce.limits(beta, 1e-7).unwrap();
        assert_eq!(lim, Limits { a: Limit::R0, b: Limit::R0 });
        let f = |t: f64| t.powf(-1.5);
        let u = ce.solve_quadrature(&f, lim, &r, 1e-13).unwrap();
        let terms = ce.solve_power(PowerTerm { coeff: 1.0, exponent: -1.5 }, lim, 1.0).unwrap();
        let c = (1.0 - beta) * (d as f64 - 1.0 - beta);
        for (i, &x) in r.iter().enumerate() {
            let exact = eval_powers(&terms, x);
            assert!((u[i] - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{x} {} {exact}", u[i]);
        }
        let top = r.len() - 1;
        let pure = r[top].powf(1.0 - beta) / c;
        assert!((u[top] - pure).abs() < 0.2 * pure);
        let fs: Vec<f64> = r.iter().map(|&x| f(x)).collect();
        assert!(ce.residual(&r, &u, &fs) < 1e-6);
    }

    #[test]
    fn infinite_limits_by_quadrature() {
        let r = geometric_grid(1.0, 4096.0);
        let ce = CauchyEuler::new(7, 30.0).unwrap();
        let beta = 0.7;
        let lim = ce.limits(beta, 1e-7).unwrap();
        assert_eq!(lim.b, Limit::Infinity);
        let f = |t: f64| 2.0 * t.powf(-1.7);
        let u = ce.solve_quadrature(&f, lim, &r, 1e-13).unwrap();
        let terms = ce.solve_power(PowerTerm { coeff: 2.0, exponent: -1.7 }, lim, 1.0).unwrap();
        for (i, &x) in r.iter().enumerate() {
            let exact = eval_powers(&terms, x);
            assert!((u[i] - exact).abs() <= 1e-9 * exact.abs(), "{x} {} {exact}", u[i]);
        }
    }

    #[test]
    fn selection_errors() {
        let ce = CauchyEuler::new(7, 0.0).unwrap();
        // d/2 - delta - beta = 0 at beta = 1
        assert!(matches!(ce.limits(1.0, 1e-7), Err(Error::ResonantExponent { .. })));
        let bad = Limits { a: Limit::R0, b: Limit::Infinity };
        assert!(matches!(
            ce.solve_power(PowerTerm { coeff: 1.0, exponent: -1.5 }, bad, 1.0),
            Err(Error::TailDivergence { .. })
        ));
        let r = geometric_grid(1.0, 64.0);
        let f = |t: f64| t.powf(-1.5) * (1.0 + 0.5 * t.ln().sin());
        assert!(matches!(
            ce.solve_quadrature(&f, ce.limits(0.5, 1e-7).unwrap(), &r, 1e-10),
            Err(Error::TailDivergence { .. })
        ));
        assert!(CauchyEuler::new(5, -3.0).is_err());
        assert!(ce.solve_power(PowerTerm { coeff: 0.0, exponent: -1.5 }, bad, 1.0).unwrap().is_empty());
    }
}
