//! Uniform grids on a latitude band and the quadrature/differencing rules
//! used on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Uniform grid `theta_i = lo + i * h`, `i = 0..=n`, with `n` even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl BandGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(hi > lo, "empty band");
        assert!(n >= 4 && n.is_multiple_of(2), "grid needs an even number of intervals");
        Self { lo, hi, n }
    }

    /// Band symmetric about the equator with the given half-width.
    pub fn symmetric(half_width: f64, n: usize) -> Self {
        Self::new(PI / 2.0 - half_width, PI / 2.0 + half_width, n)
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.point(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Composite Simpson rule over the whole band.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        simpson(values, self.step())
    }

    /// `int values * sin^(d-2)` over the band.
    pub fn integrate_weighted(&self, values: &[f64], dim: usize) -> f64 {
        let w: Vec<f64> = self
            .points()
            .iter()
            .zip(values)
            .map(|(&t, &v)| v * sin_pow(t, dim as i32 - 2))
            .collect();
        self.integrate(&w)
    }

    /// Weighted inner product `int a b sin^(d-2)`.
    pub fn inner(&self, a: &[f64], b: &[f64], dim: usize) -> f64 {
        let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        self.integrate_weighted(&prod, dim)
    }

    /// Fourth-order finite-difference derivative of sampled values.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        derivative4(values, self.step())
    }

    /// Fourth-order second derivative at interior points `2..n-1`; the two
    /// outermost points on each side use second-order stencils.
    pub fn second_derivative(&self, values: &[f64]) -> Vec<f64> {
        second_derivative4(values, self.step())
    }

    /// Cubic interpolation at an arbitrary point of the band.
    pub fn interpolate(&self, values: &[f64], theta: f64) -> f64 {
        let h = self.step();
        let x = ((theta - self.lo) / h).clamp(0.0, self.n as f64);
        let i = (x.floor() as usize).clamp(1, self.n - 2);
        let t = x - i as f64;
        let (y0, y1, y2, y3) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
        // Lagrange weights on nodes -1, 0, 1, 2.
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        w0 * y0 + w1 * y1 + w2 * y2 + w3 * y3
    }

    /// Values at the interval midpoints, from cubic interpolation.
    pub fn midpoints(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                if i == 0 {
                    (5.0 * values[0] + 15.0 * values[1] - 5.0 * values[2] + values[3]) / 16.0
                } else if i == self.n - 1 {
                    (5.0 * values[self.n] + 15.0 * values[self.n - 1] - 5.0 * values[self.n - 2]
                        + values[self.n - 3])
                        / 16.0
                } else {
                    (-values[i - 1] + 9.0 * values[i] + 9.0 * values[i + 1] - values[i + 2]) / 16.0
                }
            })
            .collect()
    }
}

pub fn sin_pow(theta: f64, exponent: i32) -> f64 {
    theta.sin().powi(exponent)
}

/// Surface area of the unit sphere `S^k` in `R^(k+1)`.
pub fn sphere_area(k: usize) -> f64 {
    // |S^0| = 2, |S^1| = 2 pi, |S^k| = 2 pi / (k - 1) |S^(k-2)|.
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson needs an even number of intervals");
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Composite Boole rule; requires a multiple of four intervals.
pub fn boole(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 4 && n.is_multiple_of(4), "Boole needs a multiple of four intervals");
    let mut acc = 0.0;
    for p in (0..n).step_by(4) {
        acc += 7.0 * values[p]
            + 32.0 * values[p + 1]
            + 12.0 * values[p + 2]
            + 32.0 * values[p + 3]
            + 7.0 * values[p + 4];
    }
    acc * 2.0 * h / 45.0
}

pub fn derivative4(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5);
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
    }
    let fwd = |i: usize| {
        (-25.0 * v[i] + 48.0 * v[i + 1] - 36.0 * v[i + 2] + 16.0 * v[i + 3] - 3.0 * v[i + 4])
            / (12.0 * h)
    };
    let bwd = |i: usize| {
        (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4])
            / (12.0 * h)
    };
    d[0] = fwd(0);
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
    d[n - 1] = bwd(n - 1);
    d[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5])
        / (12.0 * h);
    d
}

pub fn second_derivative4(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5);
    let h2 = h * h;
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h2);
    }
    d[1] = (v[0] - 2.0 * v[1] + v[2]) / h2;
    d[n - 2] = (v[n - 3] - 2.0 * v[n - 2] + v[n - 1]) / h2;
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    d
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Geometric grid from `r0` to at least `r_max` with ratio `2^(1/16)`.
pub fn geometric_grid(r0: f64, r_max: f64) -> Vec<f64> {
    let ratio = 2f64.powf(1.0 / 16.0);
    let steps = ((r_max / r0).ln() / ratio.ln()).ceil() as usize;
    (0..=steps).map(|i| r0 * ratio.powi(i as i32)).collect()
}
