//! The axially symmetric one-homogeneous Bernoulli cone.
//!
//! In polar angle `theta` (measured from the symmetry axis) the cone solution
//! is `U = r g(theta)` on the band `|theta - pi/2| < theta0`, where `g` solves
//!
//! ```text
//! g'' + (d-2) cot(theta) g' + (d-1) g = 0,   g(pi/2 +- theta0) = 0,
//! ```
//!
//! normalized so that `|g'| = 1` at both edges of the band. The aperture is
//! found by shooting the even solution outward from the equator.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::BandGrid;
use crate::ode::{rk4_path, rk4_step2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeProfile {
    pub dim: usize,
    pub theta0: f64,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub norm_c: f64,
    #[serde(skip)]
    pub band: Option<BandGrid>,
    pub grid: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
}

impl ConeProfile {
    pub fn band(&self) -> BandGrid {
        self.band
            .unwrap_or_else(|| BandGrid::symmetric(self.theta0, self.grid.len() - 1))
    }

    /// `U` on the unit sphere at polar angle `theta`; zero outside the band.
    pub fn value_at(&self, theta: f64) -> f64 {
        let band = self.band();
        if theta <= band.lo || theta >= band.hi {
            return 0.0;
        }
        band.interpolate(&self.g, theta)
    }

    /// Max of `|g'' + (d-2) cot g' + (d-1) g|` over interior nodes, with `g''`
    /// from fourth-order differences.
    pub fn ode_residual(&self) -> f64 {
        let band = self.band();
        let gpp = band.second_derivative(&self.g);
        let d = self.dim as f64;
        (2..band.n - 1)
            .map(|i| {
                let t = self.grid[i];
                (gpp[i] + (d - 2.0) * t.cos() / t.sin() * self.g_prime[i] + (d - 1.0) * self.g[i])
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

fn profile_rhs(dim: usize) -> impl Fn(f64, [f64; 2]) -> [f64; 2] {
    let d = dim as f64;
    move |t: f64, y: [f64; 2]| [y[1], -(d - 2.0) * t.cos() / t.sin() * y[1] - (d - 1.0) * y[0]]
}

/// Value of the even solution at `pi/2 + s` using `steps` RK4 steps.
fn shoot(dim: usize, s: f64, steps: usize) -> [f64; 2] {
    let f = profile_rhs(dim);
    let h = s / steps as f64;
    let mut y = [1.0, 0.0];
    for i in 0..steps {
        y = rk4_step2(&f, FRAC_PI_2 + i as f64 * h, y, h);
    }
    y
}

pub fn solve_profile(dim: usize, cfg: &SolverConfig) -> Result<ConeProfile> {
    if dim < 3 {
        return Err(Error::InvalidInput(format!("dimension {dim} < 3")));
    }
    if cfg.grid_n < 64 || !cfg.grid_n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("grid_n = {}", cfg.grid_n)));
    }
    let half = cfg.grid_n / 2;

    // Bracket the first zero by marching outward.
    let f = profile_rhs(dim);
    let h0 = 1e-3;
    let mut y = [1.0, 0.0];
    let mut s = 0.0;
    while y[0] > 0.0 {
        if FRAC_PI_2 + s + h0 >= std::f64::consts::PI - 1e-9 {
            return Err(Error::NoZeroFound);
        }
        y = rk4_step2(&f, FRAC_PI_2 + s, y, h0);
        s += h0;
    }
    let (mut lo, mut hi) = (s - h0, s);

    const MAX_ITER: usize = 200;
    let mut iter = 0;
    while hi - lo > cfg.root_tol {
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NonConvergent {
                what: "aperture bisection",
                iterations: MAX_ITER,
            });
        }
        let mid = 0.5 * (lo + hi);
        if shoot(dim, mid, half)[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    let theta0 = 0.5 * (lo + hi);
    if theta0 >= FRAC_PI_2 {
        return Err(Error::InvalidInput(format!(
            "aperture {theta0} reaches the axis"
        )));
    }

    let path = rk4_path(&f, FRAC_PI_2, FRAC_PI_2 + theta0, [1.0, 0.0], half);
    let edge_slope = path[half][1];
    if edge_slope >= 0.0 {
        return Err(Error::NoZeroFound);
    }
    let norm_c = 1.0 / edge_slope.abs();

    let band = BandGrid::symmetric(theta0, cfg.grid_n);
    let n = cfg.grid_n;
    let mut g = vec![0.0; n + 1];
    let mut gp = vec![0.0; n + 1];
    for (j, state) in path.iter().enumerate() {
        g[half + j] = norm_c * state[0];
        g[half - j] = norm_c * state[0];
        gp[half + j] = norm_c * state[1];
        gp[half - j] = -norm_c * state[1];
    }
    g[0] = 0.0;
    g[n] = 0.0;
    gp[half] = 0.0;

    Ok(ConeProfile {
        dim,
        theta0,
        mean_curvature: (dim as f64 - 2.0) * theta0.tan(),
        norm_c,
        band: Some(band),
        grid: band.points(),
        g,
        g_prime: gp,
    })
}

/// Which Legendre function carries the closed form in this dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LegendreBranch {
    /// Odd dimension: second-kind `Q^{(d-3)/2}_{(d-1)/2}` (integer indices).
    SecondKind,
    /// Even dimension: first-kind `P^{(d-3)/2}_{(d-1)/2}` (half-integer indices).
    FirstKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreCheck {
    pub branch: LegendreBranch,
    pub residual: f64,
    pub terms: usize,
}

/// Even solution of the closed form, `sin^{-(d-3)/2} * L(cos theta)`,
/// normalized to one at the equator.
///
/// With `x = cos(theta)` the combination solves
/// `(1 - x^2) y'' - (d-1) x y' + (d-1) y = 0`, so its power series about
/// `x = 0` obeys `a_{j+2} = (j-1)(j+d-1) / ((j+1)(j+2)) a_j`.
pub fn legendre_even_series(dim: usize, x: f64) -> Result<(f64, usize)> {
    let d = dim as f64;
    let x2 = x * x;
    let mut coeff = 1.0;
    let mut xp = 1.0;
    let mut sum = 1.0;
    let mut abs_sum = 1.0;
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        coeff *= (jf - 1.0) * (jf + d - 1.0) / ((jf + 1.0) * (jf + 2.0));
        xp *= x2;
        let term = coeff * xp;
        sum += term;
        abs_sum += term.abs();
        j += 2;
        if term.abs() < 1e-18 * abs_sum && j > 8 {
            break;
        }
        if j > 400_000 {
            return Err(Error::EvaluationUnstable { condition: f64::INFINITY });
        }
    }
    let condition = abs_sum / sum.abs().max(f64::MIN_POSITIVE);
    // Near the band edges the sum vanishes by construction; only flag loss of
    // precision against the unit normalization.
    if abs_sum > 1e8 {
        return Err(Error::EvaluationUnstable { condition });
    }
    Ok((sum, j / 2))
}

pub fn legendre_crosscheck(p: &ConeProfile) -> Result<LegendreCheck> {
    let band = p.band();
    let center = band.n / 2;
    let scale = p.g[center];
    let mut residual: f64 = 0.0;
    let mut terms = 0;
    for (t, gv) in p.grid.iter().zip(&p.g) {
        let (series, used) = legendre_even_series(p.dim, t.cos())?;
        terms = terms.max(used);
        residual = residual.max((gv / scale - series).abs());
    }
    let branch = if p.dim % 2 == 1 {
        LegendreBranch::SecondKind
    } else {
        LegendreBranch::FirstKind
    };
    Ok(LegendreCheck {
        branch,
        residual,
        terms,
    })
}

/// Polar profiles of the analytic Jacobi fields of the cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiFields {
    /// `cos g - sin g'`: translation along the axis.
    pub axial: Vec<f64>,
    /// `cos g' + sin g`: transverse translation, times a degree-one harmonic.
    pub transverse: Vec<f64>,
    /// `g'`: rotation in a plane containing the axis.
    pub rotation: Vec<f64>,
}

pub fn jacobi_fields(p: &ConeProfile) -> JacobiFields {
    let mut axial = Vec::with_capacity(p.grid.len());
    let mut transverse = Vec::with_capacity(p.grid.len());
    for ((t, g), gp) in p.grid.iter().zip(&p.g).zip(&p.g_prime) {
        let (s, c) = t.sin_cos();
        axial.push(c * g - s * gp);
        transverse.push(c * gp + s * g);
    }
    JacobiFields {
        axial,
        transverse,
        rotation: p.g_prime.clone(),
    }
}
