//! Weiss boundary-adjusted energy of axisymmetric separable fields, the
//! link-measure identity of the cone, and the aperture functional whose
//! critical point is the cone.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::cone::ConeProfile;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::{boole, sphere_area, BandGrid};
use crate::sl::{eigen_k, BoundaryCondition, SLOptions, SLSpec};
use crate::spectrum::LinkSpectrum;

/// Radial factor of one separable term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialFactor {
    /// `coeff r^exponent`
    Power { coeff: f64, exponent: f64 },
    /// `coeff r^exponent (1 + amp sin(freq ln r + phase))`
    LogOsc {
        coeff: f64,
        exponent: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl RadialFactor {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialFactor::Power { coeff, exponent } => coeff * r.powf(exponent),
            RadialFactor::LogOsc { coeff, exponent, amp, freq, phase } => {
                coeff * r.powf(exponent) * (1.0 + amp * (freq * r.ln() + phase).sin())
            }
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            RadialFactor::Power { coeff, exponent } => coeff * exponent * r.powf(exponent - 1.0),
            RadialFactor::LogOsc { coeff, exponent, amp, freq, phase } => {
                let x = freq * r.ln() + phase;
                coeff * r.powf(exponent - 1.0) * (exponent * (1.0 + amp * x.sin()) + amp * freq * x.cos())
            }
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            RadialFactor::Power { exponent, .. } | RadialFactor::LogOsc { exponent, .. } => exponent,
        }
    }

    /// Factor of `u(s x) / s`.
    pub fn rescaled(&self, s: f64) -> Self {
        match *self {
            RadialFactor::Power { coeff, exponent } => RadialFactor::Power {
                coeff: coeff * s.powf(exponent - 1.0),
                exponent,
            },
            RadialFactor::LogOsc { coeff, exponent, amp, freq, phase } => RadialFactor::LogOsc {
                coeff: coeff * s.powf(exponent - 1.0),
                exponent,
                amp,
                freq,
                phase: phase + freq * s.ln(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymTerm {
    pub radial: RadialFactor,
    pub q: Vec<f64>,
    pub q_prime: Vec<f64>,
}

/// `u(r, theta) = sum_i rho_i(r) q_i(theta)` on the cone over `band`, which
/// is taken as the positivity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymField {
    pub dim: usize,
    pub band: BandGrid,
    pub terms: Vec<AxisymTerm>,
}

impl AxisymField {
    /// `rho(r) g(theta)` with the cone profile `g`.
    pub fn cone(p: &ConeProfile, radial: RadialFactor) -> Self {
        Self {
            dim: p.dim,
            band: p.band(),
            terms: vec![AxisymTerm {
                radial,
                q: p.g.clone(),
                q_prime: p.g_prime.clone(),
            }],
        }
    }

    /// `(x_d)_+ = r cos(theta)` with `theta` measured from `e_d`.
    pub fn half_plane(dim: usize, n: usize) -> Self {
        let band = BandGrid::new(0.0, FRAC_PI_2, n);
        let pts = band.points();
        Self {
            dim,
            band,
            terms: vec![AxisymTerm {
                radial: RadialFactor::Power { coeff: 1.0, exponent: 1.0 },
                q: pts.iter().map(|t| t.cos()).collect(),
                q_prime: pts.iter().map(|t| -t.sin()).collect(),
            }],
        }
    }

    pub fn with_term(mut self, radial: RadialFactor, q: Vec<f64>, q_prime: Vec<f64>) -> Self {
        self.terms.push(AxisymTerm { radial, q, q_prime });
        self
    }

    /// `u(s x) / s`.
    pub fn rescaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.radial = t.radial.rescaled(s);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::InvalidInput("dimension must be at least 3".into()));
        }
        for t in &self.terms {
            if t.q.len() != self.band.len() || t.q_prime.len() != self.band.len() {
                return Err(Error::InvalidInput("profile not sampled on the band grid".into()));
            }
            // finite Dirichlet energy near the origin
            if !(2.0 * t.radial.exponent() + self.dim as f64 - 2.0 > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "radial exponent {} has infinite energy at the origin",
                    t.radial.exponent()
                )));
            }
        }
        Ok(())
    }

    fn angular(&self) -> Angular {
        let area = sphere_area(self.dim - 2);
        let m = self.terms.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let aij = area * self.band.inner(&self.terms[i].q, &self.terms[j].q, self.dim);
                let bij = area * self.band.inner(&self.terms[i].q_prime, &self.terms[j].q_prime, self.dim);
                a[i][j] = aij;
                a[j][i] = aij;
                b[i][j] = bij;
                b[j][i] = bij;
            }
        }
        let ones = vec![1.0; self.band.len()];
        Angular {
            a,
            b,
            measure: area * self.band.inner(&ones, &ones, self.dim),
        }
    }
}

/// `A_ij = int q_i q_j`, `B_ij = int q_i' q_j'` and the band measure, all
/// against `|S^{d-2}| sin^{d-2}`.
struct Angular {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    measure: f64,
}

const LOG_PANELS: usize = 4096;

/// `int_{B_r} |grad u|^2` from `ln s` quadrature, with the error estimate
/// from halving the panel count.
fn dirichlet_energy(u: &AxisymField, ang: &Angular, r: f64) -> (f64, f64) {
    let d = u.dim as f64;
    let kappa = u
        .terms
        .iter()
        .map(|t| 2.0 * t.radial.exponent() + d - 2.0)
        .fold(f64::INFINITY, f64::min);
    let span = (40.0 / kappa).min(200.0);
    let x1 = r.ln();
    let x0 = x1 - span;
    let h = span / LOG_PANELS as f64;
    let m = u.terms.len();
    let density = |x: f64| {
        let s = x.exp();
        let vals: Vec<f64> = u.terms.iter().map(|t| t.radial.value(s)).collect();
        let ders: Vec<f64> = u.terms.iter().map(|t| t.radial.derivative(s)).collect();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += ang.a[i][j] * ders[i] * ders[j] * s.powf(d) + ang.b[i][j] * vals[i] * vals[j] * s.powf(d - 2.0);
            }
        }
        acc
    };
    let samples: Vec<f64> = (0..=LOG_PANELS).map(|k| density(x0 + k as f64 * h)).collect();
    let fine = boole(&samples, h);
    let coarse_samples: Vec<f64> = samples.iter().step_by(2).copied().collect();
    let coarse = boole(&coarse_samples, 2.0 * h);
    // contribution below x0, treating the integrand as exp(kappa x)
    let tail = samples[0] / kappa;
    (fine + tail, (fine - coarse).abs() / 63.0 + tail.abs())
}

fn boundary_l2(u: &AxisymField, ang: &Angular, r: f64) -> f64 {
    let vals: Vec<f64> = u.terms.iter().map(|t| t.radial.value(r)).collect();
    let mut acc = 0.0;
    for (i, vi) in vals.iter().enumerate() {
        for (j, vj) in vals.iter().enumerate() {
            acc += ang.a[i][j] * vi * vj;
        }
    }
    acc
}

/// `W(u, r) = r^{-d} int_{B_r} (|grad u|^2 + 1_{u>0}) - r^{-d-1} int_{dB_r} u^2`.
pub fn weiss(u: &AxisymField, r: f64, cfg: &SolverConfig) -> Result<f64> {
    u.validate()?;
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    let ang = u.angular();
    Ok(weiss_with(u, &ang, r, cfg)?.0)
}

fn weiss_with(u: &AxisymField, ang: &Angular, r: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let d = u.dim as f64;
    let (energy, err) = dirichlet_energy(u, ang, r);
    let rd = r.powf(d);
    let w = energy / rd + ang.measure / d - boundary_l2(u, ang, r) / (r * r);
    let estimate = err / rd;
    if estimate > cfg.quad_tol * w.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::GridTooCoarse { estimate });
    }
    Ok((w, energy))
}

/// `(2 / r^{d+2}) int_{dB_r} (x . grad u - u)^2`.
pub fn deficit(u: &AxisymField, r: f64) -> f64 {
    let ang = u.angular();
    deficit_with(u, &ang, r)
}

fn deficit_with(u: &AxisymField, ang: &Angular, r: f64) -> f64 {
    let e: Vec<f64> = u
        .terms
        .iter()
        .map(|t| r * t.radial.derivative(r) - t.radial.value(r))
        .collect();
    let mut acc = 0.0;
    for (i, ei) in e.iter().enumerate() {
        for (j, ej) in e.iter().enumerate() {
            acc += ang.a[i][j] * ei * ej;
        }
    }
    2.0 * acc / (r * r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeissDerivative {
    pub r: f64,
    /// Central difference of `W`.
    pub lhs: f64,
    /// The monotonicity deficit `(2 / r^{d+2}) int_{dB_r} (x . grad u - u)^2`.
    pub rhs: f64,
    /// `dW/dr - rhs` from the exact derivative of `W` for a separable field.
    /// It vanishes when `u` solves the one-phase problem on its band.
    pub remainder: f64,
    /// `|lhs - rhs|`.
    pub gap: f64,
    /// `|lhs - rhs - remainder|`.
    pub formula_gap: f64,
}

/// Compares the central difference of `W` at `r` with the monotonicity
/// deficit and with the full derivative formula.
pub fn weiss_derivative_check(u: &AxisymField, r: f64, cfg: &SolverConfig) -> Result<WeissDerivative> {
    u.validate()?;
    let ang = u.angular();
    let step = 1e-3 * r;
    let (wp, _) = weiss_with(u, &ang, r + step, cfg)?;
    let (wm, _) = weiss_with(u, &ang, r - step, cfg)?;
    let lhs = (wp - wm) / (2.0 * step);
    let rhs = deficit_with(u, &ang, r);
    let (_, energy) = weiss_with(u, &ang, r, cfg)?;
    let d = u.dim as f64;
    let vals: Vec<f64> = u.terms.iter().map(|t| t.radial.value(r)).collect();
    let ders: Vec<f64> = u.terms.iter().map(|t| t.radial.derivative(r)).collect();
    let mut rem = -d * energy / r.powf(d + 1.0);
    for i in 0..vals.len() {
        for j in 0..vals.len() {
            rem += -ang.a[i][j] * ders[i] * ders[j] / r + ang.b[i][j] * vals[i] * vals[j] / (r * r * r)
                + ang.a[i][j] * (ders[i] * vals[j] + vals[i] * ders[j]) / (r * r);
        }
    }
    Ok(WeissDerivative {
        r,
        lhs,
        rhs,
        remainder: rem,
        gap: (lhs - rhs).abs(),
        formula_gap: (lhs - rhs - rem).abs(),
    })
}

/// `||U||^2_{L^2(S^{d-1})}`, with `U` extended by zero off the band.
pub fn kappa0_sq(p: &ConeProfile) -> f64 {
    sphere_area(p.dim - 2) * p.band().inner(&p.g, &p.g, p.dim)
}

/// `H^{d-1}` of the link over a band: `|S^{d-2}| int sin^{d-2}`.
pub fn link_measure(dim: usize, band: &BandGrid) -> f64 {
    let ones = vec![1.0; band.len()];
    sphere_area(dim - 2) * band.integrate_weighted(&ones, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureIdentity {
    pub w1: f64,
    pub measure_over_d: f64,
    /// Relative gap.
    pub gap: f64,
}

/// `W(U, 1)` against `H^{d-1}(Sigma_U) / d`.
pub fn link_measure_identity(p: &ConeProfile, cfg: &SolverConfig) -> Result<MeasureIdentity> {
    if !(p.theta0 > 0.0 && p.theta0 < FRAC_PI_2 - 1e-9) {
        return Err(Error::InvalidInput(format!(
            "aperture {} is not a regular cone band",
            p.theta0
        )));
    }
    let u = AxisymField::cone(p, RadialFactor::Power { coeff: 1.0, exponent: 1.0 });
    let w1 = weiss(&u, 1.0, cfg)?;
    let measure_over_d = link_measure(p.dim, &p.band()) / p.dim as f64;
    Ok(MeasureIdentity {
        w1,
        measure_over_d,
        gap: (w1 - measure_over_d).abs() / measure_over_d,
    })
}

/// First Dirichlet eigenvalue of the `mu = 0` problem on the symmetric band.
pub fn dirichlet_lambda1(dim: usize, half_width: f64, cfg: &SolverConfig) -> Result<f64> {
    let spec = SLSpec::new(dim, half_width, 0.0, BoundaryCondition::Dirichlet, cfg.grid_n);
    let opts = SLOptions {
        lam_tol: cfg.lam_tol * 1e-2,
        ..SLOptions::default()
    };
    Ok(eigen_k(&spec, 1, &opts)?.lambda)
}

/// `F = (kappa0^2 (lambda_1^D - (d-1)) + H^{d-1}(Sigma)) / d` on the band of
/// the given half-width, with `kappa0` from the cone.
pub fn f_functional(half_width: f64, p: &ConeProfile, cfg: &SolverConfig) -> Result<f64> {
    if !(half_width > 0.0 && half_width < FRAC_PI_2) {
        return Err(Error::InvalidInput(format!("half-width {half_width} outside (0, pi/2)")));
    }
    let d = p.dim;
    let lambda = dirichlet_lambda1(d, half_width, cfg)?;
    let band = BandGrid::symmetric(half_width, cfg.grid_n);
    Ok((kappa0_sq(p) * (lambda - (d as f64 - 1.0)) + link_measure(d, &band)) / d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criticality {
    pub dim: usize,
    pub theta0: f64,
    pub eps: f64,
    pub f0: f64,
    pub derivative: f64,
    /// `|dF/d eps| / F`.
    pub relative: f64,
}

/// Central difference of `F` at the cone aperture.
pub fn criticality(p: &ConeProfile, eps: f64, cfg: &SolverConfig) -> Result<Criticality> {
    let f0 = f_functional(p.theta0, p, cfg)?;
    let fp = f_functional(p.theta0 + eps, p, cfg)?;
    let fm = f_functional(p.theta0 - eps, p, cfg)?;
    let derivative = (fp - fm) / (2.0 * eps);
    Ok(Criticality {
        dim: p.dim,
        theta0: p.theta0,
        eps,
        f0,
        derivative,
        relative: derivative.abs() / f0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// `U +- coeff r^{gamma+_1} phi_1(theta)` with `phi_1 > 0` the first interior
/// Robin eigenfunction, normalized in `L^2(Sigma)`.
pub fn foliation_leading_term(
    p: &ConeProfile,
    link: &LinkSpectrum,
    side: Side,
    coeff: Option<f64>,
    r: f64,
    theta: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let coeff = coeff.ok_or(Error::MissingCoefficient)?;
    let band = p.band();
    if r < cfg.r0 {
        return Err(Error::InvalidInput(format!("radius {r} below r0 = {}", cfg.r0)));
    }
    if !(theta >= band.lo && theta <= band.hi) {
        return Err(Error::InvalidInput(format!("theta = {theta} outside the band")));
    }
    let u = r * p.value_at(theta);
    if coeff == 0.0 {
        return Ok(u);
    }
    let first = link.mode(0, 1).ok_or(Error::InvalidInput("link spectrum has no first mode".into()))?;
    let gamma = link.eigenvalues[0]
        .homogeneity
        .gamma_plus
        .ok_or_else(|| Error::InvalidInput("first mode has complex homogeneity".into()))?;
    let phi = &first.pair.f;
    let sign = if phi[phi.len() / 2] < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / sphere_area(p.dim - 2).sqrt();
    let phi_t = scale * band.interpolate(phi, theta);
    let correction = coeff * r.powf(gamma) * phi_t;
    Ok(match side {
        Side::Upper => u + correction,
        Side::Lower => u - correction,
    })
}
