//! Weighted Sturm-Liouville problems on a latitude band:
//!
//! ```text
//! (sin^{d-2} g')' - mu sin^{d-4} g = -lambda sin^{d-2} g
//! ```
//!
//! with Robin (`g' + H g = 0` on the left edge, `-g' + H g = 0` on the right)
//! or Dirichlet conditions. Eigenvalues are located with a Prüfer phase and
//! node counting, then polished with an Illinois secant iteration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone::ConeProfile;
use crate::error::{Error, Result};
use crate::grid::BandGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Robin(f64),
    Dirichlet,
}

/// How the left and right shots are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Matching {
    /// Shoot from the left edge to the equator and use parity.
    HalfBand,
    /// Shoot from both edges and match phases at the equator.
    FullBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SLSpec {
    pub dim: usize,
    pub band: BandGrid,
    pub mu: f64,
    pub bc: BoundaryCondition,
}

impl SLSpec {
    pub fn new(dim: usize, half_width: f64, mu: f64, bc: BoundaryCondition, grid_n: usize) -> Self {
        Self {
            dim,
            band: BandGrid::symmetric(half_width, grid_n),
            mu,
            bc,
        }
    }

    /// The problem on the cone band with the cone's Robin coefficient.
    pub fn robin_on_cone(p: &ConeProfile, mu: f64) -> Self {
        let band = p.band();
        Self {
            dim: p.dim,
            band,
            mu,
            bc: BoundaryCondition::Robin(p.mean_curvature),
        }
    }

    pub fn dirichlet_on_cone(p: &ConeProfile, mu: f64) -> Self {
        Self {
            dim: p.dim,
            band: p.band(),
            mu,
            bc: BoundaryCondition::Dirichlet,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::InvalidInput(format!("dimension {} < 3", self.dim)));
        }
        if !(self.band.lo > 0.0 && self.band.hi < PI) {
            return Err(Error::InvalidInput(format!(
                "band [{}, {}] must lie strictly inside (0, pi)",
                self.band.lo, self.band.hi
            )));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidInput(format!("mu = {} < 0", self.mu)));
        }
        if let BoundaryCondition::Robin(h) = self.bc {
            if !(h > 0.0) {
                return Err(Error::InvalidInput(format!("Robin coefficient {h} must be positive")));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        ((self.band.lo + self.band.hi) - PI).abs() < 1e-12
    }

    /// `sin^{d-2}` at the two edges of the band.
    fn edge_weights(&self) -> (f64, f64) {
        let e = self.dim as i32 - 2;
        (self.band.lo.sin().powi(e), self.band.hi.sin().powi(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SLEigenpair {
    pub k: usize,
    pub lambda: f64,
    pub nodes: usize,
    /// Eigenfunction samples on the band grid, unit norm in `L^2(sin^{d-2})`.
    #[serde(rename = "fn")]
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub bc_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SLOptions {
    pub lam_tol: f64,
    pub max_iter: usize,
    /// `None` picks half-band shooting for `mu = 0` and full-band matching
    /// otherwise.
    pub matching: Option<Matching>,
}

impl Default for SLOptions {
    fn default() -> Self {
        Self {
            lam_tol: 1e-10,
            max_iter: 200,
            matching: None,
        }
    }
}

/// Coefficients sampled at every half step of the band grid.
struct Coefficients {
    p_inv: Vec<f64>,
    w: Vec<f64>,
    q: Vec<f64>,
    h: f64,
    n: usize,
    lo: f64,
    e: i32,
    mu: f64,
}

impl Coefficients {
    fn new(spec: &SLSpec) -> Self {
        let n = spec.band.n;
        let h = spec.band.step();
        let e = spec.dim as i32 - 2;
        let mut p_inv = Vec::with_capacity(2 * n + 1);
        let mut w = Vec::with_capacity(2 * n + 1);
        let mut q = Vec::with_capacity(2 * n + 1);
        for j in 0..=2 * n {
            let t = spec.band.lo + j as f64 * 0.5 * h;
            let s = t.sin();
            let p = s.powi(e);
            p_inv.push(1.0 / p);
            w.push(p);
            q.push(spec.mu * p / (s * s));
        }
        Self {
            p_inv,
            w,
            q,
            h,
            n,
            lo: spec.band.lo,
            e,
            mu: spec.mu,
        }
    }

    /// `(1/p, w, q)` at an arbitrary angle.
    fn at(&self, t: f64) -> (f64, f64, f64) {
        let s = t.sin();
        let p = s.powi(self.e);
        (1.0 / p, p, self.mu * p / (s * s))
    }

    /// Scaled Prüfer phase (`g = rho sin(phi)`, `p g' = scale rho cos(phi)`)
    /// transported from node `from` to node `to`.
    fn phase(&self, lambda: f64, scale: f64, phi0: f64, from: usize, to: usize) -> f64 {
        let inv = 1.0 / scale;
        let rhs = |(p_inv, w, q): (f64, f64, f64), phi: f64| {
            let (s, c) = phi.sin_cos();
            scale * c * c * p_inv + (lambda * w - q) * inv * s * s
        };
        let sampled = |j: usize| (self.p_inv[j], self.w[j], self.q[j]);
        let stiffness = |j: usize| scale * self.p_inv[j] + (lambda * self.w[j] - self.q[j]).abs() * inv;
        let rk4 = |c0, cm, c1, phi: f64, h: f64| {
            let k1 = rhs(c0, phi);
            let k2 = rhs(cm, phi + 0.5 * h * k1);
            let k3 = rhs(cm, phi + 0.5 * h * k2);
            let k4 = rhs(c1, phi + h * k3);
            phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        };
        let mut phi = phi0;
        let (cells, dir): (Vec<usize>, f64) = if to > from {
            ((from..to).collect(), 1.0)
        } else {
            ((to..from).rev().collect(), -1.0)
        };
        for i in cells {
            let (j0, j1) = if dir > 0.0 { (2 * i, 2 * i + 2) } else { (2 * i + 2, 2 * i) };
            let h = dir * self.h;
            let load = self.h * stiffness(j0).max(stiffness(2 * i + 1)).max(stiffness(j1));
            if load <= 1.0 {
                phi = rk4(sampled(j0), sampled(2 * i + 1), sampled(j1), phi, h);
                continue;
            }
            phi = self.phase_linear(lambda, scale, phi, j0, h);
        }
        phi
    }

    /// One stiff cell of the phase equation, crossed with the linear system
    /// instead. `phi` is recovered modulo `pi` from `(g, p g')`; its multiple
    /// of `pi` moves by one per sign change of `g`, because the phase always
    /// crosses `k pi` in the direction of integration.
    fn phase_linear(&self, lambda: f64, scale: f64, phi: f64, j0: usize, h: f64) -> f64 {
        let t0 = self.lo + j0 as f64 * 0.5 * self.h;
        let rate = |t: f64| {
            let (p_inv, w, q) = self.at(t);
            ((lambda * w - q).abs() * p_inv).sqrt()
        };
        let fastest = rate(t0).max(rate(t0 + 0.5 * h)).max(rate(t0 + h));
        let m = ((h.abs() * fastest / 0.25).ceil() as usize).max(4);
        let sub = h / m as f64;
        let f = |t: f64, y: [f64; 2]| {
            let (p_inv, w, q) = self.at(t);
            [y[1] * p_inv, (q - lambda * w) * y[0]]
        };
        let (s0, c0) = phi.sin_cos();
        let mut y = [s0, scale * c0];
        let window = (phi / PI).floor();
        // Taken from the window so that phases on a multiple of pi start on
        // the correct side.
        let mut sign = if window.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
        let mut crossings = 0i64;
        for i in 0..m {
            let t = t0 + i as f64 * sub;
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * sub, [y[0] + 0.5 * sub * k1[0], y[1] + 0.5 * sub * k1[1]]);
            let k3 = f(t + 0.5 * sub, [y[0] + 0.5 * sub * k2[0], y[1] + 0.5 * sub * k2[1]]);
            let k4 = f(t + sub, [y[0] + sub * k3[0], y[1] + sub * k3[1]]);
            y = [
                y[0] + sub / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + sub / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if y[0] != 0.0 {
                let s = y[0].signum();
                if s != sign {
                    crossings += 1;
                }
                sign = s;
            }
            let norm = y[0].hypot(y[1] / scale);
            y = [y[0] / norm, y[1] / norm];
        }
        let base = window + h.signum() * crossings as f64;
        let rest = y[0].atan2(y[1] / scale).rem_euclid(PI);
        base * PI + rest
    }

    /// Solution `(g, p g')` of the linear system from node `from` to `to`,
    /// including both ends.
    fn solution(&self, lambda: f64, y0: [f64; 2], from: usize, to: usize) -> Vec<[f64; 2]> {
        self.forced(lambda, None, y0, from, to)
    }

    /// As `solution`, with `(p g')' - q g + lambda w g = wf` where `wf` is
    /// sampled at half steps.
    fn forced(&self, lambda: f64, wf: Option<&[f64]>, y0: [f64; 2], from: usize, to: usize) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(from.abs_diff(to) + 1);
        let mut y = y0;
        out.push(y);
        let f = |j: usize, y: [f64; 2]| {
            let src = wf.map_or(0.0, |v| v[j]);
            [y[1] * self.p_inv[j], (self.q[j] - lambda * self.w[j]) * y[0] + src]
        };
        let step = |j0: usize, jm: usize, j1: usize, y: [f64; 2], h: f64| {
            let k1 = f(j0, y);
            let k2 = f(jm, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f(jm, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f(j1, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ]
        };
        let cell = |j0: usize, jm: usize, j1: usize, y: [f64; 2], h: f64| match wf {
            None => match self.substeps(lambda, j0, h) {
                0 => step(j0, jm, j1, y, h),
                m => self.linear_cell(lambda, y, j0, h, m),
            },
            Some(_) => step(j0, jm, j1, y, h),
        };
        if to > from {
            for i in from..to {
                y = cell(2 * i, 2 * i + 1, 2 * i + 2, y, self.h);
                out.push(y);
            }
        } else {
            for i in (to..from).rev() {
                y = cell(2 * i + 2, 2 * i + 1, 2 * i, y, -self.h);
                out.push(y);
            }
        }
        out
    }

    /// Substeps needed for one homogeneous cell, or 0 if one RK4 step is enough.
    /// Counts both the oscillation rate and the relative change of `p`.
    fn substeps(&self, lambda: f64, j0: usize, h: f64) -> usize {
        let t0 = self.lo + j0 as f64 * 0.5 * self.h;
        let demand = |t: f64| {
            let (p_inv, w, q) = self.at(t);
            ((lambda * w - q).abs() * p_inv).sqrt() + f64::from(self.e) * (t.cos() / t.sin()).abs()
        };
        let load = h.abs() * demand(t0).max(demand(t0 + 0.5 * h)).max(demand(t0 + h));
        if load <= 0.1 {
            0
        } else {
            (load / 0.05).ceil() as usize
        }
    }

    fn linear_cell(&self, lambda: f64, mut y: [f64; 2], j0: usize, h: f64, m: usize) -> [f64; 2] {
        let f = |t: f64, y: [f64; 2]| {
            let (p_inv, w, q) = self.at(t);
            [y[1] * p_inv, (q - lambda * w) * y[0]]
        };
        let sub = h / m as f64;
        let mut t = self.lo + j0 as f64 * 0.5 * self.h;
        for _ in 0..m {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * sub, [y[0] + 0.5 * sub * k1[0], y[1] + 0.5 * sub * k1[1]]);
            let k3 = f(t + 0.5 * sub, [y[0] + 0.5 * sub * k2[0], y[1] + 0.5 * sub * k2[1]]);
            let k4 = f(t + sub, [y[0] + sub * k3[0], y[1] + sub * k3[1]]);
            y[0] += sub / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += sub / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            t += sub;
        }
        y
    }
}

struct Shooter<'a> {
    spec: &'a SLSpec,
    coef: Coefficients,
    matching: Matching,
}

impl<'a> Shooter<'a> {
    fn new(spec: &'a SLSpec, matching: Matching) -> Self {
        Self {
            spec,
            coef: Coefficients::new(spec),
            matching,
        }
    }

    /// Edge phases for a given Prüfer scale.
    fn edge_phases(&self, scale: f64) -> (f64, f64) {
        let (pa, pb) = self.spec.edge_weights();
        match self.spec.bc {
            BoundaryCondition::Robin(h) => (scale.atan2(-h * pa), scale.atan2(h * pb)),
            BoundaryCondition::Dirichlet => (0.0, PI),
        }
    }

    /// Continuous in `lambda`, negative below and positive above the `k`-th
    /// eigenvalue.
    fn defect(&self, lambda: f64, k: usize) -> f64 {
        let n = self.coef.n;
        let mid = n / 2;
        // The weight is one at the equator, so sqrt(lambda) balances the two
        // terms of the phase equation there.
        let scale = lambda.abs().max(1.0).sqrt();
        let (phi_left, phi_right) = self.edge_phases(scale);
        let left = self.coef.phase(lambda, scale, phi_left, 0, mid);
        match self.matching {
            Matching::HalfBand => left - k as f64 * PI / 2.0,
            Matching::FullBand => {
                let right = self.coef.phase(lambda, scale, phi_right, n, mid);
                left - right - (k - 1) as f64 * PI
            }
        }
    }
}

/// Solution `(g, p g')` of `(p g')' - q g = -lambda w g` between two grid
/// nodes, starting from `y0` at `from`.
pub(crate) fn integrate(spec: &SLSpec, lambda: f64, y0: [f64; 2], from: usize, to: usize) -> Vec<[f64; 2]> {
    Coefficients::new(spec).solution(lambda, y0, from, to)
}

/// Solution `(V, V')` of `(p V')' - q V + c w V = w F` with the boundary
/// condition `spec.bc`, for `F` sampled on the band grid.
pub fn resolvent(spec: &SLSpec, c: f64, forcing: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let hc = match spec.bc {
        BoundaryCondition::Robin(h) => h,
        BoundaryCondition::Dirichlet => {
            return Err(Error::InvalidInput("resolvent supports Robin conditions only".into()))
        }
    };
    let band = spec.band;
    let n = band.n;
    if forcing.len() != n + 1 {
        return Err(Error::InvalidInput("forcing must be sampled on the band grid".into()));
    }
    let coef = Coefficients::new(spec);
    let mids = band.midpoints(forcing);
    let wf: Vec<f64> = (0..=2 * n)
        .map(|j| coef.w[j] * if j % 2 == 0 { forcing[j / 2] } else { mids[j / 2] })
        .collect();
    let (pa, pb) = spec.edge_weights();
    let part = coef.forced(c, Some(&wf), [0.0, 0.0], 0, n);
    let hom = coef.forced(c, None, [1.0, -hc * pa], 0, n);
    let (yp, z) = (part[n], hom[n]);
    let den = hc * pb * z[0] - z[1];
    if den.abs() <= 1e-12 * (hc * pb * z[0]).abs().max(z[1].abs()) {
        return Err(Error::ZeroDenominator);
    }
    let alpha = (yp[1] - hc * pb * yp[0]) / den;
    let mut v = Vec::with_capacity(n + 1);
    let mut dv = Vec::with_capacity(n + 1);
    for i in 0..=n {
        v.push(part[i][0] + alpha * hom[i][0]);
        dv.push((part[i][1] + alpha * hom[i][1]) * coef.p_inv[2 * i]);
    }
    Ok((v, dv))
}

fn count_nodes(f: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &v in &f[1..f.len() - 1] {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

pub fn eigen_k(spec: &SLSpec, k: usize, opts: &SLOptions) -> Result<SLEigenpair> {
    spec.validate()?;
    if k == 0 {
        return Err(Error::InvalidInput("eigenvalue index starts at 1".into()));
    }
    let matching = opts.matching.unwrap_or(if spec.mu == 0.0 {
        Matching::HalfBand
    } else {
        Matching::FullBand
    });
    let matching = if spec.is_symmetric() { matching } else { Matching::FullBand };
    let shooter = Shooter::new(spec, matching);
    let lambda = solve_lambda(&shooter, k, opts)?;
    let pair = eigenfunction(&shooter, k, lambda)?;
    if pair.nodes != k - 1 {
        return Err(Error::BracketFail {
            k,
            reason: format!("eigenfunction has {} nodes, expected {}", pair.nodes, k - 1),
        });
    }
    Ok(pair)
}

fn solve_lambda(sh: &Shooter<'_>, k: usize, opts: &SLOptions) -> Result<f64> {
    let d = |l: f64| sh.defect(l, k);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut width = 2.0;
    let mut tries = 0;
    let mut f_lo = d(lo);
    while f_lo >= 0.0 {
        hi = lo;
        lo -= width;
        width *= 2.0;
        f_lo = d(lo);
        tries += 1;
        if tries > 100 {
            return Err(Error::BracketFail { k, reason: "no lower bracket".into() });
        }
    }
    let mut f_hi = d(hi);
    width = 2.0;
    while f_hi <= 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi += width;
        width *= 2.0;
        f_hi = d(hi);
        tries += 1;
        if tries > 200 {
            return Err(Error::BracketFail { k, reason: "no upper bracket".into() });
        }
    }

    // Illinois variant of regula falsi.
    let mut side = 0i8;
    for _ in 0..opts.max_iter {
        let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let x = if x.is_finite() && x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let fx = d(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        let scale = 1.0f64.max(x.abs());
        if hi - lo <= opts.lam_tol * scale
            || (fx.abs() < 1e-15 && (hi - lo) <= 1e3 * opts.lam_tol * scale)
        {
            return Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi });
        }
        if (hi - lo) < 1e-14 * scale {
            return Ok(x);
        }
    }
    Err(Error::NonConvergent {
        what: "Sturm-Liouville eigenvalue",
        iterations: opts.max_iter,
    })
}

fn eigenfunction(sh: &Shooter<'_>, k: usize, lambda: f64) -> Result<SLEigenpair> {
    let spec = sh.spec;
    let n = spec.band.n;
    let mid = n / 2;
    let (pa, pb) = spec.edge_weights();
    let left0 = match spec.bc {
        BoundaryCondition::Robin(h) => [1.0, -h * pa],
        BoundaryCondition::Dirichlet => [0.0, 1.0],
    };
    let mut state = vec![[0.0; 2]; n + 1];
    if spec.is_symmetric() && n.is_multiple_of(2) {
        // Integrate outward from the equator with the parity of the k-th mode
        // and inward from the edge. Either shot can pick up a component that
        // grows across an evanescent stretch (near the equator for
        // edge-localized modes, near the edges for large mu), so the splice
        // point is chosen by the Rayleigh quotient.
        let parity = if k % 2 == 1 { 1.0 } else { -1.0 };
        let start = if parity > 0.0 { [1.0, 0.0] } else { [0.0, 1.0] };
        let mut outward = sh.coef.solution(lambda, start, mid, 0);
        outward.reverse();
        let inward = sh.coef.solution(lambda, left0, 0, mid);
        let join = best_join(spec, &inward, &outward, lambda);
        let c = if join > 0 { outward[join][0] / inward[join][0] } else { 0.0 };
        state[..=mid].copy_from_slice(&outward);
        for (s, y) in state.iter_mut().zip(&inward).take(join) {
            *s = [c * y[0], c * y[1]];
        }
        for j in 0..mid {
            let s = state[j];
            state[n - j] = [parity * s[0], -parity * s[1]];
        }
        if state[0][0] * left0[0] + state[0][1] * left0[1] < 0.0 {
            for s in state.iter_mut() {
                *s = [-s[0], -s[1]];
            }
        }
    } else {
        let right0 = match spec.bc {
            BoundaryCondition::Robin(h) => [1.0, h * pb],
            BoundaryCondition::Dirichlet => [0.0, -1.0],
        };
        let left = sh.coef.solution(lambda, left0, 0, mid);
        let right = sh.coef.solution(lambda, right0, n, mid);
        state[..=mid].copy_from_slice(&left);
        let rm = right[mid];
        let lm = left[mid];
        let c = (lm[0] * rm[0] + lm[1] * rm[1]) / (rm[0] * rm[0] + rm[1] * rm[1]);
        for (j, s) in right.iter().enumerate().take(mid) {
            state[n - j] = [c * s[0], c * s[1]];
        }
    }

    let e = spec.dim as i32 - 2;
    let grid = spec.band.points();
    let mut f: Vec<f64> = state.iter().map(|s| s[0]).collect();
    let mut fp: Vec<f64> = state
        .iter()
        .zip(&grid)
        .map(|(s, t)| s[1] / t.sin().powi(e))
        .collect();
    let norm = spec.band.inner(&f, &f, spec.dim).sqrt();
    for v in f.iter_mut().chain(fp.iter_mut()) {
        *v /= norm;
    }
    let bc_residual = match spec.bc {
        BoundaryCondition::Robin(h) => (fp[0] + h * f[0]).abs().max((-fp[n] + h * f[n]).abs()),
        BoundaryCondition::Dirichlet => f[0].abs().max(f[n].abs()),
    };
    Ok(SLEigenpair {
        k,
        lambda,
        nodes: count_nodes(&f),
        f,
        f_prime: fp,
        bc_residual,
    })
}

/// Splice point on the left half of a symmetric band: `inward` is used
/// below it and `outward` from it on. Each shot is accurate across the
/// stretches where the mode grows in its direction of integration, so the
/// splice goes where `inward` is largest within the classically allowed
/// region of the Liouville normal form (`u = sqrt(p) g`, `u'' = (Q - lambda) u`).
/// Without an allowed region the mode is evanescent throughout and the
/// outward shot is used up to its own peak.
fn best_join(spec: &SLSpec, inward: &[[f64; 2]], outward: &[[f64; 2]], lambda: f64) -> usize {
    let e = f64::from(spec.dim as i32 - 2);
    let pts = spec.band.points();
    let allowed = |j: usize| {
        let (s, c) = pts[j].sin_cos();
        let q = (spec.mu + 0.25 * e * e * c * c - 0.5 * e) / (s * s);
        lambda > q
    };
    let argmax = |v: &[[f64; 2]], keep: &dyn Fn(usize) -> bool| {
        (0..v.len())
            .filter(|&j| keep(j))
            .max_by(|&a, &b| v[a][0].abs().total_cmp(&v[b][0].abs()))
    };
    argmax(inward, &allowed)
        .or_else(|| argmax(outward, &|_| true))
        .unwrap_or(0)
}

/// The first `count` eigenvalues by repeated shooting.
pub fn eigenvalues(spec: &SLSpec, count: usize, opts: &SLOptions) -> Result<Vec<f64>> {
    (1..=count).map(|k| eigen_k(spec, k, opts).map(|p| p.lambda)).collect()
}

/// Rayleigh quotient of a sampled trial function, including the Robin
/// boundary term in the numerator.
pub fn rayleigh(spec: &SLSpec, g: &[f64]) -> Result<f64> {
    let band = spec.band;
    if g.len() != band.len() {
        return Err(Error::InvalidInput(format!(
            "trial function has {} samples, band has {}",
            g.len(),
            band.len()
        )));
    }
    let gp = band.derivative(g);
    let e = spec.dim as i32 - 2;
    let pts = band.points();
    let kinetic: Vec<f64> = pts
        .iter()
        .zip(g.iter().zip(&gp))
        .map(|(t, (v, dv))| {
            let s = t.sin();
            s.powi(e) * dv * dv + spec.mu * s.powi(e - 2) * v * v
        })
        .collect();
    let denom = band.inner(g, g, spec.dim);
    if denom.abs() < f64::MIN_POSITIVE * 1e10 {
        return Err(Error::ZeroDenominator);
    }
    let (pa, pb) = spec.edge_weights();
    let boundary = match spec.bc {
        BoundaryCondition::Robin(h) => h * (pa * g[0] * g[0] + pb * g[band.n] * g[band.n]),
        BoundaryCondition::Dirichlet => 0.0,
    };
    Ok((band.integrate(&kinetic) - boundary) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::cone::solve_profile;

    fn cone(d: usize) -> ConeProfile {
        solve_profile(d, &SolverConfig { grid_n: 2048, ..SolverConfig::default() }).unwrap()
    }

    #[test]
    fn legendre_interval_dirichlet() {
        // d = 3, mu = 0 is the Legendre operator; on the full interval the
        // eigenvalues would be l(l+1). On a symmetric sub-band test against
        // the sine limit instead: narrow band, lambda_k ~ (k pi / L)^2.
        let spec = SLSpec::new(3, 1e-3, 0.0, BoundaryCondition::Dirichlet, 256);
        let l = 2e-3;
        for k in 1..=3 {
            let p = eigen_k(&spec, k, &SLOptions::default()).unwrap();
            let approx = (k as f64 * PI / l).powi(2);
            assert!((p.lambda / approx - 1.0).abs() < 1e-5, "{} vs {approx}", p.lambda);
            assert_eq!(p.nodes, k - 1);
        }
    }

    #[test]
    fn translation_and_rotation_values() {
        let p = cone(7);
        let opts = SLOptions::default();
        let l12 = eigen_k(&SLSpec::robin_on_cone(&p, 0.0), 2, &opts).unwrap();
        assert!(l12.lambda.abs() < 1e-7, "{}", l12.lambda);
        let l21 = eigen_k(&SLSpec::robin_on_cone(&p, 5.0), 1, &opts).unwrap();
        assert!(l21.lambda.abs() < 1e-7, "{}", l21.lambda);
        let l22 = eigen_k(&SLSpec::robin_on_cone(&p, 5.0), 2, &opts).unwrap();
        assert!((l22.lambda - 6.0).abs() < 1e-7, "{}", l22.lambda);
        assert!(l22.bc_residual < 1e-7);
    }

    #[test]
    fn matching_strategies_agree() {
        let p = cone(5);
        for mu in [0.0, 3.0, 8.0] {
            let spec = SLSpec::robin_on_cone(&p, mu);
            for k in 1..=4 {
                let a = eigen_k(&spec, k, &SLOptions { matching: Some(Matching::HalfBand), ..Default::default() }).unwrap();
                let b = eigen_k(&spec, k, &SLOptions { matching: Some(Matching::FullBand), ..Default::default() }).unwrap();
                assert!((a.lambda - b.lambda).abs() < 1e-9, "mu {mu} k {k}: {} {}", a.lambda, b.lambda);
            }
        }
    }

    #[test]
    fn wide_band_near_pole() {
        // edge weight sin^7 ~ 1e-4 and an edge-localized near-degenerate pair
        let spec = SLSpec::new(9, 1.32, 0.0, BoundaryCondition::Robin(7.0 * 1.32f64.tan()), 4096);
        let fd = crate::fd::eigen_fd_crosscheck(&spec, 5);
        for (k, f) in fd.iter().enumerate() {
            let e = eigen_k(&spec, k + 1, &SLOptions::default()).unwrap();
            assert_eq!(e.nodes, k);
            assert!((e.lambda - f).abs() < 1e-5 * f.abs().max(1.0), "{k} {} {f}", e.lambda);
        }
    }

    #[test]
    fn sign_convention() {
        let p = cone(4);
        let r = eigen_k(&SLSpec::robin_on_cone(&p, 0.0), 1, &SLOptions::default()).unwrap();
        assert!(r.f[0] > 0.0 && r.f_prime[0] < 0.0);
        let dch = eigen_k(&SLSpec::dirichlet_on_cone(&p, 0.0), 2, &SLOptions::default()).unwrap();
        assert!(dch.f_prime[0] > 0.0);
    }

    #[test]
    fn rayleigh_identities() {
        let p = cone(7);
        let spec = SLSpec::robin_on_cone(&p, 0.0);
        let e = eigen_k(&spec, 1, &SLOptions::default()).unwrap();
        assert!((rayleigh(&spec, &e.f).unwrap() - e.lambda).abs() < 1e-8);
        let ones = vec![1.0; spec.band.len()];
        assert!(rayleigh(&spec, &ones).unwrap() < 0.0);
        let zeros = vec![0.0; spec.band.len()];
        assert_eq!(rayleigh(&spec, &zeros), Err(Error::ZeroDenominator));
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = SLSpec::new(5, 1.0, 0.0, BoundaryCondition::Robin(-1.0), 128);
        assert!(eigen_k(&spec, 1, &SLOptions::default()).is_err());
        let spec = SLSpec::new(5, 1.6, 0.0, BoundaryCondition::Dirichlet, 128);
        assert!(eigen_k(&spec, 1, &SLOptions::default()).is_err());
    }

    #[test]
    fn resolvent_inverts_operator() {
        let spec = SLSpec::new(7, 0.6, 6.0, BoundaryCondition::Robin(1.3), 2048);
        let band = spec.band;
        let f: Vec<f64> = band.points().iter().map(|t| (3.0 * t).cos() + t * t).collect();
        let (v, dv) = resolvent(&spec, 1.61, &f).unwrap();
        let e = 5;
        let flux: Vec<f64> = band.points().iter().zip(&dv).map(|(t, d)| t.sin().powi(e) * d).collect();
        let dflux = band.derivative(&flux);
        for i in 0..=band.n {
            let t = band.point(i);
            let w = t.sin().powi(e);
            let lhs = dflux[i] - 6.0 * t.sin().powi(e - 2) * v[i] + 1.61 * w * v[i];
            assert!((lhs - w * f[i]).abs() < 1e-7, "{i} {lhs}");
        }
        assert!((dv[0] + 1.3 * v[0]).abs() < 1e-10);
        assert!((-dv[band.n] + 1.3 * v[band.n]).abs() < 1e-10);
    }
}
