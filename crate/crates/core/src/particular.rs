//! Particular solutions of the linearized problem with power-law Robin data
//! on the boundary of the cone, and the decay classification of expansions
//! in homogeneous Jacobi fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryMode;
use crate::cauchy_euler::{eval_powers, CauchyEuler, Limits, PowerTerm};
use crate::cone::ConeProfile;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::{geometric_grid, loglog_slope, sin_pow, sphere_area, BandGrid};
use crate::sl::{resolvent, SLSpec};
use crate::spectrum::LinkSpectrum;

/// Boundary data `G = sum_k amp_k r^{-beta} psi_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub beta: f64,
    /// Index into the boundary-mode list to amplitude.
    pub boundary_coeffs: BTreeMap<usize, f64>,
    #[serde(default)]
    pub admissible: bool,
}

impl SourceSpec {
    pub fn new(beta: f64, boundary_coeffs: BTreeMap<usize, f64>) -> Self {
        Self {
            beta,
            boundary_coeffs,
            admissible: false,
        }
    }

    /// Sets and returns `admissible`: `beta > 0` and `d/2 +- delta_k - beta`
    /// stays away from zero for every real homogeneity of the link.
    pub fn check_admissible(&mut self, link: &LinkSpectrum, tol: f64) -> bool {
        let h = link.dim as f64 / 2.0;
        self.admissible = self.beta > 0.0
            && link.eigenvalues.iter().all(|e| match e.homogeneity.delta {
                Some(delta) => (h + delta - self.beta).abs() > tol && (h - delta - self.beta).abs() > tol,
                None => true,
            });
        self.admissible
    }

    /// `a self + b other`; both must share `beta`.
    pub fn combine(a: f64, s: &SourceSpec, b: f64, t: &SourceSpec) -> Result<SourceSpec> {
        if s.beta != t.beta {
            return Err(Error::InvalidInput("sources decay at different rates".into()));
        }
        let mut coeffs = BTreeMap::new();
        for (&k, &v) in &s.boundary_coeffs {
            *coeffs.entry(k).or_insert(0.0) += a * v;
        }
        for (&k, &v) in &t.boundary_coeffs {
            *coeffs.entry(k).or_insert(0.0) += b * v;
        }
        Ok(SourceSpec {
            beta: s.beta,
            boundary_coeffs: coeffs,
            admissible: s.admissible && t.admissible,
        })
    }
}

/// `Y_ell(phi) P(theta) sum_i c_i r^{e_i}`, with `Y_ell` a fixed degree-`ell`
/// harmonic of mean square one on `S^{d-2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub ell: usize,
    pub mu: f64,
    pub profile: Vec<f64>,
    pub profile_prime: Vec<f64>,
    pub radial: Vec<PowerTerm>,
}

impl Component {
    pub fn radial_at(&self, r: f64) -> f64 {
        eval_powers(&self.radial, r)
    }
}

/// Separable field on `Sigma x [R0, R_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub dim: usize,
    pub band: BandGrid,
    pub r_grid: Vec<f64>,
    pub beta: f64,
    pub components: Vec<Component>,
}

impl RadialField {
    pub fn empty(dim: usize, band: BandGrid, r_grid: Vec<f64>, beta: f64) -> Self {
        Self {
            dim,
            band,
            r_grid,
            beta,
            components: Vec::new(),
        }
    }

    /// Radial coefficients `c_k(r)` of every component on the grid.
    pub fn coefficient_samples(&self) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| self.r_grid.iter().map(|&r| c.radial_at(r)).collect())
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.components.iter().map(|c| c.ell).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Angular profile and its derivative of the degree-`ell` part at radius `r`.
    pub fn angular(&self, ell: usize, r: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.band.len();
        let mut v = vec![0.0; n];
        let mut dv = vec![0.0; n];
        for c in self.components.iter().filter(|c| c.ell == ell) {
            let a = c.radial_at(r);
            for i in 0..n {
                v[i] += a * c.profile[i];
                dv[i] += a * c.profile_prime[i];
            }
        }
        (v, dv)
    }

    /// `||u(r .)||_{L^2(Sigma)}`.
    pub fn norm_at(&self, r: f64) -> f64 {
        let area = sphere_area(self.dim - 2);
        self.degrees()
            .into_iter()
            .map(|ell| {
                let (v, _) = self.angular(ell, r);
                area * self.band.inner(&v, &v, self.dim)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.r_grid.iter().map(|&r| self.norm_at(r)).collect()
    }

    /// Log-log slope of the mode norm over the top `decades` of the grid.
    pub fn decay_slope(&self, decades: f64) -> f64 {
        let r_max = *self.r_grid.last().unwrap();
        let lo = r_max / 10f64.powf(decades);
        let (r, y): (Vec<f64>, Vec<f64>) = self
            .r_grid
            .iter()
            .copied()
            .filter(|&r| r >= lo * (1.0 - 1e-12))
            .map(|r| (r, self.norm_at(r)))
            .unzip();
        if y.iter().all(|&v| v == 0.0) {
            return f64::NEG_INFINITY;
        }
        loglog_slope(&r, &y)
    }

    /// Pointwise samples `[degree][radius][theta]`.
    pub fn samples(&self) -> BTreeMap<usize, Vec<Vec<f64>>> {
        self.degrees()
            .into_iter()
            .map(|ell| (ell, self.r_grid.iter().map(|&r| self.angular(ell, r).0).collect()))
            .collect()
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            for t in &mut c.radial {
                t.coeff *= a;
            }
        }
        out
    }

    /// Separated Laplacian at radius `r`, per degree.
    pub fn laplacian(&self, r: f64) -> BTreeMap<usize, Vec<f64>> {
        let e = self.dim as i32 - 2;
        let n = self.band.len();
        let mut out: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for c in &self.components {
            let flux: Vec<f64> = (0..n)
                .map(|i| sin_pow(self.band.point(i), e) * c.profile_prime[i])
                .collect();
            let dflux = self.band.derivative(&flux);
            let acc = out.entry(c.ell).or_insert_with(|| vec![0.0; n]);
            for t in &c.radial {
                let ex = t.exponent;
                let rad = t.coeff * r.powf(ex - 2.0);
                let radial_factor = ex * (ex + self.dim as f64 - 2.0);
                for i in 0..n {
                    let th = self.band.point(i);
                    let w = sin_pow(th, e);
                    let lap_s = dflux[i] / w - c.mu * c.profile[i] / (th.sin() * th.sin());
                    acc[i] += rad * (radial_factor * c.profile[i] + lap_s);
                }
            }
        }
        out
    }

    /// `d_nu u + H u` on the two boundary latitudes at radius `r`, per degree,
    /// as `(left, right)` with `nu` the inward normal.
    pub fn robin_trace(&self, h: f64, r: f64) -> BTreeMap<usize, (f64, f64)> {
        let n = self.band.len() - 1;
        self.degrees()
            .into_iter()
            .map(|ell| {
                let (v, dv) = self.angular(ell, r);
                (ell, (dv[0] + h * v[0], -dv[n] + h * v[n]))
            })
            .collect()
    }

    fn add(&mut self, other: &RadialField, sign: f64) {
        for c in &other.components {
            let mut c = c.clone();
            for t in &mut c.radial {
                t.coeff *= sign;
            }
            self.components.push(c);
        }
    }
}

fn radial_grid(cfg: &SolverConfig) -> Vec<f64> {
    geometric_grid(cfg.r0, cfg.r_max)
}

/// Step 1: `u1` with `d_nu u1 + H u1 = r G` and `f = Delta u1`.
pub fn transfer_boundary(
    src: &SourceSpec,
    bmodes: &[BoundaryMode],
    p: &ConeProfile,
    cfg: &SolverConfig,
) -> Result<(RadialField, RadialField)> {
    if !src.admissible {
        return Err(Error::Validation("source is not admissible".into()));
    }
    let d = p.dim as f64;
    let beta = src.beta;
    let c = (1.0 - beta) * (d - 1.0 - beta);
    let band = p.band();
    let r = radial_grid(cfg);
    let mut u1 = RadialField::empty(p.dim, band, r.clone(), beta);
    let mut f = RadialField::empty(p.dim, band, r, beta + 1.0);
    for (&idx, &amp) in &src.boundary_coeffs {
        let m = bmodes
            .get(idx)
            .ok_or_else(|| Error::InvalidInput(format!("no boundary mode with index {idx}")))?;
        if amp == 0.0 {
            continue;
        }
        let power = |coeff: f64, exponent: f64| vec![PowerTerm { coeff, exponent }];
        if m.in_resonance {
            let prof: Vec<f64> = p.g.iter().zip(&m.psi).map(|(g, s)| g * s).collect();
            let dprof: Vec<f64> = (0..prof.len())
                .map(|i| p.g_prime[i] * m.psi[i] + p.g[i] * m.psi_prime[i])
                .collect();
            let src_prof: Vec<f64> = (0..prof.len())
                .map(|i| (c - (d - 1.0)) * prof[i] + 2.0 * p.g_prime[i] * m.psi_prime[i])
                .collect();
            let src_dprof = band.derivative(&src_prof);
            u1.components.push(Component {
                ell: m.ell,
                mu: m.mu,
                profile: prof,
                profile_prime: dprof,
                radial: power(amp, 1.0 - beta),
            });
            f.components.push(Component {
                ell: m.ell,
                mu: m.mu,
                profile: src_prof,
                profile_prime: src_dprof,
                radial: power(amp, -1.0 - beta),
            });
        } else {
            if m.ell_k.abs() <= cfg.res_tol {
                return Err(Error::ResonanceDivision { ell_k: m.ell_k });
            }
            u1.components.push(Component {
                ell: m.ell,
                mu: m.mu,
                profile: m.psi.clone(),
                profile_prime: m.psi_prime.clone(),
                radial: power(amp / m.ell_k, 1.0 - beta),
            });
            f.components.push(Component {
                ell: m.ell,
                mu: m.mu,
                profile: m.psi.clone(),
                profile_prime: m.psi_prime.clone(),
                radial: power(amp * c / m.ell_k, -1.0 - beta),
            });
        }
    }
    Ok((u1, f))
}

/// Which lower limits of the nested integral to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRule {
    /// `a = R0` iff `d/2 + delta - beta > 0`, `b = R0` iff `d/2 - delta - beta > 0`.
    #[default]
    Selection,
    /// The selection rule with the outer limit swapped.
    FlipOuter,
    /// The selection rule with the inner limit swapped.
    FlipInner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolve {
    pub ell: usize,
    pub k: usize,
    pub lambda: f64,
    pub limits: Limits,
    /// `(d/2 + delta - beta, d/2 - delta - beta)`.
    pub exponents: (f64, f64),
    /// `f_k(r)` as power terms.
    pub forcing: Vec<PowerTerm>,
    /// `u_k(r)` from the closed form of the nested integral.
    pub closed_form: Vec<PowerTerm>,
    /// `u_k` on the radial grid by adaptive quadrature of the nested integral.
    pub quadrature: Vec<f64>,
    /// Max relative gap between `quadrature` and `closed_form`.
    pub quadrature_gap: f64,
    pub ode_residual: f64,
    pub slope: f64,
}

/// Step 2, per interior mode of the link: `u_k` with
/// `r^2 u_k'' + (d-1) r u_k' - lambda_k u_k = r^2 f_k`.
pub fn solve_radial_modes(
    f: &RadialField,
    link: &LinkSpectrum,
    beta: f64,
    rule: LimitRule,
    cfg: &SolverConfig,
) -> Result<Vec<ModeSolve>> {
    let band = f.band;
    let d = f.dim;
    let r = &f.r_grid;
    let r0 = r[0];
    let mut out = Vec::new();
    for ell in f.degrees() {
        for m in link.modes_of(ell).take(cfg.modes_per_ell) {
            let phi = &m.pair.f;
            let norm2 = band.inner(phi, phi, d);
            let mut forcing: Vec<PowerTerm> = Vec::new();
            for c in f.components.iter().filter(|c| c.ell == ell) {
                let proj = band.inner(&c.profile, phi, d) / norm2;
                for t in &c.radial {
                    match forcing.iter_mut().find(|x| x.exponent == t.exponent) {
                        Some(x) => x.coeff += proj * t.coeff,
                        None => forcing.push(PowerTerm {
                            coeff: proj * t.coeff,
                            exponent: t.exponent,
                        }),
                    }
                }
            }
            let ce = CauchyEuler::new(d, m.pair.lambda)?;
            let mut limits = ce.limits(beta, cfg.res_tol)?;
            match rule {
                LimitRule::Selection => {}
                LimitRule::FlipOuter => limits.b = limits.b.flipped(),
                LimitRule::FlipInner => limits.a = limits.a.flipped(),
            }
            let mut closed_form = Vec::new();
            for &t in &forcing {
                closed_form.extend(ce.solve_power(t, limits, r0)?);
            }
            let fk = |t: f64| eval_powers(&forcing, t);
            let quadrature = ce.solve_quadrature(&fk, limits, r, cfg.quad_tol * 1e-3)?;
            let exact: Vec<f64> = r.iter().map(|&x| eval_powers(&closed_form, x)).collect();
            let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let quadrature_gap = if scale == 0.0 {
                0.0
            } else {
                quadrature
                    .iter()
                    .zip(&exact)
                    .map(|(q, e)| (q - e).abs() / e.abs().max(1e-300))
                    .fold(0.0, f64::max)
            };
            let fs: Vec<f64> = r.iter().map(|&x| fk(x)).collect();
            let ode_residual = if scale == 0.0 { 0.0 } else { ce.residual(r, &quadrature, &fs) };
            let slope = slope_top(r, &quadrature, 3.0);
            out.push(ModeSolve {
                ell,
                k: m.pair.k,
                lambda: m.pair.lambda,
                limits,
                exponents: ce.exponents(beta),
                forcing,
                closed_form,
                quadrature,
                quadrature_gap,
                ode_residual,
                slope,
            });
        }
    }
    Ok(out)
}

fn slope_top(r: &[f64], v: &[f64], decades: f64) -> f64 {
    let lo = r[r.len() - 1] / 10f64.powf(decades);
    let (x, y): (Vec<f64>, Vec<f64>) = r
        .iter()
        .zip(v)
        .filter(|(&x, _)| x >= lo * (1.0 - 1e-12))
        .map(|(&x, &y)| (x, y.abs()))
        .unzip();
    if y.contains(&0.0) {
        return f64::NEG_INFINITY;
    }
    loglog_slope(&x, &y)
}

/// `u2` with `Delta u2 = f` and homogeneous Robin data: for every degree and
/// power in `f`, the exact angular resolvent, plus the homogeneous parts that
/// the nested integral attaches to each solved link mode.
pub fn assemble_u2(f: &RadialField, p: &ConeProfile, modes: &[ModeSolve], link: &LinkSpectrum) -> Result<RadialField> {
    let mut u2 = RadialField::empty(f.dim, f.band, f.r_grid.clone(), f.beta - 2.0);
    let d = f.dim as f64;
    for ell in f.degrees() {
        let comps: Vec<&Component> = f.components.iter().filter(|c| c.ell == ell).collect();
        let mu = comps[0].mu;
        let mut exps: Vec<f64> = comps.iter().flat_map(|c| c.radial.iter().map(|t| t.exponent)).collect();
        exps.sort_by(f64::total_cmp);
        exps.dedup();
        let spec = SLSpec::robin_on_cone(p, mu);
        for e in exps {
            let n = f.band.len();
            let mut forcing = vec![0.0; n];
            for c in &comps {
                for t in c.radial.iter().filter(|t| t.exponent == e) {
                    for (fv, pv) in forcing.iter_mut().zip(&c.profile) {
                        *fv += t.coeff * pv;
                    }
                }
            }
            let cc = (e + 2.0) * (e + d);
            let (v, dv) = resolvent(&spec, cc, &forcing)?;
            u2.components.push(Component {
                ell,
                mu,
                profile: v,
                profile_prime: dv,
                radial: vec![PowerTerm {
                    coeff: 1.0,
                    exponent: e + 2.0,
                }],
            });
        }
        for ms in modes.iter().filter(|m| m.ell == ell) {
            let pair = &link.mode(ell, ms.k).unwrap().pair;
            let particular: Vec<f64> = ms.forcing.iter().map(|t| t.exponent + 2.0).collect();
            let hom: Vec<PowerTerm> = ms
                .closed_form
                .iter()
                .filter(|t| particular.iter().all(|&x| (x - t.exponent).abs() > 1e-12))
                .copied()
                .collect();
            if hom.is_empty() {
                continue;
            }
            u2.components.push(Component {
                ell,
                mu,
                profile: pair.f.clone(),
                profile_prime: pair.f_prime.clone(),
                radial: hom,
            });
        }
    }
    Ok(u2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub ell: usize,
    pub k: usize,
    pub lambda: f64,
    pub limits: Limits,
    pub exponents: (f64, f64),
    pub quadrature_gap: f64,
    pub ode_residual: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticularReport {
    pub beta: f64,
    /// Decay slope of `||u_p(r .)||` over the top three decades.
    pub slope: f64,
    pub u1_slope: f64,
    pub f_slope: f64,
    /// `max_r ||Delta u_p(r .)|| / ||f(r .)||`.
    pub interior_residual: f64,
    /// `max_r |d_nu u_p + H u_p - r G| / max |r G|` on the boundary.
    pub boundary_residual: f64,
    pub per_mode: Vec<ModeReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticularSolution {
    pub u1: RadialField,
    pub f: RadialField,
    pub u2: RadialField,
    pub up: RadialField,
    pub modes: Vec<ModeSolve>,
    pub report: ParticularReport,
}

/// `u_p = u1 - u2`: harmonic in the cone with `d_nu u_p + H u_p = r G`.
pub fn build_up(
    src: &SourceSpec,
    p: &ConeProfile,
    link: &LinkSpectrum,
    bmodes: &[BoundaryMode],
    cfg: &SolverConfig,
) -> Result<ParticularSolution> {
    build_up_with(src, p, link, bmodes, LimitRule::Selection, cfg)
}

pub fn build_up_with(
    src: &SourceSpec,
    p: &ConeProfile,
    link: &LinkSpectrum,
    bmodes: &[BoundaryMode],
    rule: LimitRule,
    cfg: &SolverConfig,
) -> Result<ParticularSolution> {
    let (u1, f) = transfer_boundary(src, bmodes, p, cfg)?;
    let modes = solve_radial_modes(&f, link, src.beta, rule, cfg)?;
    let u2 = assemble_u2(&f, p, &modes, link)?;
    let mut up = u1.clone();
    up.beta = src.beta - 1.0;
    up.add(&u2, -1.0);
    let (interior_residual, boundary_residual) = residuals(&up, &f, src, bmodes, p.mean_curvature);
    let report = ParticularReport {
        beta: src.beta,
        slope: up.decay_slope(3.0),
        u1_slope: u1.decay_slope(3.0),
        f_slope: f.decay_slope(3.0),
        interior_residual,
        boundary_residual,
        per_mode: modes
            .iter()
            .map(|m| ModeReport {
                ell: m.ell,
                k: m.k,
                lambda: m.lambda,
                limits: m.limits,
                exponents: m.exponents,
                quadrature_gap: m.quadrature_gap,
                ode_residual: m.ode_residual,
                slope: m.slope,
            })
            .collect(),
    };
    Ok(ParticularSolution {
        u1,
        f,
        u2,
        up,
        modes,
        report,
    })
}

/// Interior and boundary residuals of a candidate `u_p` for source `src`.
pub fn residuals(up: &RadialField, f: &RadialField, src: &SourceSpec, bmodes: &[BoundaryMode], h: f64) -> (f64, f64) {
    let area = sphere_area(up.dim - 2);
    let n = up.band.len() - 1;
    let mut interior = 0.0f64;
    let mut boundary = 0.0f64;
    let mut trace_scale = 0.0f64;
    for &r in &up.r_grid {
        let lap = up.laplacian(r);
        let lap_norm = lap
            .values()
            .map(|v| area * up.band.inner(v, v, up.dim))
            .sum::<f64>()
            .sqrt();
        let f_norm = f.norm_at(r);
        if f_norm > 0.0 {
            interior = interior.max(lap_norm / f_norm);
        } else {
            interior = interior.max(lap_norm);
        }
        let traces = up.robin_trace(h, r);
        let mut data: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for (&idx, &amp) in &src.boundary_coeffs {
            let m = &bmodes[idx];
            let g = amp * r.powf(1.0 - src.beta);
            let e = data.entry(m.ell).or_insert((0.0, 0.0));
            e.0 += g * m.psi[0];
            e.1 += g * m.psi[n];
        }
        for (ell, (l, rr)) in &traces {
            let (gl, gr) = data.get(ell).copied().unwrap_or((0.0, 0.0));
            boundary = boundary.max((l - gl).abs()).max((rr - gr).abs());
            trace_scale = trace_scale.max(gl.abs()).max(gr.abs());
        }
    }
    if trace_scale > 0.0 {
        boundary /= trace_scale;
    }
    (interior, boundary)
}

/// `+` for `r^{gamma+}`, `-` for `r^{gamma-}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub ell: usize,
    pub k: usize,
    pub branch: Branch,
    pub gamma: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayClassification {
    pub beta: f64,
    pub retained: Vec<FourierTerm>,
    pub removed: Vec<FourierTerm>,
    /// Relative misfit of the field against its fitted expansion in
    /// homogeneous Jacobi fields.
    pub projection_error: f64,
}

/// Expands `field` in the homogeneous fields `r^{gamma+-} phi_k` of the link
/// and keeps the terms with `gamma <= -beta`, which are the only ones
/// compatible with decay `O(r^{-beta})`.
pub fn classify_decay(field: &RadialField, link: &LinkSpectrum, beta: f64) -> DecayClassification {
    let band = field.band;
    let d = field.dim;
    let r = &field.r_grid;
    let samples = field.samples();
    let norms = field.norms();
    let mut fitted: BTreeMap<usize, Vec<Vec<f64>>> = samples
        .iter()
        .map(|(&ell, s)| (ell, vec![vec![0.0; band.len()]; s.len()]))
        .collect();
    let mut terms = Vec::new();
    for (&ell, s) in &samples {
        for m in link.modes_of(ell) {
            let h = crate::spectrum::homogeneity(d, m.pair.lambda, 1e-12);
            let (Some(gp), Some(gm)) = (h.gamma_plus, h.gamma_minus) else {
                continue;
            };
            if h.log_mode {
                continue;
            }
            let phi = &m.pair.f;
            let norm2 = band.inner(phi, phi, d);
            let c: Vec<f64> = s.iter().map(|v| band.inner(v, phi, d) / norm2).collect();
            let (a, b) = fit_two_powers(r, &c, &norms, gp, gm);
            let acc = fitted.get_mut(&ell).unwrap();
            for (i, &x) in r.iter().enumerate() {
                let v = a * x.powf(gp) + b * x.powf(gm);
                for (j, y) in acc[i].iter_mut().enumerate() {
                    *y += v * phi[j];
                }
            }
            terms.push(FourierTerm { ell, k: m.pair.k, branch: Branch::Plus, gamma: gp, coeff: a });
            terms.push(FourierTerm { ell, k: m.pair.k, branch: Branch::Minus, gamma: gm, coeff: b });
        }
    }
    let mut err = 0.0f64;
    for (i, _) in r.iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (ell, s) in &samples {
            let fit = &fitted[ell][i];
            let diff: Vec<f64> = s[i].iter().zip(fit).map(|(a, b)| a - b).collect();
            num += band.inner(&diff, &diff, d);
            den += band.inner(&s[i], &s[i], d);
        }
        if den > 0.0 {
            err = err.max((num / den).sqrt());
        }
    }
    let significant = |t: &FourierTerm| {
        let peak = r.iter().map(|&x| (t.coeff * x.powf(t.gamma)).abs()).fold(0.0, f64::max);
        let field_peak = r.iter().map(|&x| field.norm_at(x)).fold(0.0, f64::max);
        peak > 1e-10 * field_peak.max(f64::MIN_POSITIVE)
    };
    let (retained, removed): (Vec<FourierTerm>, Vec<FourierTerm>) =
        terms.into_iter().filter(significant).partition(|t| t.gamma <= -beta);
    DecayClassification {
        beta,
        retained,
        removed,
        projection_error: err,
    }
}

/// Least squares `c(r) ~ a r^gp + b r^gm`, each row scaled by the field
/// norm at that radius.
fn fit_two_powers(r: &[f64], c: &[f64], norms: &[f64], gp: f64, gm: f64) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let r0 = r[0];
    for ((&x, &y), &nrm) in r.iter().zip(c).zip(norms) {
        if nrm == 0.0 {
            continue;
        }
        let p = (x / r0).powf(gp);
        let m = (x / r0).powf(gm);
        let w = 1.0 / (nrm * nrm);
        s11 += w * p * p;
        s12 += w * p * m;
        s22 += w * m * m;
        t1 += w * p * y;
        t2 += w * m * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det == 0.0 {
        return (0.0, 0.0);
    }
    let a = (t1 * s22 - t2 * s12) / det;
    let b = (s11 * t2 - s12 * t1) / det;
    (a * r0.powf(-gp), b * r0.powf(-gm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{boundary_modes, Parity};
    use crate::cauchy_euler::Limit;
    use crate::cone::solve_profile;
    use crate::spectrum::assemble;

    struct Setup {
        p: ConeProfile,
        link: LinkSpectrum,
        bmodes: Vec<BoundaryMode>,
        cfg: SolverConfig,
    }

    fn setup() -> Setup {
        let cfg = SolverConfig { grid_n: 1024, ..SolverConfig::default() };
        let p = solve_profile(7, &cfg).unwrap();
        let link = assemble(&p, 30.0, &cfg).unwrap();
        let bmodes = boundary_modes(&p, 8, &cfg).unwrap();
        Setup { p, link, bmodes, cfg }
    }

    fn index(s: &Setup, ell: usize, parity: Parity) -> usize {
        s.bmodes.iter().position(|m| m.ell == ell && m.parity == parity).unwrap()
    }

    fn three_mode(s: &Setup, beta: f64) -> SourceSpec {
        let mut c = BTreeMap::new();
        c.insert(index(s, 0, Parity::Odd), 1.0);
        c.insert(index(s, 0, Parity::Even), 0.5);
        c.insert(index(s, 1, Parity::Odd), -0.8);
        let mut src = SourceSpec::new(beta, c);
        assert!(src.check_admissible(&s.link, s.cfg.res_tol));
        src
    }

    #[test]
    fn three_mode_source() {
        let s = setup();
        let src = three_mode(&s, 0.7);
        let sol = build_up(&src, &s.p, &s.link, &s.bmodes, &s.cfg).unwrap();
        let rep = &sol.report;
        assert!(rep.interior_residual < 1e-6, "{rep:?}");
        assert!(rep.boundary_residual < 1e-6, "{rep:?}");
        assert!(rep.slope <= 0.35, "{}", rep.slope);
        assert!((rep.u1_slope - 0.3).abs() < 1e-6);
        assert!((rep.f_slope + 1.7).abs() < 1e-6);
        for m in &rep.per_mode {
            assert!(m.quadrature_gap < 1e-6, "{m:?}");
            assert!(m.ode_residual < 1e-6, "{m:?}");
        }
    }

    #[test]
    fn flipped_outer_limit_grows() {
        let s = setup();
        let src = three_mode(&s, 0.7);
        let (_, f) = transfer_boundary(&src, &s.bmodes, &s.p, &s.cfg).unwrap();
        let flipped = solve_radial_modes(&f, &s.link, 0.7, LimitRule::FlipOuter, &s.cfg);
        // modes whose outer limit was R0 now diverge at infinity
        assert!(matches!(flipped, Err(Error::TailDivergence { .. })));
        let mut any = false;
        for m in s.link.modes.iter().filter(|m| m.ell == 1) {
            let ce = CauchyEuler::new(7, m.pair.lambda).unwrap();
            if ce.exponents(0.7).1 < 0.0 {
                let lim = ce.limits(0.7, 1e-7).unwrap();
                let bad = Limits { a: lim.a, b: Limit::R0 };
                let t = PowerTerm { coeff: 1.0, exponent: -1.7 };
                let u: Vec<f64> = f.r_grid.iter().map(|&x| eval_powers(&ce.solve_power(t, bad, 1.0).unwrap(), x)).collect();
                assert!(slope_top(&f.r_grid, &u, 3.0) > 1.0 - 0.7 + 0.5);
                any = true;
            }
        }
        assert!(any);
    }

    #[test]
    fn zero_source_and_linearity() {
        let s = setup();
        let mut zero = SourceSpec::new(0.7, BTreeMap::new());
        zero.check_admissible(&s.link, 1e-7);
        let sol = build_up(&zero, &s.p, &s.link, &s.bmodes, &s.cfg).unwrap();
        assert!(sol.up.components.is_empty());
        assert_eq!(sol.report.interior_residual, 0.0);

        let a = three_mode(&s, 0.7);
        let mut c = BTreeMap::new();
        c.insert(index(&s, 1, Parity::Even), 2.0);
        c.insert(index(&s, 0, Parity::Even), 1.0);
        let mut b = SourceSpec::new(0.7, c);
        b.check_admissible(&s.link, 1e-7);
        let comb = SourceSpec::combine(2.0, &a, -3.0, &b).unwrap();
        let ua = build_up(&a, &s.p, &s.link, &s.bmodes, &s.cfg).unwrap().up.samples();
        let ub = build_up(&b, &s.p, &s.link, &s.bmodes, &s.cfg).unwrap().up.samples();
        let uc = build_up(&comb, &s.p, &s.link, &s.bmodes, &s.cfg).unwrap().up.samples();
        for (ell, rows) in &uc {
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let va = ua.get(ell).map_or(0.0, |x| x[i][j]);
                    let vb = ub.get(ell).map_or(0.0, |x| x[i][j]);
                    assert!((v - (2.0 * va - 3.0 * vb)).abs() <= 1e-10 * v.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn classification_of_mixture() {
        let s = setup();
        let band = s.p.band();
        let r = geometric_grid(1.0, 4096.0);
        let axial = &s.link.mode(0, 2).unwrap().pair;
        let field = RadialField {
            dim: 7,
            band,
            r_grid: r,
            beta: 1.0,
            components: vec![Component {
                ell: 0,
                mu: 0.0,
                profile: axial.f.clone(),
                profile_prime: axial.f_prime.clone(),
                radial: vec![
                    PowerTerm { coeff: 3.0, exponent: 0.0 },
                    PowerTerm { coeff: 2.0, exponent: -5.0 },
                ],
            }],
        };
        let c = classify_decay(&field, &s.link, 1.0);
        assert!(c.projection_error < 1e-8, "{}", c.projection_error);
        assert_eq!(c.retained.len(), 1);
        assert!((c.retained[0].gamma + 5.0).abs() < 1e-6);
        assert!((c.retained[0].coeff - 2.0).abs() < 1e-6);
        assert_eq!(c.removed.len(), 1);
        let all = classify_decay(&field, &s.link, -10.0);
        assert_eq!(all.retained.len(), 2);
        assert!(all.removed.is_empty());
    }

    #[test]
    fn quadratic_source_decay() {
        let s = setup();
        let src = three_mode(&s, 0.8);
        let sol = build_up(&src, &s.p, &s.link, &s.bmodes, &s.cfg).unwrap();
        assert!(sol.report.slope <= 1.0 - 0.8 + 0.05);
    }

    #[test]
    fn inadmissible_rejected() {
        let s = setup();
        let mut src = three_mode(&s, 0.7);
        src.admissible = false;
        assert!(build_up(&src, &s.p, &s.link, &s.bmodes, &s.cfg).is_err());
        // d/2 - delta - beta = 0 for the translations at beta = 1
        let mut bad = three_mode(&s, 0.7);
        bad.beta = 1.0;
        assert!(!bad.check_admissible(&s.link, 1e-7));
    }
}
