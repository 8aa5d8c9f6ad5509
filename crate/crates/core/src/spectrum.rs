//! Interior Robin spectrum of the cone's link, assembled from the band
//! Sturm-Liouville problems and the factor-sphere modes.

use serde::{Deserialize, Serialize};

use crate::cone::{jacobi_fields, ConeProfile};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::BandGrid;
use crate::sl::{eigen_k, SLEigenpair, SLOptions, SLSpec};
use crate::sphere;

/// Radial homogeneities `-(d-2)/2 +- sqrt(((d-2)/2)^2 + lambda)` attached to
/// one link eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homogeneity {
    pub radicand: f64,
    /// Present when the radicand is nonnegative.
    pub delta: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
    /// Radicand vanishes: the pair degenerates to `r^{-(d-2)/2}` and
    /// `r^{-(d-2)/2} ln r`.
    pub log_mode: bool,
    /// Modulus of the complex pair when the radicand is negative.
    pub complex_modulus: Option<f64>,
}

pub fn homogeneity(dim: usize, lambda: f64, tol: f64) -> Homogeneity {
    let half = (dim as f64 - 2.0) / 2.0;
    let radicand = half * half + lambda;
    if radicand.abs() <= tol {
        return Homogeneity {
            radicand,
            delta: Some(0.0),
            gamma_plus: Some(-half),
            gamma_minus: Some(-half),
            log_mode: true,
            complex_modulus: None,
        };
    }
    if radicand > 0.0 {
        let delta = radicand.sqrt();
        Homogeneity {
            radicand,
            delta: Some(delta),
            gamma_plus: Some(-half + delta),
            gamma_minus: Some(-half - delta),
            log_mode: false,
            complex_modulus: None,
        }
    } else {
        // |gamma|^2 = half^2 + (-radicand) = -lambda.
        Homogeneity {
            radicand,
            delta: None,
            gamma_plus: None,
            gamma_minus: None,
            log_mode: false,
            complex_modulus: Some((-lambda).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    /// `(ell, k)` of every band problem contributing to this eigenvalue.
    pub sources: Vec<(usize, usize)>,
    #[serde(flatten)]
    pub homogeneity: Homogeneity,
}

/// One solved band problem together with its sphere mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub ell: usize,
    pub mu: f64,
    pub sphere_multiplicity: usize,
    pub pair: SLEigenpair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpectrum {
    pub dim: usize,
    pub lambda_max: f64,
    pub band: BandGrid,
    /// Clustered eigenvalues, ascending.
    pub eigenvalues: Vec<LinkEigenvalue>,
    /// Every `(ell, k)` solve, ascending in `(ell, k)`.
    pub modes: Vec<ModeSolution>,
}

impl LinkSpectrum {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0].lambda
    }

    pub fn mode(&self, ell: usize, k: usize) -> Option<&ModeSolution> {
        self.modes.iter().find(|m| m.ell == ell && m.pair.k == k)
    }

    pub fn modes_of(&self, ell: usize) -> impl Iterator<Item = &ModeSolution> {
        self.modes.iter().filter(move |m| m.ell == ell)
    }

    /// Total multiplicity of eigenvalues within `tol` of `lambda`.
    pub fn multiplicity_near(&self, lambda: f64, tol: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|e| (e.lambda - lambda).abs() <= tol)
            .map(|e| e.multiplicity)
            .sum()
    }
}

pub(crate) fn sl_options(cfg: &SolverConfig) -> SLOptions {
    SLOptions {
        lam_tol: cfg.lam_tol,
        ..SLOptions::default()
    }
}

/// All link eigenvalues up to `lambda_max`. Degrees with
/// `mu_ell + lambda_{0,1} > lambda_max` are skipped, since
/// `lambda_{ell,1} >= lambda_{0,1} + mu_ell`.
pub fn assemble(p: &ConeProfile, lambda_max: f64, cfg: &SolverConfig) -> Result<LinkSpectrum> {
    let d = p.dim;
    if lambda_max <= d as f64 - 1.0 {
        return Err(Error::InvalidInput(format!(
            "lambda_max = {lambda_max} must exceed d - 1 = {}",
            d - 1
        )));
    }
    let opts = sl_options(cfg);
    let mut modes = Vec::new();
    let mut lambda11 = None;
    for ell in 0.. {
        let sm = sphere::mode(d, ell);
        if let Some(l11) = lambda11 {
            if sm.mu + l11 > lambda_max {
                break;
            }
        }
        let spec = SLSpec::robin_on_cone(p, sm.mu);
        for k in 1.. {
            let pair = eigen_k(&spec, k, &opts)?;
            if ell == 0 && k == 1 {
                lambda11 = Some(pair.lambda);
            }
            if pair.lambda > lambda_max {
                break;
            }
            modes.push(ModeSolution {
                ell,
                mu: sm.mu,
                sphere_multiplicity: sm.multiplicity,
                pair,
            });
        }
    }
    let eigenvalues = cluster(d, &modes, cfg.cluster_tol);
    Ok(LinkSpectrum {
        dim: d,
        lambda_max,
        band: p.band(),
        eigenvalues,
        modes,
    })
}

fn cluster(dim: usize, modes: &[ModeSolution], tol: f64) -> Vec<LinkEigenvalue> {
    let mut sorted: Vec<&ModeSolution> = modes.iter().collect();
    sorted.sort_by(|a, b| a.pair.lambda.total_cmp(&b.pair.lambda));
    let mut out: Vec<(Vec<&ModeSolution>, f64)> = Vec::new();
    for m in sorted {
        match out.last_mut() {
            Some((members, last)) if (m.pair.lambda - *last).abs() <= tol => {
                *last = m.pair.lambda;
                members.push(m);
            }
            _ => out.push((vec![m], m.pair.lambda)),
        }
    }
    out.into_iter()
        .map(|(members, _)| {
            let weight: usize = members.iter().map(|m| m.sphere_multiplicity).sum();
            let lambda = members
                .iter()
                .map(|m| m.pair.lambda * m.sphere_multiplicity as f64)
                .sum::<f64>()
                / weight as f64;
            LinkEigenvalue {
                lambda,
                multiplicity: weight,
                sources: members.iter().map(|m| (m.ell, m.pair.k)).collect(),
                homogeneity: homogeneity(dim, lambda, tol),
            }
        })
        .collect()
}

/// Relative `L^2(sin^{d-2})` distance from `f` to the line through `model`.
pub fn alignment_error(band: &BandGrid, dim: usize, f: &[f64], model: &[f64]) -> f64 {
    let c = band.inner(f, model, dim) / band.inner(model, model, dim);
    let diff: Vec<f64> = f.iter().zip(model).map(|(a, b)| a - c * b).collect();
    (band.inner(&diff, &diff, dim) / band.inner(f, f, dim)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiMatch {
    /// `(ell, k) = (0, 2)` against the axial translation.
    pub axial: f64,
    /// `(1, 1)` against the transverse translation.
    pub transverse: f64,
    /// `(1, 2)` against the rotation generator.
    pub rotation: f64,
}

impl JacobiMatch {
    pub fn max(&self) -> f64 {
        self.axial.max(self.transverse).max(self.rotation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub dim: usize,
    pub lambda1: f64,
    /// `lambda1 + ((d-2)/2)^2`.
    pub stability_margin: f64,
    pub strictly_stable: bool,
    pub lambda1_below_minus_d_plus_2: bool,
    pub dim_kernel0: usize,
    pub dim_kernel_d_minus_1: usize,
    pub gap_above: f64,
    /// Eigenvalues in `(lambda1, 0)` or `(0, d - 1)`.
    pub unexpected: Vec<f64>,
    pub jacobi_match: JacobiMatch,
    pub verdict: bool,
}

pub fn verify_strong_integrability(p: &ConeProfile, cfg: &SolverConfig) -> Result<IntegrabilityReport> {
    let d = p.dim;
    let top = d as f64 - 1.0;
    let tol = cfg.cluster_tol;
    let mut lambda_max = 3.0 * d as f64;
    let spec = loop {
        let s = assemble(p, lambda_max, cfg)?;
        if s.eigenvalues.iter().any(|e| e.lambda > top + tol) {
            break s;
        }
        lambda_max *= 2.0;
    };

    let jf = jacobi_fields(p);
    let band = p.band();
    let err = |ell: usize, k: usize, model: &[f64]| {
        spec.mode(ell, k)
            .map(|m| alignment_error(&band, d, &m.pair.f, model))
            .unwrap_or(f64::INFINITY)
    };
    let jacobi_match = JacobiMatch {
        axial: err(0, 2, &jf.axial),
        transverse: err(1, 1, &jf.transverse),
        rotation: err(1, 2, &jf.rotation),
    };

    for e in &spec.eigenvalues {
        let near_kernel = e.lambda.abs() <= tol || (e.lambda - top).abs() <= tol;
        if e.sources.len() > 1 && !near_kernel {
            let first = spec.mode(e.sources[0].0, e.sources[0].1).unwrap();
            let second = spec.mode(e.sources[1].0, e.sources[1].1).unwrap();
            return Err(Error::AmbiguousCluster {
                a: first.pair.lambda,
                b: second.pair.lambda,
            });
        }
    }

    let lambda1 = spec.lambda1();
    let half = (d as f64 - 2.0) / 2.0;
    let stability_margin = lambda1 + half * half;
    let unexpected: Vec<f64> = spec.eigenvalues[1..]
        .iter()
        .map(|e| e.lambda)
        .filter(|&l| l <= top + tol && l.abs() > tol && (l - top).abs() > tol)
        .collect();
    let dim_kernel0 = spec.multiplicity_near(0.0, tol);
    let dim_kernel_d_minus_1 = spec.multiplicity_near(top, tol);
    let gap_above = spec
        .eigenvalues
        .iter()
        .map(|e| e.lambda)
        .find(|&l| l > top + tol)
        .unwrap_or(f64::INFINITY);
    let strictly_stable = stability_margin > 0.0;
    let verdict = strictly_stable
        && spec.eigenvalues[0].multiplicity == 1
        && dim_kernel0 == d
        && dim_kernel_d_minus_1 == d - 1
        && unexpected.is_empty()
        && jacobi_match.max() <= cfg.fn_tol;
    Ok(IntegrabilityReport {
        dim: d,
        lambda1,
        stability_margin,
        strictly_stable,
        lambda1_below_minus_d_plus_2: lambda1 < -(d as f64 - 2.0),
        dim_kernel0,
        dim_kernel_d_minus_1,
        gap_above,
        unexpected,
        jacobi_match,
        verdict,
    })
}

/// Sorted, deduplicated real homogeneities available to solutions of the
/// linearized problem on exterior domains.
pub fn decay_exponents(spec: &[LinkEigenvalue]) -> Vec<f64> {
    let mut out: Vec<f64> = spec
        .iter()
        .flat_map(|e| [e.homogeneity.gamma_plus, e.homogeneity.gamma_minus])
        .flatten()
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    out
}

/// Whether a Jacobi field of homogeneity `gamma` is compatible with decay
/// `O(|x|^{-beta})`.
pub fn decay_admissible(gamma: f64, beta: f64) -> bool {
    gamma <= -beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::solve_profile;

    #[test]
    fn homogeneity_special_values() {
        for d in 3..=10 {
            let h0 = homogeneity(d, 0.0, 1e-12);
            assert!((h0.gamma_plus.unwrap()).abs() < 1e-14);
            assert!((h0.gamma_minus.unwrap() + (d as f64 - 2.0)).abs() < 1e-14);
            let h1 = homogeneity(d, d as f64 - 1.0, 1e-12);
            assert!((h1.gamma_plus.unwrap() - 1.0).abs() < 1e-14);
            assert!((h1.gamma_minus.unwrap() + (d as f64 - 1.0)).abs() < 1e-14);
        }
        let c = homogeneity(3, -2.0, 1e-12);
        assert!(c.delta.is_none() && c.complex_modulus.is_some());
        let l = homogeneity(6, -4.0, 1e-12);
        assert!(l.log_mode);
    }

    #[test]
    fn decay_exponent_pairs() {
        let ev = vec![
            LinkEigenvalue {
                lambda: 0.0,
                multiplicity: 7,
                sources: vec![(0, 2), (1, 1)],
                homogeneity: homogeneity(7, 0.0, 1e-12),
            },
            LinkEigenvalue {
                lambda: 6.0,
                multiplicity: 6,
                sources: vec![(1, 2)],
                homogeneity: homogeneity(7, 6.0, 1e-12),
            },
        ];
        let ex = decay_exponents(&ev);
        assert_eq!(ex.len(), 4);
        assert!((ex[0] + 6.0).abs() < 1e-12 && (ex[3] - 1.0).abs() < 1e-12);
        assert!(decay_admissible(-5.0, 1.0));
        assert!(!decay_admissible(0.0, 1.0));
    }

    #[test]
    fn d7_table() {
        let cfg = SolverConfig { grid_n: 2048, ..SolverConfig::default() };
        let p = solve_profile(7, &cfg).unwrap();
        let s = assemble(&p, 20.0, &cfg).unwrap();
        assert!(s.lambda1() < -5.0);
        assert_eq!(s.multiplicity_near(0.0, 1e-6), 7);
        assert_eq!(s.multiplicity_near(6.0, 1e-6), 6);
        assert!(s.eigenvalues[3].lambda > 6.0);
        assert!(assemble(&p, 5.0, &cfg).is_err());
    }
}
