//! Boundary Robin spectrum: link-harmonic functions with
//! `d_nu psi + H psi = ell psi` on the two boundary latitudes, `nu` the
//! inward normal.

use serde::{Deserialize, Serialize};

use crate::cone::ConeProfile;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::{sin_pow, sphere_area, BandGrid};
use crate::sl::{integrate, SLSpec};
use crate::sphere;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMode {
    pub ell: usize,
    pub mu: f64,
    pub parity: Parity,
    pub ell_k: f64,
    /// Unit norm in `L^2` of the two boundary latitudes, each carrying
    /// measure `cos^{d-2}(theta0) |S^{d-2}|`.
    pub psi: Vec<f64>,
    pub psi_prime: Vec<f64>,
    pub multiplicity: usize,
    pub in_resonance: bool,
    pub bc_residual: f64,
}

impl BoundaryMode {
    /// Max residual of `(sin^{d-2} psi')' - mu sin^{d-4} psi` relative to
    /// the size of its terms.
    pub fn ode_residual(&self, band: &BandGrid, dim: usize) -> f64 {
        let e = dim as i32 - 2;
        let flux: Vec<f64> = (0..band.len())
            .map(|i| sin_pow(band.point(i), e) * self.psi_prime[i])
            .collect();
        let dflux = band.derivative(&flux);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (i, (&df, &psi)) in dflux.iter().zip(&self.psi).enumerate() {
            let t = band.point(i);
            let q = self.mu * sin_pow(t, e - 2) * psi;
            worst = worst.max((df - q).abs());
            scale = scale.max(df.abs()).max(q.abs()).max(psi.abs() * t.sin().powi(e));
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

/// Weight `|S^{d-2}| cos^{d-2}(theta0)` of one boundary latitude.
pub fn trace_weight(p: &ConeProfile) -> f64 {
    sphere_area(p.dim - 2) * p.theta0.cos().powi(p.dim as i32 - 2)
}

/// The even and odd boundary modes of the degree-`ell` sphere mode.
pub fn modes_for_degree(p: &ConeProfile, ell: usize, cfg: &SolverConfig) -> Result<[BoundaryMode; 2]> {
    let sm = sphere::mode(p.dim, ell);
    let spec = SLSpec::robin_on_cone(p, sm.mu);
    let band = spec.band;
    let n = band.n;
    let mid = n / 2;
    let h = p.mean_curvature;
    let e = p.dim as i32 - 2;
    let pb = sin_pow(band.hi, e);
    let even = integrate(&spec, 0.0, [1.0, 0.0], mid, n);
    let odd = integrate(&spec, 0.0, [0.0, 1.0], mid, n);
    let (ye, yo) = (even[n - mid], odd[n - mid]);
    let det = ye[0] * yo[1] - ye[1] * yo[0];
    let scale = (ye[0].hypot(ye[1])) * (yo[0].hypot(yo[1]));
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateBasis { mu: sm.mu });
    }
    let weight = trace_weight(p);
    let build = |path: &[[f64; 2]], parity: Parity| -> Result<BoundaryMode> {
        let yb = path[path.len() - 1];
        if yb[0].abs() <= 1e-300 {
            return Err(Error::ZeroDenominator);
        }
        let ell_k = h - yb[1] / (pb * yb[0]);
        let norm = 1.0 / (yb[0].abs() * (2.0 * weight).sqrt());
        let mut psi = vec![0.0; n + 1];
        let mut dpsi = vec![0.0; n + 1];
        for (j, y) in path.iter().enumerate() {
            let i = mid + j;
            let pi = sin_pow(band.point(i), e);
            psi[i] = norm * y[0];
            dpsi[i] = norm * y[1] / pi;
            let m = n - i;
            psi[m] = parity.sign() * psi[i];
            dpsi[m] = -parity.sign() * dpsi[i];
        }
        let left = (dpsi[0] + h * psi[0] - ell_k * psi[0]).abs();
        let right = (-dpsi[n] + h * psi[n] - ell_k * psi[n]).abs();
        let bc_residual = left.max(right) / psi[n].abs();
        Ok(BoundaryMode {
            ell,
            mu: sm.mu,
            parity,
            ell_k,
            psi,
            psi_prime: dpsi,
            multiplicity: sm.multiplicity,
            in_resonance: ell_k.abs() <= cfg.res_tol,
            bc_residual,
        })
    };
    Ok([build(&even, Parity::Even)?, build(&odd, Parity::Odd)?])
}

/// The `count` boundary modes with the largest `ell_k`, in descending order
/// (equivalently, the smallest Steklov values `H - ell_k`). Each entry
/// stands for a whole sphere-mode eigenspace.
pub fn boundary_modes(p: &ConeProfile, count: usize, cfg: &SolverConfig) -> Result<Vec<BoundaryMode>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut out: Vec<BoundaryMode> = Vec::new();
    for ell in 0.. {
        let pair = modes_for_degree(p, ell, cfg)?;
        let best = pair[0].ell_k.max(pair[1].ell_k);
        if out.len() >= count {
            out.sort_by(|a, b| b.ell_k.total_cmp(&a.ell_k));
            if best < out[count - 1].ell_k {
                break;
            }
        }
        out.extend(pair);
    }
    out.sort_by(|a, b| b.ell_k.total_cmp(&a.ell_k));
    out.truncate(count);
    Ok(out)
}

/// Total multiplicity of the resonance set `ell_k = 0`.
pub fn resonance_multiplicity(modes: &[BoundaryMode]) -> usize {
    modes.iter().filter(|m| m.in_resonance).map(|m| m.multiplicity).sum()
}
