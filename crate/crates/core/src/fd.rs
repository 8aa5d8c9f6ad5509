//! Finite-difference discretization of the band Sturm-Liouville operator,
//! solved as a symmetric tridiagonal eigenproblem by Sturm-sequence
//! bisection. Independent of the shooting solver; used as its oracle.

use crate::grid::BandGrid;
use crate::sl::{BoundaryCondition, SLSpec};

/// Symmetric tridiagonal matrix: `diag[i]`, `off[i]` couples `i` and `i+1`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    /// Number of eigenvalues strictly below `x` (Sylvester inertia of the
    /// LDL^T factorization of `T - x I`).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut piv = self.diag[0] - x;
        if piv < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let denom = if piv == 0.0 { f64::EPSILON * (1.0 + x.abs()) } else { piv };
            piv = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if piv < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (`k` from 1) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Vertex-centred second-order discretization on `n` intervals, reduced to
/// standard form with the (diagonal) lumped mass matrix.
pub fn assemble(spec: &SLSpec, n: usize) -> SymTridiagonal {
    let band = BandGrid::new(spec.band.lo, spec.band.hi, n);
    let h = band.step();
    let e = spec.dim as i32 - 2;
    let p = |t: f64| t.sin().powi(e);
    let q = |t: f64| spec.mu * t.sin().powi(e - 2);
    let pts = band.points();
    let flux: Vec<f64> = (0..n).map(|i| p(band.lo + (i as f64 + 0.5) * h) / h).collect();

    let mut a = vec![0.0; n + 1];
    let mut m = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    for i in 0..=n {
        let t = pts[i];
        let left = if i > 0 { flux[i - 1] } else { 0.0 };
        let right = if i < n { flux[i] } else { 0.0 };
        let cell = if i == 0 || i == n { 0.5 * h } else { h };
        a[i] = left + right + q(t) * cell;
        m[i] = p(t) * cell;
        if i < n {
            off[i] = -flux[i];
        }
    }
    let (lo, hi) = match spec.bc {
        BoundaryCondition::Robin(hc) => {
            a[0] -= hc * p(band.lo);
            a[n] -= hc * p(band.hi);
            (0, n)
        }
        BoundaryCondition::Dirichlet => (1, n - 1),
    };
    let diag: Vec<f64> = (lo..=hi).map(|i| a[i] / m[i]).collect();
    let off: Vec<f64> = (lo..hi).map(|i| off[i] / (m[i] * m[i + 1]).sqrt()).collect();
    SymTridiagonal { diag, off }
}

/// First `count` eigenvalues from finite differences on `n` and `2n`
/// intervals, combined by Richardson extrapolation for a second-order
/// scheme.
pub fn eigen_fd_crosscheck(spec: &SLSpec, count: usize) -> Vec<f64> {
    eigen_fd_richardson(spec, count, spec.band.n)
}

pub fn eigen_fd_richardson(spec: &SLSpec, count: usize, n: usize) -> Vec<f64> {
    let coarse = assemble(spec, n);
    let fine = assemble(spec, 2 * n);
    (1..=count)
        .map(|k| {
            let a = coarse.eigenvalue(k);
            let b = fine.eigenvalue(k);
            (4.0 * b - a) / 3.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sturm_count_on_known_matrix() {
        // Discrete Laplacian: eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n = 50;
        let t = SymTridiagonal {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        };
        for k in [1, 7, 50] {
            let exact = 2.0 - 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-12);
        }
        assert_eq!(t.count_below(1.0), t.count_below(1.0));
    }

    #[test]
    fn narrow_dirichlet_band() {
        let spec = SLSpec::new(3, 1e-3, 0.0, BoundaryCondition::Dirichlet, 400);
        let ev = eigen_fd_crosscheck(&spec, 2);
        let l = 2e-3;
        assert!((ev[0] / (PI / l).powi(2) - 1.0).abs() < 1e-5);
        assert!((ev[1] / (2.0 * PI / l).powi(2) - 1.0).abs() < 1e-5);
    }
}
