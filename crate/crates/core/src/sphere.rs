//! Laplace-Beltrami eigenvalues on the factor sphere `S^{d-2}`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMode {
    pub ell: usize,
    pub mu: f64,
    pub multiplicity: usize,
}

/// `ell (ell + d - 3)`.
pub fn mu_of(dim: usize, ell: usize) -> f64 {
    (ell * (ell + dim - 3)) as f64
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of degree-`ell` spherical harmonics on `S^{d-2}`.
pub fn multiplicity(dim: usize, ell: usize) -> usize {
    if dim == 3 {
        // S^1: cos(ell phi), sin(ell phi).
        return if ell == 0 { 1 } else { 2 };
    }
    let n = dim - 2;
    let top = binomial(ell + n, n);
    let lower = if ell >= 2 { binomial(ell - 2 + n, n) } else { 0 };
    top - lower
}

pub fn mode(dim: usize, ell: usize) -> SphereMode {
    SphereMode {
        ell,
        mu: mu_of(dim, ell),
        multiplicity: multiplicity(dim, ell),
    }
}

/// All modes with `mu <= mu_max`, by increasing degree.
pub fn modes_up_to(dim: usize, mu_max: f64) -> Vec<SphereMode> {
    assert!(dim >= 3, "dimension {dim} < 3");
    (0..)
        .map(|ell| mode(dim, ell))
        .take_while(|m| m.mu <= mu_max)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_modes_d7() {
        let m = modes_up_to(7, 12.0);
        assert_eq!(m.len(), 3);
        assert_eq!((m[0].mu, m[0].multiplicity), (0.0, 1));
        assert_eq!((m[1].mu, m[1].multiplicity), (5.0, 6));
        assert_eq!(m[2].mu, 12.0);
        assert_eq!(m[2].multiplicity, 20);
    }

    #[test]
    fn circle_modes() {
        assert_eq!(multiplicity(3, 0), 1);
        for ell in 1..10 {
            assert_eq!(multiplicity(3, ell), 2);
            assert_eq!(mu_of(3, ell), (ell * ell) as f64);
        }
    }

    #[test]
    fn generic_identities() {
        for d in 3..=12 {
            assert_eq!(mu_of(d, 1), (d - 2) as f64);
            assert_eq!(mu_of(d, 2), 2.0 * (d - 1) as f64);
            assert_eq!(multiplicity(d, 1), d - 1);
            let mus: Vec<f64> = modes_up_to(d, 200.0).iter().map(|m| m.mu).collect();
            assert!(mus.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
