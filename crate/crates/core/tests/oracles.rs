//! Independent oracles for the shooting results.

use conespec::boundary::{boundary_modes, modes_for_degree};
use conespec::fd::{assemble, eigen_fd_richardson};
use conespec::sl::{BoundaryCondition, SLSpec};
use conespec::sphere::{mu_of, multiplicity};
use conespec::{solve_profile, SolverConfig};

/// Exponent tuples of the degree-`deg` monomials in `vars` variables.
fn monomials(vars: usize, deg: usize) -> Vec<Vec<usize>> {
    if vars == 1 {
        return vec![vec![deg]];
    }
    let mut out = Vec::new();
    for first in 0..=deg {
        for mut rest in monomials(vars - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn rank(mut m: Vec<Vec<f64>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())) else {
            break;
        };
        if m[piv][c].abs() < 1e-9 {
            continue;
        }
        m.swap(r, piv);
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r {
                let f = row[c] / pivot[c];
                for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * p;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Dimension of the kernel of the Euclidean Laplacian on degree-`deg`
/// polynomials in `vars` variables: the spherical harmonics of that degree.
fn harmonic_dimension(vars: usize, deg: usize) -> usize {
    let src = monomials(vars, deg);
    if deg < 2 {
        return src.len();
    }
    let dst = monomials(vars, deg - 2);
    let index = |e: &Vec<usize>| dst.iter().position(|x| x == e).unwrap();
    let mut matrix = vec![vec![0.0; src.len()]; dst.len()];
    for (j, e) in src.iter().enumerate() {
        for v in 0..vars {
            if e[v] >= 2 {
                let mut t = e.clone();
                t[v] -= 2;
                matrix[index(&t)][j] += (e[v] * (e[v] - 1)) as f64;
            }
        }
    }
    src.len() - rank(matrix)
}

#[test]
fn sphere_multiplicities_match_harmonic_polynomials() {
    for d in 3..=6 {
        for ell in 0..=5 {
            assert_eq!(multiplicity(d, ell), harmonic_dimension(d - 1, ell), "d={d} ell={ell}");
            assert_eq!(mu_of(d, ell), (ell * (ell + d - 3)) as f64);
        }
    }
}

/// Boundary values `l` with `a(psi, v) = (H - l) (p_a psi_a v_a + p_b psi_b v_b)`
/// for harmonic `psi`, from linear finite elements on `n` cells with the
/// interior nodes eliminated.
fn steklov_fem(dim: usize, half_width: f64, h: f64, mu: f64, n: usize) -> [f64; 2] {
    let lo = std::f64::consts::FRAC_PI_2 - half_width;
    let step = 2.0 * half_width / n as f64;
    let e = dim as i32 - 2;
    let p = |t: f64| t.sin().powi(e);
    let q = |t: f64| mu * t.sin().powi(e - 2);
    // tridiagonal stiffness with midpoint flux and lumped potential
    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    for i in 0..n {
        let k = p(lo + (i as f64 + 0.5) * step) / step;
        diag[i] += k;
        diag[i + 1] += k;
        off[i] = -k;
    }
    for (i, v) in diag.iter_mut().enumerate() {
        let cell = if i == 0 || i == n { 0.5 } else { 1.0 } * step;
        *v += q(lo + i as f64 * step) * cell;
    }
    // Schur complement onto nodes 0 and n: solve the interior system for
    // unit boundary values with the Thomas algorithm.
    let interior = |left: f64, right: f64| -> Vec<f64> {
        let m = n - 1;
        let mut rhs = vec![0.0; m];
        rhs[0] -= off[0] * left;
        rhs[m - 1] -= off[n - 1] * right;
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        for i in 0..m {
            let a = if i > 0 { off[i] } else { 0.0 };
            let denom = diag[i + 1] - a * if i > 0 { c[i - 1] } else { 0.0 };
            c[i] = if i + 1 < m { off[i + 1] / denom } else { 0.0 };
            d[i] = (rhs[i] - a * if i > 0 { d[i - 1] } else { 0.0 }) / denom;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    };
    let xl = interior(1.0, 0.0);
    let xr = interior(0.0, 1.0);
    let s00 = diag[0] + off[0] * xl[0];
    let s01 = off[0] * xr[0];
    let s11 = diag[n] + off[n - 1] * xr[n - 2];
    // symmetric band: even and odd boundary vectors diagonalize S and B
    let pa = p(lo);
    let even = (s00 + s01) / pa;
    let odd = (s00 - s01) / pa;
    debug_assert!((s00 - s11).abs() < 1e-9 * s00.abs().max(1.0));
    [h - even, h - odd]
}

#[test]
fn boundary_modes_match_finite_elements() {
    let cfg = SolverConfig::default();
    for d in [3, 7] {
        let p = solve_profile(d, &cfg).unwrap();
        let h = p.mean_curvature;
        for m in boundary_modes(&p, 6, &cfg).unwrap() {
            let mu = mu_of(d, m.ell);
            let coarse = steklov_fem(d, p.theta0, h, mu, 2000);
            let fine = steklov_fem(d, p.theta0, h, mu, 4000);
            let idx = match m.parity {
                conespec::boundary::Parity::Even => 0,
                conespec::boundary::Parity::Odd => 1,
            };
            let rich = (4.0 * fine[idx] - coarse[idx]) / 3.0;
            assert!(
                (m.ell_k - rich).abs() <= 1e-5 * m.ell_k.abs().max(1.0),
                "d={d} ell={} {:?}: {} vs {rich}",
                m.ell,
                m.parity,
                m.ell_k
            );
        }
    }
}

#[test]
fn translation_modes_are_resonant() {
    let cfg = SolverConfig::default();
    for d in [4, 8] {
        let p = solve_profile(d, &cfg).unwrap();
        let [_, odd0] = modes_for_degree(&p, 0, &cfg).unwrap();
        let [even1, _] = modes_for_degree(&p, 1, &cfg).unwrap();
        assert!(odd0.ell_k.abs() < 1e-8);
        assert!(even1.ell_k.abs() < 1e-8);
    }
}

fn dirichlet_fd(dim: usize, half_width: f64) -> f64 {
    let spec = SLSpec::new(dim, half_width, 0.0, BoundaryCondition::Dirichlet, 64);
    eigen_fd_richardson(&spec, 1, 2048)[0]
}

#[test]
fn aperture_from_finite_difference_bisection() {
    let cfg = SolverConfig::default();
    for d in [3, 5, 8] {
        let target = d as f64 - 1.0;
        let (mut lo, mut hi) = (0.1, 1.5);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            // the eigenvalue decreases as the band widens
            if dirichlet_fd(d, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta0 = solve_profile(d, &cfg).unwrap().theta0;
        assert!((0.5 * (lo + hi) - theta0).abs() < 1e-6, "d={d}: {} vs {theta0}", 0.5 * (lo + hi));
    }
}

#[test]
fn finite_differences_converge_at_second_order() {
    let p = solve_profile(7, &SolverConfig::default()).unwrap();
    for spec in [SLSpec::robin_on_cone(&p, 0.0), SLSpec::dirichlet_on_cone(&p, 5.0)] {
        for k in 1..=3 {
            let l: Vec<f64> = [400, 800, 1600].iter().map(|&n| assemble(&spec, n).eigenvalue(k)).collect();
            let ratio = (l[0] - l[1]) / (l[1] - l[2]);
            assert!((ratio - 4.0).abs() < 0.3, "k={k} ratio={ratio}");
        }
    }
}
