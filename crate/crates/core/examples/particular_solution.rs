//! Particular solution for a three-mode boundary source in d = 7, and decay
//! classification of a harmonic mixture.

use std::collections::BTreeMap;

use conespec::boundary::{boundary_modes, Parity};
use conespec::cauchy_euler::PowerTerm;
use conespec::grid::geometric_grid;
use conespec::particular::{build_up, classify_decay, Component, RadialField, SourceSpec};
use conespec::spectrum::assemble;
use conespec::{solve_profile, SolverConfig};

fn main() -> conespec::Result<()> {
    let cfg = SolverConfig { grid_n: 1024, ..SolverConfig::default() };
    let beta = 0.7;
    let p = solve_profile(7, &cfg)?;
    let link = assemble(&p, 30.0, &cfg)?;
    let bmodes = boundary_modes(&p, 8, &cfg)?;
    let at = |ell, parity| bmodes.iter().position(|m| m.ell == ell && m.parity == parity).unwrap();

    let mut coeffs = BTreeMap::new();
    coeffs.insert(at(0, Parity::Odd), 1.0);
    coeffs.insert(at(0, Parity::Even), 0.5);
    coeffs.insert(at(1, Parity::Odd), -0.8);
    let mut src = SourceSpec::new(beta, coeffs);
    if !src.check_admissible(&link, cfg.res_tol) {
        eprintln!("beta = {beta} is not admissible");
        std::process::exit(1);
    }

    let sol = build_up(&src, &p, &link, &bmodes, &cfg)?;
    let rep = &sol.report;
    println!("slope of |u_p|   {:.4}  (bound {:.2})", rep.slope, 1.0 - beta + 0.05);
    println!("slope of |u1|    {:.4}", rep.u1_slope);
    println!("slope of |f|     {:.4}", rep.f_slope);
    println!("interior residual {:.2e}", rep.interior_residual);
    println!("boundary residual {:.2e}", rep.boundary_residual);
    for m in &rep.per_mode {
        println!(
            "  ell={} k={} lambda={:+.6} limits=({:?}, {:?}) quadrature gap={:.1e} ode residual={:.1e}",
            m.ell, m.k, m.lambda, m.limits.a, m.limits.b, m.quadrature_gap, m.ode_residual
        );
    }

    // A harmonic field mixing the growing and decaying branches of the
    // axial translation mode; only the decaying branch survives beta = 1.
    let axial = &link.mode(0, 2).expect("axial mode").pair;
    let mixture = RadialField {
        dim: 7,
        band: p.band(),
        r_grid: geometric_grid(1.0, 4096.0),
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
    let cls = classify_decay(&mixture, &link, 1.0);
    println!("projection error {:.1e}", cls.projection_error);
    for t in &cls.retained {
        println!("  retained ell={} k={} gamma={:+.6} coeff={:.6}", t.ell, t.k, t.gamma, t.coeff);
    }
    for t in &cls.removed {
        println!("  removed  ell={} k={} gamma={:+.6} coeff={:.6}", t.ell, t.k, t.gamma, t.coeff);
    }
    Ok(())
}
