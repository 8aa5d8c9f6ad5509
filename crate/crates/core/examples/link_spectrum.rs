//! Strong-integrability check of the axially symmetric cone for d = 3..10.

use conespec::spectrum::verify_strong_integrability;
use conespec::{solve_profile, SolverConfig};

fn main() -> conespec::Result<()> {
    let cfg = SolverConfig::default();
    println!("d  lambda1            margin             ker0 ker_d1 gap        jacobi    verdict");
    for d in 3..=10 {
        let p = solve_profile(d, &cfg)?;
        let r = verify_strong_integrability(&p, &cfg)?;
        println!(
            "{:<2} {:<18.12} {:<18.12} {:<4} {:<6} {:<10.6} {:<9.2e} {}",
            d,
            r.lambda1,
            r.stability_margin,
            r.dim_kernel0,
            r.dim_kernel_d_minus_1,
            r.gap_above,
            r.jacobi_match.max(),
            r.verdict
        );
    }
    Ok(())
}
