//! Profile of the axially symmetric cone for d = 3..10, with the Legendre
//! series check.

use conespec::cone::legendre_crosscheck;
use conespec::{solve_profile, SolverConfig};

fn main() -> conespec::Result<()> {
    let cfg = SolverConfig::default();
    println!("d  theta0             H                  ode_residual legendre  branch");
    for d in 3..=10 {
        let p = solve_profile(d, &cfg)?;
        let leg = legendre_crosscheck(&p)?;
        println!(
            "{:<2} {:<18.15} {:<18.15} {:<12.2e} {:<9.2e} {:?}",
            d,
            p.theta0,
            p.mean_curvature,
            p.ode_residual(),
            leg.residual,
            leg.branch
        );
    }
    Ok(())
}
