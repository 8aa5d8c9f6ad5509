//! Largest Robin-to-Neumann values on the free boundary of the cone in d = 7.

use conespec::boundary::{boundary_modes, resonance_multiplicity};
use conespec::{solve_profile, SolverConfig};

fn main() -> conespec::Result<()> {
    let cfg = SolverConfig::default();
    let p = solve_profile(7, &cfg)?;
    let modes = boundary_modes(&p, 10, &cfg)?;
    println!("ell parity ell_k               multiplicity resonant");
    for m in &modes {
        println!(
            "{:<3} {:<6} {:<19.12e} {:<12} {}",
            m.ell,
            format!("{:?}", m.parity),
            m.ell_k,
            m.multiplicity,
            m.in_resonance
        );
    }
    println!("resonance multiplicity = {}", resonance_multiplicity(&modes));
    Ok(())
}
