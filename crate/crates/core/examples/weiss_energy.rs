//! Weiss energy of the cone and of perturbed fields, the derivative formula,
//! and criticality of the link functional in the aperture.

use conespec::weiss::{criticality, weiss, weiss_derivative_check, AxisymField, RadialFactor};
use conespec::{solve_profile, SolverConfig};

fn main() -> conespec::Result<()> {
    let cfg = SolverConfig::default();
    let p = solve_profile(7, &cfg)?;
    let cone = AxisymField::cone(&p, RadialFactor::Power { coeff: 1.0, exponent: 1.0 });
    let bent = cone.clone().with_term(
        RadialFactor::Power { coeff: 0.2, exponent: 1.3 },
        p.g.clone(),
        p.g_prime.clone(),
    );
    for (name, u) in [("cone", &cone), ("perturbed", &bent)] {
        println!("{name}");
        for r in [0.5, 1.0, 2.0, 4.0] {
            let w = weiss(u, r, &cfg)?;
            let c = weiss_derivative_check(u, r, &cfg)?;
            println!(
                "  r={r:<4} W={w:<20.14} dW={:<12.4e} formula gap={:.1e}",
                c.lhs, c.formula_gap
            );
        }
    }
    for d in [3, 7, 10] {
        let q = solve_profile(d, &cfg)?;
        let c = criticality(&q, 1e-4, &cfg)?;
        println!("d={d} F={:.12} relative dF={:.1e}", c.f0, c.relative);
    }
    Ok(())
}
