//! Robin and Dirichlet eigenvalues on the cone band, checked against the
//! finite-difference oracle.

use conespec::fd::eigen_fd_crosscheck;
use conespec::sl::{eigen_k, SLOptions, SLSpec};
use conespec::{solve_profile, SolverConfig};

fn main() -> conespec::Result<()> {
    let cfg = SolverConfig::default();
    let p = solve_profile(5, &cfg)?;
    let opts = SLOptions { lam_tol: cfg.lam_tol, ..SLOptions::default() };
    for (name, spec) in [
        ("robin mu=0", SLSpec::robin_on_cone(&p, 0.0)),
        ("robin mu=3", SLSpec::robin_on_cone(&p, 3.0)),
        ("dirichlet mu=0", SLSpec::dirichlet_on_cone(&p, 0.0)),
    ] {
        let fd = eigen_fd_crosscheck(&spec, 4);
        println!("{name}");
        for k in 1..=4 {
            let e = eigen_k(&spec, k, &opts)?;
            println!(
                "  k={k} lambda={:<20.14} nodes={} fd={:<20.14} gap={:.1e}",
                e.lambda,
                e.nodes,
                fd[k - 1],
                (e.lambda - fd[k - 1]).abs()
            );
        }
    }
    Ok(())
}
