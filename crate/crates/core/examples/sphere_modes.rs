//! Eigenvalues and multiplicities of the Laplacian on S^{d-2}.

use conespec::sphere::modes_up_to;

fn main() {
    for d in [3, 5, 7] {
        println!("d = {d}");
        for m in modes_up_to(d, 40.0) {
            println!("  ell = {:<2} mu = {:<6} multiplicity = {}", m.ell, m.mu, m.multiplicity);
        }
    }
}
