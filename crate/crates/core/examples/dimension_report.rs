//! CSV summary for d = 3..10, identical to the `report` subcommand.

use conespec::cli::report_csv;
use conespec::SolverConfig;

fn main() -> conespec::Result<()> {
    let dims: Vec<usize> = (3..=10).collect();
    print!("{}", report_csv(&dims, &SolverConfig::default())?);
    Ok(())
}
