//! Generates a random scenario of each kind and runs it in memory,
//! printing the check summary.

use darboux::cli::{generate_scenario, run_loaded, Mode, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    for kind in [Mode::Roots, Mode::GbdtSym, Mode::GbdtGeneral, Mode::Dynamics, Mode::Dirac] {
        let scenario = generate_scenario(kind, &[], seed)?;
        let report = run_loaded(&scenario, &RunOptions::default())?;
        print!("{}", report.summary());
    }
    Ok(())
}
