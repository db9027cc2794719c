//! GBDT of a random two-pole Hamiltonian system: Π and S along the
//! interval, the Darboux matrix w_A, the transformed Hamiltonians and the
//! check that w_A·W solves the transformed system.

use darboux::cli::generate::{random_symmetric_system, rng};
use darboux::gbdt::{darboux_residual, transfer_function, transformed_fundamental_gap, transformed_hamiltonians};
use darboux::numkit::c;

fn main() -> darboux::Result<()> {
    let sys = random_symmetric_system(&mut rng(11), 3, 1, 1, 2)?;
    let span = (0.0, 1.0);
    let traj = sys.trajectory(span, 1e-3)?;
    println!("poles: {:?}", sys.poles());
    println!("max |AS - SA* - iPi j Pi*| = {:.2e}", traj.max_identity_residual(&sys));
    println!("max |S - S*|              = {:.2e}", traj.max_hermiticity_residual());
    println!("max eigenvalue of S'      = {:.2e}", traj.s_prime_max_eig.iter().copied().fold(f64::MIN, f64::max));

    let last = traj.len() - 1;
    let (x, pi, s) = (traj.xs[last], &traj.pis[last], &traj.ss[last]);
    for (k, t) in transformed_hamiltonians(&sys, pi, s, x)?.iter().enumerate() {
        println!("H~_{k}({x}) = {:.5}", t.h);
    }
    for z in [c(0.5, 1.0), c(-2.0, 0.3)] {
        let w = transfer_function(&sys.triple.a, s, pi, sys.sig(), z, x)?;
        println!("z = {z}: det w_A = {:.5}", w.determinant());
        println!("  Darboux residual    {:.2e}", darboux_residual(&sys, &traj, z)?);
        println!("  |W~ - w_A W|        {:.2e}", transformed_fundamental_gap(&sys, z, span, 1e-3)?);
    }
    Ok(())
}
