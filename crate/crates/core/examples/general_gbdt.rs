//! GBDT for a general first-order system with polynomial and pole terms,
//! plus the reduction of a symmetric system to the general setting.

use darboux::cli::generate::{random_general_system, random_symmetric_system, rng};
use darboux::gbdt::{general, GeneralFlow};
use darboux::numkit::c;

fn main() -> darboux::Result<()> {
    let (data, coeffs) = random_general_system(&mut rng(5), 3, 2)?;
    let flow = GeneralFlow::new(&data, &coeffs)?;
    let traj = flow.run((0.0, 0.5), 1e-3)?;
    let worst = (0..traj.xs.len())
        .map(|i| general::identity_residual(&data.a1, &data.a2, &traj.s[i], &traj.pi1[i], &traj.pi2[i]))
        .fold(0.0, f64::max);
    println!("general: max |A1 S - S A2 - Pi1 Pi2*| = {worst:.2e}");
    for z in [c(0.2, 1.5), c(-1.0, -0.7)] {
        println!("  z = {z}: Darboux residual {:.2e}", flow.darboux_residual(&traj, z)?);
    }
    let last = traj.xs.len() - 1;
    let q = flow.transformed(&traj.state(last), traj.xs[last], &coeffs.at(traj.xs[last]))?;
    println!("  transformed q0 at x = {}: {:.4}", traj.xs[last], q.poly[0]);

    let sym = random_symmetric_system(&mut rng(11), 3, 1, 1, 2)?;
    let (data, coeffs) = sym.to_general();
    let flow = GeneralFlow::new(&data, &coeffs)?;
    let gen = flow.run((0.0, 1.0), 1e-3)?;
    let direct = sym.trajectory((0.0, 1.0), 1e-3)?;
    let gap = gen.s.iter().zip(&direct.ss).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("symmetric via general engine: max |S_gen - S_sym| = {gap:.2e}");
    Ok(())
}
