//! Several-variable solution ψ̃(x, ζ) built from a GBDT trajectory, with
//! the PDE and conservation-law residuals at a few points.

use darboux::cli::generate::{random_symmetric_system, rng};
use darboux::dynamics::{MultiVarPoint, PsiEvaluator};

fn main() -> darboux::Result<()> {
    let sys = random_symmetric_system(&mut rng(3), 3, 1, 1, 2)?;
    let traj = sys.trajectory((0.0, 1.0), 1e-3)?;
    let ev = PsiEvaluator::new(&sys, &traj)?;
    for x in [0.25, 0.5, 0.75] {
        let pt = MultiVarPoint::new(x, vec![0.3, -0.2]);
        println!("x = {x}");
        println!("  psi~ = {:.5}", ev.psi_tilde(&pt)?);
        println!("  PDE residual           {:.2e}", ev.pde_residual(&pt)?.residual);
        println!("  (j Pi* S^-1)' residual {:.2e}", ev.d1_identity_residual(x)?.residual);
        println!("  conservation law       {:.2e}", ev.conservation_law_residual(x)?.residual);
    }
    println!("integrated conservation law {:.2e}", ev.integrated_conservation_residual()?);
    Ok(())
}
