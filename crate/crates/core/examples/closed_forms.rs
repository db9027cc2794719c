//! Explicit Π and S for trivial Hamiltonians (β_k = I) and for two constant
//! β's, compared with the integrated trajectories.

use darboux::gbdt::{ConstantBetaClosedForm, TrivialClosedForm};
use darboux::matroot::{JordanCell, JordanForm};
use darboux::numkit::{c, cr, diag, from_real_rows, from_rows, identity};
use darboux::snode::{SNodeTriple, Signature};

fn main() -> darboux::Result<()> {
    let a = diag(&[c(0.2, -1.0), c(-0.5, -0.7)]);
    let pi = from_rows(&[vec![cr(0.5), c(0.05, 0.02)], vec![c(0.1, 0.4), cr(0.03)]])?;
    let t = SNodeTriple::new(a, identity(2), pi, Signature::new(1, 1)?, vec![-1.5, 2.0])?;

    let trivial = TrivialClosedForm::new(&t)?;
    let traj = trivial.system(&t)?.trajectory((0.0, 1.0), 1e-3)?;
    let (mut dpi, mut ds) = (0.0f64, 0.0f64);
    for i in 0..traj.len() {
        dpi = dpi.max((&traj.pis[i] - trivial.pi(traj.xs[i])?).norm());
        ds = ds.max((&traj.ss[i] - trivial.s(traj.xs[i])?).norm());
    }
    println!("trivial Hamiltonians: max |Pi - Pi_exact| = {dpi:.2e}, max |S - S_exact| = {ds:.2e}");

    let jf = JordanForm::from_cells(vec![
        JordanCell { eigenvalue: c(0.2, -1.0), size: 1 },
        JordanCell { eigenvalue: c(-0.5, -0.7), size: 1 },
    ])?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let b1 = from_real_rows(&[&[r, r]])?;
    let b2 = from_real_rows(&[&[r, -r]])?;
    let cb = ConstantBetaClosedForm::new(&t, &b1, &b2, &jf)?;
    let traj = cb.system(&t)?.trajectory((0.0, 1.0), 1e-3)?;
    let (mut dpi, mut phi) = (0.0f64, 0.0f64);
    for i in 0..traj.len() {
        dpi = dpi.max((&traj.pis[i] - cb.pi(traj.xs[i])?).norm());
        phi = phi.max(cb.phi_residual(traj.xs[i])?);
    }
    println!("constant betas: max |Pi - Pi_exact| = {dpi:.2e}, Phi relations {phi:.2e}");
    Ok(())
}
