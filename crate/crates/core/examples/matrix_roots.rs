//! ℓ-th roots of f(A) built cell by cell from a Jordan form, for each
//! supported spectral function.

use darboux::matroot::{
    f_of_jordan, matrix_root, verify_root, BranchSpec, JordanCell, JordanForm, QuadraticSign, SpectralFunction,
};
use darboux::numkit::{c, cr, from_rows};

fn main() -> darboux::Result<()> {
    let u = from_rows(&[
        vec![cr(1.0), cr(0.5), cr(0.0), cr(0.0)],
        vec![cr(0.0), cr(1.0), c(0.2, 0.1), cr(0.0)],
        vec![cr(0.0), cr(0.0), cr(1.0), cr(-0.3)],
        vec![cr(0.1), cr(0.0), cr(0.0), cr(1.0)],
    ])?;
    let jf = JordanForm::new(
        u,
        vec![JordanCell { eigenvalue: c(1.0, 0.5), size: 3 }, JordanCell { eigenvalue: c(-2.0, 1.0), size: 1 }],
    )?;
    let a = jf.assemble();
    let functions = [
        SpectralFunction::Shift { z: cr(0.0) },
        SpectralFunction::Quadratic { c: cr(0.5), a: 1.0, sign: QuadraticSign::Minus },
        SpectralFunction::ResolventProduct { c1: cr(3.0), c2: cr(-3.0) },
    ];
    for f in &functions {
        let fa = f_of_jordan(&jf, f)?;
        for ell in [2, 3, 5] {
            for branches in [vec![0, 0], vec![1, ell - 1]] {
                let q = matrix_root(&jf, f, &BranchSpec::new(ell, branches.clone())?)?;
                let r = verify_root(&a, &q, &fa, ell)?;
                println!(
                    "{f:?} ell={ell} k={branches:?}: |Q^l - f(A)| = {:.2e}, |AQ - QA| = {:.2e}",
                    r.root_residual, r.commutation_residual
                );
            }
        }
    }
    Ok(())
}
