//! A square root of f(A) = (A − I)² + 4I that does not commute with
//! A = I + S₁, next to the commuting root the cell construction gives.

use darboux::matroot::{
    f_of_jordan, matrix_root, verify_root, BranchSpec, JordanCell, JordanForm, QuadraticSign, SpectralFunction,
};
use darboux::numkit::{c, from_real_rows};

fn main() -> darboux::Result<()> {
    let jf = JordanForm::from_cells(vec![JordanCell { eigenvalue: c(1.0, 0.0), size: 3 }])?;
    let a = jf.assemble();
    let f = SpectralFunction::Quadratic { c: c(1.0, 0.0), a: 2.0, sign: QuadraticSign::Plus };
    let fa = f_of_jordan(&jf, &f)?;

    let q = from_real_rows(&[&[2.0, 0.0, 0.25], &[0.0, -2.0, 0.0], &[0.0, 0.0, 2.0]])?;
    let r = verify_root(&a, &q, &fa, 2)?;
    println!("explicit Q:     |Q^2 - f(A)| = {:.1e}, |AQ - QA| = {:.4}", r.root_residual, r.commutation_residual);

    let built = matrix_root(&jf, &f, &BranchSpec::principal(2, 1)?)?;
    let r = verify_root(&a, &built, &fa, 2)?;
    println!("constructed Q:  |Q^2 - f(A)| = {:.1e}, |AQ - QA| = {:.1e}", r.root_residual, r.commutation_residual);
    println!("constructed Q = {built:.4}");
    Ok(())
}
