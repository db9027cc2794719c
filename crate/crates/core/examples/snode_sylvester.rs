//! Building an admissible S-node: pick A and Π(0), recover S(0) from
//! AS − SA* = iΠjΠ*, then validate the triple.

use darboux::numkit::{c, cr, from_rows, hermitian_eigenvalues, Tolerance};
use darboux::snode::{recover_s_from_identity, validate_snode, SNodeTriple, Signature};

fn main() -> darboux::Result<()> {
    let a = from_rows(&[vec![c(0.3, -1.0), cr(0.4)], vec![cr(0.0), c(-0.6, -0.5)]])?;
    let pi = from_rows(&[vec![cr(0.7), c(0.1, 0.2)], vec![c(0.0, 0.5), cr(0.2)]])?;
    let sig = Signature::new(1, 1)?;
    let s0 = recover_s_from_identity(&a, &pi, sig, 1e-12)?;
    println!("S(0) = {s0:.6}");
    println!("eigenvalues of S(0): {:?}", hermitian_eigenvalues(&s0)?);
    let triple = SNodeTriple::new(a, s0, pi, sig, vec![-1.0, 1.5])?;
    let report = validate_snode(&triple, &Tolerance::default())?;
    println!("{report:#?}");
    Ok(())
}
