//! Discrete Dirac steps: C_k from random contractions, their positive
//! square roots, and the evolution y_{k+1} = (I − (i/z) j C_k) y_k.

use darboux::cli::generate::{random_contraction, rng};
use darboux::matroot::{discrete_dirac_evolve, halmos_extension, positive_root_j};
use darboux::numkit::{c, ComplexVector};
use darboux::snode::Signature;

fn main() -> darboux::Result<()> {
    let sig = Signature::new(2, 1)?;
    let j = sig.matrix();
    let mut g = rng(9);
    let mut cs = Vec::new();
    for k in 0..4 {
        let rho = random_contraction(&mut g, 2, 1, 0.9);
        let ck = halmos_extension(&rho)?;
        let half = positive_root_j(&ck, sig, 2)?;
        println!(
            "C_{k}: |CjC - j| = {:.1e}, |C^(1/2) j C^(1/2) - j| = {:.1e}, |(C^(1/2))^2 - C| = {:.1e}",
            (&ck * &j * &ck - &j).norm(),
            (&half * &j * &half - &j).norm(),
            (&half * &half - &ck).norm()
        );
        cs.push(ck);
    }
    let y0 = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.5)]);
    for z in [c(1.0, 1.0), c(-2.0, 0.5)] {
        let y = discrete_dirac_evolve(&cs, sig, z, &y0)?;
        println!("z = {z}: y_4 = {:.5}", y.transpose());
    }
    Ok(())
}
