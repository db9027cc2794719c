//! Square roots Q(z) of A − zI for several real z, all sharing the
//! transformation u and therefore commuting pairwise.

use darboux::matroot::{commuting_root_family, JordanCell, JordanForm};
use darboux::numkit::{c, from_rows, identity};

fn main() -> darboux::Result<()> {
    let u = from_rows(&[
        vec![c(1.0, 0.0), c(0.3, -0.2), c(0.0, 0.0)],
        vec![c(0.0, 0.1), c(1.0, 0.0), c(0.4, 0.0)],
        vec![c(0.2, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    ])?;
    let jf = JordanForm::new(
        u,
        vec![JordanCell { eigenvalue: c(0.5, 1.0), size: 2 }, JordanCell { eigenvalue: c(-1.0, -0.5), size: 1 }],
    )?;
    let a = jf.assemble();
    let zs = [-2.0, -0.3, 0.7, 1.9];
    let qs: Vec<_> = zs.iter().map(|&z| commuting_root_family(&jf, z, 2)).collect::<darboux::Result<_>>()?;
    for (q, z) in qs.iter().zip(zs) {
        let shifted = &a - identity(3) * c(z, 0.0);
        println!("z = {z:5.2}: |Q(z)^2 - (A - z)| = {:.2e}", (q * q - shifted).norm());
    }
    for i in 0..qs.len() {
        for j in i + 1..qs.len() {
            let comm = (&qs[i] * &qs[j] - &qs[j] * &qs[i]).norm();
            println!("[Q({}), Q({})] = {comm:.2e}", zs[i], zs[j]);
        }
    }
    Ok(())
}
