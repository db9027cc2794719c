//! Writes the bundled scenario files into `examples/`:
//! the non-commuting square root, the trivial-Hamiltonian closed form and
//! the constant-beta closed form.
//!
//! cargo run --example bundled_scenarios [-- <dir>]

use std::path::PathBuf;

use darboux::cli::scenario::{ClosedFormSpec, ExplicitRoot, Inputs, RootCheck, RootsInput};
use darboux::cli::{Mode, Scenario};
use darboux::gbdt::{ConstantBetaClosedForm, MatrixFn, TrivialClosedForm};
use darboux::matroot::{JordanCell, JordanForm, QuadraticSign, SpectralFunction};
use darboux::numkit::{c, cr, diag, from_real_rows, from_rows, identity, Tolerance};
use darboux::snode::{recover_s_from_identity, SNodeTriple, Signature};

fn blank(name: &str, mode: Mode) -> Scenario {
    Scenario {
        name: name.into(),
        mode,
        span: None,
        step: None,
        z_samples: Vec::new(),
        zeta_samples: Vec::new(),
        x_samples: Vec::new(),
        tolerances: Tolerance::default(),
        seed: None,
        inputs: Inputs::default(),
    }
}

fn noncommuting_root() -> darboux::Result<Scenario> {
    let one = c(1.0, 0.0);
    let a = JordanForm::from_cells(vec![JordanCell { eigenvalue: one, size: 3 }])?;
    let f = SpectralFunction::Quadratic { c: one, a: 2.0, sign: QuadraticSign::Plus };
    // f(A) = 4I + S₂ = u·diag(4I₂ + S₁, 4)·u with u swapping e₂ and e₃.
    let swap = from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])?;
    let target = JordanForm::new(
        swap,
        vec![JordanCell { eigenvalue: cr(4.0), size: 2 }, JordanCell { eigenvalue: cr(4.0), size: 1 }],
    )?;
    let q = from_real_rows(&[&[2.0, 0.0, 0.25], &[0.0, -2.0, 0.0], &[0.0, 0.0, 2.0]])?;
    let mut s = blank("remark24_counterexample", Mode::Roots);
    s.inputs.roots = Some(RootsInput {
        jordan: a,
        constructed: vec![
            RootCheck { f: f.clone(), ell: 2, branches: None },
            RootCheck { f: f.clone(), ell: 2, branches: Some(vec![1]) },
        ],
        explicit: vec![ExplicitRoot {
            f,
            ell: 2,
            q: Some(q),
            target_jordan: Some(target),
            branches: Some(vec![0, 1]),
            min_commutator: Some(0.2),
        }],
        commuting_family: None,
    });
    Ok(s)
}

fn lower_half_plane_triple() -> darboux::Result<SNodeTriple> {
    let a = diag(&[c(0.2, -1.0), c(-0.5, -0.7)]);
    let pi = from_rows(&[vec![cr(0.5), c(0.05, 0.02)], vec![c(0.1, 0.4), cr(0.03)]])?;
    SNodeTriple::new(a, identity(2), pi, Signature::new(1, 1)?, vec![-1.5, 2.0])
}

fn z_samples() -> Vec<darboux::numkit::C64> {
    vec![c(0.3, 1.0), c(-1.0, 0.5), c(2.5, -0.8)]
}

fn trivial() -> darboux::Result<Scenario> {
    let mut t = lower_half_plane_triple()?;
    t.s0 = TrivialClosedForm::new(&t)?.s0();
    let mut s = blank("trivial_hamiltonians", Mode::GbdtSym);
    s.span = Some([0.0, 1.0]);
    s.step = Some(1e-3);
    s.z_samples = z_samples();
    s.inputs.triple = Some(t);
    s.inputs.closed_form = Some(ClosedFormSpec::Trivial);
    Ok(s)
}

fn constant_beta() -> darboux::Result<Scenario> {
    let mut t = lower_half_plane_triple()?;
    t.s0 = recover_s_from_identity(&t.a, &t.pi0, t.sig(), 1e-12)?;
    let jordan = JordanForm::from_cells(vec![
        JordanCell { eigenvalue: c(0.2, -1.0), size: 1 },
        JordanCell { eigenvalue: c(-0.5, -0.7), size: 1 },
    ])?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let b1 = from_real_rows(&[&[r, r]])?;
    let b2 = from_real_rows(&[&[r, -r]])?;
    ConstantBetaClosedForm::new(&t, &b1, &b2, &jordan)?;
    let mut s = blank("constant_beta", Mode::GbdtSym);
    s.span = Some([0.0, 1.0]);
    s.step = Some(1e-3);
    s.z_samples = z_samples();
    s.inputs.triple = Some(t);
    s.inputs.betas = Some(vec![MatrixFn::constant(b1), MatrixFn::constant(b2)]);
    s.inputs.closed_form = Some(ClosedFormSpec::ConstantBeta { jordan });
    Ok(s)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples"));
    for s in [noncommuting_root()?, trivial()?, constant_beta()?] {
        s.validate()?;
        let path = dir.join(format!("{}.json", s.name));
        std::fs::write(&path, s.to_json() + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
