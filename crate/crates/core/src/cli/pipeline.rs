//! Per-mode pipelines: construct, verify, export.

use std::collections::BTreeMap;

use serde::Serialize;

use super::export::{emit_plot_data, Exporter, PlotData};
use super::scenario::{ClosedFormSpec, Mode, RootsInput, Scenario};
use super::{CliError, Report};
use crate::dynamics::{MultiVarPoint, PsiEvaluator};
use crate::error::{Error, Result};
use crate::gbdt::{
    darboux_residual, fundamental_solution_initial, general, j_unitarity_check, liouville_residual,
    similarity_residual, transfer_function, transfer_function_general, transformed_fundamental_gap,
    transformed_hamiltonians, ConstantBetaClosedForm, GbdtTrajectory, GeneralFlow, GeneralGBDTData, MatrixFn,
    RationalSystemCoeffs, SymmetricHamiltonianSystem, TrivialClosedForm,
};
use crate::matroot::{
    commuting_root_family, f_of_jordan, halmos_extension, matrix_root, positive_root_j, verify_root, BranchSpec,
    SpectralFunction,
};
use crate::numkit::{self, cr, hermitian_eigenvalues, identity, ComplexVector, C64};
use crate::serial::{matrix_to_json, MatrixJson};
use crate::snode::{s_identity_residual, validate_snode, Signature};

/// Bound on the Darboux residual, limited by the central difference.
pub const DARBOUX_TOL: f64 = 1e-5;
/// Bound on the PDE and `(jΠ*S⁻¹)'` residuals at grid-step differences.
pub const PDE_TOL: f64 = 1e-4;
/// Bound on the conservation-law residuals.
pub const CONSERVATION_TOL: f64 = 1e-5;
/// Bound on the `ζ`-derivative against its finite difference.
pub const ZETA_FD_TOL: f64 = 1e-8;
const ZETA_FD_STEP: f64 = 1e-6;
/// `|det w_A|` must stay above this for `z` off the axis and `S` definite.
pub const DET_FLOOR: f64 = 1e-8;
/// Maximum number of `w_A` samples exported per `z`.
const TRANSFER_SAMPLES: usize = 101;

type Out<'a> = Option<&'a mut Exporter>;

fn export<F>(out: &mut Out<'_>, f: F) -> Result<()>
where
    F: FnOnce(&mut Exporter) -> std::result::Result<(), CliError>,
{
    match out {
        Some(ex) => f(ex).map_err(|e| Error::InvalidInput(format!("export failed: {e}"))),
        None => Ok(()),
    }
}

pub(crate) fn run(s: &Scenario, mut out: Out<'_>) -> Result<Report> {
    let mut report = Report::new(&s.name, s.mode);
    match s.mode {
        Mode::Roots => roots(s, &mut report, &mut out)?,
        Mode::GbdtSym => {
            gbdt_sym(s, &mut report, &mut out)?;
        }
        Mode::Dynamics => {
            let (sys, traj) = gbdt_sym(s, &mut report, &mut out)?;
            dynamics(s, &sys, &traj, &mut report, &mut out)?;
        }
        Mode::GbdtGeneral => gbdt_general(s, &mut report, &mut out)?,
        Mode::Dirac => dirac(s, &mut report, &mut out)?,
    }
    export(&mut out, |ex| ex.write_json("residuals.json", &report.entries))?;
    Ok(report)
}

fn z_key(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn rel(residual: f64, scale: f64) -> f64 {
    residual / (1.0 + scale)
}

// ---------------------------------------------------------------- roots

fn roots(s: &Scenario, report: &mut Report, out: &mut Out<'_>) -> Result<()> {
    let input: &RootsInput = s.inputs.roots.as_ref().expect("validated");
    let tol = s.tolerances.structural;
    let jf = &input.jordan;
    let a = jf.assemble();
    let mut exported: Vec<(String, MatrixJson)> = Vec::new();

    for (i, chk) in input.constructed.iter().enumerate() {
        let spec = match &chk.branches {
            Some(k) => BranchSpec::new(chk.ell, k.clone())?,
            None => BranchSpec::principal(chk.ell, jf.cells().len())?,
        };
        let q = matrix_root(jf, &chk.f, &spec)?;
        let fa = f_of_jordan(jf, &chk.f)?;
        let rep = verify_root(&a, &q, &fa, chk.ell)?;
        report.at_most(format!("root_law[{i}]"), rel(rep.root_residual, fa.norm()), tol);
        report.at_most(format!("commutation[{i}]"), rel(rep.commutation_residual, a.norm() * q.norm()), tol);
        exported.push((format!("constructed[{i}]"), matrix_to_json(&q)));
    }

    for (i, ex) in input.explicit.iter().enumerate() {
        let rebuilt = match &ex.target_jordan {
            Some(target) => {
                let spec = match &ex.branches {
                    Some(k) => BranchSpec::new(ex.ell, k.clone())?,
                    None => BranchSpec::principal(ex.ell, target.cells().len())?,
                };
                // The root of f(A) itself: identity function on its Jordan form.
                Some(matrix_root(target, &SpectralFunction::Shift { z: cr(0.0) }, &spec)?)
            }
            None => None,
        };
        let q = match (&ex.q, &rebuilt) {
            (Some(q), Some(r)) => {
                report.at_most(format!("explicit_matches_construction[{i}]"), rel((q - r).norm(), q.norm()), tol);
                q.clone()
            }
            (Some(q), None) => q.clone(),
            (None, Some(r)) => r.clone(),
            (None, None) => {
                return Err(Error::InvalidInput(format!("explicit root {i} needs q or target_jordan")));
            }
        };
        let fa = f_of_jordan(jf, &ex.f)?;
        let rep = verify_root(&a, &q, &fa, ex.ell)?;
        report.at_most(format!("explicit_root_law[{i}]"), rep.root_residual, tol);
        match ex.min_commutator {
            Some(bound) => report.at_least(format!("non_commutation[{i}]"), rep.commutation_residual, bound),
            None => report.at_most(format!("explicit_commutation[{i}]"), rep.commutation_residual, tol),
        }
        exported.push((format!("explicit[{i}]"), matrix_to_json(&q)));
    }

    if let Some(fam) = &input.commuting_family {
        let qs = fam.zs.iter().map(|&z| commuting_root_family(jf, z, fam.ell)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (i, q1) in qs.iter().enumerate() {
            let shift = SpectralFunction::Shift { z: cr(fam.zs[i]) };
            let rep = verify_root(&a, q1, &f_of_jordan(jf, &shift)?, fam.ell)?;
            worst = worst.max(rel(rep.root_residual, a.norm()));
            for q2 in &qs[i + 1..] {
                worst = worst.max(rel((q1 * q2 - q2 * q1).norm(), q1.norm() * q2.norm()));
            }
        }
        report.at_most("commuting_family", worst, tol);
    }
    export(out, |e| e.write_json("roots.json", &exported.into_iter().collect::<BTreeMap<_, _>>()))
}

// ---------------------------------------------------------------- gbdt-sym

/// System and optional closed form for a symmetric scenario.
fn symmetric_system(s: &Scenario) -> Result<(SymmetricHamiltonianSystem, Option<ClosedForm>)> {
    let triple = s.inputs.triple.clone().expect("validated");
    let m = triple.m();
    match &s.inputs.closed_form {
        None => Ok((SymmetricHamiltonianSystem::new(s.inputs.betas.clone().expect("validated"), triple)?, None)),
        Some(ClosedFormSpec::Trivial) => {
            let betas =
                s.inputs.betas.clone().unwrap_or_else(|| vec![MatrixFn::constant(identity(m)); triple.poles.len()]);
            let trivial = betas.iter().all(|b| b.is_constant() && (b.eval(0.0) - identity(m)).norm() == 0.0);
            if !trivial {
                return Err(Error::InvalidInput("trivial closed form requires beta_k = I".into()));
            }
            let cf = TrivialClosedForm::new(&triple)?;
            Ok((SymmetricHamiltonianSystem::new(betas, triple)?, Some(ClosedForm::Trivial(cf))))
        }
        Some(ClosedFormSpec::ConstantBeta { jordan }) => {
            let betas = s.inputs.betas.clone().expect("validated");
            if betas.len() != 2 || !betas.iter().all(MatrixFn::is_constant) {
                return Err(Error::InvalidInput("constant_beta closed form needs two constant betas".into()));
            }
            let cf = ConstantBetaClosedForm::new(&triple, &betas[0].eval(0.0), &betas[1].eval(0.0), jordan)?;
            Ok((SymmetricHamiltonianSystem::new(betas, triple)?, Some(ClosedForm::ConstantBeta(Box::new(cf)))))
        }
    }
}

enum ClosedForm {
    Trivial(TrivialClosedForm),
    ConstantBeta(Box<ConstantBetaClosedForm>),
}

#[derive(Serialize)]
struct TransferSample {
    x: f64,
    w: MatrixJson,
}

fn gbdt_sym(
    s: &Scenario,
    report: &mut Report,
    out: &mut Out<'_>,
) -> Result<(SymmetricHamiltonianSystem, GbdtTrajectory)> {
    let tol = s.tolerances;
    let (sys, closed) = symmetric_system(s)?;
    let sig = sys.sig();
    let t = &sys.triple;
    let n = t.n();

    let node = validate_snode(t, &tol)?;
    report.at_most("snode_identity_initial", rel(node.identity_residual, t.s0.norm()), tol.structural);
    report.at_most("snode_hermitian_initial", rel(node.hermiticity_residual, t.s0.norm()), tol.structural);
    report.at_least("pole_clearance", node.pole_clearance, tol.structural);

    let span = s.span();
    let traj = sys.trajectory(span, s.step())?;
    let max_cond = traj.cond_s.iter().copied().fold(0.0, f64::max);
    report.at_most(
        "s_invertible",
        if traj.truncated_at.is_some() { f64::INFINITY } else { max_cond },
        numkit::SINGULAR_COND,
    );
    if let Some(x) = traj.truncated_at {
        report.observe("truncated_at", x);
    }

    let mut plot = PlotData { xs: traj.xs.clone(), ..Default::default() };
    let (mut id_res, mut herm, mut junit, mut sim) = (vec![], vec![], vec![], vec![]);
    let mut psd_defect: f64 = 0.0;
    let mut definite = true;
    for i in 0..traj.len() {
        let (x, p, sm) = (traj.xs[i], &traj.pis[i], &traj.ss[i]);
        id_res.push(s_identity_residual(&t.a, sm, p, sig));
        herm.push(numkit::hermiticity_residual(sm));
        let eigs = hermitian_eigenvalues(&numkit::hermitian_part(sm))?;
        definite &= eigs[0] > 0.0 || eigs[n - 1] < 0.0;
        plot.s_eigenvalues.push(eigs);
        let hs = sys.hamiltonians(x);
        let ht = transformed_hamiltonians(&sys, p, sm, x)?;
        let mut ju: f64 = 0.0;
        let mut defects = Vec::with_capacity(hs.len());
        for (tk, h) in ht.iter().zip(&hs) {
            ju = ju.max(j_unitarity_check(&tk.w_at_pole, sig));
            let min_eig = hermitian_eigenvalues(&numkit::hermitian_part(&tk.h))?[0];
            psd_defect = psd_defect.max(rel((-min_eig).max(0.0), tk.h.norm()));
            defects.push((&tk.h - h).norm());
        }
        junit.push(ju);
        sim.push(similarity_residual(&sys, p, sm, x)?);
        plot.hamiltonian_defects.push(defects);
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    report.at_most("identity_propagation", max(&id_res), tol.ode);
    report.at_most("s_hermitian", max(&herm), tol.ode);
    report.at_most(
        "s_monotone",
        traj.s_prime_max_eig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        tol.structural,
    );
    report.at_most("j_unitarity_at_poles", max(&junit), tol.ode);
    report.at_most("similarity", max(&sim), tol.ode);
    report.at_most("transformed_hamiltonians_psd", psd_defect, tol.structural);

    let mut transfer: BTreeMap<String, Vec<TransferSample>> = BTreeMap::new();
    let stride = (traj.len() / (TRANSFER_SAMPLES - 1)).max(1);
    for &z in &s.z_samples {
        let key = z_key(z);
        report.at_most(format!("darboux[{key}]"), darboux_residual(&sys, &traj, z)?, DARBOUX_TOL);
        report.at_most(
            format!("transformed_fundamental[{key}]"),
            transformed_fundamental_gap(&sys, z, span, s.step())?,
            tol.ode,
        );
        let w = fundamental_solution_initial(&sys, z, span, s.step())?;
        report.at_most(format!("liouville[{key}]"), liouville_residual(&sys, z, &w)?, tol.ode);

        let mut samples = Vec::new();
        let mut min_det = f64::INFINITY;
        for i in 0..traj.len() {
            let wa = transfer_function(&t.a, &traj.ss[i], &traj.pis[i], sig, z, traj.xs[i])?;
            min_det = min_det.min(wa.determinant().norm());
            if i % stride == 0 || i + 1 == traj.len() {
                samples.push(TransferSample { x: traj.xs[i], w: matrix_to_json(&wa) });
            }
        }
        if z.im != 0.0 && definite {
            report.at_least(format!("det_w_a[{key}]"), min_det, DET_FLOOR);
        } else {
            report.observe(format!("min_det_w_a[{key}]"), min_det);
        }
        // j-unitarity away from the poles is only observed.
        let zr = cr(z.re);
        if !sys.poles().contains(&z.re) {
            let mut worst: f64 = 0.0;
            for i in (0..traj.len()).step_by(stride) {
                match transfer_function(&t.a, &traj.ss[i], &traj.pis[i], sig, zr, traj.xs[i]) {
                    Ok(wa) => worst = worst.max(j_unitarity_check(&wa, sig)),
                    Err(_) => {
                        worst = f64::NAN;
                        break;
                    }
                }
            }
            report.observe(format!("j_unitarity_real_z[{}]", z.re), worst);
        }
        transfer.insert(key, samples);
    }

    if let Some(cf) = &closed {
        let (mut dpi, mut ds, mut phi): (f64, f64, f64) = (0.0, 0.0, 0.0);
        match cf {
            ClosedForm::Trivial(cf) => {
                report.at_most("closed_form_s0", rel((cf.s0() - &t.s0).norm(), t.s0.norm()), tol.structural);
                for i in 0..traj.len() {
                    dpi = dpi.max((&traj.pis[i] - cf.pi(traj.xs[i])?).norm());
                    ds = ds.max((&traj.ss[i] - cf.s(traj.xs[i])?).norm());
                }
                report.at_most("closed_form_s", ds, tol.ode);
            }
            ClosedForm::ConstantBeta(cf) => {
                for i in 0..traj.len() {
                    dpi = dpi.max((&traj.pis[i] - cf.pi(traj.xs[i])?).norm());
                    phi = phi.max(cf.phi_residual(traj.xs[i])?);
                }
                report.at_most("closed_form_phi_relations", phi, tol.ode);
            }
        }
        report.at_most("closed_form_pi", dpi, tol.ode);
    }

    plot.residuals = vec![
        ("identity_residual".into(), id_res),
        ("hermiticity_residual".into(), herm),
        ("j_unitarity_at_poles".into(), junit),
        ("similarity_residual".into(), sim),
    ];
    export(out, |ex| {
        ex.write_trajectory("trajectory.csv", &traj.xs, &[("Pi", &traj.pis), ("S", &traj.ss)])?;
        ex.write_json("transfer.json", &transfer)?;
        emit_plot_data(ex, &plot)
    })?;
    Ok((sys, traj))
}

// ---------------------------------------------------------------- dynamics

#[derive(Serialize)]
struct PointResidual {
    check: &'static str,
    point: MultiVarPoint,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

fn dynamics(
    s: &Scenario,
    sys: &SymmetricHamiltonianSystem,
    traj: &GbdtTrajectory,
    report: &mut Report,
    out: &mut Out<'_>,
) -> Result<()> {
    let ev = PsiEvaluator::new(sys, traj)?;
    let (a, b) = s.span();
    let xs = if s.x_samples.is_empty() { vec![0.5 * (a + b)] } else { s.x_samples.clone() };
    let h = traj.step().abs();
    let degraded = |tol: f64, one_sided: bool| if one_sided { tol.max(10.0 * h) } else { tol };
    let mut rows = Vec::new();
    let mut residuals = Vec::new();
    let mut record = |report: &mut Report, check: &'static str, point: MultiVarPoint, residual: f64, tolerance: f64| {
        let id = format!("{check}[x={}, zeta={:?}]", point.x, point.zetas);
        report.at_most(id, residual, tolerance);
        residuals.push(PointResidual { check, point, residual, tolerance, pass: residual <= tolerance });
    };

    for &x in &xs {
        let xg = traj.xs[traj.nearest_index(x)];
        let bare = MultiVarPoint::new(xg, vec![0.0; sys.poles().len()]);
        let d1 = ev.d1_identity_residual(xg)?;
        record(report, "d1_identity", bare.clone(), d1.residual, degraded(PDE_TOL, d1.one_sided));
        let cl = ev.conservation_law_residual(xg)?;
        record(report, "conservation_law", bare, cl.residual, degraded(CONSERVATION_TOL, cl.one_sided));
        for zetas in &s.zeta_samples {
            let pt = MultiVarPoint::new(xg, zetas.clone());
            let pde = ev.pde_residual(&pt)?;
            record(report, "pde", pt.clone(), pde.residual, degraded(PDE_TOL, pde.one_sided));
            let mut zfd: f64 = 0.0;
            for k in 0..zetas.len() {
                let mut p = pt.clone();
                p.zetas[k] += ZETA_FD_STEP;
                let mut m = pt.clone();
                m.zetas[k] -= ZETA_FD_STEP;
                let fd = (ev.psi_tilde(&p)? - ev.psi_tilde(&m)?).unscale(2.0 * ZETA_FD_STEP);
                zfd = zfd.max((fd - ev.zeta_derivative(&pt, k)?).norm());
            }
            record(report, "zeta_derivative", pt.clone(), zfd, ZETA_FD_TOL);
            let psi = ev.psi_tilde(&pt)?;
            let mut row = vec![xg];
            row.extend(zetas.iter().copied());
            super::export::flatten_into(&psi, &mut row);
            rows.push(row);
        }
    }
    report.at_most("conservation_law_integrated", ev.integrated_conservation_residual()?, CONSERVATION_TOL);

    let r = sys.poles().len();
    let (mm, nn) = (sys.triple.m(), sys.triple.n());
    export(out, |ex| {
        let mut header = vec!["x".to_string()];
        header.extend((1..=r).map(|k| format!("zeta_{k}")));
        header.extend(super::export::matrix_columns("psi", mm, nn));
        ex.write_csv("psi.csv", &header, &rows)?;
        ex.write_json("dynamics_residuals.json", &residuals)
    })
}

// ---------------------------------------------------------------- gbdt-general

fn gbdt_general(s: &Scenario, report: &mut Report, out: &mut Out<'_>) -> Result<()> {
    let tol = s.tolerances;
    let symmetric = match (&s.inputs.general, &s.inputs.coeffs) {
        (Some(_), Some(_)) => None,
        _ => Some(SymmetricHamiltonianSystem::new(
            s.inputs.betas.clone().expect("validated"),
            s.inputs.triple.clone().expect("validated"),
        )?),
    };
    let (data, coeffs): (GeneralGBDTData, RationalSystemCoeffs) = match &symmetric {
        Some(sys) => sys.to_general(),
        None => (s.inputs.general.clone().expect("validated"), s.inputs.coeffs.clone().expect("validated")),
    };
    let flow = GeneralFlow::new(&data, &coeffs)?;
    report.at_most("identity_initial", rel(data.identity_residual(), data.s0.norm()), tol.structural);

    let span = s.span();
    let traj = flow.run(span, s.step())?;
    report.at_most(
        "s_invertible",
        if traj.truncated_at.is_some() { f64::INFINITY } else { traj.cond_s.iter().copied().fold(0.0, f64::max) },
        numkit::SINGULAR_COND,
    );
    let mut id: f64 = 0.0;
    for i in 0..traj.xs.len() {
        let r = general::identity_residual(&data.a1, &data.a2, &traj.s[i], &traj.pi1[i], &traj.pi2[i]);
        id = id.max(rel(r, traj.s[i].norm()));
    }
    report.at_most("identity_propagation", id, tol.ode);

    let mut transfer: BTreeMap<String, Vec<TransferSample>> = BTreeMap::new();
    let stride = (traj.xs.len() / (TRANSFER_SAMPLES - 1)).max(1);
    for &z in &s.z_samples {
        let key = z_key(z);
        report.at_most(format!("darboux[{key}]"), flow.darboux_residual(&traj, z)?, DARBOUX_TOL);
        let mut samples = Vec::new();
        for i in (0..traj.xs.len()).step_by(stride) {
            let w = transfer_function_general(&data.a1, &traj.s[i], &traj.pi1[i], &traj.pi2[i], z, traj.xs[i])?;
            samples.push(TransferSample { x: traj.xs[i], w: matrix_to_json(&w) });
        }
        transfer.insert(key, samples);
    }

    if let Some(sys) = &symmetric {
        let sig = sys.sig();
        let sym = sys.trajectory(span, s.step())?;
        let (mut pi2, mut herm, mut gap, mut coeff): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        let len = traj.xs.len().min(sym.len());
        for i in 0..len {
            let expected = sig.left(&traj.pi1[i].adjoint()) * C64::new(0.0, 1.0);
            pi2 = pi2.max((traj.pi2[i].adjoint() - expected).norm());
            herm = herm.max(numkit::hermiticity_residual(&traj.s[i]));
            gap = gap.max((&traj.s[i] - &sym.ss[i]).norm());
        }
        for i in (0..len).step_by(stride) {
            let x = traj.xs[i];
            let q = flow.transformed(&traj.state(i), x, &coeffs.at(x))?;
            for (qt, th) in q.poles.iter().zip(transformed_hamiltonians(sys, &sym.pis[i], &sym.ss[i], x)?) {
                coeff = coeff.max((&qt[0] - sig.left(&th.h) * C64::new(0.0, -1.0)).norm());
            }
        }
        report.at_most("symmetric_reduction_pi2", pi2, tol.ode);
        report.at_most("symmetric_reduction_s_hermitian", herm, tol.ode);
        report.at_most("matches_symmetric_engine", gap, tol.ode);
        report.at_most("transformed_coeffs_vs_hamiltonians", coeff, tol.ode);
    }

    export(out, |ex| {
        ex.write_trajectory("trajectory.csv", &traj.xs, &[("Pi1", &traj.pi1), ("Pi2", &traj.pi2), ("S", &traj.s)])?;
        ex.write_json("transfer.json", &transfer)
    })
}

// ---------------------------------------------------------------- dirac

#[derive(Serialize)]
struct DiracExport {
    c: Vec<MatrixJson>,
    evolved: BTreeMap<String, Vec<C64>>,
}

fn dirac(s: &Scenario, report: &mut Report, out: &mut Out<'_>) -> Result<()> {
    let input = s.inputs.dirac.as_ref().expect("validated");
    let tol = s.tolerances.structural;
    let sig = Signature::new(input.m1, input.m2)?;
    let j = sig.matrix();
    let mut cs = Vec::with_capacity(input.contractions.len());
    let (mut min_eig, mut cjc, mut root): (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0);
    for rho in &input.contractions {
        if rho.shape() != (input.m1, input.m2) {
            return Err(Error::dimension("dirac", format!("contractions must be {}x{}", input.m1, input.m2)));
        }
        let c = halmos_extension(rho)?;
        min_eig = min_eig.min(hermitian_eigenvalues(&numkit::hermitian_part(&c))?[0]);
        cjc = cjc.max((&c * &j * &c - &j).norm());
        let half = positive_root_j(&c, sig, 2)?;
        root = root.max((&half * &j * &half - &j).norm());
        cs.push(c);
    }
    if !cs.is_empty() {
        report.at_least("c_positive", min_eig, 0.0);
        report.at_most("c_j_c", cjc, tol);
        report.at_most("sqrt_c_j_sqrt_c", root, tol);
    }
    let y0 = ComplexVector::from_vec(input.y0.clone());
    let mut evolved = BTreeMap::new();
    for &z in &s.z_samples {
        let y = crate::matroot::discrete_dirac_evolve(&cs, sig, z, &y0)?;
        // Product oracle: M = Π_k (I − (i/z) j C_k), applied once.
        let mut m = identity(sig.m());
        for c in &cs {
            m = (identity(sig.m()) - &j * c * (C64::new(0.0, 1.0) / z)) * m;
        }
        let brute = &m * &y0;
        report.at_most(format!("dirac_evolution[{}]", z_key(z)), rel((&y - brute).norm(), y.norm()), tol);
        evolved.insert(z_key(z), y.iter().copied().collect());
    }
    let payload = DiracExport { c: cs.iter().map(matrix_to_json).collect(), evolved };
    export(out, |ex| ex.write_json("dirac.json", &payload))
}
