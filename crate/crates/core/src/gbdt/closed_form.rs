//! Explicit `Π(x)`, `S(x)` for trivial Hamiltonians and for constant
//! two-pole weights.

use super::symmetric::SymmetricHamiltonianSystem;
use super::MatrixFn;
use crate::error::{Error, Result};
use crate::matroot::{matrix_root, BranchSpec, JordanForm, SpectralFunction};
use crate::numkit::{self, cr, identity, mat_exp, uniform_grid, ComplexMatrix, Trajectory, C64};
use crate::snode::{solve_sylvester, SNodeTriple};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn sample<F>(span: (f64, f64), step: f64, mut f: F) -> Result<Trajectory<ComplexMatrix>>
where
    F: FnMut(f64) -> Result<ComplexMatrix>,
{
    let (intervals, h) = uniform_grid(span, step)?;
    let mut xs = Vec::with_capacity(intervals + 1);
    let mut values = Vec::with_capacity(intervals + 1);
    for i in 0..=intervals {
        let x = if i == intervals { span.1 } else { span.0 + i as f64 * h };
        values.push(f(x)?);
        xs.push(x);
    }
    Ok(Trajectory { xs, values })
}

/// `H_k ≡ I_m`: `Π(x) = [e^{−ixB}ϑ₁, e^{ixB}ϑ₂]` with `B = Σ (A − c_k)⁻¹`,
/// and `S(x) = e^{−ixB}C₁e^{ixB*} − e^{ixB}C₂e^{−ixB*}` where
/// `AC_i − C_iA* = iϑ_iϑ_i*`.
#[derive(Debug, Clone)]
pub struct TrivialClosedForm {
    pub b: ComplexMatrix,
    pub theta1: ComplexMatrix,
    pub theta2: ComplexMatrix,
    pub c1: ComplexMatrix,
    pub c2: ComplexMatrix,
}

impl TrivialClosedForm {
    pub fn new(triple: &SNodeTriple) -> Result<Self> {
        triple.check_shape()?;
        if triple.m1 == 0 || triple.m2 == 0 {
            return Err(Error::InvalidInput("trivial closed form needs m1 > 0 and m2 > 0".into()));
        }
        let n = triple.n();
        let mut b = numkit::zeros(n, n);
        for r in triple.resolvents()? {
            b += r;
        }
        let theta1 = triple.pi0.columns(0, triple.m1).into_owned();
        let theta2 = triple.pi0.columns(triple.m1, triple.m2).into_owned();
        let c1 = solve_sylvester(&triple.a, &(&theta1 * theta1.adjoint() * I))?;
        let c2 = solve_sylvester(&triple.a, &(&theta2 * theta2.adjoint() * I))?;
        Ok(TrivialClosedForm { b, theta1, theta2, c1, c2 })
    }

    /// The system with `β_k = I_m` for every pole of `triple`, started from
    /// `S(0) = C₁ − C₂`.
    pub fn system(&self, triple: &SNodeTriple) -> Result<SymmetricHamiltonianSystem> {
        let mut t = triple.clone();
        t.s0 = self.s0();
        let m = t.m();
        SymmetricHamiltonianSystem::new(vec![MatrixFn::constant(identity(m)); t.poles.len()], t)
    }

    pub fn s0(&self) -> ComplexMatrix {
        &self.c1 - &self.c2
    }

    fn exps(&self, x: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let minus = mat_exp(&(&self.b * (-I * x)))?;
        let plus = mat_exp(&(&self.b * (I * x)))?;
        Ok((minus, plus))
    }

    pub fn pi(&self, x: f64) -> Result<ComplexMatrix> {
        let (minus, plus) = self.exps(x)?;
        let (n, m1, m2) = (self.b.nrows(), self.theta1.ncols(), self.theta2.ncols());
        let mut out = numkit::zeros(n, m1 + m2);
        out.columns_mut(0, m1).copy_from(&(minus * &self.theta1));
        out.columns_mut(m1, m2).copy_from(&(plus * &self.theta2));
        Ok(out)
    }

    pub fn s(&self, x: f64) -> Result<ComplexMatrix> {
        let (minus, plus) = self.exps(x)?;
        Ok(&minus * &self.c1 * minus.adjoint() - &plus * &self.c2 * plus.adjoint())
    }

    pub fn pi_trajectory(&self, span: (f64, f64), step: f64) -> Result<Trajectory<ComplexMatrix>> {
        sample(span, step, |x| self.pi(x))
    }

    pub fn s_trajectory(&self, span: (f64, f64), step: f64) -> Result<Trajectory<ComplexMatrix>> {
        sample(span, step, |x| self.s(x))
    }
}

/// Constant weights `H_k = β_k*β_k` at two poles, with `β_k j β_k* = 0` and
/// `β₁ j β₂* = I_p`:
/// `Φ₁ = e^{ixQ}h₁ + e^{−ixQ}h₂`, `Φ₂ = −(A − c₂)Q(e^{ixQ}h₁ − e^{−ixQ}h₂)`,
/// `Π = Φ₁β₂ + Φ₂β₁`, where `Q² = (A − c₁)⁻¹(A − c₂)⁻¹`.
#[derive(Debug, Clone)]
pub struct ConstantBetaClosedForm {
    pub q: ComplexMatrix,
    pub h1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub beta1: ComplexMatrix,
    pub beta2: ComplexMatrix,
    /// `(A − c₂)Q`.
    pub aq: ComplexMatrix,
    res1: ComplexMatrix,
    res2: ComplexMatrix,
}

/// Tolerance on `β_k j β_k* = 0`, `β₁ j β₂* = I`.
const BETA_STRUCTURE_TOL: f64 = 1e-10;

impl ConstantBetaClosedForm {
    /// `jf` is a Jordan form of `triple.a`.
    pub fn new(triple: &SNodeTriple, beta1: &ComplexMatrix, beta2: &ComplexMatrix, jf: &JordanForm) -> Result<Self> {
        triple.check_shape()?;
        let sig = triple.sig();
        if triple.poles.len() != 2 {
            return Err(Error::InvalidInput("constant-beta closed form needs exactly two poles".into()));
        }
        let p = triple.m1;
        if triple.m2 != p || p == 0 {
            return Err(Error::InvalidInput("constant-beta closed form needs m1 = m2 > 0".into()));
        }
        let m = sig.m();
        if beta1.shape() != (p, m) || beta2.shape() != (p, m) {
            return Err(Error::dimension("ConstantBetaClosedForm", format!("betas must be {p}x{m}")));
        }
        let bjb = |a: &ComplexMatrix, b: &ComplexMatrix| sig.right(a) * b.adjoint();
        let scale = 1.0 + beta1.norm() * beta2.norm();
        for (what, residual) in [
            ("beta1 j beta1* = 0", bjb(beta1, beta1).norm()),
            ("beta2 j beta2* = 0", bjb(beta2, beta2).norm()),
            ("beta1 j beta2* = I", (bjb(beta1, beta2) - identity(p)).norm()),
        ] {
            if residual > BETA_STRUCTURE_TOL * scale {
                return Err(Error::Structure { what, residual });
            }
        }
        if (jf.assemble() - &triple.a).norm() > 1e-8 * (1.0 + triple.a.norm()) {
            return Err(Error::InvalidInput("Jordan form does not reproduce A".into()));
        }
        let (c1, c2) = (triple.poles[0], triple.poles[1]);
        let f = SpectralFunction::ResolventProduct { c1: cr(c1), c2: cr(c2) };
        let q = matrix_root(jf, &f, &BranchSpec::principal(2, jf.cells().len())?)?;
        let n = triple.n();
        let res = triple.resolvents()?;
        let aq = (&triple.a - identity(n).scale(c2)) * &q;
        let pj = sig.right(&triple.pi0);
        let d = numkit::solve_linear(&aq, &(&pj * beta2.adjoint())).map_err(|e| match e {
            Error::Singular { .. } => Error::BranchPoint { eigenvalue: cr(c2) },
            other => other,
        })?;
        let sum = &pj * beta1.adjoint();
        let h1 = (&sum - &d).scale(0.5);
        let h2 = (&sum + &d).scale(0.5);
        Ok(ConstantBetaClosedForm {
            q,
            h1,
            h2,
            beta1: beta1.clone(),
            beta2: beta2.clone(),
            aq,
            res1: res[0].clone(),
            res2: res[1].clone(),
        })
    }

    /// The two-pole system with `β₁`, `β₂` and the given triple.
    pub fn system(&self, triple: &SNodeTriple) -> Result<SymmetricHamiltonianSystem> {
        SymmetricHamiltonianSystem::new(
            vec![MatrixFn::constant(self.beta1.clone()), MatrixFn::constant(self.beta2.clone())],
            triple.clone(),
        )
    }

    fn exps(&self, x: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        Ok((mat_exp(&(&self.q * (I * x)))?, mat_exp(&(&self.q * (-I * x)))?))
    }

    /// `(Φ₁(x), Φ₂(x))`.
    pub fn phi(&self, x: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let (ep, em) = self.exps(x)?;
        let a = &ep * &self.h1;
        let b = &em * &self.h2;
        Ok((&a + &b, -(&self.aq * (a - b))))
    }

    pub fn pi(&self, x: f64) -> Result<ComplexMatrix> {
        let (phi1, phi2) = self.phi(x)?;
        Ok(phi1 * &self.beta2 + phi2 * &self.beta1)
    }

    /// `max(‖Φ₁' + i(A − c₂)⁻¹Φ₂‖, ‖Φ₂' + i(A − c₁)⁻¹Φ₁‖)` with the
    /// derivatives differentiated analytically.
    pub fn phi_residual(&self, x: f64) -> Result<f64> {
        let (ep, em) = self.exps(x)?;
        let a = &ep * &self.h1;
        let b = &em * &self.h2;
        let phi1 = &a + &b;
        let phi2 = -(&self.aq * (&a - &b));
        let d1 = &self.q * (&a - &b) * I;
        let d2 = -(&self.aq * &self.q * (&a + &b) * I);
        let r1 = (d1 + &self.res2 * &phi2 * I).norm();
        let r2 = (d2 + &self.res1 * &phi1 * I).norm();
        Ok(r1.max(r2))
    }

    pub fn pi_trajectory(&self, span: (f64, f64), step: f64) -> Result<Trajectory<ComplexMatrix>> {
        sample(span, step, |x| self.pi(x))
    }
}
