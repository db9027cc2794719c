//! Explicit solutions of the several-variable system
//! `∂ψ̃/∂x = i Σ_k j H̃_k(x) ∂ψ̃/∂ζ_k` and the conservation law
//! `(Π*S⁻¹Π)' = Σ_k (H̃_k − H_k)`.
//!
//! Points off the trajectory grid are snapped to the nearest sample, and
//! `x`-derivatives are central differences on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{transformed_hamiltonians, GbdtTrajectory, SymmetricHamiltonianSystem};
use crate::numkit::{self, inverse_at, mat_exp, ComplexMatrix, C64};
use crate::snode::pole_resolvents;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `(x, ζ_1, …, ζ_r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiVarPoint {
    pub x: f64,
    pub zetas: Vec<f64>,
}

impl MultiVarPoint {
    pub fn new(x: f64, zetas: Vec<f64>) -> Self {
        MultiVarPoint { x, zetas }
    }
}

/// A finite-difference residual; `one_sided` marks grid ends, where the
/// difference is first order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdResidual {
    pub residual: f64,
    pub one_sided: bool,
}

/// Evaluates `ψ̃(x, ζ) = jΠ(x)*S(x)⁻¹ exp{Σ ζ_k (A − c_k)⁻¹}` on a trajectory.
pub struct PsiEvaluator<'a> {
    sys: &'a SymmetricHamiltonianSystem,
    traj: &'a GbdtTrajectory,
    res: Vec<ComplexMatrix>,
}

impl<'a> PsiEvaluator<'a> {
    pub fn new(sys: &'a SymmetricHamiltonianSystem, traj: &'a GbdtTrajectory) -> Result<Self> {
        sys.validate()?;
        if traj.is_empty() {
            return Err(Error::InvalidInput("empty trajectory".into()));
        }
        Ok(PsiEvaluator { sys, traj, res: pole_resolvents(&sys.triple.a, sys.poles())? })
    }

    pub fn resolvents(&self) -> &[ComplexMatrix] {
        &self.res
    }

    fn check(&self, pt: &MultiVarPoint) -> Result<()> {
        if pt.zetas.len() != self.res.len() {
            return Err(Error::dimension(
                "MultiVarPoint",
                format!("{} zetas for {} poles", pt.zetas.len(), self.res.len()),
            ));
        }
        let (lo, hi) = span_of(&self.traj.xs);
        if !(pt.x >= lo - 0.5 * self.traj.step().abs() && pt.x <= hi + 0.5 * self.traj.step().abs()) {
            return Err(Error::InvalidInput(format!("x = {} outside trajectory span [{lo}, {hi}]", pt.x)));
        }
        Ok(())
    }

    /// `jΠ*S⁻¹` at sample `i`.
    fn prefactor(&self, i: usize) -> Result<ComplexMatrix> {
        let s_inv = inverse_at(&self.traj.ss[i], self.traj.xs[i])?;
        Ok(self.sys.sig().left(&self.traj.pis[i].adjoint()) * s_inv)
    }

    fn exponential(&self, zetas: &[f64]) -> Result<ComplexMatrix> {
        let n = self.sys.triple.n();
        let mut e = numkit::zeros(n, n);
        for (r, &z) in self.res.iter().zip(zetas) {
            e += r.scale(z);
        }
        mat_exp(&e)
    }

    fn psi_at(&self, i: usize, zetas: &[f64]) -> Result<ComplexMatrix> {
        Ok(self.prefactor(i)? * self.exponential(zetas)?)
    }

    pub fn psi_tilde(&self, pt: &MultiVarPoint) -> Result<ComplexMatrix> {
        self.check(pt)?;
        self.psi_at(self.traj.nearest_index(pt.x), &pt.zetas)
    }

    /// `∂ψ̃/∂ζ_k = ψ̃ (A − c_k)⁻¹`.
    pub fn zeta_derivative(&self, pt: &MultiVarPoint, k: usize) -> Result<ComplexMatrix> {
        let r = self.res.get(k).ok_or_else(|| Error::InvalidInput(format!("pole index {k} out of range")))?;
        Ok(self.psi_tilde(pt)? * r)
    }

    fn fd_indices(&self, x: f64) -> (usize, usize, usize, bool) {
        let i = self.traj.nearest_index(x);
        let last = self.traj.len() - 1;
        if i == 0 {
            (0, 0, 1.min(last), true)
        } else if i == last {
            (i, i - 1, i, true)
        } else {
            (i, i - 1, i + 1, false)
        }
    }

    fn fd<F>(&self, x: f64, mut f: F) -> Result<(usize, ComplexMatrix, bool)>
    where
        F: FnMut(usize) -> Result<ComplexMatrix>,
    {
        if self.traj.len() < 2 {
            return Err(Error::InvalidInput("finite differences need two samples".into()));
        }
        let (i, lo, hi, one_sided) = self.fd_indices(x);
        let d = (f(hi)? - f(lo)?).unscale(self.traj.xs[hi] - self.traj.xs[lo]);
        Ok((i, d, one_sided))
    }

    fn jh_tilde(&self, i: usize) -> Result<Vec<ComplexMatrix>> {
        let sig = self.sys.sig();
        Ok(transformed_hamiltonians(self.sys, &self.traj.pis[i], &self.traj.ss[i], self.traj.xs[i])?
            .into_iter()
            .map(|t| sig.left(&t.h))
            .collect())
    }

    /// `‖∂_x ψ̃ − i Σ j H̃_k ∂ψ̃/∂ζ_k‖`.
    pub fn pde_residual(&self, pt: &MultiVarPoint) -> Result<FdResidual> {
        self.check(pt)?;
        let (i, dx, one_sided) = self.fd(pt.x, |j| self.psi_at(j, &pt.zetas))?;
        let psi = self.psi_at(i, &pt.zetas)?;
        let mut rhs = numkit::zeros(dx.nrows(), dx.ncols());
        for (jh, r) in self.jh_tilde(i)?.iter().zip(&self.res) {
            rhs += jh * &psi * r;
        }
        Ok(FdResidual { residual: (dx - rhs * I).norm(), one_sided })
    }

    /// Per-column version of [`Self::pde_residual`].
    pub fn pde_column_residuals(&self, pt: &MultiVarPoint) -> Result<Vec<f64>> {
        self.check(pt)?;
        let (i, dx, _) = self.fd(pt.x, |j| self.psi_at(j, &pt.zetas))?;
        let psi = self.psi_at(i, &pt.zetas)?;
        let mut rhs = numkit::zeros(dx.nrows(), dx.ncols());
        for (jh, r) in self.jh_tilde(i)?.iter().zip(&self.res) {
            rhs += jh * &psi * r;
        }
        let diff = dx - rhs * I;
        Ok(diff.column_iter().map(|c| c.norm()).collect())
    }

    /// `‖(jΠ*S⁻¹)' − i Σ j H̃_k jΠ*S⁻¹(A − c_k)⁻¹‖`.
    pub fn d1_identity_residual(&self, x: f64) -> Result<FdResidual> {
        let (i, dx, one_sided) = self.fd(x, |j| self.prefactor(j))?;
        let p = self.prefactor(i)?;
        let mut rhs = numkit::zeros(dx.nrows(), dx.ncols());
        for (jh, r) in self.jh_tilde(i)?.iter().zip(&self.res) {
            rhs += jh * &p * r;
        }
        Ok(FdResidual { residual: (dx - rhs * I).norm(), one_sided })
    }

    /// `Π*S⁻¹Π` at sample `i`.
    fn conserved(&self, i: usize) -> Result<ComplexMatrix> {
        let p = &self.traj.pis[i];
        Ok(p.adjoint() * inverse_at(&self.traj.ss[i], self.traj.xs[i])? * p)
    }

    /// `Σ (H̃_k − H_k)` at sample `i`.
    fn hamiltonian_defect(&self, i: usize) -> Result<ComplexMatrix> {
        let x = self.traj.xs[i];
        let m = self.sys.triple.m();
        let mut out = numkit::zeros(m, m);
        let ht = transformed_hamiltonians(self.sys, &self.traj.pis[i], &self.traj.ss[i], x)?;
        for (t, h) in ht.iter().zip(self.sys.hamiltonians(x)) {
            out += &t.h - h;
        }
        Ok(out)
    }

    /// `‖(Π*S⁻¹Π)' − Σ (H̃_k − H_k)‖`.
    pub fn conservation_law_residual(&self, x: f64) -> Result<FdResidual> {
        let (i, dx, one_sided) = self.fd(x, |j| self.conserved(j))?;
        Ok(FdResidual { residual: (dx - self.hamiltonian_defect(i)?).norm(), one_sided })
    }

    /// `max_x ‖Π*S⁻¹Π|_{x₀}^{x} − ∫_{x₀}^{x} Σ (H̃_k − H_k)‖`, trapezoid rule.
    pub fn integrated_conservation_residual(&self) -> Result<f64> {
        let q0 = self.conserved(0)?;
        let mut integral = numkit::zeros(q0.nrows(), q0.ncols());
        let mut prev = self.hamiltonian_defect(0)?;
        let mut worst: f64 = 0.0;
        for i in 1..self.traj.len() {
            let cur = self.hamiltonian_defect(i)?;
            integral += (&prev + &cur).scale(0.5 * (self.traj.xs[i] - self.traj.xs[i - 1]));
            worst = worst.max((self.conserved(i)? - &q0 - &integral).norm());
            prev = cur;
        }
        Ok(worst)
    }
}

fn span_of(xs: &[f64]) -> (f64, f64) {
    let a = xs[0];
    let b = xs[xs.len() - 1];
    (a.min(b), a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{MatrixFn, TrivialClosedForm};
    use crate::numkit::{c, cr, diag, from_rows, identity, zeros};
    use crate::snode::{SNodeTriple, Signature};

    fn example_system() -> SymmetricHamiltonianSystem {
        let a = diag(&[c(0.2, -1.0), c(-0.5, -0.7)]);
        let pi = from_rows(&[vec![cr(0.5), c(0.05, 0.02)], vec![c(0.1, 0.4), cr(0.03)]]).unwrap();
        let t = SNodeTriple::new(a, identity(2), pi, Signature::new(1, 1).unwrap(), vec![-1.5, 2.0]).unwrap();
        TrivialClosedForm::new(&t).unwrap().system(&t).unwrap()
    }

    #[test]
    fn psi_at_origin_is_prefactor() {
        let sys = example_system();
        let traj = sys.trajectory((0.0, 1.0), 1e-2).unwrap();
        let ev = PsiEvaluator::new(&sys, &traj).unwrap();
        let psi = ev.psi_tilde(&MultiVarPoint::new(0.0, vec![0.0, 0.0])).unwrap();
        let t = &sys.triple;
        let expected = sys.sig().left(&t.pi0.adjoint()) * numkit::inverse(&t.s0).unwrap();
        assert!((psi - expected).norm() < 1e-14);
    }

    #[test]
    fn scalar_psi() {
        let sig = Signature::new(1, 1).unwrap();
        let t = SNodeTriple::new(
            from_rows(&[vec![c(0.0, 1.0)]]).unwrap(),
            from_rows(&[vec![cr(0.5)]]).unwrap(),
            from_rows(&[vec![cr(1.0), cr(0.0)]]).unwrap(),
            sig,
            vec![0.5],
        )
        .unwrap();
        let sys = SymmetricHamiltonianSystem::new(vec![MatrixFn::constant(zeros(1, 2))], t).unwrap();
        let traj = sys.trajectory((0.0, 1.0), 0.5).unwrap();
        let ev = PsiEvaluator::new(&sys, &traj).unwrap();
        let pt = MultiVarPoint::new(0.0, vec![0.7]);
        let psi = ev.psi_tilde(&pt).unwrap();
        let scale = (cr(0.7) / (c(0.0, 1.0) - 0.5)).exp() * 2.0;
        assert!((psi[(0, 0)] - scale).norm() < 1e-14);
        assert!(psi[(1, 0)].norm() < 1e-15);
        let d = ev.zeta_derivative(&pt, 0).unwrap();
        assert!((d[(0, 0)] - scale / (c(0.0, 1.0) - 0.5)).norm() < 1e-13);
    }

    #[test]
    fn zeta_semigroup_and_fd() {
        let sys = example_system();
        let traj = sys.trajectory((0.0, 1.0), 1e-2).unwrap();
        let ev = PsiEvaluator::new(&sys, &traj).unwrap();
        let pt = MultiVarPoint::new(0.4, vec![0.3, -0.2]);
        let shifted = MultiVarPoint::new(0.4, vec![0.5, 0.1]);
        let lhs = ev.psi_tilde(&shifted).unwrap();
        let rhs = ev.psi_tilde(&pt).unwrap() * ev.exponential(&[0.2, 0.3]).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        let h = 1e-6;
        for k in 0..2 {
            let mut p = pt.clone();
            p.zetas[k] += h;
            let mut m = pt.clone();
            m.zetas[k] -= h;
            let fd = (ev.psi_tilde(&p).unwrap() - ev.psi_tilde(&m).unwrap()).unscale(2.0 * h);
            assert!((fd - ev.zeta_derivative(&pt, k).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn residuals_small_and_second_order() {
        let sys = example_system();
        let coarse = sys.trajectory((0.0, 1.0), 2e-3).unwrap();
        let fine = sys.trajectory((0.0, 1.0), 1e-3).unwrap();
        let ec = PsiEvaluator::new(&sys, &coarse).unwrap();
        let ef = PsiEvaluator::new(&sys, &fine).unwrap();
        let pt = MultiVarPoint::new(0.5, vec![0.2, 0.1]);
        let (pc, pf) = (ec.pde_residual(&pt).unwrap(), ef.pde_residual(&pt).unwrap());
        assert!(!pf.one_sided && pf.residual < 1e-4);
        let ratio = pc.residual / pf.residual;
        assert!((3.0..=6.0).contains(&ratio), "pde ratio {ratio}");
        let (cc, cf) = (ec.conservation_law_residual(0.5).unwrap(), ef.conservation_law_residual(0.5).unwrap());
        assert!(cf.residual < 1e-5);
        let ratio = cc.residual / cf.residual;
        assert!((3.0..=6.0).contains(&ratio), "conservation ratio {ratio}");
        assert!(ef.d1_identity_residual(0.5).unwrap().residual < 1e-4);
        assert!(ef.integrated_conservation_residual().unwrap() < 1e-5);
        assert!(ef.pde_residual(&MultiVarPoint::new(0.0, vec![0.0, 0.0])).unwrap().one_sided);
    }

    #[test]
    fn zero_pi_gives_zero_residuals() {
        let mut sys = example_system();
        sys.triple.pi0 = zeros(2, 2);
        sys.triple.s0 = -identity(2);
        let traj = sys.trajectory((0.0, 1.0), 1e-2).unwrap();
        let ev = PsiEvaluator::new(&sys, &traj).unwrap();
        let pt = MultiVarPoint::new(0.5, vec![0.1, 0.1]);
        assert_eq!(ev.psi_tilde(&pt).unwrap(), zeros(2, 2));
        assert_eq!(ev.pde_residual(&pt).unwrap().residual, 0.0);
        assert_eq!(ev.conservation_law_residual(0.5).unwrap().residual, 0.0);
        assert_eq!(ev.d1_identity_residual(0.5).unwrap().residual, 0.0);
    }

    #[test]
    fn wrong_zeta_count_is_rejected() {
        let sys = example_system();
        let traj = sys.trajectory((0.0, 1.0), 1e-1).unwrap();
        let ev = PsiEvaluator::new(&sys, &traj).unwrap();
        assert!(ev.psi_tilde(&MultiVarPoint::new(0.5, vec![0.1])).is_err());
        assert!(ev.psi_tilde(&MultiVarPoint::new(3.0, vec![0.1, 0.0])).is_err());
    }
}
