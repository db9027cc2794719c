//! S-nodes: the signature matrix, the symmetric triple `{A, S(0), Π(0)}`,
//! Sylvester solves and the identity `AS − SA* = iΠjΠ*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{
    self, cr, hermitian_part, hermiticity_residual, identity, min_singular_value, ComplexMatrix, Tolerance, C64,
};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Signature `j = diag(I_{m1}, −I_{m2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub m1: usize,
    pub m2: usize,
}

impl Signature {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 + m2 == 0 {
            return Err(Error::InvalidInput("signature needs m1 + m2 > 0".into()));
        }
        Ok(Signature { m1, m2 })
    }

    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let entries: Vec<f64> = std::iter::repeat_n(1.0, self.m1).chain(std::iter::repeat_n(-1.0, self.m2)).collect();
        numkit::diag_real(&entries)
    }

    /// `jM` without forming `j`.
    pub fn left(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = m.clone();
        for mut row in out.rows_mut(self.m1, self.m2).row_iter_mut() {
            row.neg_mut();
        }
        out
    }

    /// `Mj` without forming `j`.
    pub fn right(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = m.clone();
        out.columns_mut(self.m1, self.m2).neg_mut();
        out
    }
}

/// Symmetric S-node data `{A, S(0), Π(0)}` with signature and real poles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SNodeTriple {
    #[serde(rename = "A", with = "crate::serial::matrix")]
    pub a: ComplexMatrix,
    #[serde(rename = "S0", with = "crate::serial::matrix")]
    pub s0: ComplexMatrix,
    #[serde(rename = "Pi0", with = "crate::serial::matrix")]
    pub pi0: ComplexMatrix,
    pub m1: usize,
    pub m2: usize,
    pub poles: Vec<f64>,
}

impl SNodeTriple {
    pub fn new(
        a: ComplexMatrix,
        s0: ComplexMatrix,
        pi0: ComplexMatrix,
        sig: Signature,
        poles: Vec<f64>,
    ) -> Result<Self> {
        let t = SNodeTriple { a, s0, pi0, m1: sig.m1, m2: sig.m2, poles };
        t.check_shape()?;
        Ok(t)
    }

    pub fn sig(&self) -> Signature {
        Signature { m1: self.m1, m2: self.m2 }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }

    /// Dimension, finiteness and pole-distinctness checks.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.a.nrows();
        Signature::new(self.m1, self.m2)?;
        if n == 0 || self.a.ncols() != n {
            return Err(Error::dimension("SNodeTriple", "A must be square"));
        }
        if self.s0.shape() != (n, n) {
            return Err(Error::dimension("SNodeTriple", "S0 must match A"));
        }
        if self.pi0.shape() != (n, self.m()) {
            return Err(Error::dimension(
                "SNodeTriple",
                format!("Pi0 must be {n}x{}, got {:?}", self.m(), self.pi0.shape()),
            ));
        }
        for (i, &ci) in self.poles.iter().enumerate() {
            if !ci.is_finite() {
                return Err(Error::InvalidInput("poles must be finite reals".into()));
            }
            if self.poles[..i].contains(&ci) {
                return Err(Error::InvalidInput(format!("pole {ci} repeated")));
            }
        }
        if !(numkit::all_finite(&self.a) && numkit::all_finite(&self.s0) && numkit::all_finite(&self.pi0)) {
            return Err(Error::NonFinite("SNodeTriple"));
        }
        Ok(())
    }

    /// `(A − cI)⁻¹` for every pole, in pole order.
    pub fn resolvents(&self) -> Result<Vec<ComplexMatrix>> {
        pole_resolvents(&self.a, &self.poles)
    }
}

/// `(A − c_k I)⁻¹` for each pole; a pole in (or numerically at) the
/// spectrum is reported as [`Error::PoleClash`].
pub fn pole_resolvents(a: &ComplexMatrix, poles: &[f64]) -> Result<Vec<ComplexMatrix>> {
    let n = a.nrows();
    poles
        .iter()
        .map(|&ck| {
            numkit::inverse(&(a - identity(n).scale(ck))).map_err(|e| match e {
                Error::Singular { .. } => Error::PoleClash { pole: cr(ck) },
                other => other,
            })
        })
        .collect()
}

/// Residuals of the defining relations of a symmetric S-node.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SNodeReport {
    /// `‖AS(0) − S(0)A* − iΠ(0)jΠ(0)*‖`.
    pub identity_residual: f64,
    /// `‖S(0) − S(0)*‖`.
    pub hermiticity_residual: f64,
    /// `min_k σ_min(A − c_k I)`, a lower bound on the distance from the
    /// poles to the spectrum (`+∞` without poles).
    pub pole_clearance: f64,
    pub passes: bool,
}

pub fn validate_snode(t: &SNodeTriple, tol: &Tolerance) -> Result<SNodeReport> {
    t.check_shape()?;
    let sig = t.sig();
    let rhs = snode_rhs(&t.pi0, sig);
    let identity_residual = (&t.a * &t.s0 - &t.s0 * t.a.adjoint() - rhs).norm();
    let hermiticity_residual = hermiticity_residual(&t.s0);
    let n = t.n();
    let pole_clearance =
        t.poles.iter().map(|&ck| min_singular_value(&(&t.a - identity(n).scale(ck)))).fold(f64::INFINITY, f64::min);
    let scale = 1.0 + t.s0.norm();
    let passes = identity_residual <= tol.structural * scale
        && hermiticity_residual <= tol.structural * scale
        && pole_clearance > 0.0;
    Ok(SNodeReport { identity_residual, hermiticity_residual, pole_clearance, passes })
}

/// Solves `AC − CA* = RHS` through the `n² × n²` vectorized system
/// `(I ⊗ A − Ā ⊗ I) vec C = vec RHS`.
pub fn solve_sylvester(a: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    if a.ncols() != n || rhs.shape() != (n, n) {
        return Err(Error::dimension("solve_sylvester", "A and RHS must be square of equal order"));
    }
    let op = numkit::kron(&identity(n), a) - numkit::kron(&a.map(|z| z.conj()), &identity(n));
    // Column-major storage makes the column vector view exactly vec(·).
    let vec_rhs = ComplexMatrix::from_column_slice(n * n, 1, rhs.as_slice());
    let sol = numkit::solve_linear(&op, &vec_rhs).map_err(|e| match e {
        Error::Singular { .. } => Error::EigenvalueSymmetry,
        other => other,
    })?;
    Ok(ComplexMatrix::from_column_slice(n, n, sol.as_slice()))
}

/// `‖AS − SA* − iΠjΠ*‖ / (1 + ‖S‖)`.
pub fn s_identity_residual(a: &ComplexMatrix, s: &ComplexMatrix, pi: &ComplexMatrix, sig: Signature) -> f64 {
    let rhs = snode_rhs(pi, sig);
    (a * s - s * a.adjoint() - rhs).norm() / (1.0 + s.norm())
}

/// Recovers `S` from `AS − SA* = iΠjΠ*`, valid when `σ(A) ∩ σ(A*) = ∅`.
///
/// The solution is Hermitian in exact arithmetic; it is symmetrized when
/// the asymmetry is within `tol`, and rejected otherwise.
pub fn recover_s_from_identity(
    a: &ComplexMatrix,
    pi: &ComplexMatrix,
    sig: Signature,
    tol: f64,
) -> Result<ComplexMatrix> {
    if pi.nrows() != a.nrows() || pi.ncols() != sig.m() {
        return Err(Error::dimension("recover_s_from_identity", "Pi must be n x m"));
    }
    let rhs = snode_rhs(pi, sig);
    let s = solve_sylvester(a, &rhs)?;
    let residual = hermiticity_residual(&s);
    if residual > tol * (1.0 + s.norm()) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(hermitian_part(&s))
}

/// `iΠjΠ*`, the right-hand side of the symmetric S-node identity.
pub fn snode_rhs(pi: &ComplexMatrix, sig: Signature) -> ComplexMatrix {
    (sig.right(pi) * pi.adjoint()) * I
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, diag, from_rows, zeros};

    fn scalar_triple() -> SNodeTriple {
        SNodeTriple::new(
            from_rows(&[vec![c(0.0, 1.0)]]).unwrap(),
            from_rows(&[vec![cr(0.5)]]).unwrap(),
            from_rows(&[vec![cr(1.0), cr(0.0)]]).unwrap(),
            Signature::new(1, 1).unwrap(),
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn signature_matrix_is_involution() {
        let sig = Signature::new(2, 3).unwrap();
        let j = sig.matrix();
        assert_eq!(&j * &j, identity(5));
        assert_eq!(j.adjoint(), j);
        let m = ComplexMatrix::from_fn(5, 4, |r, c| cr((r * 4 + c) as f64));
        assert_eq!(sig.left(&m), &j * &m);
        let m = ComplexMatrix::from_fn(4, 5, |r, c| cr((r * 5 + c) as f64));
        assert_eq!(sig.right(&m), &m * &j);
        assert!(Signature::new(0, 0).is_err());
    }

    #[test]
    fn scalar_snode_validates() {
        let rep = validate_snode(&scalar_triple(), &Tolerance::default()).unwrap();
        assert!(rep.identity_residual < 1e-15);
        assert!(rep.passes);
        assert!((rep.pole_clearance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_snode_validates() {
        let t = SNodeTriple::new(zeros(2, 2), identity(2), zeros(2, 2), Signature::new(1, 1).unwrap(), vec![]).unwrap();
        let rep = validate_snode(&t, &Tolerance::default()).unwrap();
        assert_eq!(rep.identity_residual, 0.0);
        assert!(rep.pole_clearance.is_infinite());
    }

    #[test]
    fn skew_s0_has_hermiticity_residual_two() {
        let mut t = scalar_triple();
        t.s0 = from_rows(&[vec![c(0.0, 1.0)]]).unwrap();
        let rep = validate_snode(&t, &Tolerance::default()).unwrap();
        assert!((rep.hermiticity_residual - 2.0).abs() < 1e-15);
        assert!(!rep.passes);
    }

    #[test]
    fn sylvester_scalar() {
        let a = from_rows(&[vec![c(0.0, 1.0)]]).unwrap();
        let rhs = from_rows(&[vec![c(0.0, 2.0)]]).unwrap();
        let x = solve_sylvester(&a, &rhs).unwrap();
        assert!((x[(0, 0)] - cr(1.0)).norm() < 1e-15);
    }

    #[test]
    fn sylvester_diagonal_entrywise() {
        let lam = [c(0.0, 1.0), c(0.0, 2.0)];
        let a = diag(&lam);
        let rhs = ComplexMatrix::from_element(2, 2, cr(1.0));
        let x = solve_sylvester(&a, &rhs).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                let expected = cr(1.0) / (lam[r] - lam[col].conj());
                assert!((x[(r, col)] - expected).norm() < 1e-14);
            }
        }
        assert!((x[(0, 0)] - cr(1.0) / c(0.0, 2.0)).norm() < 1e-14);
        assert!((x[(0, 1)] - cr(1.0) / c(0.0, 3.0)).norm() < 1e-14);
        assert!((x[(1, 1)] - cr(1.0) / c(0.0, 4.0)).norm() < 1e-14);
    }

    #[test]
    fn sylvester_real_eigenvalue_is_rejected() {
        let a = from_rows(&[vec![cr(1.0)]]).unwrap();
        assert!(matches!(solve_sylvester(&a, &identity(1)), Err(Error::EigenvalueSymmetry)));
    }

    #[test]
    fn recover_scalar_and_zero() {
        let t = scalar_triple();
        let s = recover_s_from_identity(&t.a, &t.pi0, t.sig(), 1e-10).unwrap();
        assert!((s[(0, 0)] - cr(0.5)).norm() < 1e-15);
        let s = recover_s_from_identity(&t.a, &zeros(1, 2), t.sig(), 1e-10).unwrap();
        assert_eq!(s[(0, 0)], cr(0.0));
    }

    #[test]
    fn identity_residual_detects_perturbation() {
        let t = scalar_triple();
        assert!(s_identity_residual(&t.a, &t.s0, &t.pi0, t.sig()) < 1e-15);
        let s = &t.s0 + identity(1).scale(1e-3);
        assert!(s_identity_residual(&t.a, &s, &t.pi0, t.sig()) > 1e-5);
    }

    #[test]
    fn pole_in_spectrum_is_a_clash() {
        let a = diag(&[cr(1.0), cr(2.0)]);
        assert!(matches!(pole_resolvents(&a, &[2.0]), Err(Error::PoleClash { .. })));
    }

    #[test]
    fn repeated_poles_rejected() {
        let t = SNodeTriple::new(identity(1), identity(1), zeros(1, 1), Signature::new(1, 0).unwrap(), vec![1.0, 1.0]);
        assert!(t.is_err());
    }
}
