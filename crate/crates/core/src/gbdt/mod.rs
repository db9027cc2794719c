//! Generalised Bäcklund–Darboux transformation (GBDT).
//!
//! [`general`] handles systems `y' = G(x,z)y` with
//! `G = −(Σ z^k q_k + Σ_s Σ_k (z − c_s)^{−k} q_{sk})` and an arbitrary S-node
//! `{A₁, A₂, S, Π₁, Π₂}`. [`symmetric`] specialises to generalised
//! Hamiltonian systems `G = i Σ (z − c_k)^{−1} j H_k` with symmetric S-nodes,
//! and [`closed_form`] contains the explicit solution families for trivial
//! and constant-coefficient Hamiltonians.
//!
//! Trajectories of `Π` are integrated with fixed-step RK4. `S` is the
//! integral of a `Π`-dependent integrand and is accumulated with Simpson's
//! rule on the same grid, using cubic Hermite midpoints of `Π`; for a pure
//! quadrature this coincides with RK4 up to the midpoint interpolation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{hermite_midpoint, ComplexMatrix};

pub mod closed_form;
pub mod general;
pub mod symmetric;

pub use closed_form::{ConstantBetaClosedForm, TrivialClosedForm};
pub use general::{
    general_pi_odes, general_s_ode, transfer_function_general, transformed_coeffs, CoeffValues, GeneralFlow,
    GeneralGBDTData, GeneralState, GeneralTrajectory, PoleTerm, RationalSystemCoeffs,
};
pub use symmetric::{
    darboux_residual, fundamental_solution_initial, hamiltonian_system_matrix, j_unitarity_check, liouville_residual,
    similarity_residual, symmetric_pi_ode, symmetric_s_ode, transfer_function, transformed_fundamental_gap,
    transformed_hamiltonians, GbdtTrajectory, SymmetricHamiltonianSystem, TransformedHamiltonian,
};

/// Central finite-difference step used for `w_A'` in Darboux residuals.
pub const DARBOUX_FD_STEP: f64 = 1e-5;

/// `x ↦ M(x)`, a matrix-valued coefficient.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixFn {
    Constant {
        #[serde(with = "crate::serial::matrix")]
        value: ComplexMatrix,
    },
    /// `Σ_i x^i C_i`.
    Polynomial {
        #[serde(with = "crate::serial::matrices")]
        coeffs: Vec<ComplexMatrix>,
    },
    /// `values[i]` on `[knots[i], knots[i+1])`; the first value also covers
    /// `x < knots[0]` and the last extends to the right.
    Piecewise {
        knots: Vec<f64>,
        #[serde(with = "crate::serial::matrices")]
        values: Vec<ComplexMatrix>,
    },
    #[serde(skip)]
    Func { rows: usize, cols: usize, f: Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync> },
}

impl fmt::Debug for MatrixFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixFn::Constant { value } => write!(f, "Constant({}x{})", value.nrows(), value.ncols()),
            MatrixFn::Polynomial { coeffs } => write!(f, "Polynomial(degree {})", coeffs.len().saturating_sub(1)),
            MatrixFn::Piecewise { knots, .. } => write!(f, "Piecewise({} pieces)", knots.len()),
            MatrixFn::Func { rows, cols, .. } => write!(f, "Func({rows}x{cols})"),
        }
    }
}

impl MatrixFn {
    pub fn constant(value: ComplexMatrix) -> Self {
        MatrixFn::Constant { value }
    }

    pub fn func(rows: usize, cols: usize, f: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        MatrixFn::Func { rows, cols, f: Arc::new(f) }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixFn::Constant { value } => value.shape(),
            MatrixFn::Polynomial { coeffs } => coeffs.first().map_or((0, 0), |c| c.shape()),
            MatrixFn::Piecewise { values, .. } => values.first().map_or((0, 0), |c| c.shape()),
            MatrixFn::Func { rows, cols, .. } => (*rows, *cols),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            MatrixFn::Constant { .. } => true,
            MatrixFn::Polynomial { coeffs } => coeffs.iter().skip(1).all(|c| c.iter().all(|z| z.norm() == 0.0)),
            MatrixFn::Piecewise { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
            MatrixFn::Func { .. } => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MatrixFn::Polynomial { coeffs } if coeffs.is_empty() => {
                Err(Error::InvalidInput("polynomial coefficient list is empty".into()))
            }
            MatrixFn::Polynomial { coeffs } if coeffs.iter().any(|c| c.shape() != coeffs[0].shape()) => {
                Err(Error::dimension("MatrixFn", "polynomial coefficients differ in shape"))
            }
            MatrixFn::Piecewise { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return Err(Error::InvalidInput("piecewise table needs one value per knot".into()));
                }
                if knots.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidInput("piecewise knots must increase".into()));
                }
                if values.iter().any(|v| v.shape() != values[0].shape()) {
                    return Err(Error::dimension("MatrixFn", "piecewise values differ in shape"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> ComplexMatrix {
        match self {
            MatrixFn::Constant { value } => value.clone(),
            MatrixFn::Polynomial { coeffs } => {
                let mut acc = coeffs.last().expect("validated nonempty").clone();
                for c in coeffs.iter().rev().skip(1) {
                    acc = acc.scale(x) + c;
                }
                acc
            }
            MatrixFn::Piecewise { knots, values } => {
                let idx = knots.iter().rposition(|&k| k <= x).unwrap_or(0);
                values[idx].clone()
            }
            MatrixFn::Func { f, .. } => f(x),
        }
    }
}

/// Accumulates `S(x) = S(x₀) + ∫ F` over the grid with Simpson's rule.
///
/// `states[i]` and `derivs[i]` are the integrated path and its derivative at
/// `xs[i]`; midpoint states come from cubic Hermite interpolation, and
/// `integrand(x, state)` evaluates `F`.
pub(crate) fn simpson_hermite<F>(
    xs: &[f64],
    states: &[Vec<ComplexMatrix>],
    derivs: &[Vec<ComplexMatrix>],
    s0: ComplexMatrix,
    mut integrand: F,
) -> Vec<ComplexMatrix>
where
    F: FnMut(f64, &[ComplexMatrix]) -> ComplexMatrix,
{
    let mut out = Vec::with_capacity(xs.len());
    out.push(s0);
    if xs.len() < 2 {
        return out;
    }
    let mut f_left = integrand(xs[0], &states[0]);
    for i in 0..xs.len() - 1 {
        let h = xs[i + 1] - xs[i];
        let mid: Vec<ComplexMatrix> = (0..states[i].len())
            .map(|c| hermite_midpoint(&states[i][c], &states[i + 1][c], &derivs[i][c], &derivs[i + 1][c], h))
            .collect();
        let f_mid = integrand(xs[i] + 0.5 * h, &mid);
        let f_right = integrand(xs[i + 1], &states[i + 1]);
        let next = &out[i] + (&f_left + f_mid.scale(4.0) + &f_right).scale(h / 6.0);
        out.push(next);
        f_left = f_right;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{cr, from_real_rows, identity};

    #[test]
    fn matrix_fn_evaluation() {
        let c0 = identity(2);
        let c1 = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let p = MatrixFn::Polynomial { coeffs: vec![c0.clone(), c1.clone()] };
        assert_eq!(p.eval(2.0), &c0 + c1.scale(2.0));
        assert!(!p.is_constant());

        let pw = MatrixFn::Piecewise { knots: vec![0.0, 0.5], values: vec![c0.clone(), c1.clone()] };
        pw.validate().unwrap();
        assert_eq!(pw.eval(-1.0), c0);
        assert_eq!(pw.eval(0.25), c0);
        assert_eq!(pw.eval(0.5), c1);
        assert_eq!(pw.eval(9.0), c1);

        let bad = MatrixFn::Piecewise { knots: vec![0.5, 0.0], values: vec![c0.clone(), c1] };
        assert!(bad.validate().is_err());

        let f = MatrixFn::func(2, 2, |x| identity(2) * cr(x));
        assert_eq!(f.shape(), (2, 2));
        assert_eq!(f.eval(3.0)[(1, 1)], cr(3.0));
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        // y(x) = x², F(x, y) = 3·y → ∫ 3x² = x³
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let states: Vec<Vec<ComplexMatrix>> = xs.iter().map(|&x| vec![identity(1) * cr(x * x)]).collect();
        let derivs: Vec<Vec<ComplexMatrix>> = xs.iter().map(|&x| vec![identity(1) * cr(2.0 * x)]).collect();
        let s = simpson_hermite(&xs, &states, &derivs, identity(1) * cr(0.0), |_, y| y[0].scale(3.0));
        assert!((s[10][(0, 0)].re - 1.0).abs() < 1e-14);
    }
}
