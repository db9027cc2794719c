use thiserror::Error;

use crate::numkit::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("{0}: non-finite entries")]
    NonFinite(&'static str),

    #[error("matrix is singular to working precision (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("matrix required to be invertible is singular at x = {x} (condition estimate {cond:e})")]
    SingularAt { x: f64, cond: f64 },

    #[error("non-finite field value during integration at x = {x}")]
    Integration { x: f64 },

    #[error("zero eigenvalue: roots require a nonsingular centre")]
    SingularEigenvalue,

    #[error("function is not defined at eigenvalue {eigenvalue}")]
    SpectrumClash { eigenvalue: C64 },

    #[error("pole {pole} lies in the spectrum (or too close to it)")]
    PoleClash { pole: C64 },

    #[error("root centre f(mu) vanishes at eigenvalue {eigenvalue}")]
    BranchPoint { eigenvalue: C64 },

    #[error("contraction required: spectral norm {norm} >= 1")]
    ContractionViolation { norm: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    Definiteness { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("structure violated: {what} (residual {residual:e})")]
    Structure { what: &'static str, residual: f64 },

    #[error("Sylvester operator is singular: some eigenvalue of A has its conjugate in the spectrum")]
    EigenvalueSymmetry,

    #[error("spectral parameter {z} is a pole")]
    Pole { z: C64 },

    #[error("trajectories are not sampled on a common grid")]
    GridMismatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn dimension(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension { op, detail: detail.into() }
    }
}
