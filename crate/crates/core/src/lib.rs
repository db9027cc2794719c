//! Darboux matrices, transformed Hamiltonians and explicit solutions for
//! generalised Hamiltonian systems depending rationally on the spectral
//! parameter.
//!
//! The crate is organised bottom-up:
//!
//! * [`numkit`]: dense complex kernels (exponential, solves, RK4).
//! * [`matroot`]: commuting matrix roots on Jordan forms, positive
//!   `j`-structured roots and the discrete Dirac recursion.
//! * [`snode`]: signature matrices, S-node triples and Sylvester solves.
//! * [`gbdt`]: the generalised Bäcklund–Darboux transformation, general and
//!   symmetric, with closed-form solution families.
//! * [`dynamics`]: explicit solutions of the several-variable system and the
//!   conservation law.
//! * [`cli`]: scenario files, verification reports and data export.

// NaN must fail the guards, hence `!(a < b)` rather than `a >= b`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gbdt;
pub mod matroot;
pub mod numkit;
pub mod serial;
pub mod snode;

pub use error::{Error, Result};
pub use numkit::{ComplexMatrix, ComplexVector, Tolerance, C64};
