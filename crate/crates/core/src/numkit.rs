//! Dense complex linear algebra and integration kernels.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; this module adds the pieces
//! the rest of the crate needs on top of that storage: a scaling-and-squaring
//! exponential, conditioned linear solves, Hermitian spectral calculus and a
//! fixed-step classical Runge-Kutta integrator over matrix-valued states.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix, the value type for every matrix symbol in the crate.
pub type ComplexMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<C64>;

/// Condition number above which a matrix that must be inverted along a
/// trajectory (typically `S(x)`) is treated as singular.
pub const SINGULAR_COND: f64 = 1e12;

/// Condition number above which `solve_linear` refuses to solve.
pub const SOLVE_COND_LIMIT: f64 = 1e14;

/// Scaled norm bound before the Taylor series is summed in `mat_exp`.
const EXP_SCALE_BOUND: f64 = 0.5;
/// Taylor terms with norm below this are dropped.
const EXP_TERM_CUTOFF: f64 = 1e-18;

/// Pair of tolerances used by verification checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerance {
    /// Bound for algebraic identities on exact input data.
    pub structural: f64,
    /// Bound for identities evaluated along numerically integrated paths.
    pub ode: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { structural: 1e-10, ode: 1e-6 }
    }
}

impl Tolerance {
    pub fn new(structural: f64, ode: f64) -> Result<Self> {
        if !(structural > 0.0 && structural.is_finite() && ode > 0.0 && ode.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive and finite, got structural={structural}, ode={ode}"
            )));
        }
        Ok(Tolerance { structural, ode })
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Diagonal matrix with the given entries.
pub fn diag(entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(entries))
}

/// Real diagonal matrix.
pub fn diag_real(entries: &[f64]) -> ComplexMatrix {
    let v: Vec<C64> = entries.iter().map(|&x| cr(x)).collect();
    diag(&v)
}

/// Builds a matrix from row-major entries, enforcing a nonempty shape and
/// finite entries.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::dimension("from_row_major", "matrix must be at least 1x1"));
    }
    if entries.len() != rows * cols {
        return Err(Error::dimension(
            "from_row_major",
            format!("expected {} entries, got {}", rows * cols, entries.len()),
        ));
    }
    if entries.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("from_row_major"));
    }
    Ok(ComplexMatrix::from_row_slice(rows, cols, entries))
}

/// Builds a matrix from nested rows.
pub fn from_rows(rows: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::dimension("from_rows", "ragged rows"));
    }
    let flat: Vec<C64> = rows.iter().flatten().copied().collect();
    from_row_major(nrows, ncols, &flat)
}

/// Real-valued convenience constructor.
pub fn from_real_rows(rows: &[&[f64]]) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| cr(x)).collect()).collect();
    from_rows(&rows)
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.is_finite())
}

fn require_square(op: &'static str, m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::dimension(
            op,
            format!("expected a nonempty square matrix, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(m.nrows())
}

/// Maximum absolute column sum.
pub fn norm1(m: &ComplexMatrix) -> f64 {
    m.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Smallest singular value.
pub fn min_singular_value(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `‖M − M*‖` in the Frobenius norm.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// `(M + M*)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Matrix exponential by scaling and squaring a truncated Taylor series.
///
/// The input is scaled by `2^-s` until its 1-norm is at most 0.5, the series
/// is summed until a term drops below 1e-18 in norm, and the result is
/// squared `s` times.
pub fn mat_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square("mat_exp", m)?;
    if !all_finite(m) {
        return Err(Error::NonFinite("mat_exp"));
    }
    let norm = norm1(m);
    let mut squarings = 0u32;
    if norm > EXP_SCALE_BOUND {
        squarings = (norm / EXP_SCALE_BOUND).log2().ceil() as u32;
    }
    let scaled = m.scale(0.5f64.powi(squarings as i32));

    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..200u32 {
        term = (&term * &scaled).unscale(k as f64);
        sum += &term;
        if term.norm() < EXP_TERM_CUTOFF {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// 1-norm condition number `‖M‖₁‖M⁻¹‖₁`, or `+∞` when `M` is singular to
/// working precision.
pub fn cond_estimate(m: &ComplexMatrix) -> Result<f64> {
    require_square("cond_estimate", m)?;
    Ok(cond_and_inverse(m).0)
}

fn cond_and_inverse(m: &ComplexMatrix) -> (f64, Option<ComplexMatrix>) {
    if !all_finite(m) {
        return (f64::INFINITY, None);
    }
    match m.clone().lu().try_inverse() {
        Some(inv) if all_finite(&inv) => {
            let cond = norm1(m) * norm1(&inv);
            if cond.is_finite() && cond < 1.0 / f64::EPSILON {
                (cond, Some(inv))
            } else {
                (f64::INFINITY, Some(inv))
            }
        }
        _ => (f64::INFINITY, None),
    }
}

/// Solves `AX = B` by partial-pivoted LU.
///
/// Fails with [`Error::Singular`] when the 1-norm condition number of `A`
/// exceeds [`SOLVE_COND_LIMIT`].
pub fn solve_linear(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square("solve_linear", a)?;
    if b.nrows() != n {
        return Err(Error::dimension("solve_linear", format!("A is {n}x{n} but B has {} rows", b.nrows())));
    }
    let lu = a.clone().lu();
    let cond = match lu.try_inverse() {
        Some(inv) if all_finite(&inv) => norm1(a) * norm1(&inv),
        _ => f64::INFINITY,
    };
    if !(cond <= SOLVE_COND_LIMIT) {
        return Err(Error::Singular { cond });
    }
    lu.solve(b).ok_or(Error::Singular { cond })
}

/// `A⁻¹` via [`solve_linear`].
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_linear(a, &identity(a.nrows()))
}

/// Inverse of a matrix that must stay invertible along a trajectory; fails
/// with [`Error::SingularAt`] naming `x` when its condition number exceeds
/// [`SINGULAR_COND`].
pub fn inverse_at(m: &ComplexMatrix, x: f64) -> Result<ComplexMatrix> {
    require_square("inverse_at", m)?;
    let (cond, inv) = cond_and_inverse(m);
    match inv {
        Some(inv) if cond <= SINGULAR_COND => Ok(inv),
        _ => Err(Error::SingularAt { x, cond }),
    }
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues in ascending order
/// and the matching unitary eigenvector matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = require_square("hermitian_eigen", m)?;
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|(v, _)| v)
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let fd: Vec<f64> = values.into_iter().map(f).collect();
    Ok(&vectors * diag_real(&fd) * vectors.adjoint())
}

/// State that the Runge-Kutta integrator can advance.
pub trait OdeState: Clone {
    /// `self + scale * other`.
    fn add_scaled(&self, scale: f64, other: &Self) -> Self;
    fn all_finite(&self) -> bool;
}

impl OdeState for ComplexMatrix {
    fn add_scaled(&self, scale: f64, other: &Self) -> Self {
        self + other.scale(scale)
    }

    fn all_finite(&self) -> bool {
        all_finite(self)
    }
}

impl OdeState for Vec<ComplexMatrix> {
    fn add_scaled(&self, scale: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b.scale(scale)).collect()
    }

    fn all_finite(&self) -> bool {
        self.iter().all(all_finite)
    }
}

/// Samples of a path `x ↦ Y(x)` on an increasing (or decreasing) grid.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub xs: Vec<f64>,
    pub values: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Uniform grid spacing (signed).
    pub fn step(&self) -> f64 {
        if self.xs.len() < 2 {
            0.0
        } else {
            self.xs[1] - self.xs[0]
        }
    }

    pub fn last(&self) -> Option<&S> {
        self.values.last()
    }

    /// Index of the sample nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &xi) in self.xs.iter().enumerate() {
            let d = (xi - x).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Uniform grid for `span` whose spacing is the largest value not exceeding
/// `step` that divides the span evenly. Returns the number of intervals and
/// the signed spacing.
pub fn uniform_grid(span: (f64, f64), step: f64) -> Result<(usize, f64)> {
    let (x0, x1) = span;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    if !(x0.is_finite() && x1.is_finite()) {
        return Err(Error::InvalidInput("span endpoints must be finite".into()));
    }
    let len = x1 - x0;
    if len == 0.0 {
        return Ok((0, 0.0));
    }
    let intervals = ((len.abs() / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((intervals, len / intervals as f64))
}

/// One classical RK4 step.
pub fn rk4_step<S, F>(field: &mut F, x: f64, y: &S, h: f64) -> S
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let k1 = field(x, y);
    let k2 = field(x + 0.5 * h, &y.add_scaled(0.5 * h, &k1));
    let k3 = field(x + 0.5 * h, &y.add_scaled(0.5 * h, &k2));
    let k4 = field(x + h, &y.add_scaled(h, &k3));
    y.add_scaled(h / 6.0, &k1).add_scaled(h / 3.0, &k2).add_scaled(h / 3.0, &k3).add_scaled(h / 6.0, &k4)
}

/// Fixed-step classical fourth-order Runge-Kutta.
///
/// The grid is uniform with spacing at most `step`; every grid point,
/// including both endpoints, is sampled. `x1 < x0` integrates backwards.
pub fn rk4_integrate<S, F>(mut field: F, y0: S, span: (f64, f64), step: f64) -> Result<Trajectory<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let (intervals, h) = uniform_grid(span, step)?;
    if !y0.all_finite() {
        return Err(Error::Integration { x: span.0 });
    }
    let mut xs = Vec::with_capacity(intervals + 1);
    let mut values = Vec::with_capacity(intervals + 1);
    xs.push(span.0);
    values.push(y0);
    for i in 0..intervals {
        let x = span.0 + i as f64 * h;
        let next = rk4_step(&mut field, x, &values[i], h);
        if !next.all_finite() {
            return Err(Error::Integration { x });
        }
        xs.push(if i + 1 == intervals { span.1 } else { span.0 + (i + 1) as f64 * h });
        values.push(next);
    }
    Ok(Trajectory { xs, values })
}

/// Cubic Hermite estimate of `Y(x + h/2)` from values and derivatives at the
/// ends of a step of length `h`.
pub fn hermite_midpoint(
    y0: &ComplexMatrix,
    y1: &ComplexMatrix,
    d0: &ComplexMatrix,
    d1: &ComplexMatrix,
    h: f64,
) -> ComplexMatrix {
    (y0 + y1).scale(0.5) + (d0 - d1).scale(h / 8.0)
}
