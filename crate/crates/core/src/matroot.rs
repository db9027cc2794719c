//! Structured matrix roots built cell by cell on a given Jordan form.
//!
//! For `A = u·diag(μ_i I + S₁)·u⁻¹` and a function `f` defined on the
//! spectrum, every block `f(𝒜_i)` is `f(μ_i)I` plus a nilpotent upper
//! triangular Toeplitz matrix. An `ℓ`-th root of each block is obtained by
//! evaluating the truncated binomial series of `(f(μ_i) + λ)^{1/ℓ}` on that
//! nilpotent part, so the resulting `Q` satisfies `Q^ℓ = f(A)` and commutes
//! with `A`. Upper triangular Toeplitz blocks are carried as their first row;
//! products are truncated convolutions.
//!
//! Also here: positive `j`-structured roots, Halmos extensions and the
//! discrete Dirac recursion built from them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numkit::{self, c, cr, hermitian_eigen, identity, spectral_norm, zeros, ComplexMatrix, ComplexVector, C64};
use crate::snode::Signature;

/// Minimum separation of eigenvalues accepted by
/// [`JordanForm::from_diagonalizable`].
pub const MIN_EIGENVALUE_SEPARATION: f64 = 1e-6;

/// Relative tolerance on `CjC = j` for structured positive matrices.
pub const J_STRUCTURE_TOL: f64 = 1e-8;

/// One Jordan cell `μI_p + S₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanCell {
    pub eigenvalue: C64,
    pub size: usize,
}

/// `A = u·diag(𝒜_1, …, 𝒜_s)·u⁻¹` with `𝒜_i = μ_i I + S₁`.
#[derive(Debug, Clone)]
pub struct JordanForm {
    u: ComplexMatrix,
    u_inv: ComplexMatrix,
    cells: Vec<JordanCell>,
}

impl JordanForm {
    pub fn new(u: ComplexMatrix, cells: Vec<JordanCell>) -> Result<Self> {
        let n = u.nrows();
        if n == 0 || u.ncols() != n {
            return Err(Error::dimension("JordanForm", "u must be a nonempty square matrix"));
        }
        if cells.iter().any(|c| c.size == 0) {
            return Err(Error::InvalidInput("Jordan cells must have size >= 1".into()));
        }
        let total: usize = cells.iter().map(|c| c.size).sum();
        if total != n {
            return Err(Error::dimension("JordanForm", format!("cell sizes sum to {total}, u is {n}x{n}")));
        }
        if cells.iter().any(|c| !c.eigenvalue.is_finite()) {
            return Err(Error::NonFinite("JordanForm"));
        }
        let u_inv = numkit::inverse(&u)?;
        Ok(JordanForm { u, u_inv, cells })
    }

    /// Jordan form with `u = I`.
    pub fn from_cells(cells: Vec<JordanCell>) -> Result<Self> {
        let n: usize = cells.iter().map(|c| c.size).sum();
        Self::new(identity(n.max(1)), cells)
    }

    /// Diagonal Jordan form of a diagonalizable matrix whose eigenvalues are
    /// supplied exactly. Each eigenvector is the right singular vector of
    /// `M − λI` for its smallest singular value.
    pub fn from_diagonalizable(m: &ComplexMatrix, eigenvalues: &[C64]) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || eigenvalues.len() != n {
            return Err(Error::dimension("from_diagonalizable", "need a square matrix and one eigenvalue per row"));
        }
        for (i, a) in eigenvalues.iter().enumerate() {
            for b in &eigenvalues[..i] {
                if (a - b).norm() < MIN_EIGENVALUE_SEPARATION {
                    return Err(Error::InvalidInput(format!(
                        "eigenvalues {a} and {b} are closer than {MIN_EIGENVALUE_SEPARATION}"
                    )));
                }
            }
        }
        let mut u = zeros(n, n);
        for (k, &lam) in eigenvalues.iter().enumerate() {
            let svd = (m - identity(n) * lam).svd(false, true);
            let v_t = svd.v_t.expect("requested right singular vectors");
            let (idx, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
            let v = v_t.row(idx).adjoint();
            u.set_column(k, &v);
        }
        let cells = eigenvalues.iter().map(|&eigenvalue| JordanCell { eigenvalue, size: 1 }).collect();
        let jf = Self::new(u, cells)?;
        let residual = (jf.assemble() - m).norm();
        if residual > 1e-8 * (1.0 + m.norm()) {
            return Err(Error::Structure { what: "supplied eigenvalues do not diagonalize the matrix", residual });
        }
        Ok(jf)
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn u_inv(&self) -> &ComplexMatrix {
        &self.u_inv
    }

    pub fn cells(&self) -> &[JordanCell] {
        &self.cells
    }

    /// `A_J`.
    pub fn jordan_matrix(&self) -> ComplexMatrix {
        let blocks: Vec<Vec<C64>> = self
            .cells
            .iter()
            .map(|cell| {
                let mut row = vec![cr(0.0); cell.size];
                row[0] = cell.eigenvalue;
                if cell.size > 1 {
                    row[1] = cr(1.0);
                }
                row
            })
            .collect();
        block_diag_toeplitz(&blocks)
    }

    /// `u·A_J·u⁻¹`.
    pub fn assemble(&self) -> ComplexMatrix {
        self.conjugate(&self.jordan_matrix())
    }

    /// `u·B·u⁻¹`.
    pub fn conjugate(&self, block_diag: &ComplexMatrix) -> ComplexMatrix {
        &self.u * block_diag * &self.u_inv
    }
}

#[derive(Serialize, Deserialize)]
struct JordanFormJson {
    u: crate::serial::MatrixJson,
    cells: Vec<(f64, f64, usize)>,
}

impl Serialize for JordanForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JordanFormJson {
            u: crate::serial::matrix_to_json(&self.u),
            cells: self.cells.iter().map(|c| (c.eigenvalue.re, c.eigenvalue.im, c.size)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JordanForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = JordanFormJson::deserialize(d)?;
        let u = crate::serial::matrix_from_json(&raw.u).map_err(D::Error::custom)?;
        let cells = raw.cells.into_iter().map(|(re, im, size)| JordanCell { eigenvalue: c(re, im), size }).collect();
        JordanForm::new(u, cells).map_err(D::Error::custom)
    }
}

/// Root degree and per-cell branch choice `k_i ∈ [0, ℓ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub ell: u32,
    pub k_per_cell: Vec<u32>,
}

impl BranchSpec {
    pub fn new(ell: u32, k_per_cell: Vec<u32>) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidInput(format!("root degree must be >= 2, got {ell}")));
        }
        if let Some(k) = k_per_cell.iter().find(|&&k| k >= ell) {
            return Err(Error::InvalidInput(format!("branch index {k} out of range for degree {ell}")));
        }
        Ok(BranchSpec { ell, k_per_cell })
    }

    /// All cells on the principal branch.
    pub fn principal(ell: u32, cells: usize) -> Result<Self> {
        Self::new(ell, vec![0; cells])
    }
}

/// Sign in `(λ − c)² ± |a|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadraticSign {
    Plus,
    Minus,
}

/// Derivative oracle: given `μ` and a count, returns `f(μ), f'(μ), …` or
/// `None` when `f` is undefined at `μ`.
pub type DerivativeOracle = Arc<dyn Fn(C64, usize) -> Option<Vec<C64>> + Send + Sync>;

/// Scalar function applied to a matrix through its Jordan data.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralFunction {
    /// `λ − z`.
    Shift { z: C64 },
    /// `(λ − c)² ± |a|²`.
    Quadratic { c: C64, a: f64, sign: QuadraticSign },
    /// `(λ − c₁)⁻¹(λ − c₂)⁻¹`.
    ResolventProduct { c1: C64, c2: C64 },
    #[serde(skip)]
    Custom(DerivativeOracle),
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralFunction::Shift { z } => write!(f, "Shift({z})"),
            SpectralFunction::Quadratic { c, a, sign } => write!(f, "Quadratic({c}, {a}, {sign:?})"),
            SpectralFunction::ResolventProduct { c1, c2 } => write!(f, "ResolventProduct({c1}, {c2})"),
            SpectralFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn near(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-13 * (1.0 + a.norm().max(b.norm()))
}

impl SpectralFunction {
    /// Taylor coefficients `f^{(j)}(μ)/j!` for `j < count`.
    pub fn taylor(&self, mu: C64, count: usize) -> Result<Vec<C64>> {
        let mut t = vec![cr(0.0); count];
        match self {
            SpectralFunction::Shift { z } => {
                t[0] = mu - z;
                if count > 1 {
                    t[1] = cr(1.0);
                }
            }
            SpectralFunction::Quadratic { c, a, sign } => {
                let d = mu - c;
                let shift = match sign {
                    QuadraticSign::Plus => a * a,
                    QuadraticSign::Minus => -a * a,
                };
                t[0] = d * d + shift;
                if count > 1 {
                    t[1] = d * 2.0;
                }
                if count > 2 {
                    t[2] = cr(1.0);
                }
            }
            SpectralFunction::ResolventProduct { c1, c2 } => {
                for &cj in [c1, c2].iter() {
                    if near(mu, *cj) {
                        return Err(Error::SpectrumClash { eigenvalue: mu });
                    }
                }
                // (λ − c)⁻¹ = Σ (−1)^j (μ − c)^{−j−1} (λ − μ)^j
                let series = |cj: C64| -> Vec<C64> {
                    let inv = cr(1.0) / (mu - cj);
                    let mut out = Vec::with_capacity(count);
                    let mut term = inv;
                    for _ in 0..count {
                        out.push(term);
                        term *= -inv;
                    }
                    out
                };
                t = truncated_product(&series(*c1), &series(*c2));
            }
            SpectralFunction::Custom(oracle) => {
                let derivs = oracle(mu, count).ok_or(Error::SpectrumClash { eigenvalue: mu })?;
                if derivs.len() < count {
                    return Err(Error::InvalidInput(format!(
                        "derivative oracle returned {} values, {count} needed",
                        derivs.len()
                    )));
                }
                let mut fact = 1.0;
                for (j, d) in derivs.into_iter().take(count).enumerate() {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    t[j] = d / fact;
                }
            }
        }
        if t.iter().any(|z| !z.is_finite()) {
            return Err(Error::SpectrumClash { eigenvalue: mu });
        }
        Ok(t)
    }
}

/// Product of two upper triangular Toeplitz matrices given by first rows.
fn truncated_product(a: &[C64], b: &[C64]) -> Vec<C64> {
    let p = a.len();
    (0..p).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

/// Upper triangular Toeplitz matrix from its first row.
fn toeplitz_matrix(row: &[C64]) -> ComplexMatrix {
    let p = row.len();
    ComplexMatrix::from_fn(p, p, |r, c| if c >= r { row[c - r] } else { cr(0.0) })
}

fn block_diag_toeplitz(rows: &[Vec<C64>]) -> ComplexMatrix {
    let n: usize = rows.iter().map(Vec::len).sum();
    let mut out = zeros(n, n);
    let mut offset = 0;
    for row in rows {
        let p = row.len();
        out.view_mut((offset, offset), (p, p)).copy_from(&toeplitz_matrix(row));
        offset += p;
    }
    out
}

/// `Σ coeffs_i T^i` for `T` given by its first row (with `T₀ = 0`).
fn toeplitz_poly(coeffs: &[C64], t_row: &[C64]) -> Vec<C64> {
    let p = t_row.len();
    let mut acc = vec![cr(0.0); p];
    // Horner; powers beyond p − 1 vanish through truncation.
    for &ck in coeffs.iter().rev() {
        acc = truncated_product(&acc, t_row);
        acc[0] += ck;
    }
    acc
}

/// Strictly upper triangular Toeplitz `T = Σ t_i S_i` of order `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentToeplitz {
    size: usize,
    row: Vec<C64>,
}

impl NilpotentToeplitz {
    /// `t` holds `t₁ … t_{p−1}`.
    pub fn new(size: usize, t: &[C64]) -> Result<Self> {
        if size == 0 || t.len() + 1 != size {
            return Err(Error::dimension(
                "NilpotentToeplitz",
                format!("order {size} needs {} superdiagonal values, got {}", size.saturating_sub(1), t.len()),
            ));
        }
        let mut row = vec![cr(0.0)];
        row.extend_from_slice(t);
        Ok(NilpotentToeplitz { size, row })
    }

    /// The shift `S_k` of order `p`.
    pub fn shift(size: usize, k: usize) -> Result<Self> {
        let mut t = vec![cr(0.0); size.saturating_sub(1)];
        if k >= 1 && k < size {
            t[k - 1] = cr(1.0);
        }
        Self::new(size, &t)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        toeplitz_matrix(&self.row)
    }
}

/// `g₀ … g_{p−1}` of the truncated binomial series of `(μ + λ)^{1/ℓ}` on
/// branch `k`: `g_j = binom(1/ℓ, j)·μ^{1/ℓ}·μ^{−j}`, with
/// `μ^{1/ℓ} = e^{2πik/ℓ}·|μ|^{1/ℓ}·e^{i·arg(μ)/ℓ}` and `arg μ ∈ (−π, π]`.
pub fn truncated_root_series(mu: C64, ell: u32, k: u32, p: usize) -> Result<Vec<C64>> {
    if mu.norm() == 0.0 {
        return Err(Error::SingularEigenvalue);
    }
    if ell < 2 || k >= ell {
        return Err(Error::InvalidInput(format!("need ell >= 2 and 0 <= k < ell, got ell={ell}, k={k}")));
    }
    if p == 0 {
        return Err(Error::InvalidInput("series length must be >= 1".into()));
    }
    let inv_ell = 1.0 / ell as f64;
    let principal = C64::from_polar(mu.norm().powf(inv_ell), mu.arg() * inv_ell);
    let root = principal * C64::from_polar(1.0, 2.0 * PI * k as f64 * inv_ell);
    let inv_mu = cr(1.0) / mu;
    let mut out = Vec::with_capacity(p);
    let mut binom = 1.0;
    let mut mu_pow = cr(1.0);
    for j in 0..p {
        if j > 0 {
            binom *= (inv_ell - (j as f64 - 1.0)) / j as f64;
            mu_pow *= inv_mu;
        }
        out.push(root * mu_pow * binom);
    }
    Ok(out)
}

/// `Σ coeffs_i T^i`.
pub fn evaluate_poly_on_nt(coeffs: &[C64], t: &NilpotentToeplitz) -> Result<ComplexMatrix> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("need at least one coefficient".into()));
    }
    Ok(toeplitz_matrix(&toeplitz_poly(coeffs, &t.row)))
}

/// `f(A) = u·diag(f(𝒜_i))·u⁻¹` with each block the Taylor polynomial of `f`
/// at `μ_i` evaluated on `S₁`.
pub fn f_of_jordan(jf: &JordanForm, f: &SpectralFunction) -> Result<ComplexMatrix> {
    let rows = jf.cells.iter().map(|cell| f.taylor(cell.eigenvalue, cell.size)).collect::<Result<Vec<_>>>()?;
    Ok(jf.conjugate(&block_diag_toeplitz(&rows)))
}

/// First rows of the root blocks `ℬ_i = g(f(𝒜_i) − f(μ_i)I, f(μ_i), k_i)`.
fn root_blocks(jf: &JordanForm, f: &SpectralFunction, spec: &BranchSpec) -> Result<Vec<Vec<C64>>> {
    if spec.k_per_cell.len() != jf.cells.len() {
        return Err(Error::dimension(
            "matrix_root",
            format!("{} branch indices for {} cells", spec.k_per_cell.len(), jf.cells.len()),
        ));
    }
    jf.cells
        .iter()
        .zip(&spec.k_per_cell)
        .map(|(cell, &k)| {
            let mut t = f.taylor(cell.eigenvalue, cell.size)?;
            let centre = t[0];
            if centre.norm() <= 1e-300 {
                return Err(Error::BranchPoint { eigenvalue: cell.eigenvalue });
            }
            t[0] = cr(0.0);
            let g = truncated_root_series(centre, spec.ell, k, cell.size)?;
            Ok(toeplitz_poly(&g, &t))
        })
        .collect()
}

/// `Q = u·diag(ℬ_i)·u⁻¹` with `Q^ℓ = f(A)` and `AQ = QA`.
pub fn matrix_root(jf: &JordanForm, f: &SpectralFunction, spec: &BranchSpec) -> Result<ComplexMatrix> {
    let rows = root_blocks(jf, f, spec)?;
    Ok(jf.conjugate(&block_diag_toeplitz(&rows)))
}

/// Residuals of `Q^ℓ = f(A)` and `AQ = QA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootReport {
    pub root_residual: f64,
    pub commutation_residual: f64,
}

pub fn verify_root(a: &ComplexMatrix, q: &ComplexMatrix, fa: &ComplexMatrix, ell: u32) -> Result<RootReport> {
    let n = a.nrows();
    for (name, m) in [("A", a), ("Q", q), ("f(A)", fa)] {
        if m.shape() != (n, n) {
            return Err(Error::dimension("verify_root", format!("{name} must be {n}x{n}")));
        }
    }
    let mut power = q.clone();
    for _ in 1..ell {
        power = &power * q;
    }
    Ok(RootReport { root_residual: (power - fa).norm(), commutation_residual: (a * q - q * a).norm() })
}

/// Root `Q(z)` of `A − zI` on the principal branch, built in the fixed basis
/// `u` so that roots for different `z` commute.
pub fn commuting_root_family(jf: &JordanForm, z: f64, ell: u32) -> Result<ComplexMatrix> {
    let f = SpectralFunction::Shift { z: cr(z) };
    let spec = BranchSpec::principal(ell, jf.cells.len())?;
    matrix_root(jf, &f, &spec).map_err(|e| match e {
        Error::BranchPoint { eigenvalue } => Error::SpectrumClash { eigenvalue },
        other => other,
    })
}

/// Halmos extension of a strict contraction `ρ` (`m₁ × m₂`):
/// `diag((I − ρρ*)^{−1/2}, (I − ρ*ρ)^{−1/2})·[[I, ρ], [ρ*, I]]`.
pub fn halmos_extension(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (m1, m2) = rho.shape();
    if m1 == 0 || m2 == 0 {
        return Err(Error::dimension("halmos_extension", "rho must be nonempty"));
    }
    let norm = spectral_norm(rho);
    if norm >= 1.0 {
        return Err(Error::ContractionViolation { norm });
    }
    let inv_sqrt = |g: ComplexMatrix| numkit::hermitian_function(&g, |x| 1.0 / x.sqrt());
    let left = inv_sqrt(identity(m1) - rho * rho.adjoint())?;
    let right = inv_sqrt(identity(m2) - rho.adjoint() * rho)?;
    let m = m1 + m2;
    let mut out = zeros(m, m);
    out.view_mut((0, 0), (m1, m1)).copy_from(&left);
    out.view_mut((0, m1), (m1, m2)).copy_from(&(&left * rho));
    out.view_mut((m1, 0), (m2, m1)).copy_from(&(&right * rho.adjoint()));
    out.view_mut((m1, m1), (m2, m2)).copy_from(&right);
    Ok(out)
}

/// Checks `C = C* > 0` and `CjC = j` (relative tolerance
/// [`J_STRUCTURE_TOL`]); returns the eigen-decomposition of `C`.
pub fn check_j_structured(c_mat: &ComplexMatrix, sig: Signature) -> Result<(Vec<f64>, ComplexMatrix)> {
    let m = sig.m();
    if c_mat.shape() != (m, m) {
        return Err(Error::dimension("check_j_structured", format!("C must be {m}x{m}")));
    }
    let scale = c_mat.norm().max(1.0);
    let herm = numkit::hermiticity_residual(c_mat);
    if herm > J_STRUCTURE_TOL * scale {
        return Err(Error::NotHermitian { residual: herm });
    }
    let (values, vectors) = hermitian_eigen(c_mat)?;
    let min = values[0];
    if !(min > 0.0) {
        return Err(Error::Definiteness { min_eigenvalue: min });
    }
    let j = sig.matrix();
    let residual = (c_mat * &j * c_mat - &j).norm();
    if residual > J_STRUCTURE_TOL * scale * scale {
        return Err(Error::Structure { what: "CjC = j", residual });
    }
    Ok((values, vectors))
}

/// The unique positive `ℓ`-th root of a positive `j`-structured `C`; it is
/// again `j`-structured.
pub fn positive_root_j(c_mat: &ComplexMatrix, sig: Signature, ell: u32) -> Result<ComplexMatrix> {
    if ell == 0 {
        return Err(Error::InvalidInput("root degree must be >= 1".into()));
    }
    let (values, vectors) = check_j_structured(c_mat, sig)?;
    let roots: Vec<f64> = values.iter().map(|v| v.powf(1.0 / ell as f64)).collect();
    Ok(&vectors * numkit::diag_real(&roots) * vectors.adjoint())
}

/// `y_{k+1} = (I − (i/z) j C_k) y_k`, applied in list order.
pub fn discrete_dirac_evolve(
    cs: &[ComplexMatrix],
    sig: Signature,
    z: C64,
    y0: &ComplexVector,
) -> Result<ComplexVector> {
    if z.norm() == 0.0 {
        return Err(Error::Pole { z });
    }
    let m = sig.m();
    if y0.len() != m {
        return Err(Error::dimension("discrete_dirac_evolve", format!("y0 must have length {m}")));
    }
    let factor = c(0.0, 1.0) / z;
    let mut y = y0.clone();
    for ck in cs {
        check_j_structured(ck, sig)?;
        let jc = sig.left(ck);
        y = &y - (jc * &y) * factor;
    }
    Ok(y)
}
