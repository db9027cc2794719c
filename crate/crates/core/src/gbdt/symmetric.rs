//! GBDT of generalised Hamiltonian systems
//! `y' = G(x,z)y`, `G = i Σ_k (z − c_k)⁻¹ j H_k(x)`, `H_k = β_k*β_k`,
//! driven by a symmetric S-node `AS − SA* = iΠjΠ*`.

use serde::{Deserialize, Serialize};

use super::general::{GeneralGBDTData, PoleTerm, RationalSystemCoeffs};
use super::{simpson_hermite, MatrixFn, DARBOUX_FD_STEP};
use crate::error::{Error, Result};
use crate::numkit::{
    self, cr, hermitian_eigenvalues, identity, inverse_at, mat_exp, rk4_integrate, rk4_step, uniform_grid,
    ComplexMatrix, Trajectory, C64,
};
use crate::snode::{pole_resolvents, s_identity_residual, SNodeTriple, Signature};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Hamiltonian system with weights `H_k = β_k*β_k` and its GBDT triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetricHamiltonianSystem {
    /// `β_k(x)`, one `p × m` provider per pole.
    pub betas: Vec<MatrixFn>,
    pub triple: SNodeTriple,
}

impl SymmetricHamiltonianSystem {
    pub fn new(betas: Vec<MatrixFn>, triple: SNodeTriple) -> Result<Self> {
        let sys = SymmetricHamiltonianSystem { betas, triple };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        self.triple.check_shape()?;
        if self.betas.len() != self.triple.poles.len() {
            return Err(Error::InvalidInput(format!(
                "{} beta providers for {} poles",
                self.betas.len(),
                self.triple.poles.len()
            )));
        }
        if self.betas.is_empty() {
            return Err(Error::InvalidInput("at least one pole is required".into()));
        }
        let m = self.triple.m();
        for b in &self.betas {
            b.validate()?;
            if b.shape().1 != m {
                return Err(Error::dimension(
                    "SymmetricHamiltonianSystem",
                    format!("beta has {} columns, expected {m}", b.shape().1),
                ));
            }
        }
        Ok(())
    }

    pub fn sig(&self) -> Signature {
        self.triple.sig()
    }

    pub fn poles(&self) -> &[f64] {
        &self.triple.poles
    }

    pub fn has_constant_betas(&self) -> bool {
        self.betas.iter().all(MatrixFn::is_constant)
    }

    pub fn betas_at(&self, x: f64) -> Vec<ComplexMatrix> {
        self.betas.iter().map(|b| b.eval(x)).collect()
    }

    /// `H_k(x) = β_k(x)*β_k(x)`.
    pub fn hamiltonians(&self, x: f64) -> Vec<ComplexMatrix> {
        self.betas
            .iter()
            .map(|b| {
                let v = b.eval(x);
                v.adjoint() * v
            })
            .collect()
    }

    /// `G(x,z) = i Σ (z − c_k)⁻¹ j H_k(x)`.
    pub fn g(&self, x: f64, z: C64) -> Result<ComplexMatrix> {
        hamiltonian_system_matrix(&self.hamiltonians(x), self.poles(), self.sig(), z)
    }

    /// The same transformation in general form: `A₁ = A`, `A₂ = A*`,
    /// `Π₁ = Π`, `Π₂ = −iΠj` (so `Π₂* = ijΠ*`), `q_{k1} = −ijH_k`.
    pub fn to_general(&self) -> (GeneralGBDTData, RationalSystemCoeffs) {
        let sig = self.sig();
        let t = &self.triple;
        let data = GeneralGBDTData {
            a1: t.a.clone(),
            a2: t.a.adjoint(),
            pi1_0: t.pi0.clone(),
            pi2_0: sig.right(&t.pi0) * (-I),
            s0: t.s0.clone(),
        };
        let m = t.m();
        let poles = self
            .betas
            .iter()
            .zip(&t.poles)
            .map(|(b, &c)| {
                let b = b.clone();
                PoleTerm {
                    pole: c,
                    coeffs: vec![MatrixFn::func(m, m, move |x| {
                        let v = b.eval(x);
                        sig.left(&(v.adjoint() * v)) * (-I)
                    })],
                }
            })
            .collect();
        (data, RationalSystemCoeffs { m, poly: Vec::new(), poles })
    }

    /// Π and S trajectories with per-sample diagnostics.
    pub fn trajectory(&self, span: (f64, f64), step: f64) -> Result<GbdtTrajectory> {
        let flow = SymmetricFlow::new(self)?;
        let pi = flow.integrate_pi(span, step)?;
        let s = flow.integrate_s(&pi)?;
        let mut traj = GbdtTrajectory {
            xs: Vec::with_capacity(pi.len()),
            pis: Vec::with_capacity(pi.len()),
            ss: Vec::with_capacity(pi.len()),
            cond_s: Vec::with_capacity(pi.len()),
            s_prime_max_eig: Vec::with_capacity(pi.len()),
            truncated_at: None,
        };
        for ((x, p), s) in pi.xs.into_iter().zip(pi.values).zip(s.values) {
            let cond = numkit::cond_estimate(&s)?;
            if cond > numkit::SINGULAR_COND {
                traj.truncated_at = Some(x);
                break;
            }
            let ds = flow.s_rhs(&self.hamiltonians(x), &p);
            traj.s_prime_max_eig.push(*hermitian_eigenvalues(&numkit::hermitian_part(&ds))?.last().expect("n > 0"));
            traj.xs.push(x);
            traj.pis.push(p);
            traj.ss.push(s);
            traj.cond_s.push(cond);
        }
        Ok(traj)
    }
}

/// `i Σ (z − c_k)⁻¹ j H_k`.
pub fn hamiltonian_system_matrix(hs: &[ComplexMatrix], poles: &[f64], sig: Signature, z: C64) -> Result<ComplexMatrix> {
    let m = sig.m();
    let mut g = numkit::zeros(m, m);
    for (h, &c) in hs.iter().zip(poles) {
        let d = z - c;
        if d.norm() == 0.0 {
            return Err(Error::Pole { z });
        }
        g += sig.left(h) * (I / d);
    }
    Ok(g)
}

/// Sampled `Π(x)`, `S(x)` of a symmetric GBDT.
#[derive(Debug, Clone, Serialize)]
pub struct GbdtTrajectory {
    pub xs: Vec<f64>,
    #[serde(with = "crate::serial::matrices")]
    pub pis: Vec<ComplexMatrix>,
    #[serde(with = "crate::serial::matrices")]
    pub ss: Vec<ComplexMatrix>,
    pub cond_s: Vec<f64>,
    /// Largest eigenvalue of `S'(x)`; nonpositive in exact arithmetic.
    pub s_prime_max_eig: Vec<f64>,
    /// First sample where `S` became numerically singular; the trajectory
    /// stops before it.
    pub truncated_at: Option<f64>,
}

impl GbdtTrajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.xs.len() < 2 {
            0.0
        } else {
            self.xs[1] - self.xs[0]
        }
    }

    pub fn nearest_index(&self, x: f64) -> usize {
        Trajectory { xs: self.xs.clone(), values: vec![(); self.xs.len()] }.nearest_index(x)
    }

    /// `max_x s_identity_residual(A, S(x), Π(x))`.
    pub fn max_identity_residual(&self, sys: &SymmetricHamiltonianSystem) -> f64 {
        self.pis
            .iter()
            .zip(&self.ss)
            .map(|(p, s)| s_identity_residual(&sys.triple.a, s, p, sys.sig()))
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_residual(&self) -> f64 {
        self.ss.iter().map(numkit::hermiticity_residual).fold(0.0, f64::max)
    }
}

/// Resolvents and right-hand sides of the symmetric GBDT equations.
pub(crate) struct SymmetricFlow<'a> {
    pub sys: &'a SymmetricHamiltonianSystem,
    pub res: Vec<ComplexMatrix>,
}

impl<'a> SymmetricFlow<'a> {
    pub fn new(sys: &'a SymmetricHamiltonianSystem) -> Result<Self> {
        sys.validate()?;
        Ok(SymmetricFlow { sys, res: pole_resolvents(&sys.triple.a, sys.poles())? })
    }

    /// `Π' = −i Σ (A − c_k)⁻¹ Π j H_k`.
    pub fn pi_rhs(&self, hs: &[ComplexMatrix], pi: &ComplexMatrix) -> ComplexMatrix {
        let sig = self.sys.sig();
        let pj = sig.right(pi);
        let mut d = numkit::zeros(pi.nrows(), pi.ncols());
        for (r, h) in self.res.iter().zip(hs) {
            d += r * &pj * h;
        }
        d * (-I)
    }

    /// `S' = −Σ (A − c_k)⁻¹ Π j H_k j Π* (A* − c_k)⁻¹`.
    pub fn s_rhs(&self, hs: &[ComplexMatrix], pi: &ComplexMatrix) -> ComplexMatrix {
        let sig = self.sys.sig();
        let pj = sig.right(pi);
        let n = pi.nrows();
        let mut d = numkit::zeros(n, n);
        for (r, h) in self.res.iter().zip(hs) {
            let v = r * &pj;
            d -= &v * h * v.adjoint();
        }
        d
    }

    /// `G̃(x,z)` from `Π`, `S` at `x`.
    pub fn transformed_g(&self, x: f64, pi: &ComplexMatrix, s: &ComplexMatrix, z: C64) -> Result<ComplexMatrix> {
        let ht: Vec<ComplexMatrix> = transformed_hamiltonians(self.sys, pi, s, x)?.into_iter().map(|t| t.h).collect();
        hamiltonian_system_matrix(&ht, self.sys.poles(), self.sys.sig(), z)
    }

    pub fn integrate_pi(&self, span: (f64, f64), step: f64) -> Result<Trajectory<ComplexMatrix>> {
        rk4_integrate(
            |x, p: &ComplexMatrix| self.pi_rhs(&self.sys.hamiltonians(x), p),
            self.sys.triple.pi0.clone(),
            span,
            step,
        )
    }

    pub fn integrate_s(&self, pi: &Trajectory<ComplexMatrix>) -> Result<Trajectory<ComplexMatrix>> {
        let states: Vec<Vec<ComplexMatrix>> = pi.values.iter().map(|p| vec![p.clone()]).collect();
        let derivs: Vec<Vec<ComplexMatrix>> =
            pi.xs.iter().zip(&pi.values).map(|(&x, p)| vec![self.pi_rhs(&self.sys.hamiltonians(x), p)]).collect();
        let values = simpson_hermite(&pi.xs, &states, &derivs, self.sys.triple.s0.clone(), |x, st| {
            self.s_rhs(&self.sys.hamiltonians(x), &st[0])
        });
        if let Some(i) = values.iter().position(|s| !numkit::all_finite(s)) {
            return Err(Error::Integration { x: pi.xs[i] });
        }
        Ok(Trajectory { xs: pi.xs.clone(), values })
    }

    /// RK4 step of `[Π, S]`, optionally with a third component `W̃` solving
    /// `W̃' = G̃(x,z)W̃`.
    pub fn joint_step(&self, x: f64, state: &Vec<ComplexMatrix>, h: f64, z: Option<C64>) -> Vec<ComplexMatrix> {
        let mut field = |x: f64, y: &Vec<ComplexMatrix>| {
            let hs = self.sys.hamiltonians(x);
            let mut out = vec![self.pi_rhs(&hs, &y[0]), self.s_rhs(&hs, &y[0])];
            if let Some(z) = z {
                let m = y[2].nrows();
                let gt = self
                    .transformed_g(x, &y[0], &y[1], z)
                    .unwrap_or_else(|_| ComplexMatrix::from_element(m, m, cr(f64::NAN)));
                out.push(gt * &y[2]);
            }
            out
        };
        rk4_step(&mut field, x, state, h)
    }
}

/// `Π` trajectory by RK4.
pub fn symmetric_pi_ode(
    sys: &SymmetricHamiltonianSystem,
    span: (f64, f64),
    step: f64,
) -> Result<Trajectory<ComplexMatrix>> {
    SymmetricFlow::new(sys)?.integrate_pi(span, step)
}

/// `S` trajectory on the grid of `pi`.
pub fn symmetric_s_ode(
    sys: &SymmetricHamiltonianSystem,
    pi: &Trajectory<ComplexMatrix>,
) -> Result<Trajectory<ComplexMatrix>> {
    SymmetricFlow::new(sys)?.integrate_s(pi)
}

/// `w_A(z) = I_m − i j Π* S⁻¹ (A − zI)⁻¹ Π`; `x` only labels errors.
pub fn transfer_function(
    a: &ComplexMatrix,
    s: &ComplexMatrix,
    pi: &ComplexMatrix,
    sig: Signature,
    z: C64,
    x: f64,
) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let s_inv = inverse_at(s, x)?;
    let resolved = numkit::solve_linear(&(a - identity(n) * z), pi).map_err(|e| match e {
        Error::Singular { .. } => Error::SpectrumClash { eigenvalue: z },
        other => other,
    })?;
    Ok(identity(sig.m()) - sig.left(&pi.adjoint()) * s_inv * resolved * I)
}

/// `β̃_k = β_k j w_A(x,c_k)* j` and `H̃_k = β̃_k*β̃_k`.
#[derive(Debug, Clone)]
pub struct TransformedHamiltonian {
    pub beta: ComplexMatrix,
    pub h: ComplexMatrix,
    /// `w_A(x, c_k)`.
    pub w_at_pole: ComplexMatrix,
}

pub fn transformed_hamiltonians(
    sys: &SymmetricHamiltonianSystem,
    pi: &ComplexMatrix,
    s: &ComplexMatrix,
    x: f64,
) -> Result<Vec<TransformedHamiltonian>> {
    let sig = sys.sig();
    sys.betas
        .iter()
        .zip(sys.poles())
        .map(|(b, &c)| {
            let w = transfer_function(&sys.triple.a, s, pi, sig, cr(c), x)?;
            let beta = sig.right(&(sig.right(&b.eval(x)) * w.adjoint()));
            let h = beta.adjoint() * &beta;
            Ok(TransformedHamiltonian { beta, h, w_at_pole: w })
        })
        .collect()
}

/// `‖w j w* j − I‖`.
pub fn j_unitarity_check(w: &ComplexMatrix, sig: Signature) -> f64 {
    (sig.right(&(sig.right(w) * w.adjoint())) - identity(w.nrows())).norm()
}

/// `max_k ‖j H̃_k − w_A(x,c_k) j H_k w_A(x,c_k)⁻¹‖`.
pub fn similarity_residual(
    sys: &SymmetricHamiltonianSystem,
    pi: &ComplexMatrix,
    s: &ComplexMatrix,
    x: f64,
) -> Result<f64> {
    let sig = sys.sig();
    let hs = sys.hamiltonians(x);
    let mut worst: f64 = 0.0;
    for (t, h) in transformed_hamiltonians(sys, pi, s, x)?.iter().zip(&hs) {
        let w_inv = numkit::inverse(&t.w_at_pole)?;
        let r = (sig.left(&t.h) - &t.w_at_pole * sig.left(h) * w_inv).norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Fundamental solution `w(x,z)` of `y' = G(x,z)y`, `w(x₀,z) = I`.
///
/// Constant weights use the exponential `exp((x − x₀)G(z))`, otherwise RK4;
/// both sample the same grid as [`symmetric_pi_ode`].
pub fn fundamental_solution_initial(
    sys: &SymmetricHamiltonianSystem,
    z: C64,
    span: (f64, f64),
    step: f64,
) -> Result<Trajectory<ComplexMatrix>> {
    sys.validate()?;
    let m = sys.triple.m();
    if sys.has_constant_betas() {
        let g = sys.g(span.0, z)?;
        let (intervals, h) = uniform_grid(span, step)?;
        let mut xs = Vec::with_capacity(intervals + 1);
        let mut values = Vec::with_capacity(intervals + 1);
        for i in 0..=intervals {
            let x = if i == intervals { span.1 } else { span.0 + i as f64 * h };
            values.push(mat_exp(&(&g * cr(x - span.0)))?);
            xs.push(x);
        }
        return Ok(Trajectory { xs, values });
    }
    sys.g(span.0, z)?;
    rk4_integrate(
        |x, w: &ComplexMatrix| {
            sys.g(x, z).map(|g| g * w).unwrap_or_else(|_| ComplexMatrix::from_element(m, m, cr(f64::NAN)))
        },
        identity(m),
        span,
        step,
    )
}

/// `max_x |det w(x) − exp(∫ tr G)| / |exp(∫ tr G)|` with the trace integral
/// by the trapezoid rule on the grid of `w`.
pub fn liouville_residual(sys: &SymmetricHamiltonianSystem, z: C64, w: &Trajectory<ComplexMatrix>) -> Result<f64> {
    let mut integral = cr(0.0);
    let mut prev = sys.g(w.xs[0], z)?.trace();
    let mut worst: f64 = 0.0;
    for i in 0..w.len() {
        if i > 0 {
            let tr = sys.g(w.xs[i], z)?.trace();
            integral += (prev + tr) * (0.5 * (w.xs[i] - w.xs[i - 1]));
            prev = tr;
        }
        let expected = integral.exp();
        let det = w.values[i].determinant();
        worst = worst.max((det - expected).norm() / expected.norm());
    }
    Ok(worst)
}

/// Darboux residual `max_x ‖w_A' − (G̃ w_A − w_A G)‖` over interior samples,
/// with `w_A'` by central differences of step [`DARBOUX_FD_STEP`] taken from
/// local RK4 steps of `(Π, S)`.
pub fn darboux_residual(sys: &SymmetricHamiltonianSystem, traj: &GbdtTrajectory, z: C64) -> Result<f64> {
    let flow = SymmetricFlow::new(sys)?;
    let sig = sys.sig();
    let a = &sys.triple.a;
    let h = DARBOUX_FD_STEP;
    let mut worst: f64 = 0.0;
    for i in 1..traj.len().saturating_sub(1) {
        let x = traj.xs[i];
        let state = vec![traj.pis[i].clone(), traj.ss[i].clone()];
        let fwd = flow.joint_step(x, &state, h, None);
        let bwd = flow.joint_step(x, &state, -h, None);
        let wf = transfer_function(a, &fwd[1], &fwd[0], sig, z, x + h)?;
        let wb = transfer_function(a, &bwd[1], &bwd[0], sig, z, x - h)?;
        let dw = (wf - wb).unscale(2.0 * h);
        let w = transfer_function(a, &traj.ss[i], &traj.pis[i], sig, z, x)?;
        let g = sys.g(x, z)?;
        let gt = flow.transformed_g(x, &traj.pis[i], &traj.ss[i], z)?;
        worst = worst.max((dw - (gt * &w - &w * g)).norm());
    }
    Ok(worst)
}

/// Gap between the two constructions of the transformed fundamental
/// solution: `w_A(x,z)w(x,z)` against RK4 of `W̃' = G̃W̃`,
/// `W̃(x₀) = w_A(x₀,z)`. Returns the maximum over the grid.
pub fn transformed_fundamental_gap(
    sys: &SymmetricHamiltonianSystem,
    z: C64,
    span: (f64, f64),
    step: f64,
) -> Result<f64> {
    let flow = SymmetricFlow::new(sys)?;
    let sig = sys.sig();
    let a = &sys.triple.a;
    let w = fundamental_solution_initial(sys, z, span, step)?;
    let w0 = transfer_function(a, &sys.triple.s0, &sys.triple.pi0, sig, z, span.0)?;
    let mut state = vec![sys.triple.pi0.clone(), sys.triple.s0.clone(), w0];
    let mut worst: f64 = 0.0;
    for i in 0..w.len() {
        let x = w.xs[i];
        if i > 0 {
            state = flow.joint_step(w.xs[i - 1], &state, x - w.xs[i - 1], Some(z));
            if !state.iter().all(numkit::all_finite) {
                return Err(Error::Integration { x });
            }
        }
        let wa = transfer_function(a, &state[1], &state[0], sig, z, x)?;
        worst = worst.max((wa * &w.values[i] - &state[2]).norm());
    }
    Ok(worst)
}
