//! GBDT for first-order systems with polynomial and multiple-pole rational
//! dependence on the spectral parameter.

use serde::{Deserialize, Serialize};

use super::{simpson_hermite, MatrixFn, DARBOUX_FD_STEP};
use crate::error::{Error, Result};
use crate::numkit::{self, cr, identity, inverse_at, rk4_integrate, rk4_step, ComplexMatrix, Trajectory, C64};

/// Pole `c_s` with coefficients `q_{s1} … q_{s r_s}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: f64,
    pub coeffs: Vec<MatrixFn>,
}

/// Coefficients of `G(x,z) = −(Σ_k z^k q_k(x) + Σ_s Σ_k (z − c_s)^{−k} q_{sk}(x))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalSystemCoeffs {
    pub m: usize,
    /// `q_0 … q_r`.
    #[serde(default)]
    pub poly: Vec<MatrixFn>,
    #[serde(default)]
    pub poles: Vec<PoleTerm>,
}

impl RationalSystemCoeffs {
    pub fn new(m: usize, poly: Vec<MatrixFn>, poles: Vec<PoleTerm>) -> Result<Self> {
        let c = RationalSystemCoeffs { m, poly, poles };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidInput("system order m must be positive".into()));
        }
        let all = self.poly.iter().chain(self.poles.iter().flat_map(|p| p.coeffs.iter()));
        for f in all {
            f.validate()?;
            if f.shape() != (self.m, self.m) {
                return Err(Error::dimension(
                    "RationalSystemCoeffs",
                    format!("coefficient is {:?}, expected {m}x{m}", f.shape(), m = self.m),
                ));
            }
        }
        for (i, p) in self.poles.iter().enumerate() {
            if !p.pole.is_finite() || p.coeffs.is_empty() {
                return Err(Error::InvalidInput("each pole needs a finite location and >= 1 coefficient".into()));
            }
            if self.poles[..i].iter().any(|q| q.pole == p.pole) {
                return Err(Error::InvalidInput(format!("pole {} repeated", p.pole)));
            }
        }
        Ok(())
    }

    pub fn pole_locations(&self) -> Vec<f64> {
        self.poles.iter().map(|p| p.pole).collect()
    }

    pub fn at(&self, x: f64) -> CoeffValues {
        CoeffValues {
            poly: self.poly.iter().map(|f| f.eval(x)).collect(),
            poles: self.poles.iter().map(|p| p.coeffs.iter().map(|f| f.eval(x)).collect()).collect(),
        }
    }
}

/// Coefficient values at one `x` (initial or transformed).
#[derive(Debug, Clone)]
pub struct CoeffValues {
    pub poly: Vec<ComplexMatrix>,
    pub poles: Vec<Vec<ComplexMatrix>>,
}

impl CoeffValues {
    /// `G(z) = −(Σ z^k q_k + Σ_s Σ_k (z − c_s)^{−k} q_{sk})`.
    pub fn system_matrix(&self, z: C64, pole_locations: &[f64], m: usize) -> Result<ComplexMatrix> {
        let mut g = numkit::zeros(m, m);
        let mut zk = cr(1.0);
        for q in &self.poly {
            g += q * zk;
            zk *= z;
        }
        for (qs, &c) in self.poles.iter().zip(pole_locations) {
            let d = z - c;
            if d.norm() == 0.0 {
                return Err(Error::Pole { z });
            }
            let inv = cr(1.0) / d;
            let mut p = inv;
            for q in qs {
                g += q * p;
                p *= inv;
            }
        }
        Ok(-g)
    }
}

/// S-node `{A₁, A₂, S(0), Π₁(0), Π₂(0)}` with `A₁S − SA₂ = Π₁Π₂*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneralGBDTData {
    #[serde(rename = "A1", with = "crate::serial::matrix")]
    pub a1: ComplexMatrix,
    #[serde(rename = "A2", with = "crate::serial::matrix")]
    pub a2: ComplexMatrix,
    #[serde(rename = "Pi1_0", with = "crate::serial::matrix")]
    pub pi1_0: ComplexMatrix,
    #[serde(rename = "Pi2_0", with = "crate::serial::matrix")]
    pub pi2_0: ComplexMatrix,
    #[serde(rename = "S0", with = "crate::serial::matrix")]
    pub s0: ComplexMatrix,
}

impl GeneralGBDTData {
    pub fn n(&self) -> usize {
        self.a1.nrows()
    }

    pub fn m(&self) -> usize {
        self.pi1_0.ncols()
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.a1.nrows();
        let m = self.pi1_0.ncols();
        let ok = n > 0
            && self.a1.shape() == (n, n)
            && self.a2.shape() == (n, n)
            && self.s0.shape() == (n, n)
            && self.pi1_0.shape() == (n, m)
            && self.pi2_0.shape() == (n, m);
        if !ok {
            return Err(Error::dimension("GeneralGBDTData", "A1, A2, S0 must be n x n and Pi1, Pi2 n x m"));
        }
        Ok(())
    }

    /// `‖A₁S(0) − S(0)A₂ − Π₁(0)Π₂(0)*‖`.
    pub fn identity_residual(&self) -> f64 {
        identity_residual(&self.a1, &self.a2, &self.s0, &self.pi1_0, &self.pi2_0)
    }
}

/// `‖A₁S − SA₂ − Π₁Π₂*‖`.
pub fn identity_residual(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    s: &ComplexMatrix,
    pi1: &ComplexMatrix,
    pi2: &ComplexMatrix,
) -> f64 {
    (a1 * s - s * a2 - pi1 * pi2.adjoint()).norm()
}

/// `(Π₁, Π₂, S)` at one point.
#[derive(Debug, Clone)]
pub struct GeneralState {
    pub pi1: ComplexMatrix,
    pub pi2: ComplexMatrix,
    pub s: ComplexMatrix,
}

/// Sampled solution of the general GBDT equations.
#[derive(Debug, Clone)]
pub struct GeneralTrajectory {
    pub xs: Vec<f64>,
    pub pi1: Vec<ComplexMatrix>,
    pub pi2: Vec<ComplexMatrix>,
    pub s: Vec<ComplexMatrix>,
    pub cond_s: Vec<f64>,
    /// First sample where `S` became numerically singular; later samples
    /// are dropped.
    pub truncated_at: Option<f64>,
}

impl GeneralTrajectory {
    pub fn state(&self, i: usize) -> GeneralState {
        GeneralState { pi1: self.pi1[i].clone(), pi2: self.pi2[i].clone(), s: self.s[i].clone() }
    }
}

/// Precomputed powers and resolvent powers for one GBDT run.
pub struct GeneralFlow<'a> {
    data: &'a GeneralGBDTData,
    coeffs: &'a RationalSystemCoeffs,
    poles: Vec<f64>,
    a1_pows: Vec<ComplexMatrix>,
    a2_pows: Vec<ComplexMatrix>,
    /// `res1[s][p − 1] = (A₁ − c_s I)^{−p}`.
    res1: Vec<Vec<ComplexMatrix>>,
    res2: Vec<Vec<ComplexMatrix>>,
}

fn powers(a: &ComplexMatrix, count: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(count);
    let mut p = identity(a.nrows());
    for _ in 0..count {
        out.push(p.clone());
        p = &p * a;
    }
    out
}

fn resolvent_powers(a: &ComplexMatrix, c: f64, count: usize) -> Result<Vec<ComplexMatrix>> {
    let n = a.nrows();
    let r = numkit::inverse(&(a - identity(n).scale(c))).map_err(|e| match e {
        Error::Singular { .. } => Error::PoleClash { pole: cr(c) },
        other => other,
    })?;
    let mut out = vec![r.clone()];
    for _ in 1..count {
        let next = out.last().expect("nonempty") * &r;
        out.push(next);
    }
    Ok(out)
}

impl<'a> GeneralFlow<'a> {
    pub fn new(data: &'a GeneralGBDTData, coeffs: &'a RationalSystemCoeffs) -> Result<Self> {
        data.check_shape()?;
        coeffs.validate()?;
        if coeffs.m != data.m() {
            return Err(Error::dimension(
                "GeneralFlow",
                format!("coefficients are {m}x{m} but Pi has {} columns", data.m(), m = coeffs.m),
            ));
        }
        let r = coeffs.poly.len();
        let mut res1 = Vec::new();
        let mut res2 = Vec::new();
        for p in &coeffs.poles {
            res1.push(resolvent_powers(&data.a1, p.pole, p.coeffs.len())?);
            res2.push(resolvent_powers(&data.a2, p.pole, p.coeffs.len())?);
        }
        Ok(GeneralFlow {
            data,
            coeffs,
            poles: coeffs.pole_locations(),
            a1_pows: powers(&data.a1, r.max(1)),
            a2_pows: powers(&data.a2, r.max(1)),
            res1,
            res2,
        })
    }

    pub fn data(&self) -> &GeneralGBDTData {
        self.data
    }

    pub fn coeffs(&self) -> &RationalSystemCoeffs {
        self.coeffs
    }

    /// `Π₁' = Σ A₁^k Π₁ q_k + Σ (A₁ − c_s)^{−k} Π₁ q_{sk}`.
    pub fn pi1_rhs(&self, q: &CoeffValues, pi1: &ComplexMatrix) -> ComplexMatrix {
        let mut d = numkit::zeros(pi1.nrows(), pi1.ncols());
        for (k, qk) in q.poly.iter().enumerate() {
            d += &self.a1_pows[k] * pi1 * qk;
        }
        for (s, qs) in q.poles.iter().enumerate() {
            for (k, qsk) in qs.iter().enumerate() {
                d += &self.res1[s][k] * pi1 * qsk;
            }
        }
        d
    }

    /// `(Π₂*)' = −(Σ q_k Π₂* A₂^k + Σ q_{sk} Π₂* (A₂ − c_s)^{−k})`.
    pub fn pi2_adj_rhs(&self, q: &CoeffValues, pi2_adj: &ComplexMatrix) -> ComplexMatrix {
        let mut d = numkit::zeros(pi2_adj.nrows(), pi2_adj.ncols());
        for (k, qk) in q.poly.iter().enumerate() {
            d += qk * pi2_adj * &self.a2_pows[k];
        }
        for (s, qs) in q.poles.iter().enumerate() {
            for (k, qsk) in qs.iter().enumerate() {
                d += qsk * pi2_adj * &self.res2[s][k];
            }
        }
        -d
    }

    /// `S' = Σ_k Σ_{j≤k} A₁^{k−j} Π₁ q_k Π₂* A₂^{j−1}
    ///      − Σ_s Σ_k Σ_{j≤k} (A₁ − c_s)^{j−k−1} Π₁ q_{sk} Π₂* (A₂ − c_s)^{−j}`.
    pub fn s_rhs(&self, q: &CoeffValues, pi1: &ComplexMatrix, pi2_adj: &ComplexMatrix) -> ComplexMatrix {
        let n = pi1.nrows();
        let mut d = numkit::zeros(n, n);
        for (k, qk) in q.poly.iter().enumerate().skip(1) {
            let core = pi1 * qk * pi2_adj;
            for j in 1..=k {
                d += &self.a1_pows[k - j] * &core * &self.a2_pows[j - 1];
            }
        }
        for (s, qs) in q.poles.iter().enumerate() {
            for (k0, qsk) in qs.iter().enumerate() {
                let k = k0 + 1;
                let core = pi1 * qsk * pi2_adj;
                for j in 1..=k {
                    d -= &self.res1[s][k - j] * &core * &self.res2[s][j - 1];
                }
            }
        }
        d
    }

    /// One RK4 step of the joint state `[Π₁, Π₂*, S]`.
    pub fn joint_step(&self, x: f64, state: &[ComplexMatrix], h: f64) -> Vec<ComplexMatrix> {
        let mut field = |x: f64, y: &Vec<ComplexMatrix>| {
            let q = self.coeffs.at(x);
            vec![self.pi1_rhs(&q, &y[0]), self.pi2_adj_rhs(&q, &y[1]), self.s_rhs(&q, &y[0], &y[1])]
        };
        rk4_step(&mut field, x, &state.to_vec(), h)
    }

    /// State at `x + h` from the state at `x`.
    pub fn advance(&self, x: f64, state: &GeneralState, h: f64) -> GeneralState {
        let out = self.joint_step(x, &[state.pi1.clone(), state.pi2.adjoint(), state.s.clone()], h);
        GeneralState { pi1: out[0].clone(), pi2: out[1].adjoint(), s: out[2].clone() }
    }

    /// `w_A(z) = I − Π₂* S⁻¹ (A₁ − zI)⁻¹ Π₁`.
    pub fn transfer(&self, state: &GeneralState, z: C64, x: f64) -> Result<ComplexMatrix> {
        transfer_function_general(&self.data.a1, &state.s, &state.pi1, &state.pi2, z, x)
    }

    /// Transformed coefficients `q̃_k`, `q̃_{sk}` at `x`.
    pub fn transformed(&self, state: &GeneralState, x: f64, q: &CoeffValues) -> Result<CoeffValues> {
        let s_inv = inverse_at(&state.s, x)?;
        let pi2_adj = state.pi2.adjoint();
        let left = &pi2_adj * &s_inv;
        let right = &s_inv * &state.pi1;
        let r = q.poly.len();
        // X_k = Π₂*S⁻¹A₁^kΠ₁, Y_k = Π₂*A₂^kS⁻¹Π₁ for k = 0..r−1.
        let x_pos: Vec<ComplexMatrix> =
            (0..r.saturating_sub(1)).map(|k| &left * &self.a1_pows[k] * &state.pi1).collect();
        let y_pos: Vec<ComplexMatrix> =
            (0..r.saturating_sub(1)).map(|k| &pi2_adj * &self.a2_pows[k] * &right).collect();

        let poly = (0..r)
            .map(|k| {
                let mut out = q.poly[k].clone();
                for j in k + 1..r {
                    let qj = &q.poly[j];
                    let mut term = qj * &y_pos[j - k - 1] - &x_pos[j - k - 1] * qj;
                    for i in k + 2..=j {
                        term += &x_pos[j - i] * qj * &y_pos[i - k - 2];
                    }
                    out -= term;
                }
                out
            })
            .collect();

        let mut poles = Vec::with_capacity(q.poles.len());
        for (s, qs) in q.poles.iter().enumerate() {
            let rs = qs.len();
            // xn[p − 1] = X_{s,−p}, yn[p − 1] = Y_{s,−p}.
            let xn: Vec<ComplexMatrix> = (0..rs).map(|p| &left * &self.res1[s][p] * &state.pi1).collect();
            let yn: Vec<ComplexMatrix> = (0..rs).map(|p| &pi2_adj * &self.res2[s][p] * &right).collect();
            debug_assert!({
                let w = self.transfer(state, cr(self.poles[s]), x)?;
                (identity(w.nrows()) - &xn[0] - &w).norm() <= 1e-8 * (1.0 + w.norm())
            });
            let mut out_s = Vec::with_capacity(rs);
            for k in 1..=rs {
                let mut out = qs[k - 1].clone();
                for j in k..=rs {
                    let qsj = &qs[j - 1];
                    let p = j - k + 1;
                    out += qsj * &yn[p - 1] - &xn[p - 1] * qsj;
                    for i in k..=j {
                        out -= &xn[j - i] * qsj * &yn[i - k];
                    }
                }
                out_s.push(out);
            }
            poles.push(out_s);
        }
        Ok(CoeffValues { poly, poles })
    }

    /// Integrates `Π₁`, `Π₂` and `S` on `span`, truncating where `S` stops
    /// being invertible.
    pub fn run(&self, span: (f64, f64), step: f64) -> Result<GeneralTrajectory> {
        let (pi1, pi2) = general_pi_odes_with(self, span, step)?;
        let s = general_s_ode_with(self, &pi1, &pi2)?;
        let mut traj = GeneralTrajectory {
            xs: pi1.xs,
            pi1: pi1.values,
            pi2: pi2.values,
            s: s.values,
            cond_s: Vec::new(),
            truncated_at: None,
        };
        for (i, s) in traj.s.iter().enumerate() {
            let cond = numkit::cond_estimate(s)?;
            if cond > numkit::SINGULAR_COND {
                traj.truncated_at = Some(traj.xs[i]);
                traj.xs.truncate(i);
                traj.pi1.truncate(i);
                traj.pi2.truncate(i);
                traj.s.truncate(i);
                break;
            }
            traj.cond_s.push(cond);
        }
        Ok(traj)
    }

    /// `max_x ‖w_A'(x,z) − (G̃ w_A − w_A G)(x,z)‖` over interior samples,
    /// with `w_A'` from central differences of step [`DARBOUX_FD_STEP`].
    pub fn darboux_residual(&self, traj: &GeneralTrajectory, z: C64) -> Result<f64> {
        let m = self.coeffs.m;
        let h = DARBOUX_FD_STEP;
        let mut worst: f64 = 0.0;
        for i in 1..traj.xs.len().saturating_sub(1) {
            let x = traj.xs[i];
            let state = traj.state(i);
            let fwd = self.advance(x, &state, h);
            let bwd = self.advance(x, &state, -h);
            let dw = (self.transfer(&fwd, z, x + h)? - self.transfer(&bwd, z, x - h)?).unscale(2.0 * h);
            let w = self.transfer(&state, z, x)?;
            let q = self.coeffs.at(x);
            let g = q.system_matrix(z, &self.poles, m)?;
            let gt = self.transformed(&state, x, &q)?.system_matrix(z, &self.poles, m)?;
            worst = worst.max((dw - (gt * &w - &w * g)).norm());
        }
        Ok(worst)
    }
}

fn general_pi_odes_with(
    flow: &GeneralFlow<'_>,
    span: (f64, f64),
    step: f64,
) -> Result<(Trajectory<ComplexMatrix>, Trajectory<ComplexMatrix>)> {
    let pi1 =
        rk4_integrate(|x, y: &ComplexMatrix| flow.pi1_rhs(&flow.coeffs.at(x), y), flow.data.pi1_0.clone(), span, step)?;
    let pi2_adj = rk4_integrate(
        |x, y: &ComplexMatrix| flow.pi2_adj_rhs(&flow.coeffs.at(x), y),
        flow.data.pi2_0.adjoint(),
        span,
        step,
    )?;
    let pi2 = Trajectory { xs: pi2_adj.xs, values: pi2_adj.values.iter().map(|p| p.adjoint()).collect() };
    Ok((pi1, pi2))
}

fn general_s_ode_with(
    flow: &GeneralFlow<'_>,
    pi1: &Trajectory<ComplexMatrix>,
    pi2: &Trajectory<ComplexMatrix>,
) -> Result<Trajectory<ComplexMatrix>> {
    if pi1.xs != pi2.xs {
        return Err(Error::GridMismatch);
    }
    let states: Vec<Vec<ComplexMatrix>> =
        pi1.values.iter().zip(&pi2.values).map(|(a, b)| vec![a.clone(), b.adjoint()]).collect();
    let derivs: Vec<Vec<ComplexMatrix>> = pi1
        .xs
        .iter()
        .zip(&states)
        .map(|(&x, st)| {
            let q = flow.coeffs.at(x);
            vec![flow.pi1_rhs(&q, &st[0]), flow.pi2_adj_rhs(&q, &st[1])]
        })
        .collect();
    let values = simpson_hermite(&pi1.xs, &states, &derivs, flow.data.s0.clone(), |x, st| {
        flow.s_rhs(&flow.coeffs.at(x), &st[0], &st[1])
    });
    if values.iter().any(|s| !numkit::all_finite(s)) {
        let x = pi1.xs[values.iter().position(|s| !numkit::all_finite(s)).unwrap_or(0)];
        return Err(Error::Integration { x });
    }
    Ok(Trajectory { xs: pi1.xs.clone(), values })
}

/// RK4 trajectories of `Π₁` and `Π₂`.
pub fn general_pi_odes(
    data: &GeneralGBDTData,
    coeffs: &RationalSystemCoeffs,
    span: (f64, f64),
    step: f64,
) -> Result<(Trajectory<ComplexMatrix>, Trajectory<ComplexMatrix>)> {
    let flow = GeneralFlow::new(data, coeffs)?;
    general_pi_odes_with(&flow, span, step)
}

/// `S(x)` on the grid of the given `Π₁`, `Π₂` trajectories.
pub fn general_s_ode(
    data: &GeneralGBDTData,
    coeffs: &RationalSystemCoeffs,
    pi1: &Trajectory<ComplexMatrix>,
    pi2: &Trajectory<ComplexMatrix>,
) -> Result<Trajectory<ComplexMatrix>> {
    let flow = GeneralFlow::new(data, coeffs)?;
    general_s_ode_with(&flow, pi1, pi2)
}

/// Transformed coefficients at `x` for the state `(Π₁, Π₂, S)`.
pub fn transformed_coeffs(
    data: &GeneralGBDTData,
    coeffs: &RationalSystemCoeffs,
    state: &GeneralState,
    x: f64,
) -> Result<CoeffValues> {
    let flow = GeneralFlow::new(data, coeffs)?;
    flow.transformed(state, x, &coeffs.at(x))
}

/// `w_A(z) = I_m − Π₂* S⁻¹ (A₁ − zI)⁻¹ Π₁`; `x` only labels errors.
pub fn transfer_function_general(
    a1: &ComplexMatrix,
    s: &ComplexMatrix,
    pi1: &ComplexMatrix,
    pi2: &ComplexMatrix,
    z: C64,
    x: f64,
) -> Result<ComplexMatrix> {
    let n = a1.nrows();
    let s_inv = inverse_at(s, x)?;
    let resolved = numkit::solve_linear(&(a1 - identity(n) * z), pi1).map_err(|e| match e {
        Error::Singular { .. } => Error::SpectrumClash { eigenvalue: z },
        other => other,
    })?;
    Ok(identity(pi1.ncols()) - pi2.adjoint() * s_inv * resolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, from_rows, zeros};

    fn small_data() -> GeneralGBDTData {
        // A₁S − SA₂ = Π₁Π₂* with S = I, A₂ = A₁ − Π₁Π₂*.
        let a1 = from_rows(&[vec![c(0.3, -1.0), cr(0.2)], vec![cr(0.0), c(-0.4, -0.8)]]).unwrap();
        let pi1 = from_rows(&[vec![cr(0.5), c(0.1, 0.2)], vec![c(0.0, 0.3), cr(-0.2)]]).unwrap();
        let pi2 = from_rows(&[vec![cr(0.1), cr(0.4)], vec![c(0.2, -0.1), cr(0.3)]]).unwrap();
        let a2 = &a1 - &pi1 * pi2.adjoint();
        GeneralGBDTData { a1, a2, pi1_0: pi1, pi2_0: pi2, s0: identity(2) }
    }

    #[test]
    fn zero_coefficients_freeze_everything() {
        let data = small_data();
        let coeffs = RationalSystemCoeffs::new(
            2,
            vec![MatrixFn::constant(zeros(2, 2))],
            vec![PoleTerm { pole: 3.0, coeffs: vec![MatrixFn::constant(zeros(2, 2))] }],
        )
        .unwrap();
        let (p1, p2) = general_pi_odes(&data, &coeffs, (0.0, 1.0), 0.1).unwrap();
        let s = general_s_ode(&data, &coeffs, &p1, &p2).unwrap();
        assert!(p1.values.iter().all(|p| *p == data.pi1_0));
        assert!(p2.values.iter().all(|p| *p == data.pi2_0));
        assert!(s.values.iter().all(|p| *p == data.s0));
    }

    #[test]
    fn constant_q0_gives_phase() {
        let data = small_data();
        let coeffs =
            RationalSystemCoeffs::new(2, vec![MatrixFn::constant(identity(2) * c(0.0, -1.0))], vec![]).unwrap();
        let (p1, _) = general_pi_odes(&data, &coeffs, (0.0, 1.0), 1e-3).unwrap();
        let expected = &data.pi1_0 * C64::from_polar(1.0, -1.0);
        assert!((p1.last().unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn identity_propagates_with_poly_and_poles() {
        let data = small_data();
        let q0 = from_rows(&[vec![c(0.1, 0.2), cr(0.3)], vec![cr(-0.1), c(0.0, 0.4)]]).unwrap();
        let q1 = from_rows(&[vec![cr(0.2), c(0.0, -0.1)], vec![c(0.3, 0.0), cr(0.1)]]).unwrap();
        let q2 = from_rows(&[vec![c(0.0, 0.1), cr(0.0)], vec![cr(0.05), c(0.1, 0.0)]]).unwrap();
        let coeffs = RationalSystemCoeffs::new(
            2,
            vec![MatrixFn::constant(q0), MatrixFn::Polynomial { coeffs: vec![q1.clone(), q1.scale(0.5)] }],
            vec![PoleTerm {
                pole: 2.0,
                coeffs: vec![MatrixFn::constant(q2.clone()), MatrixFn::constant(q2.scale(-0.7))],
            }],
        )
        .unwrap();
        let flow = GeneralFlow::new(&data, &coeffs).unwrap();
        let traj = flow.run((0.0, 1.0), 1e-2).unwrap();
        for i in 0..traj.xs.len() {
            let r = identity_residual(&data.a1, &data.a2, &traj.s[i], &traj.pi1[i], &traj.pi2[i]);
            assert!(r < 1e-9, "residual {r} at x = {}", traj.xs[i]);
        }
        let res = flow.darboux_residual(&traj, c(0.4, 0.9)).unwrap();
        assert!(res < 1e-5, "darboux residual {res}");
    }

    #[test]
    fn transformed_coeffs_trivial_for_zero_pi() {
        let mut data = small_data();
        data.pi1_0 = zeros(2, 2);
        data.pi2_0 = zeros(2, 2);
        data.a2 = data.a1.clone();
        let q = from_rows(&[vec![c(0.1, 0.2), cr(0.3)], vec![cr(-0.1), c(0.0, 0.4)]]).unwrap();
        let coeffs = RationalSystemCoeffs::new(
            2,
            vec![MatrixFn::constant(q.clone()), MatrixFn::constant(q.clone())],
            vec![PoleTerm { pole: 1.0, coeffs: vec![MatrixFn::constant(q.clone()); 2] }],
        )
        .unwrap();
        let state = GeneralState { pi1: zeros(2, 2), pi2: zeros(2, 2), s: identity(2) };
        let t = transformed_coeffs(&data, &coeffs, &state, 0.0).unwrap();
        assert!(t.poly.iter().all(|p| *p == q));
        assert!(t.poles[0].iter().all(|p| *p == q));
    }

    #[test]
    fn single_simple_pole_hand_expansion() {
        // r_s = 1: q̃ = q + qY₋₁ − X₋₁q − X₋₁qY₋₁.
        let data = small_data();
        let q = from_rows(&[vec![c(0.1, 0.2), cr(0.3)], vec![cr(-0.1), c(0.0, 0.4)]]).unwrap();
        let coeffs = RationalSystemCoeffs::new(
            2,
            vec![],
            vec![PoleTerm { pole: 1.5, coeffs: vec![MatrixFn::constant(q.clone())] }],
        )
        .unwrap();
        let state = GeneralState { pi1: data.pi1_0.clone(), pi2: data.pi2_0.clone(), s: data.s0.clone() };
        let t = transformed_coeffs(&data, &coeffs, &state, 0.0).unwrap();
        let r1 = numkit::inverse(&(&data.a1 - identity(2).scale(1.5))).unwrap();
        let r2 = numkit::inverse(&(&data.a2 - identity(2).scale(1.5))).unwrap();
        let s_inv = numkit::inverse(&data.s0).unwrap();
        let xm = data.pi2_0.adjoint() * &s_inv * r1 * &data.pi1_0;
        let ym = data.pi2_0.adjoint() * r2 * &s_inv * &data.pi1_0;
        let expected = &q + &q * &ym - &xm * &q - &xm * &q * &ym;
        assert!((&t.poles[0][0] - expected).norm() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let data = small_data();
        let coeffs = RationalSystemCoeffs::new(2, vec![MatrixFn::constant(zeros(2, 2))], vec![]).unwrap();
        let (p1, _) = general_pi_odes(&data, &coeffs, (0.0, 1.0), 0.1).unwrap();
        let (_, p2) = general_pi_odes(&data, &coeffs, (0.0, 1.0), 0.2).unwrap();
        assert!(matches!(general_s_ode(&data, &coeffs, &p1, &p2), Err(Error::GridMismatch)));
    }

    #[test]
    fn pole_in_spectrum_is_rejected() {
        let data = small_data();
        let coeffs = RationalSystemCoeffs::new(
            2,
            vec![],
            vec![PoleTerm { pole: 0.0, coeffs: vec![MatrixFn::constant(zeros(2, 2))] }],
        )
        .unwrap();
        let mut d = data.clone();
        d.a1 = crate::numkit::diag(&[cr(0.0), cr(1.0)]);
        assert!(matches!(GeneralFlow::new(&d, &coeffs), Err(Error::PoleClash { .. })));
    }
}
