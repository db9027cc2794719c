//! Seeded random scenarios.
//!
//! The generator is `ChaCha8Rng::seed_from_u64(seed)` (crate `rand_chacha`)
//! and every random real is drawn uniformly from `[-1, 1]` unless noted, so
//! the same seed yields byte-identical scenario files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{CommutingFamily, DiracInput, Inputs, Mode, RootCheck, RootsInput, Scenario};
use super::CliError;
use crate::error::{Error, Result};
use crate::gbdt::{GeneralGBDTData, MatrixFn, PoleTerm, RationalSystemCoeffs, SymmetricHamiltonianSystem};
use crate::matroot::{JordanCell, JordanForm, QuadraticSign, SpectralFunction};
use crate::numkit::{self, c, cr, identity, min_singular_value, ComplexMatrix, Tolerance, C64};
use crate::snode::{SNodeTriple, Signature};

/// Minimum `σ_min(A − cI)` for generated poles.
pub const POLE_CLEARANCE: f64 = 0.5;
/// Minimum distance between generated poles.
pub const POLE_SEPARATION: f64 = 0.5;
const MAX_ATTEMPTS: usize = 10_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

pub fn random_complex(rng: &mut impl Rng) -> C64 {
    c(uniform(rng), uniform(rng))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    numkit::hermitian_part(&random_matrix(rng, n, n))
}

/// Real points in `[-range, range]`, each at least [`POLE_SEPARATION`] from
/// the others and with `σ_min(A − cI) ≥` [`POLE_CLEARANCE`] for every `A`.
pub fn clear_points(rng: &mut impl Rng, count: usize, range: f64, avoid: &[&ComplexMatrix]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    for _ in 0..MAX_ATTEMPTS {
        if out.len() == count {
            break;
        }
        let x = range * uniform(rng);
        let separated = out.iter().all(|&p| (p - x).abs() >= POLE_SEPARATION);
        let clear = avoid.iter().all(|a| min_singular_value(&(*a - identity(a.nrows()).scale(x))) >= POLE_CLEARANCE);
        if separated && clear {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(Error::InvalidInput(format!("could not place {count} poles clear of the spectrum")));
    }
    Ok(out)
}

/// Spectral parameters off the real axis with `σ_min(A − zI) ≥ 0.5`.
pub fn clear_spectral_points(rng: &mut impl Rng, count: usize, a: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(count);
    for _ in 0..MAX_ATTEMPTS {
        if out.len() == count {
            break;
        }
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let z = c(3.0 * uniform(rng), sign * rng.gen_range(0.5..=2.0));
        if min_singular_value(&(a - identity(n) * z)) >= POLE_CLEARANCE {
            out.push(z);
        }
    }
    if out.len() < count {
        return Err(Error::InvalidInput("could not place spectral samples clear of the spectrum".into()));
    }
    Ok(out)
}

/// Symmetric S-node with `S(0) = −I` and `A = H₀ − (i/2)Π(0)jΠ(0)*`
/// (`H₀` random Hermitian), so that `AS − SA* = iΠjΠ*` holds exactly, plus
/// `r` poles and affine weights `β_k(x) = B_k + xB'_k` of size `m × m`.
pub fn random_symmetric_system(
    rng: &mut impl Rng,
    n: usize,
    m1: usize,
    m2: usize,
    r: usize,
) -> Result<SymmetricHamiltonianSystem> {
    if n == 0 || m1 + m2 == 0 || r == 0 {
        return Err(Error::InvalidInput("need n >= 1, m1 + m2 >= 1 and r >= 1".into()));
    }
    let sig = Signature::new(m1, m2)?;
    let m = sig.m();
    let pi = random_matrix(rng, n, m).scale(0.5);
    let h0 = random_hermitian(rng, n);
    let a = h0 - sig.right(&pi) * pi.adjoint() * c(0.0, 0.5);
    let poles = clear_points(rng, r, 2.0 + r as f64, &[&a])?;
    let betas = (0..r)
        .map(|_| MatrixFn::Polynomial {
            coeffs: vec![random_matrix(rng, m, m).scale(0.5), random_matrix(rng, m, m).scale(0.25)],
        })
        .collect();
    let triple = SNodeTriple::new(a, -identity(n), pi, sig, poles)?;
    SymmetricHamiltonianSystem::new(betas, triple)
}

/// General S-node with `S(0) = I`, `A₂ = A₁ − Π₁(0)Π₂(0)*`, coefficients
/// `q₀`, `q₁` and one double pole.
pub fn random_general_system(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
) -> Result<(GeneralGBDTData, RationalSystemCoeffs)> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("need n >= 1 and m >= 1".into()));
    }
    let a1 = random_matrix(rng, n, n);
    let pi1 = random_matrix(rng, n, m).scale(0.4);
    let pi2 = random_matrix(rng, n, m).scale(0.4);
    let a2 = &a1 - &pi1 * pi2.adjoint();
    let pole = clear_points(rng, 1, 4.0, &[&a1, &a2])?[0];
    let mut q = || MatrixFn::constant(random_matrix(rng, m, m).scale(0.3));
    let coeffs =
        RationalSystemCoeffs { m, poly: vec![q(), q()], poles: vec![PoleTerm { pole, coeffs: vec![q(), q()] }] };
    let data = GeneralGBDTData { a1, a2, pi1_0: pi1, pi2_0: pi2, s0: identity(n) };
    Ok((data, coeffs))
}

/// Jordan form with cells of size `≤ max_cell`, eigenvalues at distance
/// `≥ 0.3` from the real axis and from `±i`, and `u = I + ½·random` with
/// 1-norm condition number `≤ max_cond`.
pub fn random_jordan_form(rng: &mut impl Rng, n: usize, max_cell: usize, max_cond: f64) -> Result<JordanForm> {
    if n == 0 || max_cell == 0 {
        return Err(Error::InvalidInput("need n >= 1 and max_cell >= 1".into()));
    }
    let mut cells = Vec::new();
    let mut left = n;
    while left > 0 {
        let size = rng.gen_range(1..=max_cell.min(left));
        let eigenvalue = loop {
            let mu = c(2.0 * uniform(rng), 2.0 * uniform(rng));
            if mu.im.abs() >= 0.3 && (mu - c(0.0, 1.0)).norm() >= 0.3 && (mu + c(0.0, 1.0)).norm() >= 0.3 {
                break mu;
            }
        };
        cells.push(JordanCell { eigenvalue, size });
        left -= size;
    }
    for _ in 0..MAX_ATTEMPTS {
        let u = identity(n) + random_matrix(rng, n, n).scale(0.5);
        if numkit::cond_estimate(&u)? <= max_cond {
            return JordanForm::new(u, cells);
        }
    }
    Err(Error::InvalidInput(format!("no basis with condition number <= {max_cond}")))
}

/// `m1 × m2` matrix with spectral norm `max_norm · t`, `t ∈ (0, 1]` uniform.
pub fn random_contraction(rng: &mut impl Rng, m1: usize, m2: usize, max_norm: f64) -> ComplexMatrix {
    let rho = random_matrix(rng, m1, m2);
    let norm = numkit::spectral_norm(&rho).max(f64::MIN_POSITIVE);
    let t: f64 = rng.gen_range(0.05..=1.0);
    rho.scale(max_norm * t / norm)
}

fn dim(dims: &[usize], i: usize, default: usize) -> usize {
    dims.get(i).copied().unwrap_or(default)
}

/// Random well-posed scenario of the given kind.
///
/// `dims` by kind (defaults in brackets):
/// `roots` `[n=4]`; `gbdt-sym` and `dynamics` `[n=3, m1=1, m2=1, r=2]`;
/// `gbdt-general` `[n=3, m=2]`; `dirac` `[m1=1, m2=1, N=5]`.
pub fn generate_scenario(kind: Mode, dims: &[usize], seed: u64) -> Result<Scenario, CliError> {
    if dims.contains(&0) && kind != Mode::GbdtSym && kind != Mode::Dynamics {
        return Err(CliError::Input("dimensions must be >= 1".into()));
    }
    let mut rng = rng(seed);
    let module = |e: Error| CliError::Input(format!("infeasible dimensions: {e}"));
    let mut s = Scenario {
        name: format!("{}-seed{seed}", kind.name()),
        mode: kind,
        span: None,
        step: None,
        z_samples: Vec::new(),
        zeta_samples: Vec::new(),
        x_samples: Vec::new(),
        tolerances: Tolerance::default(),
        seed: Some(seed),
        inputs: Inputs::default(),
    };
    match kind {
        Mode::Roots => {
            let n = dim(dims, 0, 4);
            let jordan = random_jordan_form(&mut rng, n, 4, 1e3).map_err(module)?;
            let mut constructed = Vec::new();
            for ell in [2, 3, 5] {
                constructed.push(RootCheck { f: SpectralFunction::Shift { z: cr(3.5) }, ell, branches: None });
                constructed.push(RootCheck {
                    f: SpectralFunction::Quadratic { c: cr(0.0), a: 1.0, sign: QuadraticSign::Plus },
                    ell,
                    branches: None,
                });
                constructed.push(RootCheck {
                    f: SpectralFunction::ResolventProduct { c1: cr(4.0), c2: cr(-4.0) },
                    ell,
                    branches: None,
                });
            }
            let zs = (0..4).map(|_| 3.0 * uniform(&mut rng)).collect();
            s.inputs.roots = Some(RootsInput {
                jordan,
                constructed,
                explicit: Vec::new(),
                commuting_family: Some(CommutingFamily { ell: 2, zs }),
            });
        }
        Mode::GbdtSym | Mode::Dynamics => {
            let (n, m1, m2, r) = (dim(dims, 0, 3), dim(dims, 1, 1), dim(dims, 2, 1), dim(dims, 3, 2));
            let sys = random_symmetric_system(&mut rng, n, m1, m2, r).map_err(module)?;
            s.span = Some([0.0, 1.0]);
            s.step = Some(1e-3);
            s.z_samples = clear_spectral_points(&mut rng, 3, &sys.triple.a).map_err(module)?;
            if kind == Mode::Dynamics {
                s.x_samples = vec![0.25, 0.5, 0.75];
                s.zeta_samples = (0..2).map(|_| (0..r).map(|_| 0.5 * uniform(&mut rng)).collect()).collect();
            }
            s.inputs.betas = Some(sys.betas);
            s.inputs.triple = Some(sys.triple);
        }
        Mode::GbdtGeneral => {
            let (n, m) = (dim(dims, 0, 3), dim(dims, 1, 2));
            let (data, coeffs) = random_general_system(&mut rng, n, m).map_err(module)?;
            s.span = Some([0.0, 0.5]);
            s.step = Some(1e-3);
            let mut z = clear_spectral_points(&mut rng, 3, &data.a1).map_err(module)?;
            z.retain(|z| min_singular_value(&(&data.a2 - identity(n) * *z)) >= POLE_CLEARANCE);
            s.z_samples = z;
            s.inputs.general = Some(data);
            s.inputs.coeffs = Some(coeffs);
        }
        Mode::Dirac => {
            let (m1, m2, steps) = (dim(dims, 0, 1), dim(dims, 1, 1), dim(dims, 2, 5));
            let contractions = (0..steps).map(|_| random_contraction(&mut rng, m1, m2, 0.9)).collect();
            let y0 = (0..m1 + m2).map(|_| random_complex(&mut rng)).collect();
            s.z_samples = (0..3).map(|_| c(2.0 * uniform(&mut rng), rng.gen_range(0.5..=2.0))).collect();
            s.inputs.dirac = Some(DiracInput { m1, m2, contractions, y0 });
        }
    }
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snode::validate_snode;

    #[test]
    fn generated_symmetric_scenario_is_an_snode() {
        let s = generate_scenario(Mode::GbdtSym, &[3, 1, 1, 2], 7).unwrap();
        let t = s.inputs.triple.as_ref().unwrap();
        assert!(validate_snode(t, &Tolerance::default()).unwrap().passes);
        let poles = &t.poles;
        assert!((poles[0] - poles[1]).abs() >= POLE_SEPARATION);
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [Mode::Roots, Mode::GbdtSym, Mode::GbdtGeneral, Mode::Dynamics, Mode::Dirac] {
            let a = generate_scenario(kind, &[], 11).unwrap().to_json();
            let b = generate_scenario(kind, &[], 11).unwrap().to_json();
            assert_eq!(a, b);
            let back = Scenario::from_json(&a).unwrap();
            assert_eq!(back.to_json(), a);
        }
    }

    #[test]
    fn dirac_scenario_has_strict_contractions() {
        let s = generate_scenario(Mode::Dirac, &[2, 1, 5], 3).unwrap();
        let d = s.inputs.dirac.unwrap();
        assert_eq!(d.contractions.len(), 5);
        assert!(d.contractions.iter().all(|r| numkit::spectral_norm(r) < 1.0));
    }

    #[test]
    fn random_jordan_form_respects_condition_bound() {
        let mut r = rng(5);
        let jf = random_jordan_form(&mut r, 8, 4, 1e3).unwrap();
        assert_eq!(jf.n(), 8);
        assert!(numkit::cond_estimate(jf.u()).unwrap() <= 1e3);
        assert!(jf.cells().iter().all(|c| c.size <= 4));
    }
}
