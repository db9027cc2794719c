//! Scenario files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gbdt::{GeneralGBDTData, MatrixFn, RationalSystemCoeffs};
use crate::matroot::{JordanForm, SpectralFunction};
use crate::numkit::{ComplexMatrix, Tolerance, C64};
use crate::snode::SNodeTriple;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Roots,
    GbdtSym,
    GbdtGeneral,
    Dynamics,
    Dirac,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Roots => "roots",
            Mode::GbdtSym => "gbdt-sym",
            Mode::GbdtGeneral => "gbdt-general",
            Mode::Dynamics => "dynamics",
            Mode::Dirac => "dirac",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CliError::Input(format!("unknown mode `{s}`")))
    }
}

/// A verification scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Spectral parameters, `[re, im]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z_samples: Vec<C64>,
    /// `ζ` vectors for the several-variable checks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zeta_samples: Vec<Vec<f64>>,
    /// `x` values for pointwise checks; the span midpoint when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_samples: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Inputs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<RootsInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<SNodeTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<MatrixFn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<GeneralGBDTData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<RationalSystemCoeffs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirac: Option<DiracInput>,
}

/// Closed-form family to compare the integrated trajectory against.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedFormSpec {
    /// `H_k ≡ I`; the betas may be omitted.
    Trivial,
    /// Two constant betas; `jordan` is a Jordan form of `A`.
    ConstantBeta { jordan: JordanForm },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsInput {
    /// Jordan form of `A`.
    pub jordan: JordanForm,
    /// Roots built cell by cell and checked for `Q^ℓ = f(A)`, `AQ = QA`.
    #[serde(default)]
    pub constructed: Vec<RootCheck>,
    /// Roots given explicitly (or built from the Jordan form of `f(A)`),
    /// checked for `Q^ℓ = f(A)` and, optionally, for failing to commute.
    #[serde(default)]
    pub explicit: Vec<ExplicitRoot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commuting_family: Option<CommutingFamily>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootCheck {
    pub f: SpectralFunction,
    pub ell: u32,
    /// Branch index per cell; principal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitRoot {
    pub f: SpectralFunction,
    pub ell: u32,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serial::opt_matrix")]
    pub q: Option<ComplexMatrix>,
    /// Jordan form of `f(A)`; the root is rebuilt from it with `branches`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_jordan: Option<JordanForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<u32>>,
    /// Lower bound required for `‖AQ − QA‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_commutator: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutingFamily {
    pub ell: u32,
    /// Real shifts `z`; every pair is checked.
    pub zs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracInput {
    pub m1: usize,
    pub m2: usize,
    /// Strict contractions `ρ_k` (`m1 × m2`); `C_k` is their Halmos extension.
    #[serde(with = "crate::serial::matrices")]
    pub contractions: Vec<ComplexMatrix>,
    /// Initial vector, `[re, im]` entries.
    pub y0: Vec<C64>,
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub step: Option<f64>,
    pub tol_structural: Option<f64>,
    pub tol_ode: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Input(format!("schema violation at `{path}`: {}", e.into_inner()))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(step) = o.step {
            self.step = Some(step);
        }
        let structural = o.tol_structural.unwrap_or(self.tolerances.structural);
        let ode = o.tol_ode.unwrap_or(self.tolerances.ode);
        self.tolerances = Tolerance::new(structural, ode).map_err(|e| CliError::Input(e.to_string()))?;
        self.validate()
    }

    fn needs_trajectory(&self) -> bool {
        matches!(self.mode, Mode::GbdtSym | Mode::GbdtGeneral | Mode::Dynamics)
    }

    /// Mode-required inputs, span and step.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Input(format!("schema violation at `{field}`: {why}")));
        if self.name.trim().is_empty() {
            return bad("name", "must be nonempty");
        }
        if self.name.contains(['/', '\\']) || self.name == "." || self.name == ".." {
            return bad("name", "must be usable as a directory name");
        }
        if self.needs_trajectory() {
            match self.span {
                None => return bad("span", "required for this mode"),
                Some([a, b]) if !(a.is_finite() && b.is_finite()) || a == b => {
                    return bad("span", "must be a nonempty finite interval")
                }
                _ => {}
            }
            match self.step {
                None => return bad("step", "required for this mode"),
                Some(h) if !(h > 0.0 && h.is_finite()) => return bad("step", "must be positive"),
                _ => {}
            }
        }
        let i = &self.inputs;
        match self.mode {
            Mode::Roots if i.roots.is_none() => bad("inputs.roots", "required for mode roots"),
            Mode::GbdtSym | Mode::Dynamics => {
                if i.triple.is_none() {
                    return bad("inputs.triple", "required for this mode");
                }
                if i.betas.is_none() && !matches!(i.closed_form, Some(ClosedFormSpec::Trivial)) {
                    return bad("inputs.betas", "required unless closed_form is trivial");
                }
                if self.mode == Mode::Dynamics && self.zeta_samples.is_empty() {
                    return bad("zeta_samples", "required for mode dynamics");
                }
                Ok(())
            }
            Mode::GbdtGeneral => {
                let explicit = i.general.is_some() && i.coeffs.is_some();
                let symmetric = i.triple.is_some() && i.betas.is_some();
                if !(explicit || symmetric) {
                    return bad("inputs.general", "needs general + coeffs, or triple + betas");
                }
                Ok(())
            }
            Mode::Dirac if i.dirac.is_none() => bad("inputs.dirac", "required for mode dirac"),
            Mode::Dirac if self.z_samples.is_empty() => bad("z_samples", "required for mode dirac"),
            _ => Ok(()),
        }
    }

    pub fn span(&self) -> (f64, f64) {
        let [a, b] = self.span.unwrap_or([0.0, 1.0]);
        (a, b)
    }

    pub fn step(&self) -> f64 {
        self.step.unwrap_or(1e-3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_span_is_a_schema_violation() {
        let text = r#"{"name":"x","mode":"gbdt-sym","span":[0,0],"step":0.1,"inputs":{}}"#;
        match Scenario::from_json(text) {
            Err(CliError::Input(msg)) => assert!(msg.contains("span"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn offending_field_is_named() {
        let text = r#"{"name":"x","mode":"roots","inputs":{"roots":{"jordan":{"u":[[[1,0]]],"cells":[[1,0,"a"]]}}}}"#;
        match Scenario::from_json(text) {
            Err(CliError::Input(msg)) => assert!(msg.contains("inputs.roots.jordan"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let text = r#"{"name":"x","mode":"nope","inputs":{}}"#;
        assert!(matches!(Scenario::from_json(text), Err(CliError::Input(m)) if m.contains("mode")));
    }

    #[test]
    fn overrides_replace_step_and_tolerances() {
        let text = r#"{"name":"x","mode":"dirac","z_samples":[[1,0]],
            "inputs":{"dirac":{"m1":1,"m2":1,"contractions":[],"y0":[[1,0],[0,0]]}}}"#;
        let mut s = Scenario::from_json(text).unwrap();
        s.apply(&Overrides { step: Some(0.5), tol_structural: Some(1e-9), tol_ode: None }).unwrap();
        assert_eq!(s.step, Some(0.5));
        assert_eq!(s.tolerances.structural, 1e-9);
        assert!(s.apply(&Overrides { tol_ode: Some(-1.0), ..Default::default() }).is_err());
    }
}
