//! Scenario runner behind the `darboux` binary: scenario files in, reports
//! and CSV/JSON exports out.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (or the
//! numerics break down mid-run), 2 for unusable input.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;

pub mod export;
pub mod generate;
mod pipeline;
pub mod scenario;

pub use export::{emit_plot_data, Exporter, PlotData};
pub use generate::generate_scenario;
pub use scenario::{Mode, Overrides, Scenario};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DARBOUX_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("scenario `{scenario}`: {source}")]
    Module {
        scenario: String,
        #[source]
        source: Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Module { source, .. } => match source {
                Error::InvalidInput(_)
                | Error::Dimension { .. }
                | Error::NonFinite(_)
                | Error::GridMismatch
                | Error::PoleClash { .. }
                | Error::Pole { .. }
                | Error::ContractionViolation { .. }
                | Error::EigenvalueSymmetry => 2,
                _ => 1,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

/// A reported quantity that is not a pass/fail check.
#[derive(Debug, Clone, Serialize)]
pub struct Observation {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub mode: Mode,
    pub entries: Vec<CheckEntry>,
    pub observations: Vec<Observation>,
    pub artifacts: Vec<PathBuf>,
}

impl Report {
    pub fn new(name: &str, mode: Mode) -> Self {
        Report { name: name.to_string(), mode, entries: Vec::new(), observations: Vec::new(), artifacts: Vec::new() }
    }

    /// Adds a check `residual ≤ tolerance`; NaN fails.
    pub fn at_most(&mut self, id: impl Into<String>, residual: f64, tolerance: f64) {
        let pass = residual <= tolerance;
        self.entries.push(CheckEntry { id: id.into(), residual, tolerance, comparison: Comparison::AtMost, pass });
    }

    /// Adds a check `value ≥ bound`; NaN fails.
    pub fn at_least(&mut self, id: impl Into<String>, value: f64, bound: f64) {
        let pass = value >= bound;
        self.entries.push(CheckEntry {
            id: id.into(),
            residual: value,
            tolerance: bound,
            comparison: Comparison::AtLeast,
            pass,
        });
    }

    pub fn observe(&mut self, id: impl Into<String>, value: f64) {
        self.observations.push(Observation { id: id.into(), value });
    }

    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = format!("{} [{}]: {}\n", self.name, self.mode.name(), if self.pass() { "PASS" } else { "FAIL" });
        for e in &self.entries {
            let op = match e.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            let verdict = if e.pass { "ok  " } else { "FAIL" };
            out.push_str(&format!("  {verdict} {:<40} {:.3e} {op} {:.1e}\n", e.id, e.residual, e.tolerance));
        }
        for o in &self.observations {
            out.push_str(&format!("  info {:<40} {:.3e}\n", o.id, o.value));
        }
        out
    }
}

/// Where and how to run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Root of the per-scenario output directories; `None` disables export.
    pub out_dir: Option<PathBuf>,
    pub overrides: Overrides,
}

/// Loads, runs and exports one scenario file.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<Report, CliError> {
    let mut scenario = Scenario::load(path)?;
    scenario.apply(&opts.overrides)?;
    run_loaded(&scenario, opts)
}

/// Runs a parsed scenario. Outputs go to `<out_dir>/<name>/`; on failure
/// nothing from this run is left behind.
pub fn run_loaded(scenario: &Scenario, opts: &RunOptions) -> Result<Report, CliError> {
    scenario.validate()?;
    let Some(root) = &opts.out_dir else {
        return pipeline::run(scenario, None)
            .map_err(|source| CliError::Module { scenario: scenario.name.clone(), source });
    };
    let final_dir = root.join(&scenario.name);
    let partial = root.join(format!(".{}.partial", scenario.name));
    if partial.exists() {
        std::fs::remove_dir_all(&partial).map_err(|e| CliError::io(&partial, e))?;
    }
    std::fs::create_dir_all(&partial).map_err(|e| CliError::io(&partial, e))?;
    let mut exporter = Exporter::new(&partial);
    let result = pipeline::run(scenario, Some(&mut exporter))
        .map_err(|source| CliError::Module { scenario: scenario.name.clone(), source })
        .map(|mut report| {
            report.artifacts = exporter.written_relative_to(&final_dir);
            report.artifacts.push(final_dir.join("report.json"));
            report
        });
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&partial);
            return Err(e);
        }
    };
    if final_dir.exists() {
        std::fs::remove_dir_all(&final_dir).map_err(|e| CliError::io(&final_dir, e))?;
    }
    std::fs::rename(&partial, &final_dir).map_err(|e| CliError::io(&final_dir, e))?;
    let report_path = final_dir.join("report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report).expect("report serializes"))
        .map_err(|e| CliError::io(&report_path, e))?;
    Ok(report)
}

/// Per-file outcome of a batch run.
pub type BatchResults = Vec<(PathBuf, Result<Report, CliError>)>;

/// Runs every `*.json` scenario in `dir` concurrently, in file-name order.
pub fn batch(dir: &Path, opts: &RunOptions) -> Result<BatchResults, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!("no scenario files in {}", dir.display())));
    }
    Ok(files
        .into_par_iter()
        .map(|p| {
            let r = run_scenario(&p, opts);
            (p, r)
        })
        .collect())
}

/// Combined exit code: input errors dominate check failures.
pub fn batch_exit_code(results: &BatchResults) -> i32 {
    results
        .iter()
        .map(|(_, r)| match r {
            Ok(rep) => rep.exit_code(),
            Err(e) => e.exit_code(),
        })
        .max()
        .unwrap_or(0)
}
