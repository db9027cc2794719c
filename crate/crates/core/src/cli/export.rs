//! CSV and JSON exports.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;
use crate::numkit::ComplexMatrix;

/// Writes files into one directory and remembers what it wrote.
#[derive(Debug)]
pub struct Exporter {
    dir: PathBuf,
    written: Vec<String>,
}

impl Exporter {
    pub fn new(dir: &Path) -> Self {
        Exporter { dir: dir.to_path_buf(), written: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Written files, as paths under `dir`.
    pub fn written_relative_to(&self, dir: &Path) -> Vec<PathBuf> {
        self.written.iter().map(|f| dir.join(f)).collect()
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, file: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(file);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(file.to_string());
        Ok(())
    }

    /// Numeric CSV with a header row.
    pub fn write_csv(&mut self, file: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let path = self.dir.join(file);
        let io = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(file.to_string());
        Ok(())
    }

    /// `x`, then each named matrix sequence flattened row-major with
    /// interleaved real and imaginary parts.
    pub fn write_trajectory(
        &mut self,
        file: &str,
        xs: &[f64],
        series: &[(&str, &[ComplexMatrix])],
    ) -> Result<(), CliError> {
        let mut header = vec!["x".to_string()];
        for (name, values) in series {
            if let Some(m) = values.first() {
                header.extend(matrix_columns(name, m.nrows(), m.ncols()));
            }
        }
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut row = vec![x];
                for (_, values) in series {
                    flatten_into(&values[i], &mut row);
                }
                row
            })
            .collect();
        self.write_csv(file, &header, &rows)
    }
}

pub(crate) fn matrix_columns(name: &str, rows: usize, cols: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(format!("{name}_{}_{}_re", r + 1, c + 1));
            out.push(format!("{name}_{}_{}_im", r + 1, c + 1));
        }
    }
    out
}

pub(crate) fn flatten_into(m: &ComplexMatrix, row: &mut Vec<f64>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            row.push(m[(r, c)].re);
            row.push(m[(r, c)].im);
        }
    }
}

/// Per-sample series for plotting.
#[derive(Debug, Clone, Default)]
pub struct PlotData {
    pub xs: Vec<f64>,
    /// Named residual columns, one value per sample.
    pub residuals: Vec<(String, Vec<f64>)>,
    /// Eigenvalues of `S(x)`, ascending, per sample.
    pub s_eigenvalues: Vec<Vec<f64>>,
    /// `‖H̃_k(x) − H_k(x)‖` per sample and pole.
    pub hamiltonian_defects: Vec<Vec<f64>>,
}

/// Writes `residuals_vs_x.csv`, `s_eigenvalues.csv` and
/// `hamiltonian_defect.csv`, one row per sample.
pub fn emit_plot_data(ex: &mut Exporter, data: &PlotData) -> Result<(), CliError> {
    let n = data.xs.len();
    let mut header = vec!["x".to_string()];
    header.extend(data.residuals.iter().map(|(name, _)| name.clone()));
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| std::iter::once(data.xs[i]).chain(data.residuals.iter().map(|(_, v)| v[i])).collect()).collect();
    ex.write_csv("residuals_vs_x.csv", &header, &rows)?;

    let with_x = |cols: &[Vec<f64>], prefix: &str| -> (Vec<String>, Vec<Vec<f64>>) {
        let width = cols.first().map_or(0, Vec::len);
        let mut header = vec!["x".to_string()];
        header.extend((1..=width).map(|k| format!("{prefix}_{k}")));
        let rows = (0..n).map(|i| std::iter::once(data.xs[i]).chain(cols[i].iter().copied()).collect()).collect();
        (header, rows)
    };
    let (h, r) = with_x(&data.s_eigenvalues, "lambda");
    ex.write_csv("s_eigenvalues.csv", &h, &r)?;
    let (h, r) = with_x(&data.hamiltonian_defects, "defect");
    ex.write_csv("hamiltonian_defect.csv", &h, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, identity};

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut ex = Exporter::new(dir.path());
        let m = identity(2) * c(1.0, 2.0);
        ex.write_trajectory("t.csv", &[0.0, 0.5], &[("Pi", &[m.clone(), m.clone()]), ("S", &[m.clone(), m])]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("x,Pi_1_1_re,Pi_1_1_im,Pi_1_2_re"));
        assert_eq!(lines[1].split(',').count(), 1 + 8 + 8);
        assert_eq!(ex.written_relative_to(Path::new("out")), vec![PathBuf::from("out/t.csv")]);
    }
}
