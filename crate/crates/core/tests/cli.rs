use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use darboux::cli::{generate_scenario, run_loaded, Mode, RunOptions, OUT_DIR_ENV};
use darboux::numkit::{hermitian_part, zeros};

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn darboux(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darboux"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove(OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn counterexample_scenario_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = darboux(&["run", bundled("remark24_counterexample.json").to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("non_commutation[0]"));
    let dir = out.path().join("remark24_counterexample");
    for f in ["report.json", "roots.json", "residuals.json"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let entry = report["entries"].as_array().unwrap().iter().find(|e| e["id"] == "non_commutation[0]").unwrap();
    assert!(entry["residual"].as_f64().unwrap() > 0.2);
}

#[test]
fn trivial_hamiltonians_exports_plot_data() {
    let out = tempfile::tempdir().unwrap();
    let o = darboux(&["run", bundled("trivial_hamiltonians.json").to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = out.path().join("trivial_hamiltonians");
    for f in ["residuals_vs_x.csv", "s_eigenvalues.csv", "hamiltonian_defect.csv", "trajectory.csv"] {
        assert_eq!(csv_rows(&dir.join(f)).len(), 1001, "{f}");
    }
    let eigs = csv_rows(&dir.join("s_eigenvalues.csv"));
    for col in 1..eigs[0].len() {
        let values: Vec<f64> = eigs.iter().map(|r| r[col].parse().unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12), "eigenvalue column {col} increases");
    }
    assert!(!dir.with_file_name(".trivial_hamiltonians.partial").exists());
}

#[test]
fn empty_span_is_an_input_error() {
    let out = tempfile::tempdir().unwrap();
    let mut s = generate_scenario(Mode::GbdtSym, &[], 1).unwrap();
    s.span = Some([0.5, 0.5]);
    let file = out.path().join("bad.json");
    std::fs::write(&file, s.to_json()).unwrap();
    let o = darboux(&["run", file.to_str().unwrap()], &out.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("span"), "{}", stderr(&o));
    assert!(!out.path().join("o").join(&s.name).exists());
}

#[test]
fn unknown_field_is_named() {
    let out = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(bundled("remark24_counterexample.json")).unwrap();
    let text = text.replacen("\"ell\"", "\"degree\"", 1);
    let file = out.path().join("bad.json");
    std::fs::write(&file, text).unwrap();
    let o = darboux(&["run", file.to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("inputs.roots.constructed"), "{}", stderr(&o));
}

#[test]
fn tightened_tolerance_fails_with_code_one() {
    let out = tempfile::tempdir().unwrap();
    let o = darboux(&["run", bundled("trivial_hamiltonians.json").to_str().unwrap(), "--tol-ode", "1e-20"], out.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn nonpositive_step_override_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let o = darboux(&["run", bundled("trivial_hamiltonians.json").to_str().unwrap(), "--step", "-1"], out.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_is_deterministic_and_runnable() {
    let out = tempfile::tempdir().unwrap();
    let a = darboux(&["gen", "gbdt-sym", "3", "1", "1", "2", "--seed", "7", "--stdout"], out.path());
    let b = darboux(&["gen", "gbdt-sym", "3", "1", "1", "2", "--seed", "7", "--stdout"], out.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let o = darboux(&["gen", "dynamics", "--seed", "4"], out.path());
    assert_eq!(o.status.code(), Some(0));
    let file = stdout(&o).trim().to_string();
    let r = darboux(&["run", &file], out.path());
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    assert!(out.path().join("dynamics-seed4").join("psi.csv").is_file());
}

#[test]
fn gen_rejects_zero_dimensions() {
    let out = tempfile::tempdir().unwrap();
    let o = darboux(&["gen", "roots", "0", "--stdout"], out.path());
    assert_eq!(o.status.code(), Some(2));
    let o = darboux(&["gen", "nonsense", "--stdout"], out.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn batch_reports_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    std::fs::copy(bundled("remark24_counterexample.json"), dir.path().join("a.json")).unwrap();
    std::fs::write(dir.path().join("c.json"), generate_scenario(Mode::Dirac, &[], 2).unwrap().to_json()).unwrap();
    let o = darboux(&["batch", dir.path().to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(out.path().join("remark24_counterexample").is_dir());
    assert!(out.path().join("dirac-seed2").is_dir());

    std::fs::write(dir.path().join("b.json"), "{\"name\": \"broken\"}").unwrap();
    let o = darboux(&["batch", dir.path().to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("ERROR"));
}

#[test]
fn output_dir_from_environment() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_darboux"))
        .args(["run", bundled("remark24_counterexample.json").to_str().unwrap()])
        .env(OUT_DIR_ENV, out.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.path().join("remark24_counterexample").join("report.json").is_file());
}

#[test]
fn zero_pi_gives_zero_residual_columns() {
    let out = tempfile::tempdir().unwrap();
    let mut s = generate_scenario(Mode::GbdtSym, &[3, 1, 1, 2], 5).unwrap();
    s.name = "zero-pi".into();
    let t = s.inputs.triple.as_mut().unwrap();
    t.a = hermitian_part(&t.a);
    t.pi0 = zeros(3, 2);
    let report = run_loaded(&s, &RunOptions { out_dir: Some(out.path().to_path_buf()), ..Default::default() }).unwrap();
    assert!(report.pass(), "{}", report.summary());
    let rows = csv_rows(&out.path().join("zero-pi").join("residuals_vs_x.csv"));
    assert_eq!(rows.len(), 1001);
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0)));
}
