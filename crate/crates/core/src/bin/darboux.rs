use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use darboux::cli::{self, CliError, Mode, Overrides, RunOptions, OUT_DIR_ENV};

/// Verify matrix roots, GBDT transforms and their dynamics from scenario files.
#[derive(Parser)]
#[command(name = "darboux", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Override the integration step of every scenario.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Override the structural tolerance.
    #[arg(long, global = true)]
    tol_structural: Option<f64>,
    /// Override the trajectory tolerance.
    #[arg(long, global = true)]
    tol_ode: Option<f64>,
    /// Output root; each scenario writes to `<out>/<name>/`.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "darboux-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { file: PathBuf },
    /// Generate a random scenario and write it to `<out>/<name>.json`.
    Gen {
        kind: Mode,
        /// Mode-specific dimensions, e.g. `n m1 m2 r` for gbdt-sym.
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print to stdout instead of writing a file.
        #[arg(long)]
        stdout: bool,
    },
    /// Run every `*.json` scenario in a directory.
    Batch { dir: PathBuf },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions {
        out_dir: Some(args.out.clone()),
        overrides: Overrides { step: args.step, tol_structural: args.tol_structural, tol_ode: args.tol_ode },
    };
    match args.command {
        Command::Run { file } => match cli::run_scenario(&file, &opts) {
            Ok(report) => {
                print!("{}", report.summary());
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => fail(&e),
        },
        Command::Gen { kind, dims, seed, stdout } => {
            let scenario = match cli::generate_scenario(kind, &dims, seed) {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            let text = scenario.to_json();
            if stdout {
                println!("{text}");
                return ExitCode::SUCCESS;
            }
            let path = args.out.join(format!("{}.json", scenario.name));
            let written = std::fs::create_dir_all(&args.out).and_then(|_| std::fs::write(&path, text + "\n"));
            match written {
                Ok(()) => {
                    println!("{}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&CliError::Io { path, source: e }),
            }
        }
        Command::Batch { dir } => {
            let results = match cli::batch(&dir, &opts) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            for (path, r) in &results {
                match r {
                    Ok(report) => print!("{}", report.summary()),
                    Err(e) => println!("{}: ERROR {e}", path.display()),
                }
            }
            ExitCode::from(cli::batch_exit_code(&results) as u8)
        }
    }
}
