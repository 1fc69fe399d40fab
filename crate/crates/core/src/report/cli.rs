//! Command-line front end. Exit codes: 0 success, 1 identity failure,
//! 2 parse error, 3 unsupported Lagrangian or rejected constraints,
//! 4 internal verification failure, 5 initial state off the constraint surface.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::verify::{NumericOptions, DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS};

use super::specfile::{parse_assignments, SystemSpec};
use super::{render_analysis, render_relation, render_verification, Analysis, SimulationOptions};

#[derive(Parser, Debug)]
#[command(name = "singlag", version, about = "Analyse singular Lagrangians: constraints, K, and the fields Y, R, Delta")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full analysis and print a report
    Analyze {
        file: PathBuf,
        /// Also write the machine-readable report
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check the identity suite exactly and at random points
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Integrate both sides and compare the paths
    Simulate {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t1: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Initial velocity-space state, `name=value,...`
        #[arg(long, allow_hyphen_values = true)]
        initial: Option<String>,
        /// Directory for the two CSV files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze { file, json } => {
            let analysis = Analysis::new(SystemSpec::from_path(&file)?)?;
            let report = analysis.report()?;
            print!("{}", render_analysis(&report));
            if let Some(path) = json {
                std::fs::write(&path, report.to_json() + "\n")?;
            }
            let failures = report.failures();
            if failures.is_empty() {
                Ok(0)
            } else {
                Err(Error::Internal(format!("failed checks: {}", failures.join(", "))))
            }
        }
        Command::Verify { file, trials, tol, seed } => {
            let analysis = Analysis::new(SystemSpec::from_path(&file)?)?;
            let report = analysis.verify(Some(NumericOptions { trials, tol, seed }))?;
            print!("{}", render_verification(&report));
            let failing = report.failing_tags();
            if failing.is_empty() {
                println!("all {} identities hold", report.rows.len());
                Ok(0)
            } else {
                eprintln!("failing identities: {}", failing.join(" "));
                Ok(1)
            }
        }
        Command::Simulate { file, t0, t1, dt, initial, out_dir } => {
            let analysis = Analysis::new(SystemSpec::from_path(&file)?)?;
            let initial = initial.map(|s| parse_assignments(0, &s)).transpose()?;
            let out = analysis.simulate(&SimulationOptions { t0, t1, dt, initial })?;
            std::fs::create_dir_all(&out_dir)?;
            let name = &analysis.spec.name;
            let lag = out_dir.join(format!("{name}_lagrangian.csv"));
            let ham = out_dir.join(format!("{name}_hamiltonian.csv"));
            out.xi.write_csv(BufWriter::new(File::create(&lag)?))?;
            out.eta.write_csv(BufWriter::new(File::create(&ham)?))?;
            println!("wrote {} and {}", lag.display(), ham.display());
            println!("max drift: lagrangian {:.3e}, hamiltonian {:.3e}", out.xi.max_drift(), out.eta.max_drift());
            print!("{}", render_relation(&out.relation));
            Ok(0)
        }
    }
}
