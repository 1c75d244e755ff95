//! `subriem`: operator coefficients, equality checks, geodesic flow and Lie
//! data for frame-described sub-Riemannian charts.
//!
//! Reports go to stdout as one line of JSON; diagnostics go to stderr.

mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{Failure, LvdefArgs, Operator, Outcome, RuleArg, EXIT_CHECK_FAILED};

#[derive(Parser)]
#[command(name = "subriem", version, about = "Sub-Laplacians from frame descriptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local coefficients of an operator at points.
    Coeffs {
        /// Spec file path, or `builtin:<name>`.
        spec: String,
        #[arg(long, value_enum)]
        operator: Operator,
        /// Volume density τ (for divgrad).
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        /// Comma-separated coordinates; repeatable. Defaults to the sample points.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Test whether m·L^V = div^ω grad_H for ω = τ dx.
    Check {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        #[arg(long, default_value_t = commands::DEFAULT_CHECK_TOL)]
        tol: f64,
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Integrate the Hamilton-Jacobi equations with RK4.
    Flow {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Record every k-th step (default: ten records).
        #[arg(long)]
        every: Option<usize>,
    },
    /// Estimate L^V f from its sphere-average definition.
    Lvdef {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// RK4 steps per leg.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to exact-circle for m ≤ 2, antithetic otherwise.
        #[arg(long, value_enum)]
        rule: Option<RuleArg>,
        #[arg(long)]
        richardson: bool,
    },
    /// Structure constants, unimodularity and Haar operators.
    Lie { spec: String },
    /// Dump the built-in spec files.
    Catalog {
        /// Only this entry.
        #[arg(long)]
        name: Option<String>,
    },
}

fn configure_threads() {
    let Ok(raw) = std::env::var("SUBRIEM_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            // only fails if a global pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring SUBRIEM_THREADS={raw:?}"),
    }
}

/// Writes one line to stdout; a reader that hung up early is not an error.
fn print_line(line: &str) {
    let mut out = io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}") {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: writing stdout: {e}");
        }
    }
}

fn emit<T: Serialize>(r: Outcome<T>) -> Result<(), Failure> {
    print_line(&output::to_json(&r?));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Coeffs {
            spec,
            operator,
            tau,
            points,
        } => emit(commands::coeffs(&spec, operator, tau.as_deref(), &points)),
        Command::Check {
            spec,
            tau,
            tol,
            points,
        } => {
            let report = commands::check(&spec, tau.as_deref(), tol, &points)?;
            let json = output::to_json(&report);
            if report.passed() {
                print_line(&json);
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_CHECK_FAILED,
                    message: format!("residual exceeds --tol {tol:e}"),
                    report: Some(json),
                })
            }
        }
        Command::Flow {
            spec,
            x,
            p,
            t,
            steps,
            every,
        } => emit(commands::flow_cmd(&spec, x.as_deref(), p.as_deref(), t, steps, every)),
        Command::Lvdef {
            spec,
            f,
            points,
            samples,
            h,
            steps,
            seed,
            rule,
            richardson,
        } => emit(commands::lvdef(
            &spec,
            &LvdefArgs {
                f: f.as_deref(),
                points: &points,
                samples,
                h,
                steps,
                seed,
                rule,
                richardson,
            },
        )),
        Command::Lie { spec } => emit(commands::lie_cmd(&spec)),
        Command::Catalog { name } => emit(commands::catalog_cmd(name.as_deref())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(report) = f.report {
                print_line(&report);
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
