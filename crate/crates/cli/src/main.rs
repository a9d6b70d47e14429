//! `ptwell`: spectra, critical couplings, SUSY hierarchies and oracle checks
//! for the PT-symmetric square well.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ptwell_core::susy::EliminationPlan;
use serde::Serialize;

use commands::{Failure, Format, HierarchyArgs, VerifyArgs};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "ptwell", version, about = "PT-symmetric square well: spectra, SUSY partners and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn coupling(raw: &str) -> Result<f64, String> {
    let z: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    if z >= 0.0 && z.is_finite() {
        Ok(z)
    } else {
        Err(format!("coupling must be finite and non-negative, got {z}"))
    }
}

fn tolerance(raw: &str) -> Result<f64, String> {
    let t: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(format!("tolerance must be positive, got {t}"))
    }
}

fn plan(raw: &str) -> Result<EliminationPlan, String> {
    raw.parse::<EliminationPlan>().map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the square well, with broken pairs tagged.
    Spectrum {
        #[arg(long, value_parser = coupling)]
        coupling: f64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
        levels: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Coupling at which the real pair of band `index` merges.
    Critical {
        #[arg(long)]
        index: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Potentials, spectra and PT flags of a SUSY hierarchy.
    Hierarchy {
        #[arg(long, value_parser = coupling)]
        coupling: f64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        /// Comma-separated steps: real, clower, cupper. Defaults to all real.
        #[arg(long, value_parser = plan)]
        plan: Option<EliminationPlan>,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        levels: u32,
        #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u32).range(2..))]
        samples: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare a hierarchy member's closed-form spectrum with the shooting oracle.
    Verify {
        #[arg(long, value_parser = coupling)]
        coupling: f64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        member: u32,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
        levels: u32,
        #[arg(long, value_parser = plan)]
        plan: Option<EliminationPlan>,
        #[arg(long, default_value_t = 1e-6, value_parser = tolerance)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Zero-coupling shapes: Gegenbauer proportionality and the sec² family.
    Limit {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
        m: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
        /// Ratio-variance tolerance.
        #[arg(long, default_value_t = 1e-8, value_parser = tolerance)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Diagnostic {
    error: DiagnosticBody,
}

#[derive(Serialize)]
struct DiagnosticBody {
    exit_code: u8,
    message: String,
}

fn run(command: Command) -> commands::Outcome {
    match command {
        Command::Spectrum { coupling, levels, output } => commands::spectrum(coupling, levels as usize, output),
        Command::Critical { index, output } => commands::critical(index, output),
        Command::Hierarchy { coupling, depth, plan, levels, samples, format, output } => {
            commands::hierarchy(HierarchyArgs {
                coupling,
                depth: depth as usize,
                plan,
                levels: levels as usize,
                samples: samples as usize,
                format,
                output,
            })
        }
        Command::Verify { coupling, member, levels, plan, tol, output } => commands::verify(VerifyArgs {
            coupling,
            member: member as usize,
            levels: levels as usize,
            plan,
            tol,
            output,
        }),
        Command::Limit { m, n, tol, output } => commands::limit(m as usize, n as usize, tol, output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(Failure::Solver(e)) => fail_solver(e.to_string()),
        Err(Failure::Io(e)) => fail_solver(format!("i/o: {e}")),
    }
}

fn fail_solver(message: String) -> ExitCode {
    eprintln!("error: {message}");
    let report = Diagnostic { error: DiagnosticBody { exit_code: EXIT_SOLVER, message } };
    print!("{}", output::to_json(&report));
    ExitCode::from(EXIT_SOLVER)
}
