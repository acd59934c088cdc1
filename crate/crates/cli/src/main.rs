//! `pvguard`: static analysis of PV programs from the command line.
//!
//! Exit codes: 0 clean, 1 property violated, 2 input error, 3 search limit
//! exceeded, 4 inconclusive.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use pvguard_core::serial::DEFAULT_CLASS_LIMIT;
use pvguard_core::geometry::DEFAULT_MAX_STATES;
use pvguard_core::SearchLimits;

mod ascii;
mod commands;
mod report;

use commands::{Failure, Outcome, PropertyArg, WitnessKind};
use report::{digest, ReportEnvelope};

#[derive(Parser)]
#[command(name = "pvguard", version, about = "Deadlock and serializability analysis of PV programs")]
struct Cli {
    /// Print a JSON report on stdout
    #[arg(long, global = true)]
    json: bool,
    /// Largest grid a single search may allocate
    #[arg(long, global = true, env = "PVGUARD_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
    max_states: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a source file
    Check { file: PathBuf },
    /// Reachable deadlocks of a program
    Deadlocks {
        file: PathBuf,
        program: String,
        /// List potential deadlocks instead (blocked states, reachable or not)
        #[arg(long)]
        potential: bool,
    },
    /// Verdict for every number of copies of a thread
    Family {
        file: PathBuf,
        /// Thread name, or program name with --program
        name: String,
        property: PropertyArg,
        /// Decide deadlock freedom of a program from its small sub-programs
        #[arg(long)]
        program: bool,
        /// Serializability through potential deadlocks
        #[arg(long)]
        by_potential: bool,
    },
    /// Count execution classes of a program
    Classes {
        file: PathBuf,
        program: String,
        /// Classes allowed at a single state
        #[arg(long, default_value_t = DEFAULT_CLASS_LIMIT)]
        limit: u64,
    },
    /// Local choice points of a program
    Lcp { file: PathBuf, program: String },
    /// Generate a thread showing a cut-off is sharp, e.g. `witness deadlock a:1 b:1`
    Witness {
        kind: WitnessKind,
        #[arg(required = true, value_name = "NAME:CAP")]
        capacities: Vec<String>,
    },
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Check { .. } => "check",
        Cmd::Deadlocks { .. } => "deadlocks",
        Cmd::Family { .. } => "family",
        Cmd::Classes { .. } => "classes",
        Cmd::Lcp { .. } => "lcp",
        Cmd::Witness { .. } => "witness",
    }
}

fn read(file: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::input(format!("{}: {e}", file.display())))
}

/// Runs the command; returns the digested input and the outcome.
fn run(cmd: &Cmd, limits: &SearchLimits) -> (String, Result<Outcome, Failure>) {
    if let Cmd::Witness { kind, capacities } = cmd {
        return match commands::witness(*kind, capacities) {
            Ok((o, source)) => (digest(source.as_bytes()), Ok(o)),
            Err(f) => (digest(capacities.join(" ").as_bytes()), Err(f)),
        };
    }
    let file = match cmd {
        Cmd::Check { file }
        | Cmd::Deadlocks { file, .. }
        | Cmd::Family { file, .. }
        | Cmd::Classes { file, .. }
        | Cmd::Lcp { file, .. } => file,
        Cmd::Witness { .. } => unreachable!(),
    };
    let text = match read(file) {
        Ok(t) => t,
        Err(f) => return (String::new(), Err(f)),
    };
    let sum = digest(text.as_bytes());
    let model = match commands::load(&text) {
        Ok(m) => m,
        Err(f) => return (sum, Err(f)),
    };
    let out = match cmd {
        Cmd::Check { .. } => Ok(commands::check(&model)),
        Cmd::Deadlocks { program, potential, .. } => commands::deadlocks(&model, program, *potential, limits),
        Cmd::Family {
            name,
            property,
            program,
            by_potential,
            ..
        } => commands::family(&model, name, *property, *program, *by_potential, limits),
        Cmd::Classes { program, limit, .. } => commands::classes(&model, program, *limit, limits),
        Cmd::Lcp { program, .. } => commands::lcp(&model, program, limits),
        Cmd::Witness { .. } => unreachable!(),
    };
    (sum, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = SearchLimits::with_max_states(cli.max_states);
    let start = Instant::now();
    let (sum, out) = run(&cli.cmd, &limits);
    let timing_ms = start.elapsed().as_millis() as u64;

    let (code, result) = match &out {
        Ok(o) => (o.code, o.result.clone()),
        Err(f) => {
            eprintln!("pvguard: {}", f.message());
            (f.code(), f.payload())
        }
    };
    if cli.json {
        let env = ReportEnvelope {
            tool_version: env!("CARGO_PKG_VERSION"),
            source_digest: sum,
            command: command_name(&cli.cmd).to_string(),
            result,
            timing_ms,
        };
        let body = serde_json::to_string_pretty(&env).expect("envelope serializes");
        let _ = writeln!(io::stdout().lock(), "{body}");
    } else if let Ok(o) = &out {
        let _ = write!(io::stdout().lock(), "{}", o.text);
    }
    ExitCode::from(code as u8)
}
