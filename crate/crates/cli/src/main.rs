// SPDX-License-Identifier: Apache-2.0

//! `bsdsynth`: learn, check and emit circuits from black-box oracles.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or input
//! error, 3 capability limit (budget, exhaustive cap, oracle failure),
//! 4 design in the wrong state.

mod bench;
mod commands;
mod manifest;
mod source;

use std::process::ExitCode;

use bsdsynth::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bsdsynth", version, about = "Learn combinational circuits from input-output behavior")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "BSDSYNTH_THREADS")]
    threads: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a design from an oracle.
    Learn(commands::LearnArgs),
    /// Measure a design's accuracy against an oracle.
    Validate(commands::ValidateArgs),
    /// Write a design as DOT, netlist or JSON.
    Emit(commands::EmitArgs),
    /// Print the output-bit distance matrix and clustering.
    Distance(commands::DistanceArgs),
    /// Relearn a design with counterexamples added.
    Refine(commands::RefineArgs),
    /// Run the reference scenarios and print a pass/fail table.
    Bench(bench::BenchArgs),
    /// Serve a builtin oracle over the external-process protocol.
    #[command(hide = true)]
    Serve(commands::ServeArgs),
}

/// Failure with its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InputShape { .. }
            | Error::Domain(_)
            | Error::Config(_)
            | Error::Parse { .. }
            | Error::Inconsistent { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Budget { .. }
            | Error::Protocol { .. }
            | Error::AbsentQuery(_)
            | Error::Estimate(_)
            | Error::CapExceeded { .. }
            | Error::PartialResult { .. } => 3,
            Error::NotConverged { .. } | Error::NotFinalized { .. } => 4,
        };
        Failure {
            code,
            message: e.to_string().replace('\n', " "),
        }
    }
}

pub type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let result = match cli.command {
        Command::Learn(a) => commands::learn(a),
        Command::Validate(a) => commands::validate(a),
        Command::Emit(a) => commands::emit(a),
        Command::Distance(a) => commands::distance(a),
        Command::Refine(a) => commands::refine(a),
        Command::Bench(a) => bench::run(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
