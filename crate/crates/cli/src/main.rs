//! `villadsen`: exact finite-stage verifiers for Villadsen-type AH algebras.
//!
//! Every subcommand prints one JSON report on stdout. Exit status is 0 when
//! every check passed, 2 when a check failed or a resource guard refused the
//! computation, and 1 on usage or input errors.

mod cfp;
mod chern;
mod util;
mod v2;
mod vi;

use clap::{Parser, Subcommand};
use std::process::ExitCode;
use std::time::Instant;
use villadsen_core::report::Report;
use villadsen_core::Budget;

#[derive(Parser)]
#[command(name = "villadsen", version, about = "Exact finite-stage verifiers for Villadsen algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chern and Euler classes of a formal bundle
    Chern(chern::Args),
    /// Multiplicity bookkeeping for a type-I system
    Vi(vi::Args),
    /// Stages, traces, comparability and radius of comparison of type-II algebras
    V2(v2::Args),
    /// The corona factorization witness sequence
    Cfp(cfp::Args),
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let budget = match Budget::from_env() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let command: Vec<String> = argv.into_iter().skip(1).collect();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Chern(args) => chern::run(command.clone(), args, budget),
        Command::Vi(args) => vi::run(command.clone(), args, budget),
        Command::V2(args) => v2::run(command.clone(), args, budget),
        Command::Cfp(args) => cfp::run(command.clone(), args, budget),
    };
    let mut report = match result {
        Ok(report) => report,
        Err(e) => match util::refusal(&command, &e) {
            Some(report) => report,
            None => {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
        },
    };
    report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    println!("{}", report.to_json());
    summarize(&report);
    ExitCode::from(if report.ok { 0 } else { 2 })
}

fn summarize(report: &Report) {
    let failed: Vec<&str> = report.checks.iter().filter(|c| c.failed()).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        eprintln!("{}: {} checks, all passed", report.command.first().map_or("", String::as_str), report.checks.len());
    } else {
        eprintln!("verification failed: {}", failed.join(", "));
    }
}
