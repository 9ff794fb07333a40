//! Batch front end for the Berezin workbench: reproduces the inequality
//! chain of the bump example, runs boundary probes and exports tables.
//!
//! Exit codes: 0 success, 1 computation or input failure, 2 inequality
//! chain failure, 3 inconclusive probe.

pub mod args;
pub mod commands;
pub mod expr;
pub mod output;
pub mod run_config;

use berezin_core::SupSearch;

pub use args::{Cli, Command};
pub use commands::{DomainPreset, Status};
pub use expr::SymbolExpr;
pub use run_config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Default caps per command: the Reinhardt series near `|w| = 1` needs many
/// `m` terms and few `n` terms.
pub const TABLE_CAPS: (usize, usize) = (60, 60);
pub const PROBE_CAPS: (usize, usize) = (16, 8192);
pub const EVAL_CAPS: (usize, usize) = (200, 200);
pub const MASS_CAPS: (usize, usize) = (1, 4096);

fn symbol(text: &str) -> Result<SymbolExpr, CliError> {
    SymbolExpr::parse(text).map_err(|e| CliError::Usage(e.to_string()))
}

/// Runs one command and returns its status; documents go to stdout.
pub fn execute(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::ReproduceExample {
            common,
            coarse_step,
            refinements,
        } => {
            let rc = common.resolve(TABLE_CAPS)?;
            let search = SupSearch::new(coarse_step, refinements).map_err(|e| CliError::Usage(e.to_string()))?;
            let (status, summary) = commands::reproduce_example(&rc, search)?;
            commands::print(&summary)?;
            Ok(status)
        }
        Command::Probe {
            common,
            domain,
            symbol: s,
            target,
            paths,
            steps,
        } => {
            let rc = common.resolve(PROBE_CAPS)?;
            let (status, doc) = commands::probe(&rc, domain, &symbol(&s)?, &target, &paths, steps)?;
            commands::print(&doc)?;
            Ok(status)
        }
        Command::Tables {
            common,
            symbol: s,
            grid_step,
        } => {
            let rc = common.resolve(TABLE_CAPS)?;
            let doc = commands::tables(&rc, &symbol(&s)?, grid_step)?;
            commands::print(&doc)?;
            Ok(Status::Success)
        }
        Command::BerezinEval {
            common,
            domain,
            symbol: s,
            point,
        } => {
            let rc = common.resolve(EVAL_CAPS)?;
            let doc = commands::berezin_eval(&rc, domain, &symbol(&s)?, &point)?;
            commands::print(&doc)?;
            Ok(Status::Success)
        }
        Command::MassProfile {
            common,
            tau,
            grid_points,
            eps,
        } => {
            let rc = common.resolve(MASS_CAPS)?;
            let doc = commands::mass_profile_cmd(&rc, tau, grid_points, eps)?;
            commands::print(&doc)?;
            Ok(Status::Success)
        }
    }
}

/// [`execute`] mapped to a process exit code, with diagnostics on stderr.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(Status::ChainFailed(why)) => {
            eprintln!("inequality chain failed: {why}");
            2
        }
        Ok(Status::Inconclusive) => {
            eprintln!("probe inconclusive: no path limit passed the Cauchy diagnostic");
            3
        }
        Ok(Status::Success) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
