use std::path::PathBuf;

use berezin_core::Complex64;
use clap::{Args, Parser, Subcommand};

use crate::commands::{parse_coord, DomainPreset};
use crate::run_config::{parse_caps, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "berezin", version, about = "Berezin transforms and Toeplitz operators on Reinhardt and product domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key = value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Series caps N,M.
    #[arg(long, value_parser = parse_caps)]
    pub caps: Option<(usize, usize)>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Common {
    pub fn resolve(&self, default_caps: (usize, usize)) -> Result<RunConfig, CliError> {
        RunConfig::resolve(self.config.as_deref(), self.caps, self.tol, self.out.clone(), default_caps)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks the norm inequality chain for the bump symbol on the Reinhardt domain.
    ReproduceExample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.02)]
        coarse_step: f64,
        #[arg(long, default_value_t = 4)]
        refinements: usize,
    },
    /// Compares Berezin limits along several paths to a boundary point.
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = DomainPreset::Example)]
        domain: DomainPreset,
        #[arg(long)]
        symbol: String,
        /// Boundary point, comma-separated coordinates `re` or `re:im`.
        #[arg(long, value_parser = parse_coord, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        target: Vec<Complex64>,
        #[arg(long, value_delimiter = ',', default_value = "normal,tangential,slant")]
        paths: Vec<String>,
        #[arg(long, default_value_t = 12)]
        steps: usize,
    },
    /// Writes norm, eigenvalue and Berezin grid tables.
    Tables {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "bump")]
        symbol: String,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
    },
    /// Evaluates one Berezin transform.
    BerezinEval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = DomainPreset::Example)]
        domain: DomainPreset,
        #[arg(long)]
        symbol: String,
        #[arg(long, value_parser = parse_coord, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        point: Vec<Complex64>,
    },
    /// Fibre mass profile of the normalized kernel at (0, tau).
    MassProfile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.99)]
        tau: f64,
        #[arg(long, default_value_t = 201)]
        grid_points: usize,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
    },
}
