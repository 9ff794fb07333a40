use std::path::{Path, PathBuf};

use berezin_core::DomainConfig;
use serde::Serialize;

use crate::CliError;

/// Fully resolved settings for one command: config file values overridden
/// by command-line flags, falling back to command defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub caps: (usize, usize),
    pub tol: f64,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_TOL: f64 = 1e-10;

/// Caps and tolerance recorded next to every emitted number.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Provenance {
    pub n_cap: usize,
    pub m_cap: usize,
    pub tol: f64,
}

impl RunConfig {
    pub fn resolve(
        config: Option<&Path>,
        caps: Option<(usize, usize)>,
        tol: Option<f64>,
        out: Option<PathBuf>,
        default_caps: (usize, usize),
    ) -> Result<Self, CliError> {
        let domain = match config {
            Some(p) => DomainConfig::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => DomainConfig::default(),
        };
        let caps = caps.or(domain.caps).unwrap_or(default_caps);
        let tol = tol.or(domain.tol).unwrap_or(DEFAULT_TOL);
        if caps.0 < 1 || caps.1 < 1 {
            return Err(CliError::Config(format!("caps must be at least 1, got {},{}", caps.0, caps.1)));
        }
        if !(tol > 0.0 && tol <= 1e-3) {
            return Err(CliError::Config(format!("tol must lie in (0, 1e-3], got {tol}")));
        }
        Ok(Self {
            domain,
            caps,
            tol,
            out,
        })
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            n_cap: self.caps.0,
            m_cap: self.caps.1,
            tol: self.tol,
        }
    }

    /// Output directory, created on demand.
    pub fn out_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.out {
            Some(p) => {
                std::fs::create_dir_all(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                Ok(Some(p))
            }
            None => Ok(None),
        }
    }
}

/// Parses `N,M`.
pub fn parse_caps(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s.split_once(',').ok_or_else(|| format!("expected N,M, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("`{x}` is not a nonnegative integer"));
    Ok((p(n)?, p(m)?))
}
