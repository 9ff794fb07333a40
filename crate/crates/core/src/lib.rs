//! Numerical workbench for Bergman-space operator theory on complete Reinhardt
//! domains in C² and on products of discs and balls.
//!
//! The crate computes monomial norms and truncated Bergman kernel series,
//! diagonalizes Toeplitz operators with radial symbols, evaluates Berezin
//! transforms through several independent backends, and probes boundary
//! limits of those transforms.
//!
//! Module map:
//!
//! * [`quadrature`]: Gauss–Legendre rules, adaptive Gauss–Kronrod, radial moments.
//! * [`domain`]: Hartogs profiles, bump symbols, Reinhardt and product domains.
//! * [`symbol`]: radial and separable multiplication symbols.
//! * [`bergman`]: monomial norm tables, kernel series, closed-form kernels.
//! * [`toeplitz`]: eigenvalue tables, norms and spectra of radial Toeplitz operators.
//! * [`berezin`]: Berezin transform backends and the sup-norm search.
//! * [`regularity`]: path limits, boundary probes and mass profiles.

pub mod berezin;
pub mod bergman;
pub mod config;
pub mod domain;
mod error;
pub mod quadrature;
pub mod regularity;
mod series;
pub mod summation;
pub mod symbol;
pub mod toeplitz;

pub use num_complex::Complex64;

pub use berezin::{
    BerezinEvaluator, BerezinValue, DiagonalBerezin, DiscBerezin, ProductBerezin, SearchRegion,
    SupSearch,
};
pub use bergman::{
    kernel_closed_form, BergmanKernel, KernelValue, MonomialNormTable, NormalizedKernel,
    ReinhardtKernel,
};
pub use config::{DomainConfig, KeyValueFile};
pub use domain::{
    build_bump, default_profile, BumpSymbol, Factor, MonomialIndex, ProductDomainSpec,
    RadialProfile, ReinhardtDomain2D,
};
pub use error::{Error, Result};
pub use quadrature::{adaptive_integrate, fixed_gauss, radial_moment, MomentValue, QuadratureResult};
pub use regularity::{BoundaryPath, MassProfile, PathLimit, ProbeReport, Verdict};
pub use symbol::{DiscSymbol, RadialSymbol, SeparableSymbol, SeparableTerm};
pub use toeplitz::EigenvalueTable;

/// Default fraction of each radial bound inside which series and kernels are evaluated.
pub const EVALUATION_MARGIN: f64 = 0.999;
