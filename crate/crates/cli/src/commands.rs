use std::sync::Arc;

use berezin_core::berezin::{flat_disc_boundary_limit, SupResult, BEREZIN_RESIDUAL_THRESHOLD};
use berezin_core::config::ProfileKindConfig;
use berezin_core::regularity::{
    bc_probe, gamma_boundary_sup, mass_profile, GammaSup, PathLimitOptions,
};
use berezin_core::toeplitz::{EigenSummary, NormValue};
use berezin_core::{
    BerezinEvaluator, BoundaryPath, Complex64, DiagonalBerezin, EigenvalueTable, MonomialNormTable,
    ProbeReport, ProductBerezin, ProductDomainSpec, RadialProfile, ReinhardtDomain2D, SearchRegion,
    SupSearch, Verdict, EVALUATION_MARGIN,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::SymbolExpr;
use crate::output::{to_json, write_csv, write_json, write_with};
use crate::run_config::{Provenance, RunConfig};
use crate::CliError;

/// Smallest gap accepted for a strict inequality of the chain.
pub const CHAIN_GAP: f64 = 1e-6;
/// Largest difference accepted for the equality of the chain.
pub const CHAIN_EQUALITY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Success,
    ChainFailed(String),
    Inconclusive,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Success => 0,
            Status::ChainFailed(_) => 2,
            Status::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DomainPreset {
    /// Reinhardt domain from the config profile.
    Example,
    Bidisc,
    Disc,
}

/// One coordinate, `re` or `re:im`.
pub fn parse_coord(c: &str) -> Result<Complex64, String> {
    let c = c.trim();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
    let z = match c.split_once(':') {
        Some((re, im)) => Complex64::new(num(re)?, num(im)?),
        None => Complex64::new(num(c)?, 0.0),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{c}` is not finite"))
    }
}

/// Comma-separated coordinates, each `re` or `re:im`.
pub fn parse_point(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(parse_coord).collect()
}

fn compute(e: berezin_core::Error) -> CliError {
    CliError::Compute(e.to_string())
}

fn symbol_err(e: crate::expr::ExprError) -> CliError {
    CliError::Usage(e.to_string())
}

struct ExampleSetup {
    profile: RadialProfile,
    norms: Arc<MonomialNormTable>,
}

fn example_setup(rc: &RunConfig) -> Result<ExampleSetup, CliError> {
    let profile = rc.domain.profile().map_err(compute)?;
    let norms = MonomialNormTable::build(&profile, rc.caps.0, rc.caps.1, rc.tol).map_err(compute)?;
    Ok(ExampleSetup {
        profile,
        norms: Arc::new(norms),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainEcho {
    pub profile_kind: &'static str,
    pub alpha: f64,
    pub kappa: f64,
    pub bump_a: f64,
    pub bump_b: f64,
    pub bump_width: f64,
}

fn echo(rc: &RunConfig) -> DomainEcho {
    let d = &rc.domain;
    DomainEcho {
        profile_kind: match d.profile_kind {
            ProfileKindConfig::Smooth => "smooth",
            ProfileKindConfig::Flat => "flat",
        },
        alpha: d.alpha,
        kappa: d.kappa,
        bump_a: d.bump_a,
        bump_b: d.bump_b,
        bump_width: d.bump_width,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainLink {
    pub lower: &'static str,
    pub upper: &'static str,
    pub relation: &'static str,
    pub lower_value: f64,
    pub upper_value: f64,
    pub margin: f64,
    pub holds: bool,
}

impl ChainLink {
    fn new(lower: (&'static str, f64), relation: &'static str, upper: (&'static str, f64)) -> Self {
        let margin = upper.1 - lower.1;
        let holds = match relation {
            "<" => margin > CHAIN_GAP,
            "<=" => margin >= 0.0,
            _ => margin.abs() <= CHAIN_EQUALITY,
        };
        Self {
            lower: lower.0,
            upper: upper.0,
            relation,
            lower_value: lower.1,
            upper_value: upper.1,
            margin,
            holds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BumpMoments {
    pub first: f64,
    pub third: f64,
    /// `2∫χr³ − ∫χr`, positive when the moment inequality holds.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatLimitSup {
    pub value: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleSummary {
    pub provenance: Provenance,
    pub evaluation_margin: f64,
    pub residual_threshold: f64,
    pub domain: DomainEcho,
    pub bump_moments: BumpMoments,
    pub gamma_sup: GammaSup,
    pub interior_sup: SupResult,
    /// Sup of the boundary limit over the flat disc, reported for reference.
    pub flat_disc_limit_sup: Option<FlatLimitSup>,
    pub essential_norm: f64,
    pub operator_norm: NormValue,
    pub symbol_sup: f64,
    pub lambda_inf: Vec<f64>,
    pub chain: Vec<ChainLink>,
    pub chain_holds: bool,
}

pub fn reproduce_example(rc: &RunConfig, search: SupSearch) -> Result<(Status, ExampleSummary), CliError> {
    let bump = rc.domain.bump().map_err(compute)?;
    let symbol = berezin_core::RadialSymbol::bump(bump.clone());
    let setup = example_setup(rc)?;
    let table = EigenvalueTable::build(&setup.norms, &symbol).map_err(compute)?;
    let essential = table.essential_norm().map_err(compute)?;
    let norm = table.operator_norm().map_err(compute)?;

    let eval = DiagonalBerezin::from_table(setup.norms.clone(), &table).map_err(compute)?;
    let region = SearchRegion::Profile {
        profile: setup.profile.clone(),
        margin: EVALUATION_MARGIN,
    };
    let interior = search
        .run(&region, |t, s| eval.evaluate_ts(t, s).map(|v| v.value))
        .map_err(compute)?;

    let alpha = setup.profile.plateau_end();
    let flat = (0..1000)
        .filter_map(|i| {
            let t = i as f64 * 1e-3 * alpha * alpha;
            flat_disc_boundary_limit(&table, alpha, t).ok().map(|v| (v.value, t))
        })
        .fold(None, |best: Option<(f64, f64)>, (v, t)| match best {
            Some((b, _)) if b >= v => best,
            _ => Some((v, t)),
        })
        .map(|(value, t)| FlatLimitSup { value, t });

    let domain = ReinhardtDomain2D::new(setup.profile.clone());
    let gamma = gamma_boundary_sup(&domain, &symbol, 4000);
    let symbol_sup = bump.sup();

    let chain = vec![
        ChainLink::new(("gamma_sup", gamma.value), "<=", ("interior_sup", interior.sup)),
        ChainLink::new(("interior_sup", interior.sup), "<", ("essential_norm", essential)),
        ChainLink::new(("essential_norm", essential), "=", ("operator_norm", norm.value)),
        ChainLink::new(("operator_norm", norm.value), "<", ("symbol_sup", symbol_sup)),
    ];
    let failed: Vec<String> = chain
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{} {} {} (margin {:e})", c.lower, c.relation, c.upper, c.margin))
        .collect();
    let status = if failed.is_empty() {
        Status::Success
    } else {
        Status::ChainFailed(failed.join("; "))
    };
    let summary = ExampleSummary {
        provenance: rc.provenance(),
        evaluation_margin: EVALUATION_MARGIN,
        residual_threshold: BEREZIN_RESIDUAL_THRESHOLD,
        domain: echo(rc),
        bump_moments: BumpMoments {
            first: bump.first_moment(),
            third: bump.third_moment(),
            margin: bump.moment_margin(),
        },
        gamma_sup: gamma,
        interior_sup: interior,
        flat_disc_limit_sup: flat,
        essential_norm: essential,
        operator_norm: norm,
        symbol_sup,
        lambda_inf: table.limits().to_vec(),
        chain_holds: failed.is_empty(),
        chain,
    };
    if let Some(dir) = rc.out_dir()? {
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok((status, summary))
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenDoc {
    pub provenance: Provenance,
    pub domain: DomainEcho,
    pub symbol: String,
    /// Absent when the tail certificate fails; see `certificate_error`.
    pub summary: Option<EigenSummary>,
    pub certificate_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct GridRow {
    t: f64,
    s: f64,
    value: f64,
    residual: f64,
    valid: bool,
}

pub const TABLE_FILES: [&str; 4] = [
    "monomial_norms.csv",
    "eigenvalues.csv",
    "eigen_summary.json",
    "berezin_grid.csv",
];

/// Writes the norm table, eigenvalue table, summary and a Berezin grid.
pub fn tables(rc: &RunConfig, symbol: &SymbolExpr, grid_step: f64) -> Result<EigenDoc, CliError> {
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(CliError::Usage(format!("grid step must lie in (0, 0.5], got {grid_step}")));
    }
    let dir = rc
        .out_dir()?
        .ok_or_else(|| CliError::Usage("tables needs --out DIR".into()))?;
    let bump = rc.domain.bump().map_err(compute)?;
    let psi = symbol.to_radial(&bump).map_err(symbol_err)?;
    let setup = example_setup(rc)?;
    let table = EigenvalueTable::build(&setup.norms, &psi).map_err(compute)?;

    write_with(&dir.join(TABLE_FILES[0]), |f| setup.norms.write_csv(f))?;
    write_with(&dir.join(TABLE_FILES[1]), |f| table.write_csv(f))?;
    let (summary, certificate_error) = match table.summary() {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let doc = EigenDoc {
        provenance: rc.provenance(),
        domain: echo(rc),
        symbol: symbol.text().to_string(),
        summary,
        certificate_error,
    };
    write_json(&dir.join(TABLE_FILES[2]), &doc)?;

    let eval = DiagonalBerezin::from_table(setup.norms.clone(), &table).map_err(compute)?;
    let mut points = Vec::new();
    let tmax = EVALUATION_MARGIN * EVALUATION_MARGIN;
    let steps = (tmax / grid_step).floor() as usize;
    for i in 0..=steps {
        let t = i as f64 * grid_step;
        let b = EVALUATION_MARGIN * setup.profile.h(t.sqrt());
        for j in 0..=((b * b / grid_step).floor() as usize) {
            points.push((t, j as f64 * grid_step));
        }
    }
    let rows: Vec<GridRow> = points
        .par_iter()
        .map(|&(t, s)| {
            let v = eval.evaluate_ts_raw(t, s).ok();
            GridRow {
                t,
                s,
                value: v.map_or(f64::NAN, |v| v.value),
                residual: v.map_or(f64::INFINITY, |v| v.residual),
                valid: v.is_some_and(|v| v.residual <= BEREZIN_RESIDUAL_THRESHOLD),
            }
        })
        .collect();
    write_csv(&dir.join(TABLE_FILES[3]), rows)?;
    Ok(doc)
}

enum Evaluator {
    Series(DiagonalBerezin, RadialProfile),
    Product(ProductBerezin),
}

impl Evaluator {
    fn get(&self) -> &dyn BerezinEvaluator {
        match self {
            Evaluator::Series(e, _) => e,
            Evaluator::Product(e) => e,
        }
    }
}

fn build_evaluator(rc: &RunConfig, domain: DomainPreset, symbol: &SymbolExpr) -> Result<Evaluator, CliError> {
    match domain {
        DomainPreset::Example => {
            let bump = rc.domain.bump().map_err(compute)?;
            let psi = symbol.to_radial(&bump).map_err(symbol_err)?;
            let setup = example_setup(rc)?;
            let table = EigenvalueTable::build(&setup.norms, &psi).map_err(compute)?;
            let eval = DiagonalBerezin::from_table(setup.norms, &table).map_err(compute)?;
            Ok(Evaluator::Series(eval, setup.profile))
        }
        DomainPreset::Bidisc | DomainPreset::Disc => {
            let spec = if domain == DomainPreset::Bidisc {
                ProductDomainSpec::bidisc()
            } else {
                ProductDomainSpec::disc()
            };
            let sep = symbol.to_separable(spec.factors().len()).map_err(symbol_err)?;
            Ok(Evaluator::Product(ProductBerezin::new(spec, sep).map_err(compute)?))
        }
    }
}

fn symbol_at(rc: &RunConfig, symbol: &SymbolExpr, p: &[Complex64]) -> Result<f64, CliError> {
    let x = p[0].norm_sqr();
    let y = p.get(1).map_or(0.0, |w| w.norm_sqr());
    let chi = if symbol.uses_bump() {
        rc.domain.bump().map_err(compute)?.value(p[0].norm())
    } else {
        0.0
    };
    Ok(symbol.value(x, y, chi))
}

fn dimension(domain: DomainPreset) -> usize {
    match domain {
        DomainPreset::Disc => 1,
        _ => 2,
    }
}

/// `max(|z|, |w|/h(|z|))` on the Reinhardt domain, the largest factor
/// modulus on product domains: 1 on the boundary.
fn boundary_gauge(domain: DomainPreset, profile: Option<&RadialProfile>, p: &[Complex64]) -> f64 {
    match (domain, profile) {
        (DomainPreset::Example, Some(h)) => {
            let r = p[0].norm();
            if r >= 1.0 {
                r
            } else {
                r.max(p[1].norm() / h.h(r))
            }
        }
        _ => p.iter().fold(0.0, |a, z| a.max(z.norm())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeDoc {
    pub domain: DomainPreset,
    pub symbol: String,
    /// Series caps on the Reinhardt domain; quadrature only on product domains.
    pub caps: Option<[usize; 2]>,
    pub tol: f64,
    pub report: ProbeReport,
}

#[derive(Debug, Clone, Serialize)]
struct SampleRow<'a> {
    path: &'a str,
    k: usize,
    u: f64,
    value: f64,
    residual: f64,
}

pub const PATH_KINDS: [&str; 3] = ["normal", "tangential", "slant"];

fn make_path(kind: &str, target: &[Complex64]) -> Result<BoundaryPath, CliError> {
    let path = match kind {
        "normal" => BoundaryPath::normal(target.to_vec()),
        "tangential" => {
            // Every coordinate at the largest modulus has to move inward.
            let top = target.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            let coords = (0..target.len()).filter(|&i| target[i].norm() >= top - 1e-12).collect();
            BoundaryPath::tangential(target.to_vec(), coords, 1.5)
        }
        "slant" => {
            let dir = target
                .iter()
                .map(|z| if z.norm() < 1.0 { 0.5 - z } else { -0.5 * z })
                .collect();
            BoundaryPath::linear("slant", target.to_vec(), dir)
        }
        other => return Err(CliError::Usage(format!("unknown path `{other}`; use {}", PATH_KINDS.join(", ")))),
    };
    path.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn probe(
    rc: &RunConfig,
    domain: DomainPreset,
    symbol: &SymbolExpr,
    target: &[Complex64],
    paths: &[String],
    steps: usize,
) -> Result<(Status, ProbeDoc), CliError> {
    if target.len() != dimension(domain) {
        return Err(CliError::Usage(format!(
            "target has {} coordinates, the domain needs {}",
            target.len(),
            dimension(domain)
        )));
    }
    let eval = build_evaluator(rc, domain, symbol)?;
    let profile = match &eval {
        Evaluator::Series(_, p) => Some(p),
        Evaluator::Product(_) => None,
    };
    let gauge = boundary_gauge(domain, profile, target);
    if (gauge - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!("target is not a boundary point (gauge {gauge})")));
    }
    let paths: Vec<BoundaryPath> = paths.iter().map(|k| make_path(k, target)).collect::<Result<_, _>>()?;
    for p in &paths {
        let g = boundary_gauge(domain, profile, &p.point(0.5));
        if !(g < 1.0) {
            return Err(CliError::Usage(format!("path `{}` leaves the domain", p.label)));
        }
    }
    let opts = PathLimitOptions {
        steps,
        ..PathLimitOptions::default()
    };
    let sv = symbol_at(rc, symbol, target)?;
    let mut report = bc_probe(eval.get(), target, Some(sv), &paths, opts).map_err(compute)?;
    let caps = match eval {
        Evaluator::Series(..) => Some([rc.caps.0, rc.caps.1]),
        Evaluator::Product(_) => None,
    };
    report.caps = caps;
    let status = if report.verdict == Verdict::Inconclusive {
        Status::Inconclusive
    } else {
        Status::Success
    };
    let doc = ProbeDoc {
        domain,
        symbol: symbol.text().to_string(),
        caps,
        tol: if caps.is_some() { rc.tol } else { 1e-9 },
        report,
    };
    if let Some(dir) = rc.out_dir()? {
        write_json(&dir.join("probe.json"), &doc)?;
        let rows = doc.report.paths.iter().flat_map(|pl| {
            pl.samples.iter().enumerate().map(|(k, s)| SampleRow {
                path: &pl.label,
                k: k + 1,
                u: s.u,
                value: s.value,
                residual: s.residual,
            })
        });
        write_csv(&dir.join("probe_samples.csv"), rows)?;
    }
    Ok((status, doc))
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalDoc {
    pub domain: DomainPreset,
    pub symbol: String,
    pub point: Vec<Complex64>,
    pub value: f64,
    pub residual: f64,
    pub caps: Option<[usize; 2]>,
    pub tol: f64,
}

pub fn berezin_eval(
    rc: &RunConfig,
    domain: DomainPreset,
    symbol: &SymbolExpr,
    point: &[Complex64],
) -> Result<EvalDoc, CliError> {
    if point.len() != dimension(domain) {
        return Err(CliError::Usage(format!(
            "point has {} coordinates, the domain needs {}",
            point.len(),
            dimension(domain)
        )));
    }
    let eval = build_evaluator(rc, domain, symbol)?;
    let v = eval.get().evaluate(point).map_err(compute)?;
    let caps = match eval {
        Evaluator::Series(..) => Some([rc.caps.0, rc.caps.1]),
        Evaluator::Product(_) => None,
    };
    let doc = EvalDoc {
        domain,
        symbol: symbol.text().to_string(),
        point: point.to_vec(),
        value: v.value,
        residual: v.residual,
        caps,
        tol: if caps.is_some() { rc.tol } else { 1e-9 },
    };
    if let Some(dir) = rc.out_dir()? {
        write_json(&dir.join("berezin_eval.json"), &doc)?;
    }
    Ok(doc)
}

#[derive(Debug, Clone, Serialize)]
pub struct Monotonicity {
    pub holds: bool,
    pub worst_decrease: f64,
    pub up_to: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassDoc {
    pub provenance: Provenance,
    pub tau: f64,
    pub total_mass: f64,
    pub residual: f64,
    pub atom: f64,
    pub flat_radius: f64,
    /// Spherical means over the flat disc.
    pub plateau_monotone: Monotonicity,
    /// Same check over the whole grid, which also crosses the curved part.
    pub full_grid_monotone: Monotonicity,
    pub eps: f64,
    pub test_functional: f64,
}

#[derive(Debug, Clone, Serialize)]
struct MassRow {
    r: f64,
    density: f64,
    spherical_mean: f64,
}

pub const MONOTONE_TOL: f64 = 1e-8;

pub fn mass_profile_cmd(rc: &RunConfig, tau: f64, grid_points: usize, eps: f64) -> Result<MassDoc, CliError> {
    if grid_points < 2 {
        return Err(CliError::Usage("mass profile grid needs at least 2 points".into()));
    }
    let setup = example_setup(rc)?;
    let rmax = 0.995;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| rmax * i as f64 / (grid_points - 1) as f64)
        .collect();
    let mp = mass_profile(&setup.norms, tau, &grid).map_err(compute)?;
    let alpha = setup.profile.plateau_end();
    let mono = |up_to: f64| {
        let (holds, worst) = mp.spherical_nondecreasing(MONOTONE_TOL, up_to);
        Monotonicity {
            holds,
            worst_decrease: worst,
            up_to,
            tol: MONOTONE_TOL,
        }
    };
    let doc = MassDoc {
        provenance: rc.provenance(),
        tau,
        total_mass: mp.total_mass,
        residual: mp.residual,
        atom: mp.atom,
        flat_radius: mp.flat_radius,
        plateau_monotone: mono(alpha),
        full_grid_monotone: mono(rmax),
        eps,
        test_functional: mp.test_functional(eps).map_err(compute)?,
    };
    if let Some(dir) = rc.out_dir()? {
        write_json(&dir.join("mass_profile.json"), &doc)?;
        let rows = mp.grid.iter().zip(&mp.density).zip(&mp.spherical).map(|((&r, &d), &m)| MassRow {
            r,
            density: d,
            spherical_mean: m,
        });
        write_csv(&dir.join("mass_profile.csv"), rows)?;
    }
    Ok(doc)
}

/// Prints a document to stdout as sorted JSON.
pub fn print<T: Serialize>(doc: &T) -> Result<(), CliError> {
    print!("{}", to_json(doc)?);
    Ok(())
}
