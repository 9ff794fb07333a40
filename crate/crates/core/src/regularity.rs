//! Boundary behaviour of Berezin transforms: limits along paths that approach
//! the boundary, probes comparing several paths, weak-* delta tests, and the
//! fibre mass profile `μ_q` of normalized kernels on the Reinhardt domain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::berezin::{BerezinEvaluator, DiscBerezin};
use crate::bergman::{MonomialNormTable, KERNEL_RESIDUAL_THRESHOLD};
use crate::domain::{RadialProfile, ReinhardtDomain2D};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_integrate_with, AdaptiveOptions};
use crate::series::geometric_tail;
use crate::summation::{log_sum_exp, CompensatedSum};
use crate::symbol::{DiscSymbol, RadialSymbol};
use crate::toeplitz::disc_radial_eigenvalue;
use crate::EVALUATION_MARGIN;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathShape {
    /// `target + u · direction`.
    Linear { direction: Vec<Complex64> },
    /// Each coordinate in `coords` becomes `target · (1 − u^exponent) · e^{iu}`:
    /// the point slides along the boundary circles faster than it moves inward.
    Tangential { coords: Vec<usize>, exponent: f64 },
}

/// A curve `u ∈ (0, 1] ↦ point` that reaches `target` as `u → 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPath {
    pub label: String,
    pub target: Vec<Complex64>,
    pub shape: PathShape,
}

impl BoundaryPath {
    pub fn linear(label: impl Into<String>, target: Vec<Complex64>, direction: Vec<Complex64>) -> Result<Self> {
        if direction.len() != target.len() {
            return Err(invalid("path direction and target differ in dimension"));
        }
        Ok(Self {
            label: label.into(),
            target,
            shape: PathShape::Linear { direction },
        })
    }

    /// Straight inward path `target · (1 − u)` (target must be nonzero).
    pub fn normal(target: Vec<Complex64>) -> Result<Self> {
        if target.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(invalid("the normal path needs a nonzero target"));
        }
        let direction = target.iter().map(|z| -z).collect();
        Self::linear("normal", target, direction)
    }

    pub fn tangential(target: Vec<Complex64>, coords: Vec<usize>, exponent: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("tangential paths need at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|&&c| c >= target.len()) {
            return Err(invalid(format!("coordinate {c} out of range")));
        }
        if !(exponent > 1.0) {
            return Err(invalid("tangential paths need exponent > 1"));
        }
        Ok(Self {
            label: "tangential".into(),
            target,
            shape: PathShape::Tangential { coords, exponent },
        })
    }

    pub fn point(&self, u: f64) -> Vec<Complex64> {
        match &self.shape {
            PathShape::Linear { direction } => self
                .target
                .iter()
                .zip(direction)
                .map(|(p, d)| p + d * u)
                .collect(),
            PathShape::Tangential { coords, exponent } => {
                let mut p = self.target.clone();
                let step = Complex64::from_polar(1.0 - u.powf(*exponent), u);
                for &c in coords {
                    p[c] *= step;
                }
                p
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PathLimitOptions {
    /// Samples at `u_k = 2^{-k}`, `k = 1..=steps`.
    pub steps: usize,
    /// Largest acceptable error estimate for a reported limit.
    pub cauchy_tol: f64,
}

impl Default for PathLimitOptions {
    fn default() -> Self {
        Self {
            steps: 12,
            cauchy_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub u: f64,
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLimit {
    pub label: String,
    pub samples: Vec<PathSample>,
    /// Extrapolated limit; `None` when the error estimate exceeds the tolerance.
    pub estimate: Option<f64>,
    /// Largest of the last three successive differences.
    pub cauchy: f64,
    /// Change of the extrapolated value between the last two sample windows,
    /// or `cauchy` when no extrapolation was possible.
    pub error_estimate: f64,
    /// Contraction ratio used for extrapolation, if any.
    pub ratio: Option<f64>,
    /// Why sampling stopped before `steps`, if it did.
    pub stopped: Option<String>,
}

/// Geometric extrapolation from the last four values, when the last two
/// difference ratios agree and contract.
fn geometric_step(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    let d: Vec<f64> = values[n - 4..].windows(2).map(|w| w[1] - w[0]).collect();
    if d[0] == 0.0 || d[1] == 0.0 {
        return None;
    }
    let r1 = d[1] / d[0];
    let r2 = d[2] / d[1];
    let consistent = r1 > 0.0 && r2 > 0.0 && r1 <= 0.9 && r2 <= 0.9 && (r1 - r2).abs() <= 0.25 * r1.max(r2);
    consistent.then(|| (values[n - 1] + d[2] * r2 / (1.0 - r2), r2))
}

struct Extrapolation {
    estimate: f64,
    cauchy: f64,
    ratio: Option<f64>,
    error: f64,
}

fn richardson(values: &[f64]) -> Extrapolation {
    let n = values.len();
    let last = values[n - 1];
    let cauchy = values[n - 4..]
        .windows(2)
        .fold(0.0f64, |a, w| a.max((w[1] - w[0]).abs()));
    let plain = Extrapolation {
        estimate: last,
        cauchy,
        ratio: None,
        error: cauchy,
    };
    if cauchy < 1e-14 {
        return plain;
    }
    match geometric_step(values) {
        Some((estimate, r)) => {
            let prev = if n >= 5 { geometric_step(&values[..n - 1]) } else { None };
            Extrapolation {
                estimate,
                cauchy,
                ratio: Some(r),
                error: prev.map_or(cauchy, |(p, _)| (estimate - p).abs()),
            }
        }
        None => plain,
    }
}

/// Samples the evaluator along the path at `u = 2^{-k}` until the evaluator
/// refuses a point (margin or residual), then extrapolates the last four
/// values geometrically when their successive differences contract
/// consistently. No estimate is returned when fewer than four samples exist
/// or the Cauchy diagnostic exceeds `cauchy_tol`.
pub fn path_limit(eval: &dyn BerezinEvaluator, path: &BoundaryPath, opts: PathLimitOptions) -> Result<PathLimit> {
    if opts.steps < 6 {
        return Err(invalid(format!("path_limit needs at least 6 steps, got {}", opts.steps)));
    }
    if path.target.len() != eval.dimension() {
        return Err(invalid(format!(
            "path lives in C^{}, evaluator in C^{}",
            path.target.len(),
            eval.dimension()
        )));
    }
    let results: Vec<(f64, Result<_>)> = (1..=opts.steps)
        .into_par_iter()
        .map(|k| {
            let u = 0.5f64.powi(k as i32);
            (u, eval.evaluate(&path.point(u)))
        })
        .collect();
    let mut samples = Vec::new();
    let mut stopped = None;
    for (u, r) in results {
        match r {
            Ok(v) => samples.push(PathSample {
                u,
                value: v.value,
                residual: v.residual,
            }),
            Err(e) => {
                stopped = Some(format!("u = {u}: {e}"));
                break;
            }
        }
    }
    if samples.len() < 4 {
        return Ok(PathLimit {
            label: path.label.clone(),
            samples,
            estimate: None,
            cauchy: f64::INFINITY,
            error_estimate: f64::INFINITY,
            ratio: None,
            stopped,
        });
    }
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let x = richardson(&values);
    Ok(PathLimit {
        label: path.label.clone(),
        samples,
        estimate: (x.error <= opts.cauchy_tol).then_some(x.estimate),
        cauchy: x.cauchy,
        error_estimate: x.error,
        ratio: x.ratio,
        stopped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Absolute floor for the path-disagreement test.
pub const VERDICT_FLOOR: f64 = 1e-9;
/// Agreement allowed between a path limit and the symbol's boundary value.
pub const SYMBOL_MATCH_TOL: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub target: Vec<Complex64>,
    pub symbol_value: Option<f64>,
    pub paths: Vec<PathLimit>,
    pub verdict: Verdict,
    /// Largest pairwise difference of path limits.
    pub max_disagreement: Option<f64>,
    /// Whether every path limit equals the symbol's boundary value.
    pub matches_symbol: Option<bool>,
    pub margin: f64,
    pub caps: Option<[usize; 2]>,
    pub cauchy_tol: f64,
}

/// Runs [`path_limit`] on every path. The verdict is inconsistent only when
/// two limits differ by more than ten times the largest error estimate.
pub fn bc_probe(
    eval: &dyn BerezinEvaluator,
    target: &[Complex64],
    symbol_value: Option<f64>,
    paths: &[BoundaryPath],
    opts: PathLimitOptions,
) -> Result<ProbeReport> {
    if paths.len() < 2 {
        return Err(invalid("a probe needs at least two paths"));
    }
    if let Some(p) = paths.iter().find(|p| p.target != target) {
        return Err(invalid(format!("path `{}` does not end at the probe target", p.label)));
    }
    let limits: Vec<PathLimit> = paths
        .iter()
        .map(|p| path_limit(eval, p, opts))
        .collect::<Result<_>>()?;
    let estimates: Option<Vec<f64>> = limits.iter().map(|l| l.estimate).collect();
    let (verdict, max_disagreement, matches_symbol) = match estimates {
        None => (Verdict::Inconclusive, None, None),
        Some(est) => {
            let diag = limits.iter().fold(0.0f64, |a, l| a.max(l.error_estimate));
            let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let spread = hi - lo;
            let verdict = if spread > (10.0 * diag).max(VERDICT_FLOOR) {
                Verdict::Inconsistent
            } else {
                Verdict::Consistent
            };
            let matches = symbol_value.map(|v| {
                est.iter()
                    .all(|e| (e - v).abs() <= (10.0 * diag).max(SYMBOL_MATCH_TOL))
            });
            (verdict, Some(spread), matches)
        }
    };
    Ok(ProbeReport {
        target: target.to_vec(),
        symbol_value,
        paths: limits,
        verdict,
        max_disagreement,
        matches_symbol,
        margin: eval.margin(),
        caps: None,
        cauchy_tol: opts.cauchy_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCase {
    pub symbol_value: f64,
    pub limit: PathLimit,
    pub deviation: Option<f64>,
    /// `|value − φ(p)|` is non-increasing over the last three samples.
    pub shrinking: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub cases: Vec<DeltaCase>,
    /// `None` when any case is inconclusive.
    pub max_deviation: Option<f64>,
}

/// Compares the path limit of each `⟨φ k_z, k_z⟩` with `φ(p)`: small
/// deviations for every continuous test symbol mean `|k_z|² → δ_p`.
pub fn delta_test(
    cases: &[(&dyn BerezinEvaluator, f64)],
    path: &BoundaryPath,
    opts: PathLimitOptions,
) -> Result<DeltaReport> {
    let mut out = Vec::with_capacity(cases.len());
    for (eval, phi_p) in cases {
        let limit = path_limit(*eval, path, opts)?;
        let devs: Vec<f64> = limit.samples.iter().map(|s| (s.value - phi_p).abs()).collect();
        let shrinking = devs.len() >= 3 && devs[devs.len() - 3..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
        out.push(DeltaCase {
            symbol_value: *phi_p,
            deviation: limit.estimate.map(|e| (e - phi_p).abs()),
            limit,
            shrinking,
        });
    }
    let max_deviation = out
        .iter()
        .map(|c| c.deviation)
        .collect::<Option<Vec<f64>>>()
        .map(|d| d.into_iter().fold(0.0, f64::max));
    Ok(DeltaReport {
        cases: out,
        max_deviation,
    })
}

/// Fibre mass profile of `|k_q|²` for `q = (0, τ)` on the Reinhardt domain:
/// `μ_q(r) = Σ_m c_m h(r)^(2m+2)` with
/// `c_m = τ^(2m) 2π / ((2m+2) δ⁴_{0m}) / Σ τ^(2m)/δ²_{0m}`.
#[derive(Debug, Clone, Serialize)]
pub struct MassProfile {
    pub tau: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// `M_q(r) = 2π r μ_q(r)` on the grid.
    pub spherical: Vec<f64>,
    /// `2π ∫ μ_q(r) r dr` by quadrature, plus the atom.
    pub total_mass: f64,
    pub residual: f64,
    /// Point mass at the origin (synthetic models only).
    pub atom: f64,
    /// Radius of the flat disc over which `μ_q` lives undistorted.
    pub flat_radius: f64,
    #[serde(skip)]
    ln_coeffs: Vec<f64>,
    #[serde(skip)]
    profile: Option<RadialProfile>,
}

pub fn mass_profile(norms: &MonomialNormTable, tau: f64, grid: &[f64]) -> Result<MassProfile> {
    let profile = norms.profile().clone();
    if !(tau >= 0.0 && tau <= EVALUATION_MARGIN * profile.h(0.0)) {
        return Err(Error::OutsideMargin(format!("q = (0, {tau})")));
    }
    if let Some(r) = grid.iter().find(|r| !(**r >= 0.0 && **r < 1.0)) {
        return Err(invalid(format!("grid radius {r} outside [0, 1)")));
    }
    let m_len = norms.m_cap() + 1;
    let ln_tau2 = if tau == 0.0 { f64::NEG_INFINITY } else { 2.0 * tau.ln() };
    let den_terms: Vec<f64> = (0..m_len)
        .map(|m| {
            let lp = if m == 0 { 0.0 } else { m as f64 * ln_tau2 };
            lp - norms.ln_unchecked(0, m)
        })
        .collect();
    let ln_den = log_sum_exp(&den_terms);
    let scaled: Vec<f64> = den_terms.iter().map(|x| (x - ln_den).exp()).collect();
    let residual = geometric_tail(&scaled);
    if !(residual <= KERNEL_RESIDUAL_THRESHOLD) {
        return Err(Error::Truncation {
            residual,
            threshold: KERNEL_RESIDUAL_THRESHOLD,
        });
    }
    let ln_coeffs: Vec<f64> = (0..m_len)
        .map(|m| den_terms[m] + (2.0 * PI).ln() - (2.0 * m as f64 + 2.0).ln() - norms.ln_unchecked(0, m) - ln_den)
        .collect();
    let mut mp = MassProfile {
        tau,
        grid: grid.to_vec(),
        density: vec![],
        spherical: vec![],
        total_mass: 0.0,
        residual,
        atom: 0.0,
        flat_radius: profile.plateau_end(),
        ln_coeffs,
        profile: Some(profile),
    };
    mp.density = grid.par_iter().map(|&r| mp.mu(r)).collect();
    mp.spherical = grid.iter().zip(&mp.density).map(|(r, d)| 2.0 * PI * r * d).collect();
    let alpha = mp.flat_radius;
    let opts = AdaptiveOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let f = |r: f64| 2.0 * PI * r * mp.mu(r);
    let mut total = adaptive_integrate_with(f, 0.0, alpha, opts)?.value;
    if alpha < 1.0 {
        total += adaptive_integrate_with(f, alpha, 1.0, opts)?.value;
    }
    mp.total_mass = total;
    Ok(mp)
}

impl MassProfile {
    /// A unit point mass at the origin: the profile `|k_q|² → δ` would produce.
    pub fn point_mass() -> Self {
        Self {
            tau: 1.0,
            grid: vec![],
            density: vec![],
            spherical: vec![],
            total_mass: 1.0,
            residual: 0.0,
            atom: 1.0,
            flat_radius: 1.0,
            ln_coeffs: vec![],
            profile: None,
        }
    }

    /// `μ_q(r)`.
    pub fn mu(&self, r: f64) -> f64 {
        let Some(profile) = &self.profile else {
            return 0.0;
        };
        let ln_h = profile.ln_h(r);
        let mut acc = CompensatedSum::new();
        for (m, c) in self.ln_coeffs.iter().enumerate() {
            let t = (c + (2.0 * m as f64 + 2.0) * ln_h).exp();
            acc.add(t);
            if t == 0.0 && ln_h < 0.0 {
                break;
            }
        }
        acc.value()
    }

    /// `M_q(r) = 2π r μ_q(r)` for `r` inside the grid range.
    pub fn spherical_mean(&self, r: f64) -> Result<f64> {
        match (self.grid.first(), self.grid.last()) {
            (Some(&lo), Some(&hi)) if r >= lo && r <= hi => Ok(2.0 * PI * r * self.mu(r)),
            _ if self.profile.is_none() => Ok(0.0),
            _ => Err(invalid(format!("r = {r} outside the grid range"))),
        }
    }

    /// `(holds, worst drop)` for `M_q` nondecreasing within `tol` over grid points `r ≤ up_to`.
    pub fn spherical_nondecreasing(&self, tol: f64, up_to: f64) -> (bool, f64) {
        let vals: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.spherical)
            .filter(|(r, _)| **r <= up_to)
            .map(|(_, v)| *v)
            .collect();
        let worst = vals.windows(2).fold(0.0f64, |a, w| a.max(w[0] - w[1]));
        (worst <= tol, worst)
    }

    /// `∫_{B(0, 2ε)} g dμ_q` with `g(r) = 1 − r/ε`, i.e. `g(0)·atom + ∫₀^{2ε} g M_q dr`.
    pub fn test_functional(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && 2.0 * eps <= self.flat_radius) {
            return Err(invalid(format!(
                "ε = {eps}: B(0, 2ε) must lie in the flat disc of radius {}",
                self.flat_radius
            )));
        }
        let g = |r: f64| 1.0 - r / eps;
        let opts = AdaptiveOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let integral = adaptive_integrate_with(|r| g(r) * 2.0 * PI * r * self.mu(r), 0.0, 2.0 * eps, opts)?;
        Ok(self.atom * g(0.0) + integral.value)
    }
}

/// Comparison on the disc for a radial symbol: the
/// essential norm `limsup λ_n` against the boundary value of the transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n_cap: usize,
    /// `(n, λ_n)` used for the extrapolation.
    pub tail: Vec<(usize, f64)>,
    /// `lim λ_n`, extrapolated polynomially in `1/(n+1)`.
    pub limsup: f64,
    /// `|φ(1)|`.
    pub boundary_value: f64,
    /// Radial path limit of the transform toward `ξ = 1`.
    pub path_limit: PathLimit,
    pub difference: f64,
}

/// Neville evaluation at 0 of the interpolant through `(xᵢ, yᵢ)`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

pub fn essential_norm_identity_check(symbol: &RadialSymbol, n_cap: usize, rel_tol: f64) -> Result<IdentityReport> {
    if n_cap < 30 {
        return Err(invalid(format!("n_cap must be at least 30, got {n_cap}")));
    }
    let ns: Vec<usize> = [30, 20, 10, 0].iter().map(|d| n_cap - d).collect();
    let tail: Vec<(usize, f64)> = ns
        .iter()
        .map(|&n| disc_radial_eigenvalue(symbol, n, rel_tol).map(|l| (n, l)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = tail.iter().map(|(n, _)| 1.0 / (*n as f64 + 1.0)).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, l)| l.abs()).collect();
    let limsup = neville_at_zero(&xs, &ys);
    let boundary_value = symbol.value(1.0).abs();
    let eval = DiscBerezin::new(DiscSymbol::Radial(symbol.clone()));
    let path = BoundaryPath::normal(vec![Complex64::new(1.0, 0.0)])?;
    let pl = path_limit(&eval, &path, PathLimitOptions::default())?;
    Ok(IdentityReport {
        n_cap,
        tail,
        limsup,
        boundary_value,
        difference: (limsup - boundary_value).abs(),
        path_limit: pl,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSup {
    /// `sup |ψ|` over sampled strongly pseudoconvex boundary points.
    pub value: f64,
    /// Smallest and largest sampled radius classified strongly pseudoconvex.
    pub radii: Option<(f64, f64)>,
    pub samples: usize,
}

/// Sup of the boundary values of `φ(z, w) = ψ(|z|)` over the strongly
/// pseudoconvex boundary part, where transforms of continuous symbols
/// extend continuously with the symbol's own values.
pub fn gamma_boundary_sup(domain: &ReinhardtDomain2D, symbol: &RadialSymbol, samples: usize) -> GammaSup {
    let radii = domain.strongly_pseudoconvex_radii(samples);
    let value = radii.iter().map(|&r| symbol.value(r).abs()).fold(0.0, f64::max);
    GammaSup {
        value,
        radii: radii.first().zip(radii.last()).map(|(a, b)| (*a, *b)),
        samples: radii.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berezin::DiagonalBerezin;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    struct Constant(f64);
    impl BerezinEvaluator for Constant {
        fn backend(&self) -> crate::berezin::Backend {
            crate::berezin::Backend::DiagonalOperator
        }
        fn dimension(&self) -> usize {
            2
        }
        fn margin(&self) -> f64 {
            1.0
        }
        fn evaluate(&self, _: &[Complex64]) -> Result<crate::berezin::BerezinValue> {
            Ok(crate::berezin::BerezinValue {
                value: self.0,
                residual: 0.0,
            })
        }
    }

    #[test]
    fn paths_approach_target() {
        let t = vec![c(1.0), Complex64::from_polar(0.3, 0.7)];
        let normal = BoundaryPath::normal(vec![c(1.0), c(0.0)]).unwrap();
        let tang = BoundaryPath::tangential(t.clone(), vec![0], 1.5).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let u = 0.5f64.powi(k);
            let p = tang.point(u);
            let d: f64 = p.iter().zip(&t).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(d < prev);
            assert!(p[0].norm() < 1.0);
            prev = d;
            assert_eq!(normal.point(u)[0], c(1.0 - u));
        }
    }

    #[test]
    fn richardson_on_geometric_sequence() {
        let v: Vec<f64> = (0..6).map(|k| 2.0 - 0.5f64.powi(k)).collect();
        let x = richardson(&v);
        assert_abs_diff_eq!(x.estimate, 2.0, epsilon = 1e-14);
        assert_eq!(x.ratio, Some(0.5));
        assert!(x.cauchy > 0.0);
        assert!(x.error < 1e-14);
        let alt = [0.0, 1.0, 0.0, 1.0];
        let x = richardson(&alt);
        assert_eq!((x.estimate, x.ratio, x.error), (1.0, None, 1.0));
    }

    #[test]
    fn constant_evaluator_is_consistent() {
        let target = vec![c(0.0), c(1.0)];
        let paths = [
            BoundaryPath::normal(target.clone()).unwrap(),
            BoundaryPath::linear("slanted", target.clone(), vec![c(0.3), c(-1.0)]).unwrap(),
        ];
        let r = bc_probe(&Constant(0.4), &target, Some(0.4), &paths, PathLimitOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert_eq!(r.matches_symbol, Some(true));
        for p in &r.paths {
            assert_eq!(p.estimate, Some(0.4));
            assert_eq!(p.cauchy, 0.0);
        }
        assert!(bc_probe(&Constant(0.4), &target, None, &paths[..1], PathLimitOptions::default()).is_err());
    }

    #[test]
    fn disc_boundary_value_of_abs2() {
        let eval = DiscBerezin::new(DiscSymbol::abs2());
        let path = BoundaryPath::normal(vec![c(1.0)]).unwrap();
        let l = path_limit(&eval, &path, PathLimitOptions::default()).unwrap();
        assert!((l.estimate.unwrap() - 1.0).abs() < 2e-3);
        assert!(l.stopped.is_some());
    }

    #[test]
    fn identity_check_closed_forms() {
        let r = essential_norm_identity_check(&RadialSymbol::abs2(), 60, 1e-12).unwrap();
        assert!(r.difference < 5e-3);
        let r = essential_norm_identity_check(&RadialSymbol::Polynomial(vec![1.0, -1.0]), 60, 1e-12).unwrap();
        assert!(r.difference < 5e-3);
        let r = essential_norm_identity_check(&RadialSymbol::constant(0.3), 60, 1e-12).unwrap();
        assert_abs_diff_eq!(r.limsup, 0.3, epsilon = 1e-10);
    }

    #[test]
    fn point_mass_functional() {
        let pm = MassProfile::point_mass();
        assert_eq!(pm.test_functional(0.2).unwrap(), 1.0);
        assert!(pm.test_functional(0.6).is_err());
    }

    #[test]
    fn mass_profile_at_origin_is_single_term() {
        let h = crate::domain::default_profile(0.95, 4.0).unwrap();
        let norms = MonomialNormTable::build(&h, 0, 40, 1e-11).unwrap();
        let grid: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let mp = mass_profile(&norms, 0.0, &grid).unwrap();
        let d00 = norms.delta_sq(0, 0).unwrap();
        for (r, mu) in grid.iter().zip(&mp.density) {
            assert_abs_diff_eq!(*mu, PI * h.h(*r).powi(2) / d00, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(mp.total_mass, 1.0, epsilon = 1e-9);
        assert_eq!(mp.spherical_mean(0.0).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_rank_one_vanishes_toward_boundary() {
        let h = crate::domain::default_profile(0.95, 4.0).unwrap();
        let norms = Arc::new(MonomialNormTable::build(&h, 4, 2000, 1e-10).unwrap());
        let eval = DiagonalBerezin::from_fn(norms, |n, m| if n == 0 && m == 0 { 1.0 } else { 0.0 }).unwrap();
        let path = BoundaryPath::normal(vec![c(0.0), c(1.0)]).unwrap();
        let l = path_limit(&eval, &path, PathLimitOptions::default()).unwrap();
        let last = l.samples.last().unwrap().value;
        assert!(last < 0.01, "{last}");
    }
}
