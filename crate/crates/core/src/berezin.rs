//! Berezin transforms `T̃(z) = ⟨T k_z, k_z⟩` through four backends: the
//! double series for diagonal operators on the Reinhardt domain, polar
//! quadrature on the disc, products of disc transforms on product domains,
//! and the flat-disc boundary limit of the series. Also the grid-plus-
//! refinement sup search.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bergman::MonomialNormTable;
use crate::domain::{Factor, ProductDomainSpec, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_integrate_with, integrate_pieces, AdaptiveOptions};
use crate::series::{geometric_tail, LogGrid};
use crate::summation::{ln_pow, CompensatedSum};
use crate::symbol::{DiscSymbol, RadialSymbol, SeparableSymbol};
use crate::toeplitz::EigenvalueTable;
use crate::EVALUATION_MARGIN;

/// Relative series residual above which a Berezin evaluation is refused.
pub const BEREZIN_RESIDUAL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ReinhardtSeries,
    DiscIntegral,
    ProductTensor,
    DiagonalOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerezinValue {
    pub value: f64,
    /// Series residual (relative to the largest |λ|) or quadrature error
    /// estimate (absolute).
    pub residual: f64,
}

pub trait BerezinEvaluator: Sync {
    fn backend(&self) -> Backend;
    fn dimension(&self) -> usize;
    fn margin(&self) -> f64;
    fn evaluate(&self, point: &[Complex64]) -> Result<BerezinValue>;
}

/// `Σ λ_{nm} tⁿ sᵐ / δ²_{nm} / Σ tⁿ sᵐ / δ²_{nm}` with `t = |z|²`, `s = |w|²`.
#[derive(Debug, Clone)]
pub struct DiagonalBerezin {
    norms: Arc<MonomialNormTable>,
    n_len: usize,
    m_len: usize,
    lambdas: Vec<f64>,
    backend: Backend,
    margin: f64,
    threshold: f64,
}

impl DiagonalBerezin {
    /// Transform of a radial Toeplitz operator. Both tables must share caps.
    pub fn from_table(norms: Arc<MonomialNormTable>, table: &EigenvalueTable) -> Result<Self> {
        if norms.n_cap() != table.n_cap() || norms.m_cap() != table.m_cap() {
            return Err(invalid(format!(
                "norm table caps ({}, {}) differ from eigenvalue caps ({}, {})",
                norms.n_cap(),
                norms.m_cap(),
                table.n_cap(),
                table.m_cap()
            )));
        }
        Ok(Self {
            n_len: norms.n_cap() + 1,
            m_len: norms.m_cap() + 1,
            lambdas: table.entries().to_vec(),
            norms,
            backend: Backend::ReinhardtSeries,
            margin: EVALUATION_MARGIN,
            threshold: BEREZIN_RESIDUAL_THRESHOLD,
        })
    }

    /// Transform of an arbitrary bounded diagonal operator `zⁿwᵐ ↦ λ(n, m) zⁿwᵐ`.
    pub fn from_fn(norms: Arc<MonomialNormTable>, lambda: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let (n_len, m_len) = (norms.n_cap() + 1, norms.m_cap() + 1);
        let lambdas: Vec<f64> = (0..n_len)
            .flat_map(|n| (0..m_len).map(move |m| (n, m)))
            .map(|(n, m)| lambda(n, m))
            .collect();
        if lambdas.iter().any(|x| !x.is_finite()) {
            return Err(invalid("diagonal data must be finite"));
        }
        Ok(Self {
            norms,
            n_len,
            m_len,
            lambdas,
            backend: Backend::DiagonalOperator,
            margin: EVALUATION_MARGIN,
            threshold: BEREZIN_RESIDUAL_THRESHOLD,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn norms(&self) -> &MonomialNormTable {
        &self.norms
    }

    /// `(min λ, max λ)` over the stored data.
    pub fn lambda_range(&self) -> (f64, f64) {
        self.lambdas
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }

    pub fn in_margin(&self, t: f64, s: f64) -> bool {
        t >= 0.0 && s >= 0.0 && self.norms.within_margin(t.sqrt(), s.sqrt(), self.margin)
    }

    /// Series value and residual without applying the threshold.
    pub fn evaluate_ts_raw(&self, t: f64, s: f64) -> Result<BerezinValue> {
        if !self.in_margin(t, s) {
            return Err(Error::OutsideMargin(format!("(t, s) = ({t}, {s})")));
        }
        let norms = &self.norms;
        let grid = LogGrid::new(self.n_len, self.m_len, |n, m| {
            ln_pow(t, n) + ln_pow(s, m) - norms.ln_unchecked(n, m)
        });
        let lam = |n: usize, m: usize| self.lambdas[n * self.m_len + m];
        let den = grid.sum(|_, _| 1.0);
        let num = grid.sum(lam);
        // The value moves by at most 2·max|λ|·(weight tail / den) when the
        // tail is restored, so the weight tail alone bounds the error.
        let residual = grid.relative_tail(|_, _| 1.0);
        Ok(BerezinValue {
            value: num / den,
            residual,
        })
    }

    pub fn evaluate_ts(&self, t: f64, s: f64) -> Result<BerezinValue> {
        let v = self.evaluate_ts_raw(t, s)?;
        if !(v.residual <= self.threshold) {
            return Err(Error::Truncation {
                residual: v.residual,
                threshold: self.threshold,
            });
        }
        Ok(v)
    }
}

impl BerezinEvaluator for DiagonalBerezin {
    fn backend(&self) -> Backend {
        self.backend
    }

    fn dimension(&self) -> usize {
        2
    }

    fn margin(&self) -> f64 {
        self.margin
    }

    fn evaluate(&self, point: &[Complex64]) -> Result<BerezinValue> {
        if point.len() != 2 {
            return Err(invalid("Reinhardt points have two coordinates"));
        }
        self.evaluate_ts(point[0].norm_sqr(), point[1].norm_sqr())
    }
}

/// `φ̃(z) = (1/π) ∫_D φ(ξ) (1 − |z|²)² / |1 − z̄ξ|⁴ dA(ξ)` on the unit disc.
#[derive(Debug, Clone)]
pub struct DiscBerezin {
    symbol: DiscSymbol,
    tol: f64,
    margin: f64,
}

impl DiscBerezin {
    pub fn new(symbol: DiscSymbol) -> Self {
        Self {
            symbol,
            tol: 1e-9,
            margin: EVALUATION_MARGIN,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn symbol(&self) -> &DiscSymbol {
        &self.symbol
    }

    pub fn evaluate_at(&self, z: Complex64) -> Result<BerezinValue> {
        if z.norm() > self.margin {
            return Err(Error::OutsideMargin(format!("{z}")));
        }
        match &self.symbol {
            DiscSymbol::Radial(psi) => radial_disc_transform(psi, z.norm(), self.tol),
            other => polar_disc_transform(other, z, self.tol),
        }
    }
}

impl BerezinEvaluator for DiscBerezin {
    fn backend(&self) -> Backend {
        Backend::DiscIntegral
    }

    fn dimension(&self) -> usize {
        1
    }

    fn margin(&self) -> f64 {
        self.margin
    }

    fn evaluate(&self, point: &[Complex64]) -> Result<BerezinValue> {
        if point.len() != 1 {
            return Err(invalid("disc points have one coordinate"));
        }
        self.evaluate_at(point[0])
    }
}

/// Cut points that resolve the kernel peak of width `1 − a` near `ρ = 1`.
fn peak_cuts(a: f64) -> Vec<f64> {
    let gap = 1.0 - a;
    let mut cuts = vec![0.0, 1.0];
    let mut d = gap;
    while d < 0.5 {
        cuts.push(1.0 - d);
        d *= 4.0;
    }
    cuts
}

/// Radial symbols: averaging over the angle leaves
/// `(1 − a²)² ∫₀¹ ψ(ρ) 2ρ (1 + a²ρ²)/(1 − a²ρ²)³ dρ`.
fn radial_disc_transform(psi: &RadialSymbol, a: f64, tol: f64) -> Result<BerezinValue> {
    let a2 = a * a;
    let pre = (1.0 - a2) * (1.0 - a2);
    let mut cuts = peak_cuts(a);
    cuts.extend(psi.breakpoints().into_iter().filter(|&b| b > 0.0 && b < 1.0));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |rho: f64| {
        let v = psi.value(rho);
        if v == 0.0 {
            return 0.0;
        }
        let x = a2 * rho * rho;
        v * pre * 2.0 * rho * (1.0 + x) / (1.0 - x).powi(3)
    };
    let opts = AdaptiveOptions {
        abs_tol: tol / cuts.len() as f64,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let r = integrate_pieces(f, &cuts, opts)?;
    Ok(BerezinValue {
        value: r.value,
        residual: r.error_estimate,
    })
}

/// General symbols: nested adaptive quadrature in polar coordinates, with
/// the angle measured from `arg z` so the kernel peak sits at `η = 0`.
fn polar_disc_transform(phi: &DiscSymbol, z: Complex64, tol: f64) -> Result<BerezinValue> {
    let (a, theta0) = z.to_polar();
    let a2 = a * a;
    let pre = (1.0 - a2) * (1.0 - a2) / PI;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_tol = 0.1 * tol;
    let ring = |rho: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let g = |eta: f64| {
            let xi = Complex64::from_polar(rho, theta0 + eta);
            let d = 1.0 + a2 * rho * rho - 2.0 * a * rho * eta.cos();
            phi.value(xi) / (d * d)
        };
        let opts = AdaptiveOptions {
            abs_tol: inner_tol / pre.max(1e-300),
            rel_tol: 0.0,
            max_intervals: 2000,
        };
        let sum = adaptive_integrate_with(g, -PI, 0.0, opts)
            .and_then(|l| adaptive_integrate_with(g, 0.0, PI, opts).map(|r| l.value + r.value));
        match sum {
            Ok(v) => pre * rho * v,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let cuts = peak_cuts(a);
    let opts = AdaptiveOptions {
        abs_tol: tol / cuts.len() as f64,
        rel_tol: 0.0,
        max_intervals: 2000,
    };
    let r = integrate_pieces(ring, &cuts, opts)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(BerezinValue {
        value: r.value,
        residual: r.error_estimate,
    })
}

/// Berezin transform of a separable symbol on a product of discs and balls:
/// each term is the product of the factor transforms.
#[derive(Debug, Clone)]
pub struct ProductBerezin {
    spec: ProductDomainSpec,
    symbol: SeparableSymbol,
    tol: f64,
    margin: f64,
}

impl ProductBerezin {
    pub fn new(spec: ProductDomainSpec, symbol: SeparableSymbol) -> Result<Self> {
        if symbol.arity() != spec.factors().len() {
            return Err(invalid(format!(
                "symbol has {} factors, domain has {}",
                symbol.arity(),
                spec.factors().len()
            )));
        }
        for term in symbol.terms() {
            for (f, phi) in spec.factors().iter().zip(&term.factors) {
                if matches!(f, Factor::Ball { .. }) && phi.as_constant().is_none() {
                    return Err(Error::Unsupported(
                        "only constant symbols are supported on ball factors".into(),
                    ));
                }
            }
        }
        Ok(Self {
            spec,
            symbol,
            tol: 1e-9,
            margin: EVALUATION_MARGIN,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn spec(&self) -> &ProductDomainSpec {
        &self.spec
    }

    pub fn symbol(&self) -> &SeparableSymbol {
        &self.symbol
    }
}

impl BerezinEvaluator for ProductBerezin {
    fn backend(&self) -> Backend {
        Backend::ProductTensor
    }

    fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    fn margin(&self) -> f64 {
        self.margin
    }

    fn evaluate(&self, point: &[Complex64]) -> Result<BerezinValue> {
        let parts = self.spec.split(point)?;
        if self.spec.max_factor_norm(point)? > self.margin {
            return Err(Error::OutsideMargin(format!("{point:?}")));
        }
        let mut total = CompensatedSum::new();
        let mut residual = 0.0;
        for term in self.symbol.terms() {
            let mut prod = term.coefficient;
            let mut err = 0.0;
            for ((f, phi), coords) in self.spec.factors().iter().zip(&term.factors).zip(&parts) {
                let v = match (f, phi.as_constant()) {
                    (_, Some(c)) => BerezinValue {
                        value: c,
                        residual: 0.0,
                    },
                    (Factor::Disc, None) => {
                        DiscBerezin::new(phi.clone()).with_tol(self.tol).evaluate_at(coords[0])?
                    }
                    (Factor::Ball { .. }, None) => unreachable!("rejected at construction"),
                };
                err = err * v.value.abs() + v.residual * prod.abs();
                prod *= v.value;
            }
            total.add(prod);
            residual += err;
        }
        Ok(BerezinValue {
            value: total.value(),
            residual,
        })
    }
}

/// Limit of the series transform as `|w| → 1` over the flat disc, for
/// `t = |z|² < α²`: the `m`-weights concentrate at large `m`, leaving
/// `Σ λ_{n,∞} (n+1) xⁿ / Σ (n+1) xⁿ` with `x = t/α²`.
pub fn flat_disc_boundary_limit(table: &EigenvalueTable, plateau_end: f64, t: f64) -> Result<BerezinValue> {
    let x = t / (plateau_end * plateau_end);
    if !(t >= 0.0 && x < 1.0) {
        return Err(Error::OutsideMargin(format!("t = {t} is not inside the flat disc")));
    }
    let limits = table.limits();
    let weights: Vec<f64> = (0..limits.len())
        .map(|n| (n as f64 + 1.0) * x.powi(n as i32))
        .collect();
    let den: CompensatedSum = weights.iter().copied().collect();
    let num: CompensatedSum = weights.iter().zip(limits).map(|(w, l)| w * l).collect();
    let abs_num: Vec<f64> = weights.iter().zip(limits).map(|(w, l)| w * l.abs()).collect();
    let abs_total: f64 = abs_num.iter().sum();
    let mut residual = geometric_tail(&weights) / den.value();
    if abs_total > 0.0 {
        residual = residual.max(geometric_tail(&abs_num) / abs_total);
    }
    if !(residual <= BEREZIN_RESIDUAL_THRESHOLD) {
        return Err(Error::Truncation {
            residual,
            threshold: BEREZIN_RESIDUAL_THRESHOLD,
        });
    }
    Ok(BerezinValue {
        value: num.value() / den.value(),
        residual,
    })
}

/// Region of `(t, s) = (|z|², |w|²)` swept by the sup search.
#[derive(Debug, Clone)]
pub enum SearchRegion {
    Rect { t: (f64, f64), s: (f64, f64) },
    /// `t ≤ margin²`, `s ≤ (margin · h(√t))²`.
    Profile { profile: RadialProfile, margin: f64 },
}

impl SearchRegion {
    fn t_range(&self) -> (f64, f64) {
        match self {
            SearchRegion::Rect { t, .. } => *t,
            SearchRegion::Profile { margin, .. } => (0.0, margin * margin),
        }
    }

    fn s_range(&self, t: f64) -> (f64, f64) {
        match self {
            SearchRegion::Rect { s, .. } => *s,
            SearchRegion::Profile { profile, margin } => {
                let b = margin * profile.h(t.max(0.0).sqrt());
                (0.0, b * b)
            }
        }
    }

    pub fn contains(&self, t: f64, s: f64) -> bool {
        let (t0, t1) = self.t_range();
        if !(t >= t0 && t <= t1) {
            return false;
        }
        let (s0, s1) = self.s_range(t);
        s >= s0 && s <= s1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupResult {
    pub sup: f64,
    pub argmax: [f64; 2],
    /// Grid spacing of the final refinement round.
    pub resolution: f64,
    pub evaluations: usize,
    /// Grid points where the evaluator refused (margin or residual).
    pub skipped: usize,
}

/// Coarse grid sweep followed by rounds of 9×9 stencils around the incumbent,
/// each round with a quarter of the previous spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupSearch {
    pub coarse_step: f64,
    pub refinements: usize,
}

impl Default for SupSearch {
    fn default() -> Self {
        Self {
            coarse_step: 0.02,
            refinements: 4,
        }
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let k = ((hi - lo) / step).floor() as usize;
    let mut out: Vec<f64> = (0..=k).map(|i| lo + i as f64 * step).collect();
    if hi - out[k] > 1e-12 * step {
        out.push(hi);
    }
    out
}

impl SupSearch {
    pub fn new(coarse_step: f64, refinements: usize) -> Result<Self> {
        if !(coarse_step > 0.0 && coarse_step <= 0.1) {
            return Err(invalid(format!("coarse_step must lie in (0, 0.1], got {coarse_step}")));
        }
        if refinements > 6 {
            return Err(invalid(format!("at most 6 refinements, got {refinements}")));
        }
        Ok(Self {
            coarse_step,
            refinements,
        })
    }

    /// Maximizes `f` over the region. Points where `f` fails are skipped;
    /// ties keep the first point in sweep order, so the result is deterministic.
    pub fn run<F>(&self, region: &SearchRegion, f: F) -> Result<SupResult>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let (t0, t1) = region.t_range();
        let mut points = Vec::new();
        for t in axis(t0, t1, self.coarse_step) {
            let (s0, s1) = region.s_range(t);
            for s in axis(s0, s1, self.coarse_step) {
                points.push([t, s]);
            }
        }
        let mut best: Option<(f64, [f64; 2])> = None;
        let mut evaluations = 0;
        let mut skipped = 0;
        let mut sweep = |pts: &[[f64; 2]], best: &mut Option<(f64, [f64; 2])>| {
            let vals: Vec<Option<f64>> = pts.par_iter().map(|p| f(p[0], p[1]).ok()).collect();
            for (p, v) in pts.iter().zip(vals) {
                evaluations += 1;
                match v {
                    Some(v) if best.is_none_or(|(b, _)| v > b) => *best = Some((v, *p)),
                    Some(_) => {}
                    None => skipped += 1,
                }
            }
        };
        sweep(&points, &mut best);
        let mut spacing = self.coarse_step;
        for _ in 0..self.refinements {
            let Some((_, [tc, sc])) = best else { break };
            spacing /= 4.0;
            let stencil: Vec<[f64; 2]> = (-4..=4)
                .flat_map(|i| (-4..=4).map(move |j| [tc + i as f64 * spacing, sc + j as f64 * spacing]))
                .filter(|&[t, s]| (t, s) != (tc, sc) && region.contains(t, s))
                .collect();
            sweep(&stencil, &mut best);
        }
        let (sup, argmax) = best.ok_or_else(|| {
            Error::OutsideMargin("no grid point of the search region could be evaluated".into())
        })?;
        Ok(SupResult {
            sup,
            argmax,
            resolution: spacing,
            evaluations,
            skipped,
        })
    }
}
