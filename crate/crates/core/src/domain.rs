//! Domain geometry: the Hartogs profile `h`, the bump symbol `χ`, the complete
//! Reinhardt domain `{(z, w): |z| < 1, |w| < h(|z|)}` and products of discs
//! and balls.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_integrate_with, AdaptiveOptions};

/// Smooth step `S(t) = exp(-1/t)` for `t > 0`, zero otherwise.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `C^∞` ramp from 0 (x ≤ 0) to 1 (x ≥ 1).
#[inline]
pub fn smooth_ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = smooth_step(x);
        let b = smooth_step(1.0 - x);
        a / (a + b)
    }
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum ProfileKind {
    Flat,
    Smooth { kappa: f64 },
    Custom { label: String, h: ProfileFn },
}

/// Hartogs profile `h: [0, 1] → (0, 1]` with plateau `[0, α]`.
#[derive(Clone)]
pub struct RadialProfile {
    plateau_end: f64,
    kind: ProfileKind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProfileKind::Flat => write!(f, "RadialProfile::Flat"),
            ProfileKind::Smooth { kappa } => write!(
                f,
                "RadialProfile::Smooth {{ alpha: {}, kappa: {} }}",
                self.plateau_end, kappa
            ),
            ProfileKind::Custom { label, .. } => write!(
                f,
                "RadialProfile::Custom {{ label: {label:?}, plateau_end: {} }}",
                self.plateau_end
            ),
        }
    }
}

/// `h ≡ 1` on [0, α] and `h(r) = exp(-κ S((r - α)/(1 - α)))` beyond.
pub fn default_profile(alpha: f64, kappa: f64) -> Result<RadialProfile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("profile.alpha must lie in (0, 1), got {alpha}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("profile.kappa must be positive, got {kappa}")));
    }
    Ok(RadialProfile {
        plateau_end: alpha,
        kind: ProfileKind::Smooth { kappa },
    })
}

impl RadialProfile {
    /// `h ≡ 1`; the Reinhardt domain is the bidisc.
    pub fn flat() -> Self {
        Self {
            plateau_end: 1.0,
            kind: ProfileKind::Flat,
        }
    }

    /// An arbitrary profile, used for experiments and counterexamples. The
    /// function is sampled on a grid to check `0 < h ≤ 1`; `plateau_end` is
    /// trusted as given and may be 0 when there is no plateau.
    pub fn custom<F>(label: impl Into<String>, plateau_end: f64, h: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(0.0..=1.0).contains(&plateau_end) {
            return Err(invalid(format!("plateau_end must lie in [0, 1], got {plateau_end}")));
        }
        for i in 0..=1000 {
            let r = i as f64 / 1000.0;
            let v = h(r);
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("custom profile has h({r}) = {v} outside (0, 1]")));
            }
        }
        Ok(Self {
            plateau_end,
            kind: ProfileKind::Custom {
                label: label.into(),
                h: Arc::new(h),
            },
        })
    }

    pub fn plateau_end(&self) -> f64 {
        self.plateau_end
    }

    pub fn kappa(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Smooth { kappa } => Some(kappa),
            _ => None,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ProfileKind::Flat)
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::Flat => "flat".into(),
            ProfileKind::Smooth { kappa } => {
                format!("smooth(alpha={}, kappa={kappa})", self.plateau_end)
            }
            ProfileKind::Custom { label, .. } => label.clone(),
        }
    }

    pub fn h(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Custom { h, .. } => h(r.clamp(0.0, 1.0)),
            _ => self.ln_h(r).exp(),
        }
    }

    /// `ln h(r)`, exact (no `exp`/`ln` round trip) for the built-in profiles.
    pub fn ln_h(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        match &self.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::Smooth { kappa } => {
                let t = (r - self.plateau_end) / (1.0 - self.plateau_end);
                -kappa * smooth_step(t)
            }
            ProfileKind::Custom { h, .. } => h(r).ln(),
        }
    }

    /// Second derivative of `u ↦ ln h(e^u)` at `r = e^u`.
    pub fn log_concavity(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::Smooth { kappa } => {
                let alpha = self.plateau_end;
                let t = (r - alpha) / (1.0 - alpha);
                if t <= 0.0 {
                    return 0.0;
                }
                let s = smooth_step(t);
                let d1 = -kappa * s / (t * t) / (1.0 - alpha);
                let d2 = -kappa * s * (1.0 - 2.0 * t) / t.powi(4) / (1.0 - alpha).powi(2);
                r * d1 + r * r * d2
            }
            ProfileKind::Custom { .. } => {
                let u = r.ln();
                let d = 1e-4;
                let psi = |u: f64| self.ln_h(u.exp());
                (psi(u + d) - 2.0 * psi(u) + psi(u - d)) / (d * d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogConvexityReport {
    pub passed: bool,
    /// Largest positive second difference found (0 when none).
    pub max_violation: f64,
    /// Radius `e^u` at the worst grid point.
    pub at_r: f64,
    pub grid_step: f64,
}

/// Checks that `u ↦ ln h(e^u)` has non-positive second differences (up to
/// 1e-8) on a grid of step `grid_step` over `u ∈ [ln 1e-3, 0)`.
pub fn check_logconvexity(profile: &RadialProfile, grid_step: f64) -> Result<LogConvexityReport> {
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(invalid(format!("grid_step must lie in (0, 0.01], got {grid_step}")));
    }
    let psi = |u: f64| profile.ln_h(u.exp());
    let u0 = 1e-3f64.ln();
    let count = ((-u0) / grid_step).floor() as usize;
    let mut worst = 0.0;
    let mut at_r = 1.0;
    for i in 1..count {
        let u = u0 + i as f64 * grid_step;
        if u + grid_step >= 0.0 {
            break;
        }
        let d2 = psi(u + grid_step) - 2.0 * psi(u) + psi(u - grid_step);
        if d2 > worst {
            worst = d2;
            at_r = u.exp();
        }
    }
    Ok(LogConvexityReport {
        passed: worst <= 1e-8,
        max_violation: worst,
        at_r,
        grid_step,
    })
}

/// Mollified indicator of `[a, b]`: a smooth ramp of the given width at each
/// end, identically 1 on `[a + width, b - width]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpSymbol {
    a: f64,
    b: f64,
    width: f64,
    first_moment: f64,
    third_moment: f64,
}

pub fn build_bump(a: f64, b: f64, width: f64) -> Result<BumpSymbol> {
    if !(a > 0.0 && a < b && b < 1.0) {
        return Err(invalid(format!("bump support needs 0 < a < b < 1, got [{a}, {b}]")));
    }
    if !(width > 0.0 && 2.0 * width < b - a) {
        return Err(invalid(format!(
            "bump.width must lie in (0, (b - a)/2) = (0, {}), got {width}",
            0.5 * (b - a)
        )));
    }
    let mut bump = BumpSymbol {
        a,
        b,
        width,
        first_moment: 0.0,
        third_moment: 0.0,
    };
    let opts = AdaptiveOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let moment = |k: i32| -> Result<f64> {
        let mut acc = 0.0;
        for w in bump.breakpoints().windows(2) {
            acc += adaptive_integrate_with(|r| bump.value(r) * r.powi(k), w[0], w[1], opts)?.value;
        }
        Ok(acc)
    };
    let first = moment(1)?;
    let third = moment(3)?;
    if first >= 2.0 * third {
        return Err(Error::MomentInequality {
            first,
            second: 2.0 * third,
        });
    }
    bump.first_moment = first;
    bump.third_moment = third;
    Ok(bump)
}

impl BumpSymbol {
    pub fn value(&self, r: f64) -> f64 {
        if r <= self.a || r >= self.b {
            return 0.0;
        }
        smooth_ramp((r - self.a) / self.width) * smooth_ramp((self.b - r) / self.width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `[a, a + width, b - width, b]`: the points where χ stops being analytic.
    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.a + self.width, self.b - self.width, self.b]
    }

    /// `∫ χ(r) r dr`.
    pub fn first_moment(&self) -> f64 {
        self.first_moment
    }

    /// `∫ χ(r) r³ dr`.
    pub fn third_moment(&self) -> f64 {
        self.third_moment
    }

    /// `2∫χ r³ − ∫χ r`, positive by construction.
    pub fn moment_margin(&self) -> f64 {
        2.0 * self.third_moment - self.first_moment
    }

    /// `sup χ`, attained on the flat part.
    pub fn sup(&self) -> f64 {
        1.0
    }
}

/// Boundary classification of the Reinhardt domain at a point with `|z| = r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `r ≤ α`: the point lies on the flat disc `{|w| = 1}` fibred over the plateau.
    LeviFlatDisc,
    /// `α < r < 1` with `ln h(e^u)` strictly concave.
    StronglyPseudoconvex,
    /// `α < r < 1` where concavity degenerates or fails.
    Weak,
    /// `r = 1`: the vertical face `{|z| = 1, |w| ≤ h(1)}`.
    VerticalFace,
}

/// Concavity threshold below which a tail point counts as strongly pseudoconvex.
pub const STRONG_CONCAVITY: f64 = -1e-6;

#[derive(Debug, Clone)]
pub struct ReinhardtDomain2D {
    profile: RadialProfile,
    log_convex: bool,
}

impl ReinhardtDomain2D {
    /// Wraps the profile; the log-convexity flag records the grid check at step 1e-3.
    pub fn new(profile: RadialProfile) -> Self {
        let log_convex = check_logconvexity(&profile, 1e-3)
            .map(|r| r.passed)
            .unwrap_or(false);
        Self {
            profile,
            log_convex,
        }
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn is_log_convex(&self) -> bool {
        self.log_convex
    }

    pub fn membership(&self, z: Complex64, w: Complex64) -> bool {
        let r = z.norm();
        r < 1.0 && w.norm() < self.profile.h(r)
    }

    /// Inside the shrunken domain `|z| ≤ margin`, `|w| ≤ margin·h(|z|)`.
    pub fn within_margin(&self, z: Complex64, w: Complex64, margin: f64) -> bool {
        let r = z.norm();
        r <= margin && w.norm() <= margin * self.profile.h(r)
    }

    pub fn classify_boundary(&self, r: f64) -> BoundaryKind {
        let alpha = self.profile.plateau_end();
        if r >= 1.0 {
            BoundaryKind::VerticalFace
        } else if r <= alpha {
            BoundaryKind::LeviFlatDisc
        } else if self.profile.log_concavity(r) < STRONG_CONCAVITY {
            BoundaryKind::StronglyPseudoconvex
        } else {
            BoundaryKind::Weak
        }
    }

    /// Radii `r ∈ (α, 1)` on a uniform grid that classify as strongly pseudoconvex.
    pub fn strongly_pseudoconvex_radii(&self, samples: usize) -> Vec<f64> {
        let alpha = self.profile.plateau_end();
        (1..samples)
            .map(|i| alpha + (1.0 - alpha) * i as f64 / samples as f64)
            .filter(|&r| self.classify_boundary(r) == BoundaryKind::StronglyPseudoconvex)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Factor {
    Disc,
    Ball { dim: usize },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Disc => 1,
            Factor::Ball { dim } => dim,
        }
    }
}

/// Product of unit discs and unit balls, coordinates concatenated in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductDomainSpec {
    factors: Vec<Factor>,
}

impl ProductDomainSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("a product domain needs at least one factor"));
        }
        if factors.iter().any(|f| f.dim() == 0) {
            return Err(invalid("ball factors need dimension ≥ 1"));
        }
        Ok(Self { factors })
    }

    pub fn disc() -> Self {
        Self {
            factors: vec![Factor::Disc],
        }
    }

    pub fn bidisc() -> Self {
        Self {
            factors: vec![Factor::Disc, Factor::Disc],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dimension(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    /// Splits a point into per-factor coordinate slices.
    pub fn split<'a>(&self, point: &'a [Complex64]) -> Result<Vec<&'a [Complex64]>> {
        if point.len() != self.dimension() {
            return Err(invalid(format!(
                "point has {} coordinates, domain has dimension {}",
                point.len(),
                self.dimension()
            )));
        }
        let mut out = Vec::with_capacity(self.factors.len());
        let mut rest = point;
        for f in &self.factors {
            let (head, tail) = rest.split_at(f.dim());
            out.push(head);
            rest = tail;
        }
        Ok(out)
    }

    /// Largest factor-wise Euclidean norm; the point is inside iff this is < 1.
    pub fn max_factor_norm(&self, point: &[Complex64]) -> Result<f64> {
        Ok(self
            .split(point)?
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max))
    }

    pub fn membership(&self, point: &[Complex64]) -> bool {
        self.max_factor_norm(point).is_ok_and(|r| r < 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MonomialIndex {
    pub n: usize,
    pub m: usize,
}

impl MonomialIndex {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }
}
