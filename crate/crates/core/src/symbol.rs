//! Multiplication symbols: radial functions of `|z|`, general functions on the
//! disc, and separable symbols on product domains.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::BumpSymbol;
use crate::error::{invalid, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// A real symbol `ψ(r)` on [0, 1], applied as `φ(z, w) = ψ(|z|)` on Reinhardt
/// domains and `φ(ξ) = ψ(|ξ|)` on the disc.
#[derive(Clone)]
pub enum RadialSymbol {
    /// `Σ cₖ rᵏ`.
    Polynomial(Vec<f64>),
    /// `scale · χ(r)`.
    Bump { bump: BumpSymbol, scale: f64 },
    Sum(Vec<RadialSymbol>),
    Custom {
        label: String,
        f: RealFn,
        support: Option<(f64, f64)>,
        breakpoints: Vec<f64>,
    },
}

impl fmt::Debug for RadialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialSymbol::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            RadialSymbol::Bump { bump, scale } => f
                .debug_struct("Bump")
                .field("support", &bump.support())
                .field("scale", scale)
                .finish(),
            RadialSymbol::Sum(terms) => f.debug_tuple("Sum").field(terms).finish(),
            RadialSymbol::Custom { label, support, .. } => f
                .debug_struct("Custom")
                .field("label", label)
                .field("support", support)
                .finish(),
        }
    }
}

impl RadialSymbol {
    pub fn constant(c: f64) -> Self {
        RadialSymbol::Polynomial(vec![c])
    }

    pub fn zero() -> Self {
        RadialSymbol::Polynomial(vec![])
    }

    /// `|ξ|² = r²`.
    pub fn abs2() -> Self {
        RadialSymbol::Polynomial(vec![0.0, 0.0, 1.0])
    }

    pub fn bump(bump: BumpSymbol) -> Self {
        RadialSymbol::Bump { bump, scale: 1.0 }
    }

    pub fn custom<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RadialSymbol::Custom {
            label: label.into(),
            f: Arc::new(f),
            support: Some((0.0, 1.0)),
            breakpoints: vec![],
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            RadialSymbol::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * r + ck),
            RadialSymbol::Bump { bump, scale } => scale * bump.value(r),
            RadialSymbol::Sum(terms) => terms.iter().map(|t| t.value(r)).sum(),
            RadialSymbol::Custom { f, support, .. } => match support {
                Some((lo, hi)) if r >= *lo && r <= *hi => f(r),
                _ => 0.0,
            },
        }
    }

    /// Closed interval outside of which the symbol vanishes; `None` for the zero symbol.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            RadialSymbol::Polynomial(c) => c.iter().any(|&x| x != 0.0).then_some((0.0, 1.0)),
            RadialSymbol::Bump { bump, scale } => (*scale != 0.0).then(|| bump.support()),
            RadialSymbol::Sum(terms) => terms
                .iter()
                .filter_map(RadialSymbol::support)
                .reduce(|(a, b), (c, d)| (a.min(c), b.max(d))),
            RadialSymbol::Custom { support, .. } => *support,
        }
    }

    /// Interior points where the symbol is not analytic; quadrature splits there.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            RadialSymbol::Polynomial(_) => vec![],
            RadialSymbol::Bump { bump, .. } => bump.breakpoints().to_vec(),
            RadialSymbol::Sum(terms) => terms.iter().flat_map(RadialSymbol::breakpoints).collect(),
            RadialSymbol::Custom {
                breakpoints,
                support,
                ..
            } => {
                let mut b = breakpoints.clone();
                if let Some((lo, hi)) = support {
                    b.extend([*lo, *hi]);
                }
                b
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `c · ψ`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            RadialSymbol::Polynomial(k) => RadialSymbol::Polynomial(k.iter().map(|x| c * x).collect()),
            RadialSymbol::Bump { bump, scale } => RadialSymbol::Bump {
                bump: bump.clone(),
                scale: c * scale,
            },
            RadialSymbol::Sum(terms) => RadialSymbol::Sum(terms.iter().map(|t| t.scaled(c)).collect()),
            RadialSymbol::Custom {
                label,
                f,
                support,
                breakpoints,
            } => {
                let f = f.clone();
                RadialSymbol::Custom {
                    label: format!("{c}*({label})"),
                    f: Arc::new(move |r| c * f(r)),
                    support: *support,
                    breakpoints: breakpoints.clone(),
                }
            }
        }
    }

    /// Range `[min ψ, max ψ]` over [0, 1], sampled on a fine grid that
    /// includes every breakpoint. Exact for the bump and for monotone pieces.
    pub fn range(&self) -> (f64, f64) {
        let mut pts: Vec<f64> = (0..=4000).map(|i| i as f64 / 4000.0).collect();
        pts.extend(self.breakpoints());
        pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            let v = self.value(r);
            (lo.min(v), hi.max(v))
        })
    }

    /// `sup |ψ|` over [0, 1].
    pub fn sup_abs(&self) -> f64 {
        let (lo, hi) = self.range();
        lo.abs().max(hi.abs())
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            RadialSymbol::Polynomial(c) if c.iter().skip(1).all(|&x| x == 0.0) => {
                Some(c.first().copied().unwrap_or(0.0))
            }
            _ => None,
        }
    }
}

/// A real symbol on the unit disc.
#[derive(Clone)]
pub enum DiscSymbol {
    Radial(RadialSymbol),
    /// `Re ξ`.
    RealPart,
    Custom { label: String, f: ComplexFn },
}

impl fmt::Debug for DiscSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscSymbol::Radial(r) => f.debug_tuple("Radial").field(r).finish(),
            DiscSymbol::RealPart => write!(f, "RealPart"),
            DiscSymbol::Custom { label, .. } => f.debug_struct("Custom").field("label", label).finish(),
        }
    }
}

impl DiscSymbol {
    pub fn constant(c: f64) -> Self {
        DiscSymbol::Radial(RadialSymbol::constant(c))
    }

    pub fn abs2() -> Self {
        DiscSymbol::Radial(RadialSymbol::abs2())
    }

    pub fn custom<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        DiscSymbol::Custom {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn value(&self, xi: Complex64) -> f64 {
        match self {
            DiscSymbol::Radial(r) => r.value(xi.norm()),
            DiscSymbol::RealPart => xi.re,
            DiscSymbol::Custom { f, .. } => f(xi),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            DiscSymbol::Radial(r) => r.is_constant(),
            _ => None,
        }
    }
}

/// `coefficient · Π φⱼ(zⱼ)`, one factor symbol per domain factor.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub coefficient: f64,
    pub factors: Vec<DiscSymbol>,
}

/// Finite sum of separable terms on a product domain.
#[derive(Debug, Clone)]
pub struct SeparableSymbol {
    terms: Vec<SeparableTerm>,
    arity: usize,
}

impl SeparableSymbol {
    pub fn new(arity: usize, terms: Vec<SeparableTerm>) -> Result<Self> {
        if arity == 0 {
            return Err(invalid("separable symbols need at least one factor"));
        }
        if let Some(t) = terms.iter().find(|t| t.factors.len() != arity) {
            return Err(invalid(format!(
                "separable term has {} factors, expected {arity}",
                t.factors.len()
            )));
        }
        Ok(Self { terms, arity })
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Self {
            terms: vec![SeparableTerm {
                coefficient: c,
                factors: vec![DiscSymbol::constant(1.0); arity],
            }],
            arity,
        }
    }

    /// `φ` acting on factor `j` alone.
    pub fn single(arity: usize, j: usize, phi: DiscSymbol) -> Result<Self> {
        if j >= arity {
            return Err(invalid(format!("factor index {j} out of range for arity {arity}")));
        }
        let mut factors = vec![DiscSymbol::constant(1.0); arity];
        factors[j] = phi;
        Self::new(
            arity,
            vec![SeparableTerm {
                coefficient: 1.0,
                factors,
            }],
        )
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Value at a point given by one representative coordinate per factor.
    pub fn value(&self, coords: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coefficient
                    * t.factors
                        .iter()
                        .zip(coords)
                        .map(|(f, &z)| f.value(z))
                        .product::<f64>()
            })
            .sum()
    }
}
