//! Toeplitz operators with radial symbols `φ(z, w) = ψ(|z|)`. They act
//! diagonally on monomials, `T_φ zⁿwᵐ = λ_{nm} zⁿwᵐ`, so everything reduces to
//! ratios of radial moments.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bergman::MonomialNormTable;
use crate::domain::RadialProfile;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{radial_moment, MomentValue};
use crate::symbol::RadialSymbol;

/// Number of trailing limit-column entries that must be non-increasing before
/// a capped maximum is accepted as the supremum.
pub const TAIL_WINDOW: usize = 10;

/// Eigenvalues `λ_{nm}` for `n ≤ N`, `m ≤ M`, and the limit column `λ_{n,∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueTable {
    n_cap: usize,
    m_cap: usize,
    entries: Vec<f64>,
    limits: Vec<f64>,
    /// True when the limit column is known to accumulate at 0 beyond the cap.
    limits_vanish: bool,
    rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormWitness {
    Limit { n: usize },
    Entry { n: usize, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    pub witness: NormWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSummary {
    pub n0: usize,
    pub norm: f64,
    pub essential_norm: f64,
    pub lambda_inf: Vec<f64>,
    pub n_cap: usize,
    pub m_cap: usize,
    pub tol: f64,
}

/// `∫ ψ(αx) x^(2n+1) dx · (2n+2)` over [0, 1]: the plateau average of ψ
/// against `r^(2n+1)`.
fn plateau_average(symbol: &RadialSymbol, alpha: f64, n: usize, rel_tol: f64) -> Result<f64> {
    let (lo, hi) = match symbol.support() {
        None => return Ok(0.0),
        Some(s) => s,
    };
    if lo >= alpha {
        return Ok(0.0);
    }
    let inner = symbol.clone();
    let rescaled = RadialSymbol::Custom {
        label: "plateau rescaling".into(),
        f: std::sync::Arc::new(move |x| inner.value(alpha * x)),
        support: Some((lo / alpha, (hi / alpha).min(1.0))),
        breakpoints: symbol
            .breakpoints()
            .into_iter()
            .map(|b| b / alpha)
            .filter(|&b| b > 0.0 && b < 1.0)
            .collect(),
    };
    let m = radial_moment(&RadialProfile::flat(), Some(&rescaled), n, 0, rel_tol)?;
    Ok(m.value() * (2.0 * n as f64 + 2.0))
}

/// `λ_{nm}` as a ratio of two radial moments.
pub fn lambda_nm(profile: &RadialProfile, symbol: &RadialSymbol, n: usize, m: usize, rel_tol: f64) -> Result<f64> {
    let num = radial_moment(profile, Some(symbol), n, m, rel_tol)?;
    let den = radial_moment(profile, None, n, m, rel_tol)?;
    if den.is_zero() {
        return Err(Error::Underflow { n, m });
    }
    Ok(num.ratio(&den))
}

/// `λ_{n,∞} = (2n+2)/α^(2n+2) · ∫ ψ r^(2n+1) dr` for a symbol supported in the plateau.
pub fn lambda_n_inf(plateau_end: f64, symbol: &RadialSymbol, n: usize, rel_tol: f64) -> Result<f64> {
    if let Some((lo, hi)) = symbol.support() {
        if hi > plateau_end {
            return Err(Error::SupportLeak {
                lo,
                hi,
                plateau_end,
            });
        }
    }
    plateau_average(symbol, plateau_end, n, rel_tol)
}

/// Eigenvalue of `T_ψ` on `zⁿ` in the Bergman space of the disc:
/// `(2n+2) ∫₀¹ ψ(r) r^(2n+1) dr`.
pub fn disc_radial_eigenvalue(symbol: &RadialSymbol, n: usize, rel_tol: f64) -> Result<f64> {
    let m = radial_moment(&RadialProfile::flat(), Some(symbol), n, 0, rel_tol)?;
    Ok(m.value() * (2.0 * n as f64 + 2.0))
}

impl EigenvalueTable {
    /// Builds the table on the domain of `norms`, reusing its denominators.
    /// Rows are computed in parallel; for symbols supported inside the
    /// plateau the numerator is computed once per row.
    pub fn build(norms: &MonomialNormTable, symbol: &RadialSymbol) -> Result<Self> {
        let profile = norms.profile();
        let alpha = profile.plateau_end();
        let rel_tol = norms.rel_tol();
        let (n_cap, m_cap) = (norms.n_cap(), norms.m_cap());
        let support = symbol.support();
        let in_plateau = support.is_some_and(|(_, hi)| hi <= alpha);
        let ln_four_pi_sq = 2.0 * (2.0 * PI).ln();

        let rows: Vec<(Vec<f64>, f64)> = (0..=n_cap)
            .into_par_iter()
            .map(|n| -> Result<(Vec<f64>, f64)> {
                if support.is_none() {
                    return Ok((vec![0.0; m_cap + 1], 0.0));
                }
                let fixed = if in_plateau {
                    Some(radial_moment(profile, Some(symbol), n, 0, rel_tol)?)
                } else {
                    None
                };
                let mut row = Vec::with_capacity(m_cap + 1);
                for m in 0..=m_cap {
                    let num = match fixed {
                        Some(v) => v,
                        None => radial_moment(profile, Some(symbol), n, m, rel_tol)?,
                    };
                    // ∫ r^(2n+1) h^(2m+2) = δ²_{nm} (2m+2) / (2π)²
                    let ln_den = norms.ln_unchecked(n, m) + (2.0 * m as f64 + 2.0).ln() - ln_four_pi_sq;
                    let den = MomentValue {
                        ln_abs: ln_den,
                        sign: 1.0,
                    };
                    row.push(num.ratio(&den));
                }
                let limit = match fixed {
                    Some(v) => {
                        let p = 2.0 * n as f64 + 2.0;
                        v.sign * (v.ln_abs + p.ln() - p * alpha.ln()).exp()
                    }
                    None => plateau_average(symbol, alpha, n, rel_tol)?,
                };
                Ok((row, limit))
            })
            .collect::<Result<_>>()?;

        let mut entries = Vec::with_capacity((n_cap + 1) * (m_cap + 1));
        let mut limits = Vec::with_capacity(n_cap + 1);
        for (row, limit) in rows {
            entries.extend(row);
            limits.push(limit);
        }
        Ok(Self {
            n_cap,
            m_cap,
            entries,
            limits,
            limits_vanish: support.is_none_or(|(_, hi)| hi < alpha),
            rel_tol,
        })
    }

    /// A table from arbitrary diagonal data, for modelling operators that are
    /// not Toeplitz (for instance compact ones with `λ → 0` in both indices).
    pub fn from_diagonal(n_cap: usize, m_cap: usize, entries: Vec<f64>, limits: Vec<f64>) -> Result<Self> {
        if entries.len() != (n_cap + 1) * (m_cap + 1) {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                (n_cap + 1) * (m_cap + 1),
                entries.len()
            )));
        }
        if limits.len() != n_cap + 1 {
            return Err(invalid(format!("expected {} limits, got {}", n_cap + 1, limits.len())));
        }
        if entries.iter().chain(&limits).any(|x| !x.is_finite()) {
            return Err(invalid("diagonal data must be finite"));
        }
        Ok(Self {
            n_cap,
            m_cap,
            entries,
            limits,
            limits_vanish: false,
            rel_tol: 0.0,
        })
    }

    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    pub fn m_cap(&self) -> usize {
        self.m_cap
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn lambda(&self, n: usize, m: usize) -> Result<f64> {
        if n > self.n_cap || m > self.m_cap {
            return Err(Error::IndexOutOfRange {
                n,
                m,
                n_cap: self.n_cap,
                m_cap: self.m_cap,
            });
        }
        Ok(self.entries[n * (self.m_cap + 1) + m])
    }

    #[inline]
    pub(crate) fn lambda_unchecked(&self, n: usize, m: usize) -> f64 {
        self.entries[n * (self.m_cap + 1) + m]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn limits(&self) -> &[f64] {
        &self.limits
    }

    /// Index of the largest `|λ_{n,∞}|` (first on ties).
    pub fn argmax(&self) -> usize {
        argmax_abs(&self.limits).0
    }

    /// Checks that `|λ_{n,∞}|` is non-increasing over the last
    /// [`TAIL_WINDOW`] indices and that its maximum occurs before them.
    pub fn tail_certificate(&self) -> Result<()> {
        let len = self.limits.len();
        let fail = Error::CapTooSmall {
            cap: self.n_cap,
            window: TAIL_WINDOW,
        };
        if len <= TAIL_WINDOW {
            return Err(fail);
        }
        let tail = &self.limits[len - TAIL_WINDOW..];
        let decreasing = tail.windows(2).all(|w| w[1].abs() <= w[0].abs());
        let (n0, max) = argmax_abs(&self.limits);
        if !decreasing || (n0 >= len - TAIL_WINDOW && max > 0.0) {
            return Err(fail);
        }
        Ok(())
    }

    /// `‖T‖ = sup |λ|` over entries and limits, with the index attaining it.
    pub fn operator_norm(&self) -> Result<NormValue> {
        self.tail_certificate()?;
        let (n0, lim) = argmax_abs(&self.limits);
        let (k, ent) = argmax_abs(&self.entries);
        Ok(if ent > lim {
            NormValue {
                value: ent,
                witness: NormWitness::Entry {
                    n: k / (self.m_cap + 1),
                    m: k % (self.m_cap + 1),
                },
            }
        } else {
            NormValue {
                value: lim,
                witness: NormWitness::Limit { n: n0 },
            }
        })
    }

    /// `‖T‖_e = max |λ_{n,∞}|`: the limit column holds the accumulation
    /// points of the eigenvalues.
    pub fn essential_norm(&self) -> Result<f64> {
        self.tail_certificate()?;
        Ok(argmax_abs(&self.limits).1)
    }

    /// Entries and limits, sorted and merged within `resolution`. A 0 is
    /// appended when the limit column is known to accumulate there.
    pub fn spectrum_approx(&self, resolution: f64) -> Result<Vec<f64>> {
        if !(resolution > 0.0) {
            return Err(invalid(format!("resolution must be positive, got {resolution}")));
        }
        let mut all: Vec<f64> = self.entries.iter().chain(&self.limits).copied().collect();
        if self.limits_vanish {
            all.push(0.0);
        }
        all.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for v in all {
            match out.last() {
                Some(&last) if v - last <= resolution => {}
                _ => out.push(v),
            }
        }
        Ok(out)
    }

    pub fn summary(&self) -> Result<EigenSummary> {
        let norm = self.operator_norm()?.value;
        Ok(EigenSummary {
            n0: self.argmax(),
            norm,
            essential_norm: self.essential_norm()?,
            lambda_inf: self.limits.clone(),
            n_cap: self.n_cap,
            m_cap: self.m_cap,
            tol: self.rel_tol,
        })
    }

    /// Writes `n,m,lambda` rows in n-major order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "m", "lambda"])?;
        for n in 0..=self.n_cap {
            for m in 0..=self.m_cap {
                w.write_record([n.to_string(), m.to_string(), self.lambda_unchecked(n, m).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn argmax_abs(xs: &[f64]) -> (usize, f64) {
    xs.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| {
            if x.abs() > bv {
                (i, x.abs())
            } else {
                (bi, bv)
            }
        })
}
