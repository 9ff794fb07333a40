//! Monomial norms, truncated Bergman kernel series on the Reinhardt domain,
//! and closed-form kernels on products of discs and balls.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Factor, ProductDomainSpec, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_integrate_with, radial_moment, AdaptiveOptions};
use crate::series::LogGrid;
use crate::summation::{ln_pow, CompensatedComplexSum};
use crate::EVALUATION_MARGIN;

/// Relative truncation residual above which kernel evaluations are refused.
pub const KERNEL_RESIDUAL_THRESHOLD: f64 = 1e-6;

/// `‖zⁿwᵐ‖² = (2π)²/(2m+2) · ∫₀¹ r^(2n+1) h(r)^(2m+2) dr`.
pub fn monomial_norm_sq(profile: &RadialProfile, n: usize, m: usize, rel_tol: f64) -> Result<f64> {
    Ok(ln_monomial_norm_sq(profile, n, m, rel_tol)?.exp())
}

fn ln_monomial_norm_sq(profile: &RadialProfile, n: usize, m: usize, rel_tol: f64) -> Result<f64> {
    let ln_prefactor = 2.0 * (2.0 * PI).ln() - (2.0 * m as f64 + 2.0).ln();
    if profile.is_flat() {
        return Ok(ln_prefactor - (2.0 * n as f64 + 2.0).ln());
    }
    let moment = radial_moment(profile, None, n, m, rel_tol)?;
    if moment.is_zero() {
        return Err(Error::Underflow { n, m });
    }
    Ok(ln_prefactor + moment.ln_abs)
}

/// `ln δ²_{nm}` for `n ≤ n_cap`, `m ≤ m_cap`, stored n-major.
#[derive(Debug, Clone)]
pub struct MonomialNormTable {
    profile: RadialProfile,
    n_cap: usize,
    m_cap: usize,
    rel_tol: f64,
    log_delta_sq: Vec<f64>,
}

impl MonomialNormTable {
    /// Builds every entry by radial quadrature; rows are computed in parallel.
    pub fn build(profile: &RadialProfile, n_cap: usize, m_cap: usize, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {rel_tol}")));
        }
        let rows: Vec<Vec<f64>> = (0..=n_cap)
            .into_par_iter()
            .map(|n| {
                (0..=m_cap)
                    .map(|m| ln_monomial_norm_sq(profile, n, m, rel_tol))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            profile: profile.clone(),
            n_cap,
            m_cap,
            rel_tol,
            log_delta_sq: rows.into_iter().flatten().collect(),
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
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

    fn check(&self, n: usize, m: usize) -> Result<()> {
        if n > self.n_cap || m > self.m_cap {
            return Err(Error::IndexOutOfRange {
                n,
                m,
                n_cap: self.n_cap,
                m_cap: self.m_cap,
            });
        }
        Ok(())
    }

    pub fn log_delta_sq(&self, n: usize, m: usize) -> Result<f64> {
        self.check(n, m)?;
        Ok(self.ln_unchecked(n, m))
    }

    #[inline]
    pub(crate) fn ln_unchecked(&self, n: usize, m: usize) -> f64 {
        self.log_delta_sq[n * (self.m_cap + 1) + m]
    }

    pub fn delta_sq(&self, n: usize, m: usize) -> Result<f64> {
        Ok(self.log_delta_sq(n, m)?.exp())
    }

    /// Writes `n,m,log_delta_sq` rows in n-major order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "m", "log_delta_sq"])?;
        for n in 0..=self.n_cap {
            for m in 0..=self.m_cap {
                w.write_record([n.to_string(), m.to_string(), self.ln_unchecked(n, m).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Inside `|z| ≤ margin`, `|w| ≤ margin·h(|z|)`.
    pub fn within_margin(&self, z_abs: f64, w_abs: f64, margin: f64) -> bool {
        z_abs <= margin && w_abs <= margin * self.profile.h(z_abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Estimated relative size of the omitted series tail (0 for closed forms).
    pub truncation_residual: f64,
}

/// A reproducing kernel on some domain in `C^d`.
pub trait BergmanKernel: Sync {
    fn dimension(&self) -> usize;
    fn kernel(&self, p: &[Complex64], q: &[Complex64]) -> Result<KernelValue>;
}

/// `K(p, q) = Σ p₁ⁿ p₂ᵐ q̄₁ⁿ q̄₂ᵐ / δ²_{nm}` truncated at the table caps.
#[derive(Debug, Clone)]
pub struct ReinhardtKernel {
    table: Arc<MonomialNormTable>,
    margin: f64,
    threshold: f64,
}

impl ReinhardtKernel {
    pub fn new(table: Arc<MonomialNormTable>) -> Self {
        Self {
            table,
            margin: EVALUATION_MARGIN,
            threshold: KERNEL_RESIDUAL_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn table(&self) -> &MonomialNormTable {
        &self.table
    }

    fn check_point(&self, p: &[Complex64]) -> Result<()> {
        if p.len() != 2 {
            return Err(invalid(format!("expected a point in C², got {} coordinates", p.len())));
        }
        if !self.table.within_margin(p[0].norm(), p[1].norm(), self.margin) {
            return Err(Error::OutsideMargin(format!("({}, {})", p[0], p[1])));
        }
        Ok(())
    }

    /// Evaluates the series and its residual without applying the threshold.
    pub fn evaluate_raw(&self, p: &[Complex64], q: &[Complex64]) -> Result<KernelValue> {
        self.check_point(p)?;
        self.check_point(q)?;
        let a = p[0] * q[0].conj();
        let b = p[1] * q[1].conj();
        let (ra, ta) = a.to_polar();
        let (rb, tb) = b.to_polar();
        let t = &self.table;
        let grid = LogGrid::new(t.n_cap + 1, t.m_cap + 1, |n, m| {
            ln_pow(ra, n) + ln_pow(rb, m) - t.ln_unchecked(n, m)
        });
        let mut acc = CompensatedComplexSum::new();
        for n in 0..grid.n_len {
            for m in 0..grid.m_len {
                let w = grid.scaled(n, m);
                if w != 0.0 {
                    acc.add(Complex64::from_polar(w, n as f64 * ta + m as f64 * tb));
                }
            }
        }
        let residual = grid.relative_tail(|_, _| 1.0);
        Ok(KernelValue {
            value: acc.value() * grid.scale.exp(),
            truncation_residual: residual,
        })
    }
}

impl BergmanKernel for ReinhardtKernel {
    fn dimension(&self) -> usize {
        2
    }

    fn kernel(&self, p: &[Complex64], q: &[Complex64]) -> Result<KernelValue> {
        let v = self.evaluate_raw(p, q)?;
        if !(v.truncation_residual <= self.threshold) {
            return Err(Error::Truncation {
                residual: v.truncation_residual,
                threshold: self.threshold,
            });
        }
        Ok(v)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Product of the factor kernels: `1/(π(1 − z q̄)²)` on discs and
/// `k!/(π^k (1 − ⟨z, q⟩)^(k+1))` on balls of dimension `k`.
pub fn kernel_closed_form(spec: &ProductDomainSpec, p: &[Complex64], q: &[Complex64]) -> Result<Complex64> {
    if spec.max_factor_norm(p)? >= 1.0 || spec.max_factor_norm(q)? >= 1.0 {
        return Err(Error::OutsideMargin("closed-form kernel needs interior points".into()));
    }
    let mut value = Complex64::new(1.0, 0.0);
    for ((f, zp), zq) in spec.factors().iter().zip(spec.split(p)?).zip(spec.split(q)?) {
        let inner: Complex64 = zp.iter().zip(zq).map(|(a, b)| a * b.conj()).sum();
        let one_minus = Complex64::new(1.0, 0.0) - inner;
        value *= match *f {
            Factor::Disc => 1.0 / (PI * one_minus * one_minus),
            Factor::Ball { dim } => {
                factorial(dim) / (PI.powi(dim as i32) * one_minus.powi(dim as i32 + 1))
            }
        };
    }
    Ok(value)
}

impl BergmanKernel for ProductDomainSpec {
    fn dimension(&self) -> usize {
        ProductDomainSpec::dimension(self)
    }

    fn kernel(&self, p: &[Complex64], q: &[Complex64]) -> Result<KernelValue> {
        Ok(KernelValue {
            value: kernel_closed_form(self, p, q)?,
            truncation_residual: 0.0,
        })
    }
}

/// `k_q(p) = K(p, q)/√K(q, q)`.
pub struct NormalizedKernel<'a> {
    kernel: &'a dyn BergmanKernel,
    q: Vec<Complex64>,
    diagonal: f64,
}

impl<'a> NormalizedKernel<'a> {
    pub fn new(kernel: &'a dyn BergmanKernel, q: &[Complex64]) -> Result<Self> {
        let d = kernel.kernel(q, q)?.value.re;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NonPositiveDiagonal(d));
        }
        Ok(Self {
            kernel,
            q: q.to_vec(),
            diagonal: d,
        })
    }

    /// `K(q, q)`.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub fn base_point(&self) -> &[Complex64] {
        &self.q
    }

    pub fn eval(&self, p: &[Complex64]) -> Result<Complex64> {
        Ok(self.kernel.kernel(p, &self.q)?.value / self.diagonal.sqrt())
    }
}

/// `∫ |k_q|² dV` on a product of discs, by polar quadrature in each factor:
/// adaptive in the radius, periodic trapezoid in the angle.
pub fn product_normalized_norm_sq(spec: &ProductDomainSpec, q: &[Complex64], tol: f64) -> Result<f64> {
    let mut total = 1.0;
    for (f, zq) in spec.factors().iter().zip(spec.split(q)?) {
        match f {
            Factor::Disc => total *= disc_normalized_norm_sq(zq[0], tol)?,
            Factor::Ball { .. } => {
                return Err(Error::Unsupported("norm quadrature on ball factors".into()))
            }
        }
    }
    Ok(total)
}

fn disc_normalized_norm_sq(q: Complex64, tol: f64) -> Result<f64> {
    let a = q.norm();
    if a >= 0.95 {
        return Err(Error::OutsideMargin(format!("{q}: angular rule needs |q| < 0.95")));
    }
    const ANGLES: usize = 1024;
    let diag = 1.0 / (PI * (1.0 - a * a).powi(2));
    let ring = |rho: f64| -> f64 {
        let mut s = 0.0;
        for k in 0..ANGLES {
            let th = 2.0 * PI * k as f64 / ANGLES as f64;
            let xi = Complex64::from_polar(rho, th);
            let one_minus = Complex64::new(1.0, 0.0) - xi * q.conj();
            s += 1.0 / (PI * PI * one_minus.norm_sqr().powi(2));
        }
        rho * s * 2.0 * PI / ANGLES as f64
    };
    let r = adaptive_integrate_with(ring, 0.0, 1.0, AdaptiveOptions::absolute(tol * diag))?;
    Ok(r.value / diag)
}

/// `|⟨zʲwᵏ, K(·, z)⟩ − zʲwᵏ(z)|` with the pairing evaluated through angular
/// orthogonality and an independent radial quadrature of `‖zʲwᵏ‖²`.
pub fn reproduce_check(table: &MonomialNormTable, j: usize, k: usize, z: [Complex64; 2]) -> Result<f64> {
    let ln_table = table.log_delta_sq(j, k)?;
    if !table.within_margin(z[0].norm(), z[1].norm(), EVALUATION_MARGIN) {
        return Err(Error::OutsideMargin(format!("({}, {})", z[0], z[1])));
    }
    let profile = table.profile();
    let f = |r: f64| {
        r.powi(2 * j as i32 + 1) * profile.h(r).powi(2 * k as i32 + 2) / (2.0 * k as f64 + 2.0)
    };
    let alpha = profile.plateau_end();
    let opts = AdaptiveOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let mut norm_sq = adaptive_integrate_with(f, 0.0, alpha, opts)?.value;
    if alpha < 1.0 {
        norm_sq += adaptive_integrate_with(f, alpha, 1.0, opts)?.value;
    }
    norm_sq *= 4.0 * PI * PI;
    let monomial = z[0].powu(j as u32) * z[1].powu(k as u32);
    let pairing = monomial * (norm_sq.ln() - ln_table).exp();
    Ok((pairing - monomial).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::default_profile;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn bidisc_norms_closed_form() {
        let flat = RadialProfile::flat();
        assert_abs_diff_eq!(monomial_norm_sq(&flat, 0, 0, 1e-12).unwrap(), PI * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(monomial_norm_sq(&flat, 1, 2, 1e-12).unwrap(), PI * PI / 6.0, epsilon = 1e-13);
    }

    #[test]
    fn table_shape_and_bounds() {
        let t = MonomialNormTable::build(&RadialProfile::flat(), 3, 4, 1e-10).unwrap();
        assert_eq!(t.n_cap(), 3);
        assert!(t.delta_sq(3, 4).is_ok());
        assert!(matches!(t.delta_sq(4, 0), Err(Error::IndexOutOfRange { .. })));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 5);
        assert!(text.starts_with("n,m,log_delta_sq\n0,0,"));
    }

    #[test]
    fn bidisc_kernel_at_origin() {
        let t = Arc::new(MonomialNormTable::build(&RadialProfile::flat(), 10, 10, 1e-10).unwrap());
        let k = ReinhardtKernel::new(t);
        let v = k.kernel(&[c(0.0), c(0.0)], &[c(0.0), c(0.0)]).unwrap();
        assert_abs_diff_eq!(v.value.re, 1.0 / (PI * PI), epsilon = 1e-15);
        assert_eq!(v.truncation_residual, 0.0);
    }

    #[test]
    fn series_refuses_outside_margin_and_large_residual() {
        let t = Arc::new(MonomialNormTable::build(&RadialProfile::flat(), 20, 20, 1e-10).unwrap());
        let k = ReinhardtKernel::new(t);
        assert!(matches!(
            k.kernel(&[c(0.9995), c(0.0)], &[c(0.0), c(0.0)]),
            Err(Error::OutsideMargin(_))
        ));
        assert!(matches!(
            k.kernel(&[c(0.9), c(0.0)], &[c(0.9), c(0.0)]),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        let disc = ProductDomainSpec::disc();
        assert_abs_diff_eq!(kernel_closed_form(&disc, &[c(0.0)], &[c(0.0)]).unwrap().re, 1.0 / PI);
        assert_abs_diff_eq!(
            kernel_closed_form(&disc, &[c(0.5)], &[c(0.5)]).unwrap().re,
            16.0 / (9.0 * PI),
            epsilon = 1e-15
        );
        let bi = ProductDomainSpec::bidisc();
        assert_abs_diff_eq!(
            kernel_closed_form(&bi, &[c(0.0), c(0.0)], &[c(0.0), c(0.0)]).unwrap().re,
            1.0 / (PI * PI)
        );
        assert!(kernel_closed_form(&disc, &[c(1.0)], &[c(0.0)]).is_err());
        let ball = ProductDomainSpec::new(vec![Factor::Ball { dim: 2 }]).unwrap();
        assert_abs_diff_eq!(
            kernel_closed_form(&ball, &[c(0.0), c(0.0)], &[c(0.0), c(0.0)]).unwrap().re,
            2.0 / (PI * PI)
        );
    }

    #[test]
    fn normalized_kernel_identities() {
        let disc = ProductDomainSpec::disc();
        let k0 = NormalizedKernel::new(&disc, &[c(0.0)]).unwrap();
        assert_abs_diff_eq!(k0.eval(&[c(0.0)]).unwrap().re, 1.0 / PI.sqrt(), epsilon = 1e-15);
        let q = [Complex64::new(0.3, 0.2)];
        let kq = NormalizedKernel::new(&disc, &q).unwrap();
        assert_abs_diff_eq!(kq.eval(&q).unwrap().re, kq.diagonal().sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn normalized_norm_on_bidisc() {
        let bi = ProductDomainSpec::bidisc();
        let v = product_normalized_norm_sq(&bi, &[c(0.3), c(0.4)], 1e-11).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn reproducing_examples() {
        let flat = Arc::new(MonomialNormTable::build(&RadialProfile::flat(), 40, 40, 1e-12).unwrap());
        assert!(reproduce_check(&flat, 0, 0, [c(0.0), c(0.0)]).unwrap() < 1e-12);
        assert!(reproduce_check(&flat, 1, 0, [c(0.5), c(0.2)]).unwrap() < 1e-9);
        let h = default_profile(0.95, 4.0).unwrap();
        let t = MonomialNormTable::build(&h, 40, 40, 1e-11).unwrap();
        assert!(reproduce_check(&t, 2, 3, [c(0.4), c(0.3)]).unwrap() < 1e-7);
    }
}
