//! One-dimensional quadrature: Gauss–Legendre rules of arbitrary order, a
//! globally adaptive Gauss–Kronrod (7, 15) integrator, and the radial moment
//! integrals `∫ ψ(r) r^(2n+1) h(r)^(2m+2) dr` that feed every kernel and
//! eigenvalue computation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::domain::RadialProfile;
use crate::error::{invalid, Error, Result};
use crate::summation::CompensatedSum;
use crate::symbol::RadialSymbol;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(invalid(format!("Gauss–Legendre order must be ≥ 2, got {order}")));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, p_prev) = legendre_pair(n, x);
                dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (p, p_prev) = legendre_pair(n, x);
            if p != 0.0 {
                dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    /// Cached rule shared across threads.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().expect("gauss cache poisoned").get(&order) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::new(order)?);
        cache
            .lock()
            .expect("gauss cache poisoned")
            .insert(order, rule.clone());
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (x, w) in self.mapped(a, b) {
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::NonFinite { x });
            }
            acc.add(w * y);
        }
        Ok(acc.value())
    }
}

/// Returns (P_n(x), P_{n-1}(x)).
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre approximation of ∫ₐᵇ f, exact for polynomials of degree ≤ 2·order − 1.
pub fn fixed_gauss<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, order: usize) -> Result<f64> {
    if !(a < b) {
        return Err(invalid(format!("fixed_gauss needs a < b, got [{a}, {b}]")));
    }
    GaussLegendre::cached(order)?.integrate(a, b, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    /// Tolerance relative to |value|; zero disables the relative criterion.
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl AdaptiveOptions {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: 2000,
        }
    }

    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            max_intervals: 2000,
        }
    }
}

// Gauss–Kronrod (7, 15) abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { x })
        }
    };
    let fc = eval(mid)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_k = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(mid - dx)?;
        let f2 = eval(mid + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_k * half.abs(),
    })
}

/// Globally adaptive Gauss–Kronrod integration: the subinterval with the
/// largest embedded-rule error is bisected until the summed estimate meets
/// the tolerance. The error estimate is never reported below the round-off
/// floor `50 ε ∫|f|`.
pub fn adaptive_integrate_with<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<QuadratureResult> {
    if !(a < b) {
        return Err(invalid(format!("adaptive_integrate needs a < b, got [{a}, {b}]")));
    }
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) || (opts.abs_tol == 0.0 && opts.rel_tol == 0.0)
    {
        return Err(invalid("adaptive_integrate needs a positive tolerance"));
    }
    let first = kronrod15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let (value, error, abs_value) = totals(&heap);
        let floor = 50.0 * f64::EPSILON * abs_value;
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || error <= floor {
            return Ok(QuadratureResult {
                value,
                error_estimate: error.max(floor.min(error)),
                evaluations,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::MaxDepthExceeded {
                intervals: heap.len(),
                value,
                error_estimate: error,
                tol: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; keep it but stop refining it.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod15(&mut f, worst.a, mid)?);
        heap.push(kronrod15(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64, f64) {
    let mut v = CompensatedSum::new();
    let mut e = CompensatedSum::new();
    let mut s = CompensatedSum::new();
    for seg in heap.iter() {
        v.add(seg.value);
        e.add(seg.error);
        s.add(seg.abs_value);
    }
    (v.value(), e.value(), s.value())
}

/// Adaptive integration to an absolute tolerance.
pub fn adaptive_integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    adaptive_integrate_with(f, a, b, AdaptiveOptions::absolute(tol))
}

/// Adaptive integration over consecutive pieces `[p₀, p₁], [p₁, p₂], …`.
/// Zero-length pieces are skipped.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    opts: AdaptiveOptions,
) -> Result<QuadratureResult> {
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let r = adaptive_integrate_with(&mut f, w[0], w[1], opts)?;
            value.add(r.value);
            error += r.error_estimate;
            evaluations += r.evaluations;
        }
    }
    Ok(QuadratureResult {
        value: value.value(),
        error_estimate: error,
        evaluations: evaluations.max(1),
    })
}

/// A real number stored as `sign · exp(ln_abs)` so that moments of very
/// high order survive without underflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub ln_abs: f64,
    pub sign: f64,
}

impl MomentValue {
    pub const ZERO: MomentValue = MomentValue {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn from_scaled(mantissa: f64, ln_scale: f64) -> Self {
        if mantissa == 0.0 {
            Self::ZERO
        } else {
            Self {
                ln_abs: mantissa.abs().ln() + ln_scale,
                sign: mantissa.signum(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    /// True when the moment is nonzero but `value()` underflows to 0.
    pub fn underflows(&self) -> bool {
        self.sign != 0.0 && self.value() == 0.0
    }

    /// `self / other` as an ordinary float.
    pub fn ratio(&self, other: &MomentValue) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.sign * other.sign * (self.ln_abs - other.ln_abs).exp()
    }

    /// Sum of scaled values with compensated accumulation.
    pub fn sum(values: &[MomentValue]) -> MomentValue {
        let scale = values
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if !scale.is_finite() {
            return Self::ZERO;
        }
        let acc: CompensatedSum = values
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.sign * (v.ln_abs - scale).exp())
            .collect();
        Self::from_scaled(acc.value(), scale)
    }
}

/// `∫ ψ(r) r^(2n+1) h(r)^(2m+2) dr` over [0, 1] (ψ ≡ 1 when `weight` is absent).
///
/// Weighted moments integrate over the symbol support only. Pieces inside the
/// plateau with no weight use the closed form `(b^(2n+2) − a^(2n+2))/(2n+2)`;
/// everything else is integrated adaptively in log-scaled form, to relative
/// accuracy `rel_tol`.
pub fn radial_moment(
    profile: &RadialProfile,
    weight: Option<&RadialSymbol>,
    n: usize,
    m: usize,
    rel_tol: f64,
) -> Result<MomentValue> {
    let (lo, hi) = match weight {
        None => (0.0, 1.0),
        Some(w) => match w.support() {
            None => return Ok(MomentValue::ZERO),
            Some((lo, hi)) => (lo.max(0.0), hi.min(1.0)),
        },
    };
    if !(lo < hi) {
        return Ok(MomentValue::ZERO);
    }
    let plateau = profile.plateau_end();
    let mut cuts = vec![lo, hi];
    if plateau > lo && plateau < hi {
        cuts.push(plateau);
    }
    if let Some(w) = weight {
        cuts.extend(w.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut pieces = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        if weight.is_none() && b <= plateau {
            pieces.push(plateau_power_moment(a, b, n));
            continue;
        }
        pieces.push(scaled_piece(profile, weight, n, m, a, b, rel_tol)?);
    }
    Ok(MomentValue::sum(&pieces))
}

/// `∫ₐᵇ r^(2n+1) dr` in log form.
fn plateau_power_moment(a: f64, b: f64, n: usize) -> MomentValue {
    let p = 2.0 * n as f64 + 2.0;
    let ln_b = p * b.ln() - p.ln();
    if a <= 0.0 {
        return MomentValue { ln_abs: ln_b, sign: 1.0 };
    }
    let ratio = (p * (a / b).ln()).exp();
    MomentValue {
        ln_abs: ln_b + (-ratio).ln_1p(),
        sign: 1.0,
    }
}

fn scaled_piece(
    profile: &RadialProfile,
    weight: Option<&RadialSymbol>,
    n: usize,
    m: usize,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<MomentValue> {
    let r_exp = 2.0 * n as f64 + 1.0;
    let h_exp = 2.0 * m as f64 + 2.0;
    let ln_weight = |r: f64| -> f64 {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        r_exp * r.ln() + h_exp * profile.ln_h(r)
    };
    // Scale by the largest sampled log-integrand so the integrand stays O(1).
    const SAMPLES: usize = 48;
    let mut scale = f64::NEG_INFINITY;
    for i in 0..=SAMPLES {
        let r = a + (b - a) * i as f64 / SAMPLES as f64;
        scale = scale.max(ln_weight(r));
    }
    if !scale.is_finite() {
        return Ok(MomentValue::ZERO);
    }
    let integrand = |r: f64| -> f64 {
        let psi = weight.map_or(1.0, |w| w.value(r));
        if psi == 0.0 {
            return 0.0;
        }
        psi * (ln_weight(r) - scale).exp()
    };
    let opts = AdaptiveOptions {
        abs_tol: 1e-300,
        rel_tol,
        max_intervals: 4000,
    };
    let r = adaptive_integrate_with(integrand, a, b, opts)?;
    Ok(MomentValue::from_scaled(r.value, scale))
}
