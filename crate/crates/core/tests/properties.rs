use std::sync::{Arc, OnceLock};

use berezin_core::config::ProfileKindConfig;
use berezin_core::summation::CompensatedSum;
use berezin_core::{
    default_profile, BergmanKernel, BerezinEvaluator, Complex64, DiagonalBerezin, DiscBerezin, DiscSymbol,
    DomainConfig, EigenvalueTable, MonomialNormTable, RadialSymbol, ReinhardtKernel,
};
use proptest::prelude::*;

fn norms() -> Arc<MonomialNormTable> {
    static T: OnceLock<Arc<MonomialNormTable>> = OnceLock::new();
    T.get_or_init(|| {
        let p = default_profile(0.95, 4.0).unwrap();
        Arc::new(MonomialNormTable::build(&p, 40, 40, 1e-11).unwrap())
    })
    .clone()
}

/// A point with `|z| ≤ 0.6` and `|w| ≤ 0.6`, where 40 terms converge.
fn point() -> impl Strategy<Value = [Complex64; 2]> {
    (0.0..0.6f64, 0.0..6.3f64, 0.0..0.6f64, 0.0..6.3f64)
        .prop_map(|(r, a, s, b)| [Complex64::from_polar(r, a), Complex64::from_polar(s, b)])
}

fn poly() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_hermitian(p in point(), q in point()) {
        let k = ReinhardtKernel::new(norms());
        let a = k.kernel(&p, &q).unwrap().value;
        let b = k.kernel(&q, &p).unwrap().value;
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn kernel_cauchy_schwarz(p in point(), q in point()) {
        let k = ReinhardtKernel::new(norms());
        let pq = k.kernel(&p, &q).unwrap().value.norm_sqr();
        let pp = k.kernel(&p, &p).unwrap().value.re;
        let qq = k.kernel(&q, &q).unwrap().value.re;
        prop_assert!(pp > 0.0 && qq > 0.0);
        prop_assert!(pq <= pp * qq * (1.0 + 1e-12));
    }

    #[test]
    fn diagonal_transform_is_contractive(p in point(), seed in any::<u64>(), scale in 0.01..100.0f64) {
        let eval = DiagonalBerezin::from_fn(norms(), |n, m| {
            let h = (seed ^ (n as u64 * 0x9E37_79B9) ^ ((m as u64) << 40)).wrapping_mul(0x2545_F491_4F6C_DD1D);
            scale * ((h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
        }).unwrap();
        let (lo, hi) = eval.lambda_range();
        let v = eval.evaluate(&p).unwrap().value;
        prop_assert!(v >= lo - 1e-12 * scale && v <= hi + 1e-12 * scale, "{} not in [{}, {}]", v, lo, hi);
    }

    #[test]
    fn constant_symbols_average_to_themselves(c in -5.0..5.0f64, p in point()) {
        let table = EigenvalueTable::build(&norms(), &RadialSymbol::constant(c)).unwrap();
        let eval = DiagonalBerezin::from_table(norms(), &table).unwrap();
        prop_assert!((eval.evaluate(&p).unwrap().value - c).abs() <= 1e-12 * c.abs().max(1.0));
        let disc = DiscBerezin::new(DiscSymbol::constant(c));
        prop_assert!((disc.evaluate_at(p[0]).unwrap().value - c).abs() <= 1e-9);
    }

    #[test]
    fn disc_transform_is_linear(a in poly(), b in poly(), s in -3.0..3.0f64, r in 0.0..0.95f64, th in 0.0..6.3f64) {
        let z = Complex64::from_polar(r, th);
        let eval = |c: Vec<f64>| DiscBerezin::new(DiscSymbol::Radial(RadialSymbol::Polynomial(c))).evaluate_at(z).unwrap().value;
        let len = a.len().max(b.len());
        let combo: Vec<f64> = (0..len)
            .map(|i| a.get(i).copied().unwrap_or(0.0) + s * b.get(i).copied().unwrap_or(0.0))
            .collect();
        let lhs = eval(combo);
        let rhs = eval(a) + s * eval(b);
        prop_assert!((lhs - rhs).abs() <= 1e-8);
    }

    #[test]
    fn eigenvalues_lie_in_symbol_range(c in poly(), scale in 0.1..10.0f64) {
        let psi = RadialSymbol::Polynomial(c.iter().map(|x| x * scale).collect());
        let (lo, hi) = psi.range();
        let table = EigenvalueTable::build(&norms(), &psi).unwrap();
        let slack = 1e-9 * scale;
        for &l in table.entries().iter().chain(table.limits()) {
            prop_assert!(l >= lo - slack && l <= hi + slack, "{} not in [{}, {}]", l, lo, hi);
        }
    }

    #[test]
    fn scaling_commutes_with_transform(c in poly(), k in -4.0..4.0f64, p in point()) {
        let psi = RadialSymbol::Polynomial(c);
        let t1 = EigenvalueTable::build(&norms(), &psi).unwrap();
        let t2 = EigenvalueTable::build(&norms(), &psi.scaled(k)).unwrap();
        let e1 = DiagonalBerezin::from_table(norms(), &t1).unwrap().evaluate(&p).unwrap().value;
        let e2 = DiagonalBerezin::from_table(norms(), &t2).unwrap().evaluate(&p).unwrap().value;
        prop_assert!((e2 - k * e1).abs() <= 1e-10 * (1.0 + e1.abs() * k.abs()));
    }

    #[test]
    fn config_text_round_trips(
        alpha in 0.5..0.99f64, kappa in 0.5..10.0f64,
        a in 0.55..0.65f64, len in 0.2..0.33f64, flat in any::<bool>(),
        caps in prop::option::of((1usize..500, 1usize..500)), tol in prop::option::of(1e-14..1e-4f64),
    ) {
        let cfg = DomainConfig {
            profile_kind: if flat { ProfileKindConfig::Flat } else { ProfileKindConfig::Smooth },
            alpha, kappa, bump_a: a, bump_b: a + len, bump_width: 0.02, caps, tol,
        };
        prop_assume!(cfg.bump().is_ok());
        prop_assert_eq!(DomainConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn compensated_sum_is_order_independent(xs in prop::collection::vec(-1e10..1e10f64, 1..200)) {
        let fwd: CompensatedSum = xs.iter().copied().collect();
        let rev: CompensatedSum = xs.iter().rev().copied().collect();
        let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        prop_assert!((fwd.value() - rev.value()).abs() <= 1e-15 * scale * xs.len() as f64);
    }
}
