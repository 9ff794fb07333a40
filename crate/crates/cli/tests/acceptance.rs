//! Acceptance criteria 1–10, run in order inside one test so that runtimes
//! are measured without interference. Each criterion prints a PASS/FAIL line
//! to stderr (uncaptured) and the test fails if any criterion fails.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use berezin_cli::commands::{self, DomainPreset, Status};
use berezin_cli::{RunConfig, SymbolExpr, MASS_CAPS, PROBE_CAPS};
use berezin_core::bergman::{product_normalized_norm_sq, reproduce_check};
use berezin_core::regularity::essential_norm_identity_check;
use berezin_core::toeplitz::{disc_radial_eigenvalue, TAIL_WINDOW};
use berezin_core::{
    build_bump, default_profile, kernel_closed_form, BergmanKernel, BerezinEvaluator, Complex64,
    DiagonalBerezin, DiscBerezin, DiscSymbol, EigenvalueTable, MonomialNormTable, ProductBerezin,
    ProductDomainSpec, RadialProfile, RadialSymbol, ReinhardtKernel, SeparableSymbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_berezin")
}

fn rc(caps: (usize, usize)) -> RunConfig {
    RunConfig::resolve(None, None, None, None, caps).unwrap()
}

fn criterion_1() -> Outcome {
    let eval = ProductBerezin::new(
        ProductDomainSpec::bidisc(),
        SeparableSymbol::single(2, 0, DiscSymbol::abs2()).unwrap(),
    )
    .unwrap();
    let v = eval.evaluate(&[c(0.0), c(0.0)]).map_err(|e| e.to_string())?.value;
    let doc = commands::berezin_eval(
        &rc((1, 1)),
        DomainPreset::Bidisc,
        &SymbolExpr::parse("abs2(z1)").unwrap(),
        &[c(0.0), c(0.0)],
    )
    .map_err(|e| e.to_string())?;
    check((v - 0.5).abs() < 1e-6, format!("core value {v}"))?;
    check((doc.value - 0.5).abs() < 1e-6, format!("cli value {}", doc.value))?;
    Ok(format!("value {v:.15}, |err| {:.1e}", (v - 0.5).abs()))
}

fn criterion_2() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = Command::new(bin())
        .args(["reproduce-example", "--caps", "60,60", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    check(
        out.status.code() == Some(0),
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)),
    )?;
    let text = std::fs::read_to_string(dir.path().join("summary.json")).map_err(|e| e.to_string())?;
    let s: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let g = s["gamma_sup"]["value"].as_f64().unwrap();
    let i = s["interior_sup"]["sup"].as_f64().unwrap();
    let e = s["essential_norm"].as_f64().unwrap();
    let n = s["operator_norm"]["value"].as_f64().unwrap();
    let x = s["symbol_sup"].as_f64().unwrap();
    check(g <= i, format!("gamma {g} > interior {i}"))?;
    check(i - g > 1e-6 && e - i > 1e-6 && x - n > 1e-6, "gap below 1e-6")?;
    check(e == n, format!("essential {e} != operator {n}"))?;
    check(x == 1.0, format!("sup of bump {x}"))?;
    check(s["chain_holds"] == serde_json::Value::Bool(true), "chain_holds false")?;

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "bump.a = 0.05\nbump.b = 0.3\n").unwrap();
    let out = Command::new(bin())
        .args(["reproduce-example", "--config"])
        .arg(&bad)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.code() == Some(1), "moment-violating bump did not exit 1")?;
    Ok(format!(
        "gamma {g:.6} <= interior {i:.6} < essential {e:.6} = operator {n:.6} < sup {x}"
    ))
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn criterion_3() -> Outcome {
    let bump = build_bump(0.52, 0.93, 0.02).map_err(|e| e.to_string())?;
    let bp = bump.breakpoints();
    let moment = |k: i32| {
        bp.windows(2)
            .map(|w| simpson(|r| bump.value(r) * r.powi(k), w[0], w[1], 20_000))
            .sum::<f64>()
    };
    let (m1, m3) = (moment(1), moment(3));
    check(m1 < 2.0 * m3, format!("{m1} >= 2·{m3}"))?;
    check((m1 - bump.first_moment()).abs() < 1e-8, format!("first moment {m1} vs {}", bump.first_moment()))?;
    check((m3 - bump.third_moment()).abs() < 1e-8, format!("third moment {m3} vs {}", bump.third_moment()))?;
    Ok(format!("∫χr = {m1:.10} < 2∫χr³ = {:.10}", 2.0 * m3))
}

fn criterion_4() -> Outcome {
    let profile = default_profile(0.95, 4.0).unwrap();
    let norms = MonomialNormTable::build(&profile, 60, 60, 1e-10).map_err(|e| e.to_string())?;
    let bump = build_bump(0.52, 0.93, 0.02).unwrap();
    let t = EigenvalueTable::build(&norms, &RadialSymbol::bump(bump)).map_err(|e| e.to_string())?;
    let lim = t.limits();
    let mut worst = f64::INFINITY;
    for n in 0..=20 {
        for m in 0..=40 {
            let (a, b) = (t.lambda(n, m).unwrap(), t.lambda(n, m + 1).unwrap());
            worst = worst.min(b - a).min(lim[n] - b);
        }
    }
    check(worst > 1e-12, format!("smallest gap {worst:e}"))?;
    check(lim[0] < lim[1], "λ_{0,∞} >= λ_{1,∞}")?;
    let tail = &lim[61 - TAIL_WINDOW..];
    check(tail.windows(2).all(|w| w[1] < w[0]), "tail not decreasing")?;
    let max = lim.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check(lim[60] < 0.1 * max, format!("λ_60,∞ = {} vs max {max}", lim[60]))?;
    Ok(format!(
        "min gap {worst:.3e}, λ_0,∞ {:.6} < λ_1,∞ {:.6}, λ_60,∞ {:.6} < 0.1·{max:.6}",
        lim[0], lim[1], lim[60]
    ))
}

fn criterion_5() -> Outcome {
    let cases = [
        ("r²", RadialSymbol::Polynomial(vec![0.0, 0.0, 1.0])),
        ("1−r", RadialSymbol::Polynomial(vec![1.0, -1.0])),
    ];
    // λ_n(1 − r) = 1/(2n+3) in closed form.
    for n in [0, 5, 60] {
        let l = disc_radial_eigenvalue(&cases[1].1, n, 1e-12).map_err(|e| e.to_string())?;
        check((l - 1.0 / (2.0 * n as f64 + 3.0)).abs() < 1e-12, format!("λ_{n}(1−r) = {l}"))?;
    }
    let mut parts = Vec::new();
    for (name, psi) in &cases {
        let r = essential_norm_identity_check(psi, 60, 1e-12).map_err(|e| e.to_string())?;
        check(r.difference < 5e-3, format!("{name}: limsup {} vs {}", r.limsup, r.boundary_value))?;
        let pl = r.path_limit.estimate.ok_or(format!("{name}: boundary path inconclusive"))?;
        check((pl - r.boundary_value).abs() < 5e-3, format!("{name}: path limit {pl}"))?;
        parts.push(format!("{name}: limsup {:.2e} off, path limit {pl:.6}", r.difference));
    }
    Ok(parts.join("; "))
}

fn criterion_6() -> Outcome {
    let flat = RadialProfile::flat();
    let norms = Arc::new(MonomialNormTable::build(&flat, 200, 200, 1e-12).map_err(|e| e.to_string())?);
    let kernel = ReinhardtKernel::new(norms.clone());
    let spec = ProductDomainSpec::bidisc();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let point = |rng: &mut ChaCha8Rng| -> [Complex64; 2] {
        [0, 1].map(|_| Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..6.3)))
    };
    let (mut kernel_err, mut repro_err, mut norm_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let (p, q) = (point(&mut rng), point(&mut rng));
        let series = kernel.kernel(&p, &q).map_err(|e| e.to_string())?.value;
        let exact = kernel_closed_form(&spec, &p, &q).map_err(|e| e.to_string())?;
        kernel_err = kernel_err.max((series - exact).norm() / exact.norm());
        let (j, k) = (i % 7, (3 * i) % 11);
        repro_err = repro_err.max(reproduce_check(&norms, j, k, p).map_err(|e| e.to_string())?);
        if i % 10 == 0 {
            let ns = product_normalized_norm_sq(&spec, &q, 1e-11).map_err(|e| e.to_string())?;
            norm_err = norm_err.max((ns.sqrt() - 1.0).abs());
        }
    }
    check(kernel_err < 1e-8, format!("kernel rel err {kernel_err:e}"))?;
    check(repro_err < 1e-7, format!("reproducing err {repro_err:e}"))?;
    check(norm_err < 1e-8, format!("‖k_q‖ err {norm_err:e}"))?;
    Ok(format!(
        "kernel rel err {kernel_err:.1e}, reproducing {repro_err:.1e}, ‖k_q‖−1 {norm_err:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let mp = commands::mass_profile_cmd(&rc(MASS_CAPS), 0.99, 201, 0.2).map_err(|e| e.to_string())?;
    check(mp.total_mass <= 1.0 + 1e-6, format!("total mass {}", mp.total_mass))?;
    check(
        mp.plateau_monotone.holds,
        format!("M_q decreases by {:e} on the flat disc", mp.plateau_monotone.worst_decrease),
    )?;
    check(mp.test_functional <= 1e-8, format!("test functional {}", mp.test_functional))?;

    let (status, doc) = commands::probe(
        &rc(PROBE_CAPS),
        DomainPreset::Example,
        &SymbolExpr::parse("1-abs2(z1)").unwrap(),
        &[c(0.0), c(1.0)],
        &["normal".into(), "tangential".into(), "slant".into()],
        12,
    )
    .map_err(|e| e.to_string())?;
    check(status == Status::Success, "probe inconclusive")?;
    let normal = doc.report.paths[0].estimate.ok_or("normal path inconclusive")?;
    check((normal - 1.0).abs() > 0.3, format!("normal limit {normal}"))?;
    check(doc.report.matches_symbol == Some(false), "limit reported as matching φ(0,1)")?;
    // Series oracle: the weights concentrate on m → ∞, leaving the plateau
    // average of 1 − r² over the disc of radius α.
    let oracle = 1.0 - 0.95f64 * 0.95 / 2.0;
    check((normal - oracle).abs() < 1e-2, format!("normal limit {normal} vs oracle {oracle}"))?;
    Ok(format!(
        "mass {:.12}, flat-disc M_q monotone (whole grid: worst drop {:.3}), functional {:.4}, \
         normal limit {normal:.5} (oracle {oracle:.5})",
        mp.total_mass, mp.full_grid_monotone.worst_decrease, mp.test_functional
    ))
}

fn criterion_8() -> Outcome {
    let targets = ["1,0", "0,1", "1,1", "0:1,0.5", "-0.6:0.8,-0.3"];
    let symbols = ["1", "abs2(z1)", "abs2(z1)*abs2(z2)"];
    let rc = rc((1, 1));
    let mut worst = 0.0f64;
    for t in targets {
        let target = commands::parse_point(t).unwrap();
        for s in symbols {
            let (status, doc) = commands::probe(
                &rc,
                DomainPreset::Bidisc,
                &SymbolExpr::parse(s).unwrap(),
                &target,
                &["normal".into(), "tangential".into(), "slant".into()],
                12,
            )
            .map_err(|e| format!("{s} at {t}: {e}"))?;
            let r = &doc.report;
            check(status == Status::Success, format!("{s} at {t}: inconclusive"))?;
            check(
                r.verdict == berezin_core::Verdict::Consistent,
                format!("{s} at {t}: {:?}", r.verdict),
            )?;
            let d = r.max_disagreement.unwrap();
            check(d < 5e-3, format!("{s} at {t}: disagreement {d}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("15 probes consistent, max disagreement {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let profile = default_profile(0.95, 4.0).unwrap();
    let norms = Arc::new(MonomialNormTable::build(&profile, 40, 40, 1e-10).unwrap());
    let mut violations = 0;
    let mut cases = 0;
    while cases < 1000 {
        if cases % 2 == 0 {
            let scale = rng.gen_range(0.1..10.0);
            let seed: u64 = rng.gen();
            let eval = DiagonalBerezin::from_fn(norms.clone(), |n, m| {
                let mut r = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32) ^ m as u64);
                scale * r.gen_range(-1.0..1.0)
            })
            .unwrap();
            let (lo, hi) = eval.lambda_range();
            let t = rng.gen_range(0.0..0.5f64);
            let s = rng.gen_range(0.0..0.5 * profile.h(t.sqrt()).powi(2));
            let v = eval.evaluate_ts_raw(t, s).map_err(|e| e.to_string())?.value;
            let slack = 1e-12 * scale;
            if v < lo - slack || v > hi + slack {
                violations += 1;
            }
        } else {
            let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let psi = RadialSymbol::Polynomial(coeffs);
            let (lo, hi) = psi.range();
            let z = Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..6.3));
            let v = DiscBerezin::new(DiscSymbol::Radial(psi)).evaluate_at(z).map_err(|e| e.to_string())?.value;
            if v < lo - 1e-9 || v > hi + 1e-9 {
                violations += 1;
            }
        }
        cases += 1;
    }
    check(violations == 0, format!("{violations} violations"))?;
    Ok(format!("{cases} cases, 0 violations"))
}

fn run_tables(dir: &Path) -> Result<(), String> {
    let out = Command::new(bin())
        .args(["tables", "--caps", "30,30", "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), String::from_utf8_lossy(&out.stderr).to_string())
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_tables(a.path())?;
    run_tables(b.path())?;
    for f in commands::TABLE_FILES {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        check(!x.is_empty() && x == y, format!("{f} differs"))?;
    }
    Ok(format!("{} files byte-identical", commands::TABLE_FILES.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(usize, fn() -> Outcome, Duration); 10] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(300)),
        (3, criterion_3, Duration::from_secs(1)),
        (4, criterion_4, Duration::from_secs(120)),
        (5, criterion_5, Duration::from_secs(10)),
        (6, criterion_6, Duration::from_secs(30)),
        (7, criterion_7, Duration::from_secs(120)),
        (8, criterion_8, Duration::from_secs(120)),
        (9, criterion_9, Duration::from_secs(60)),
        (10, criterion_10, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (id, f, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => Err(format!("runtime {elapsed:.2?} over budget {budget:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => writeln!(err, "PASS criterion {id} ({elapsed:.2?}): {detail}").unwrap(),
            Err(why) => {
                writeln!(err, "FAIL criterion {id} ({elapsed:.2?}): {why}").unwrap();
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
