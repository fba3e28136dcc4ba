//! Acceptance run: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Criteria run one after another so that runtimes are not
//! inflated by each other.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use anisowave_core::bounds::NormKind;
use anisowave_core::cutoff::{chi, split_symbol, CutoffSpec, ProfileKind};
use anisowave_core::decay::{
    run_bounds_check, run_lemma23_experiment, run_symbol_check, run_theorem31_experiment,
    run_theorem41_experiment, BoundsCheckConfig, DecayFit, ExperimentConfig, Exponent,
    Lemma23Config, SymbolCheckConfig, Theorem41Config,
};
use anisowave_core::numerics::sampling::uniform_in_ball;
use anisowave_core::numerics::HaltonSampler;
use anisowave_core::quadrature::QuadratureSpec;
use anisowave_core::solver::{build_grid, observable_norm, Backend, SpectralField, Which};
use anisowave_core::symbol::{ghat_pair, FrequencyPoint};
use num_complex::Complex64;

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

impl Line {
    fn passed(&self) -> bool {
        self.pass && self.elapsed <= self.budget
    }
}

/// Bypasses output capture so the lines show up in every run.
fn emit(text: &str) {
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{text}");
}

fn timed(id: usize, name: &'static str, budget_s: u64, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (pass, detail) = f();
    let line = Line {
        id,
        name,
        pass,
        detail,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_s),
    };
    emit(&format!(
        "{} criterion {}: {} [{:.1} s of {} s] {}",
        if line.passed() { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        line.elapsed.as_secs_f64(),
        budget_s,
        line.detail
    ));
    line
}

fn fit_summary(f: &DecayFit) -> String {
    match (f.slope(), f.last_local_slope()) {
        (Some(s), Some(l)) => format!(
            "slope {s:.3} last {l:.3} theory {:.3} ({})",
            f.theory,
            f.verdict.label()
        ),
        _ => format!("{} series", f.verdict.label()),
    }
}

fn symbol_correctness() -> (bool, String) {
    let rep = run_symbol_check(&SymbolCheckConfig::default()).expect("symbol check runs");
    (
        rep.residual_pass && rep.rk4_pass,
        format!(
            "residual/(1+|ξ|⁴) ≤ {:.2e} (tol 1e-8), RK4 mismatch ≤ {:.2e} (tol 1e-6), {} samples",
            rep.worst_residual.value, rep.worst_rk4.value, rep.samples
        ),
    )
}

fn pointwise_bounds() -> (bool, String) {
    let rep = run_bounds_check(&BoundsCheckConfig::default()).expect("bounds check runs");
    let detail = rep
        .per_r
        .iter()
        .map(|s| {
            format!(
                "r={}: min margins {:.2e}/{:.2e}",
                s.r, s.min_margin_g.value, s.min_margin_gt.value
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    (rep.passed(), detail)
}

fn norm_table_exponents() -> (bool, String) {
    let rep = run_lemma23_experiment(&Lemma23Config::default()).expect("norm table runs");
    let failed: Vec<_> = rep.series.iter().filter(|s| !s.passed()).collect();
    for s in &failed {
        let what = s
            .fit
            .as_ref()
            .map(fit_summary)
            .unwrap_or_else(|| s.error.clone().unwrap_or_default());
        emit(&format!(
            "    {:?} {} |α|={} l={}: {what}",
            s.variant,
            s.p.label(),
            s.alpha.iter().sum::<u32>(),
            s.l
        ));
    }
    (
        failed.is_empty(),
        format!(
            "{} of {} series within ±0.1",
            rep.series.len() - failed.len(),
            rep.series.len()
        ),
    )
}

fn band_limited_rates() -> (bool, String) {
    let cases = [
        (Which::U0only, 1.0, Exponent::INFINITY),
        (Which::U1only, 1.0, Exponent::INFINITY),
        (Which::U1only, 2.0, Exponent(2.0)),
        (Which::U0only, 2.0, Exponent::INFINITY),
        (Which::U1only, 2.0, Exponent::INFINITY),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (which, p, q) in cases {
        let cfg = ExperimentConfig {
            which,
            p,
            q,
            ..Default::default()
        };
        let fit = run_theorem31_experiment(&cfg).expect("band-limited experiment runs");
        let bound = fit.bound.as_ref().expect("non-degenerate series");
        ok &= fit.verdict.passed();
        parts.push(format!(
            "{which:?} ({p},{q}): {} drift {:.3}",
            fit_summary(&fit),
            bound.drift.unwrap_or(f64::NAN)
        ));
    }
    for p in &parts {
        emit(&format!("    {p}"));
    }
    (
        ok,
        format!(
            "{} configurations, tolerance ±0.15, drift < 0.2",
            parts.len()
        ),
    )
}

fn full_spectrum_rates() -> (bool, String) {
    let rep = run_theorem41_experiment(&Theorem41Config::default())
        .expect("full-spectrum experiment runs");
    let last = rep.highpass.last_local_slope().unwrap_or(f64::NAN);
    let high_ok = (-0.65..=-0.35).contains(&last);
    let low_ok = rep.low.slope().is_some_and(|s| (s + 0.5).abs() <= 0.15);
    let comb_ok = rep.combined.slope().is_some_and(|s| s <= -0.35);
    (
        high_ok && low_ok && comb_ok,
        format!(
            "highpass last local {last:.3} ({}), low slope {:.3} ({}), combined slope {:.3} ({})",
            if high_ok { "ok" } else { "out of range" },
            rep.low.slope().unwrap_or(f64::NAN),
            if low_ok { "ok" } else { "out of range" },
            rep.combined.slope().unwrap_or(f64::NAN),
            if comb_ok { "ok" } else { "out of range" },
        ),
    )
}

fn structural_invariants() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;

    // cutoff partition and χ support on 2000 seeded points of the ball |ξ| ≤ 6
    let spec = CutoffSpec::new(3.0, ProfileKind::ExpBump).unwrap();
    let mut sampler = HaltonSampler::new(5, 11);
    let (mut worst_split, mut chi_bad) = (0.0f64, 0usize);
    for _ in 0..2000 {
        let u = sampler.next_point();
        let xi = FrequencyPoint::new(uniform_in_ball(&u[..4], &[0.0; 3], 6.0)).unwrap();
        let t = 50.0 * u[4];
        let (g1, g2) = split_symbol(&xi, t, &spec).unwrap();
        let (g, _) = ghat_pair(&xi, t).unwrap();
        let gap = (g1 + g2 - g).abs();
        worst_split = worst_split.max(if g == 0.0 { gap } else { gap / g.abs() });
        let c = chi(&xi, &spec);
        let s = xi.norm_sq();
        let x1 = xi.xi1().abs();
        let inside = s <= 3.0 * x1;
        let outside = s >= 4.0 * x1 && s > 0.0;
        if !(0.0..=1.0).contains(&c) || (inside && c != 1.0) || (outside && c != 0.0) {
            chi_bad += 1;
        }
    }
    ok &= worst_split <= 1e-14 && chi_bad == 0;
    notes.push(format!(
        "partition rel {worst_split:.1e}, χ violations {chi_bad}"
    ));

    // Parseval: grid norm against the spectral-side norm
    let grid = build_grid(3, 9.0, 16).unwrap();
    let q = QuadratureSpec::default();
    let mut worst_parseval = 0.0f64;
    for seed in 0..8 {
        let f = SpectralField::random_band_limited(grid, 3.0, seed).unwrap();
        for l in [0, 1, 2] {
            let a = observable_norm(&f, 0.1, &[0, 0, 1], l, NormKind::L2, Backend::TorusGrid, &q)
                .unwrap();
            let b = observable_norm(
                &f,
                0.1,
                &[0, 0, 1],
                l,
                NormKind::L2,
                Backend::FourierSide,
                &q,
            )
            .unwrap();
            worst_parseval = worst_parseval.max((a.value - b.value).abs() / b.value);
        }
    }
    ok &= worst_parseval <= 1e-8;
    notes.push(format!("Parseval rel {worst_parseval:.1e}"));

    // evolve: identity at t = 0 and linearity
    let grid = build_grid(3, 12.0, 16).unwrap();
    let f = SpectralField::random_band_limited(grid, 4.0, 1).unwrap();
    let g = SpectralField::random_band_limited(grid, 4.0, 2).unwrap();
    let max_abs = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let e0 = f.evolve(0.0).unwrap();
    let id_err =
        diff(e0.u0_hat(), f.u0_hat()).max(diff(e0.u1_hat(), f.u1_hat())) / max_abs(f.u0_hat());
    let (a, b, t) = (0.7, -1.3, 3.0);
    let lhs = SpectralField::combine(a, &f, b, &g)
        .unwrap()
        .evolve(t)
        .unwrap();
    let rhs = SpectralField::combine(a, &f.evolve(t).unwrap(), b, &g.evolve(t).unwrap()).unwrap();
    let lin_err = diff(lhs.u0_hat(), rhs.u0_hat()).max(diff(lhs.u1_hat(), rhs.u1_hat()))
        / max_abs(rhs.u0_hat());
    ok &= id_err <= 1e-12 && lin_err <= 1e-12;
    notes.push(format!(
        "evolve identity {id_err:.1e}, linearity {lin_err:.1e}"
    ));

    // byte-identical reports across thread counts
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_anisowave"))
            .args(["symbol-check", "--threads", threads, "--out"])
            .arg(&out)
            .env_remove("ANISOWAVE_THREADS")
            .output()
            .unwrap();
        reports.push((
            status.status.code(),
            std::fs::read(out.join("report.json")).unwrap_or_default(),
        ));
    }
    let same = reports[0] == reports[1] && !reports[0].1.is_empty();
    ok &= same;
    notes.push(format!("reports identical across 1/4 threads: {same}"));

    (ok, notes.join(", "))
}

#[test]
fn acceptance() {
    let lines = [
        timed(1, "symbol correctness", 10, symbol_correctness),
        timed(2, "pointwise bounds on D_r", 10, pointwise_bounds),
        timed(
            3,
            "weighted norm table exponents",
            15 * 60,
            norm_table_exponents,
        ),
        timed(
            4,
            "band-limited solution rates",
            20 * 60,
            band_limited_rates,
        ),
        timed(
            5,
            "full-spectrum Fourier-side rates",
            15 * 60,
            full_spectrum_rates,
        ),
        timed(6, "structural invariants", 60, structural_invariants),
    ];
    let failed: Vec<String> = lines
        .iter()
        .filter(|l| !l.passed())
        .map(|l| format!("{} ({})", l.id, l.name))
        .collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
