use anisowave_core::decay::experiments::check_admissible;
use anisowave_core::decay::{
    loglog_fit, run_bounds_check, run_symbol_check, theorem31_exponent, BoundsCheckConfig,
    DecayFit, Exponent, SlopeCriterion, SymbolCheckConfig, Verdict,
};
use anisowave_core::solver::Which;

#[test]
fn symbol_check_is_reproducible_and_passes() {
    let cfg = SymbolCheckConfig {
        samples: 300,
        ..Default::default()
    };
    let a = run_symbol_check(&cfg).unwrap();
    let b = run_symbol_check(&cfg).unwrap();
    assert!(a.passed());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let other = run_symbol_check(&SymbolCheckConfig { seed: 7, ..cfg }).unwrap();
    assert_ne!(a.worst_residual.xi, other.worst_residual.xi);
}

#[test]
fn pointwise_bounds_hold_on_a_small_sample() {
    let cfg = BoundsCheckConfig {
        samples: 500,
        ..Default::default()
    };
    let report = run_bounds_check(&cfg).unwrap();
    assert_eq!(report.per_r.len(), 3);
    assert!(report.passed());
}

#[test]
fn fit_recovers_a_planted_power_law() {
    let times: Vec<f64> = (0..9).map(|k| 10f64.powf(1.0 + 0.25 * k as f64)).collect();
    let values: Vec<f64> = times.iter().map(|t| 3.0 * t.powf(-0.75)).collect();
    let fit = loglog_fit(&times, &values).unwrap();
    assert!((fit.slope + 0.75).abs() < 1e-12);
    assert!((fit.intercept - 3f64.log10()).abs() < 1e-12);
    let verdict = DecayFit::assess(times.clone(), values, -0.75, 0.05, SlopeCriterion::Fitted)
        .unwrap()
        .verdict;
    assert_eq!(verdict, Verdict::Pass);
    let zeros = vec![0.0; times.len()];
    let verdict = DecayFit::assess(times, zeros, -0.75, 0.05, SlopeCriterion::Fitted)
        .unwrap()
        .verdict;
    assert_eq!(verdict, Verdict::Degenerate);
}

#[test]
fn exponents_and_admissibility() {
    assert_eq!(
        theorem31_exponent(Which::U0only, 0, 0, 3, 1.0, Exponent::INFINITY),
        -1.5
    );
    assert_eq!(
        theorem31_exponent(Which::U1only, 0, 0, 3, 1.0, Exponent::INFINITY),
        -0.5
    );
    assert_eq!(
        theorem31_exponent(Which::U1only, 0, 0, 3, 2.0, Exponent(2.0)),
        1.0
    );
    assert_eq!(
        theorem31_exponent(Which::U0only, 2, 2, 3, 2.0, Exponent::INFINITY),
        -2.75
    );
    assert!(check_admissible(1.5, Exponent(6.0)).is_ok());
    let err = check_admissible(1.5, Exponent(3.0))
        .unwrap_err()
        .to_string();
    assert!(err.contains("q = 3 < 2p/(2−p) = 6"), "{err}");
    assert!(check_admissible(0.5, Exponent(2.0)).is_err());
}
