//! Decay-rate experiments: measured norm series against their predicted
//! power laws, plus sampled pointwise checks of the symbol.

pub mod checks;
pub mod experiments;
pub mod fit;

pub use checks::{
    run_bounds_check, run_symbol_check, BoundsCheckConfig, BoundsCheckReport, SymbolCheckConfig,
    SymbolCheckReport,
};
pub use experiments::{
    run_lemma23_experiment, run_theorem31_experiment, run_theorem41_experiment, theorem31_exponent,
    ExperimentConfig, Exponent, Lemma23Config, Lemma23Report, Lemma23Series, Theorem41Config,
    Theorem41Report,
};
pub use fit::{loglog_fit, DecayFit, LogLogFit, OneSidedBound, SlopeCriterion, Verdict};

use crate::error::{Error, Result};

/// `t_k = t_min · 10^{k·step}` up to `t_max` (inclusive within rounding).
pub fn time_grid(t_min: f64, t_max: f64, log_step: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::invalid(
            "time range",
            format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]"),
        ));
    }
    if !(log_step > 0.0 && log_step.is_finite()) {
        return Err(Error::invalid("time step", "log10 ratio must be positive"));
    }
    let span = (t_max / t_min).log10() / log_step;
    let count = (span + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| t_min * 10f64.powf(k as f64 * log_step))
        .collect())
}

/// A time grid long enough for a fit.
pub fn fit_grid(t_min: f64, t_max: f64, log_step: f64) -> Result<Vec<f64>> {
    let g = time_grid(t_min, t_max, log_step)?;
    if g.len() < fit::MIN_SAMPLES {
        return Err(Error::invalid(
            "time range",
            format!(
                "[{t_min}, {t_max}] gives {} times, a fit needs {}",
                g.len(),
                fit::MIN_SAMPLES
            ),
        ));
    }
    Ok(g)
}

/// Times of the doubled range `[t_min, 2 t_max]` not already in `times`.
pub fn doubled_extension(times: &[f64]) -> Vec<f64> {
    let last = *times.last().expect("non-empty time grid");
    times
        .iter()
        .map(|t| 2.0 * t)
        .filter(|t| *t > last)
        .collect()
}
