//! The three decay experiments. Each samples a norm on a geometric time
//! grid (times evaluated concurrently, results kept in grid order) and
//! grades the log-log slope against its predicted exponent.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::fit::{DecayFit, SlopeCriterion, Verdict};
use super::{doubled_extension, fit_grid as time_grid};
use crate::bounds::{
    lemma23_exponent, tail_alpha, weighted_symbol_norms, NormKind, Variant, WeightedNormRequest,
};
use crate::cutoff::{CutoffSpec, ProfileKind};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::solver::{
    build_grid, observable_norm, Backend, ContinuumData, DataPreset, GridSpec, PresetKind,
    SpectralField, Which,
};

/// A Lebesgue exponent in `[1, ∞]`. Serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn reciprocal(self) -> f64 {
        1.0 / self.0
    }

    /// The norm that measures this exponent, if one exists.
    pub fn norm_kind(self) -> Option<NormKind> {
        match self.0 {
            1.0 => Some(NormKind::L1),
            2.0 => Some(NormKind::L2),
            x if x.is_infinite() => Some(NormKind::Linf),
            _ => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Inf" | "∞") => {
                Ok(Exponent::INFINITY)
            }
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// Exponent of the solution estimate for the isolated data term
/// (`U1only` and `Both` use the slower `u₁` rate).
pub fn theorem31_exponent(
    which: Which,
    alpha_abs: u32,
    l: u32,
    n: usize,
    p: f64,
    q: Exponent,
) -> f64 {
    let l = l as i64;
    let floor_part = if which.has_u1() {
        (l - 1).div_euclid(2)
    } else {
        l.div_euclid(2)
    };
    -(alpha_abs as f64) / 2.0 - floor_part as f64 - n as f64 / 2.0 * (1.0 / p - q.reciprocal())
}

/// Admissible `(p, q)`: `p ∈ [1, 2]`, `q ≥ 2p/(2−p)` (`q ≥ 2` at `p = 2`).
pub fn check_admissible(p: f64, q: Exponent) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::invalid("p", format!("p = {p} must lie in [1, 2]")));
    }
    let q_min = if p == 2.0 { 2.0 } else { 2.0 * p / (2.0 - p) };
    if !(q.0 >= q_min) {
        return Err(Error::invalid("q", format!("q = {q} < 2p/(2−p) = {q_min}")));
    }
    Ok(())
}

fn default_n() -> usize {
    3
}
fn default_r() -> f64 {
    3.0
}
fn default_ratio() -> f64 {
    0.25
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma23Config {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default = "all_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "all_norms")]
    pub norms: Vec<NormKind>,
    /// `|α|` values; the weight sits on `ξ₂`.
    #[serde(default = "default_alpha_orders")]
    pub alpha_orders: Vec<u32>,
    #[serde(default = "default_time_orders")]
    pub time_orders: Vec<u32>,
    #[serde(default = "lemma_t_min")]
    pub t_min: f64,
    #[serde(default = "lemma_t_max")]
    pub t_max: f64,
    #[serde(default = "default_ratio")]
    pub log_ratio: f64,
    #[serde(default = "lemma_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

fn all_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}
fn all_norms() -> Vec<NormKind> {
    NormKind::ALL.to_vec()
}
fn default_alpha_orders() -> Vec<u32> {
    vec![0, 1, 2]
}
fn default_time_orders() -> Vec<u32> {
    vec![0, 1, 2, 3]
}
fn lemma_t_min() -> f64 {
    10.0
}
fn lemma_t_max() -> f64 {
    1000.0
}
fn lemma_tolerance() -> f64 {
    0.1
}

impl Default for Lemma23Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl Lemma23Config {
    pub fn requests(&self) -> Result<Vec<WeightedNormRequest>> {
        let spec = CutoffSpec::new(self.r, self.profile)?;
        let mut out = Vec::new();
        for &variant in &self.variants {
            for &p in &self.norms {
                for &a in &self.alpha_orders {
                    for &l in &self.time_orders {
                        let req = WeightedNormRequest {
                            alpha: tail_alpha(self.n, a),
                            l,
                            variant,
                            p,
                            spec,
                        };
                        req.validate()?;
                        out.push(req);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::invalid(
                "n",
                format!("the norm table needs n ≥ 3, got {}", self.n),
            ));
        }
        if self.n > 10 {
            return Err(Error::invalid("n", "dimension above 10 is not supported"));
        }
        check_tolerance(self.tolerance)?;
        self.quadrature.validate()?;
        time_grid(self.t_min, self.t_max, self.log_ratio)?;
        if self.requests()?.is_empty() {
            return Err(Error::invalid("lemma23", "no combinations requested"));
        }
        Ok(())
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma23Series {
    pub variant: Variant,
    pub p: NormKind,
    pub alpha: Vec<u32>,
    pub l: u32,
    pub theory: f64,
    pub fit: Option<DecayFit>,
    pub error: Option<String>,
    pub non_convergence: bool,
}

impl Lemma23Series {
    pub fn passed(&self) -> bool {
        self.fit.as_ref().is_some_and(|f| f.verdict.passed())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma23Report {
    pub times: Vec<f64>,
    pub series: Vec<Lemma23Series>,
}

/// Weighted symbol norms for every requested combination, one batched
/// quadrature per time.
pub fn run_lemma23_experiment(cfg: &Lemma23Config) -> Result<Lemma23Report> {
    cfg.validate()?;
    let reqs = cfg.requests()?;
    let times = time_grid(cfg.t_min, cfg.t_max, cfg.log_ratio)?;
    let per_time: Vec<Vec<Result<f64>>> = times
        .par_iter()
        .map(|&t| {
            Ok(weighted_symbol_norms(&reqs, t, &cfg.quadrature)?
                .into_iter()
                .map(|r| r.map(|e| e.value))
                .collect())
        })
        .collect::<Result<_>>()?;
    let series = reqs
        .iter()
        .enumerate()
        .map(|(i, req)| {
            let theory = lemma23_exponent(req, cfg.n);
            let mut values = Vec::with_capacity(times.len());
            let mut failure = None;
            for row in &per_time {
                match &row[i] {
                    Ok(v) => values.push(*v),
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            let (fit, error) = match failure {
                Some(e) => (None, Some(e.to_string())),
                None => match DecayFit::assess(
                    times.clone(),
                    values,
                    theory,
                    cfg.tolerance,
                    SlopeCriterion::Fitted,
                ) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                },
            };
            Lemma23Series {
                variant: req.variant,
                p: req.p,
                alpha: req.alpha.clone(),
                l: req.l,
                theory,
                non_convergence: failure.is_some_and(Error::is_non_convergence),
                fit,
                error,
            }
        })
        .collect();
    Ok(Lemma23Report { times, series })
}

/// Configuration of a solution-level experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default = "default_bump")]
    pub preset: PresetKind,
    #[serde(default = "default_which")]
    pub which: Which,
    /// Multi-index; empty means zero.
    #[serde(default)]
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub l: u32,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_q")]
    pub q: Exponent,
    #[serde(default = "lemma_t_min")]
    pub t_min: f64,
    #[serde(default = "lemma_t_max")]
    pub t_max: f64,
    #[serde(default = "default_ratio")]
    pub log_ratio: f64,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "solution_tolerance")]
    pub tolerance: f64,
    /// Grid for the torus backend; sized from the band limit when absent.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Also sample `[t_min, 2 t_max]` to test the stability of the constant.
    #[serde(default = "yes")]
    pub range_doubling: bool,
}

fn default_bump() -> PresetKind {
    PresetKind::DrBump { radius: 1.0 }
}
fn default_which() -> Which {
    Which::U1only
}
fn default_p() -> f64 {
    1.0
}
fn default_q() -> Exponent {
    Exponent::INFINITY
}
fn default_backend() -> Backend {
    Backend::FourierSide
}
fn solution_tolerance() -> f64 {
    0.15
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn alpha(&self) -> Vec<u32> {
        if self.alpha.is_empty() {
            vec![0; self.n]
        } else {
            self.alpha.clone()
        }
    }

    pub fn data(&self) -> Result<DataPreset> {
        DataPreset::new(self.preset, self.which)
    }

    pub fn validate(&self) -> Result<()> {
        check_admissible(self.p, self.q)?;
        if !(1..=3).contains(&self.n) {
            return Err(Error::invalid(
                "n",
                format!("solution experiments need n in 1..=3, got {}", self.n),
            ));
        }
        if !self.alpha.is_empty() && self.alpha.len() != self.n {
            return Err(Error::invalid("alpha", format!("need {} entries", self.n)));
        }
        CutoffSpec::new(self.r, self.profile)?;
        self.data()?.check_r(self.r)?;
        if self.q.norm_kind().is_none() {
            return Err(Error::Unsupported(format!(
                "q = {} cannot be measured; use 2 or inf",
                self.q
            )));
        }
        check_tolerance(self.tolerance)?;
        self.quadrature.validate()?;
        time_grid(self.t_min, self.t_max, self.log_ratio)?;
        if let Some(g) = &self.grid {
            g.validate()?;
            if g.n != self.n {
                return Err(Error::invalid("grid", "grid dimension differs from n"));
            }
        }
        Ok(())
    }

    /// Grid used to hold the data: the configured one, or the smallest
    /// 16-point grid that passes the band guard.
    pub fn grid(&self) -> Result<GridSpec> {
        match self.grid {
            Some(g) => Ok(g),
            None => {
                let band = self.data()?.axis_band_limit();
                let points = 16;
                build_grid(
                    self.n,
                    std::f64::consts::PI * points as f64 / (2.0 * band),
                    points,
                )
            }
        }
    }
}

fn measure_series(
    field: &SpectralField,
    times: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<f64>> {
    let alpha = cfg.alpha();
    let q = cfg.q.norm_kind().expect("validated");
    times
        .par_iter()
        .map(|&t| {
            Ok(observable_norm(field, t, &alpha, cfg.l, q, cfg.backend, &cfg.quadrature)?.value)
        })
        .collect()
}

/// `‖∂_x^α ∂_t^l u(t)‖_{L^q}` for band-limited data against the
/// estimate of the isolated data term.
pub fn run_theorem31_experiment(cfg: &ExperimentConfig) -> Result<DecayFit> {
    cfg.validate()?;
    let preset = cfg.data()?;
    if !matches!(preset.kind, PresetKind::DrBump { .. }) {
        return Err(Error::invalid(
            "preset",
            "the band-limited experiment needs dr-bump data",
        ));
    }
    let field = SpectralField::synthesize(preset, cfg.grid()?, cfg.r)?;
    let alpha_abs = cfg.alpha().iter().sum();
    let theory = theorem31_exponent(cfg.which, alpha_abs, cfg.l, cfg.n, cfg.p, cfg.q);
    let times = time_grid(cfg.t_min, cfg.t_max, cfg.log_ratio)?;
    let values = measure_series(&field, &times, cfg)?;
    let fit = DecayFit::assess(
        times.clone(),
        values,
        theory,
        cfg.tolerance,
        SlopeCriterion::Fitted,
    )?;
    if !cfg.range_doubling || fit.verdict == Verdict::Degenerate {
        return Ok(fit);
    }
    let extra = doubled_extension(&times);
    let extra_values = measure_series(&field, &extra, cfg)?;
    Ok(fit.with_doubling(&extra, &extra_values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem41Config {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default = "default_gaussian")]
    pub preset: PresetKind,
    #[serde(default = "default_both")]
    pub which: Which,
    #[serde(default = "thm41_t_min")]
    pub t_min: f64,
    #[serde(default = "thm41_t_max")]
    pub t_max: f64,
    #[serde(default = "default_ratio")]
    pub log_ratio: f64,
    #[serde(default = "solution_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

fn default_gaussian() -> PresetKind {
    PresetKind::GaussianPair { sigma: 1.0 }
}
fn default_both() -> Which {
    Which::Both
}
fn thm41_t_min() -> f64 {
    100.0
}
fn thm41_t_max() -> f64 {
    10_000.0
}

impl Default for Theorem41Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl Theorem41Config {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::invalid(
                "n",
                format!("solution experiments need n in 1..=3, got {}", self.n),
            ));
        }
        CutoffSpec::new(self.r, self.profile)?;
        let data = DataPreset::new(self.preset, self.which)?;
        if !data.is_cylindrical() {
            return Err(Error::invalid(
                "preset",
                "the full-spectrum experiment needs gaussian-pair (or dr-bump) data",
            ));
        }
        data.check_r(self.r)?;
        check_tolerance(self.tolerance)?;
        self.quadrature.validate()?;
        time_grid(self.t_min, self.t_max, self.log_ratio)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem41Report {
    /// `‖(1−χ)û(t)‖_{L¹}`, graded on its last local slope.
    pub highpass: DecayFit,
    /// `‖χû(t)‖_{L¹}`.
    pub low: DecayFit,
    /// `(2π)^{−n}(low + high)`, an upper proxy for `‖u(t)‖_{L^∞}`.
    pub combined: DecayFit,
    pub verdict: Verdict,
}

/// High- and low-frequency `L¹` norms of the spectrum for full-spectrum data.
pub fn run_theorem41_experiment(cfg: &Theorem41Config) -> Result<Theorem41Report> {
    cfg.validate()?;
    let data = ContinuumData::new(DataPreset::new(cfg.preset, cfg.which)?, cfg.n, cfg.r)?;
    let spec = CutoffSpec::new(cfg.r, cfg.profile)?;
    let times = time_grid(cfg.t_min, cfg.t_max, cfg.log_ratio)?;
    let pairs: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let high = data.highpass_l1(t, &spec, &cfg.quadrature)?.value;
            let low = data.lowpass_l1(t, &spec, &cfg.quadrature)?.value;
            Ok((high, low))
        })
        .collect::<Result<_>>()?;
    let (high, low): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let scale = (2.0 * std::f64::consts::PI).powi(-(cfg.n as i32));
    let combined: Vec<f64> = high
        .iter()
        .zip(&low)
        .map(|(h, l)| scale * (h + l))
        .collect();
    let low_theory = -(cfg.n as f64 / 2.0 - 1.0);
    let highpass = DecayFit::assess(
        times.clone(),
        high,
        -0.5,
        cfg.tolerance,
        SlopeCriterion::LastLocal,
    )?;
    let low = DecayFit::assess(
        times.clone(),
        low,
        low_theory,
        cfg.tolerance,
        SlopeCriterion::Fitted,
    )?;
    let combined_theory = low_theory.max(-0.5);
    let combined = DecayFit::assess(
        times,
        combined,
        combined_theory,
        cfg.tolerance,
        SlopeCriterion::Upper,
    )?;
    let verdict = if highpass.verdict == Verdict::Degenerate {
        Verdict::Degenerate
    } else if [&highpass, &low, &combined]
        .iter()
        .all(|f| f.verdict.passed())
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Theorem41Report {
        highpass,
        low,
        combined,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_of_the_examples() {
        let inf = Exponent::INFINITY;
        assert_eq!(theorem31_exponent(Which::U1only, 0, 0, 3, 1.0, inf), -0.5);
        assert_eq!(theorem31_exponent(Which::U0only, 0, 0, 3, 1.0, inf), -1.5);
        assert_eq!(
            theorem31_exponent(Which::U1only, 0, 0, 3, 2.0, Exponent(2.0)),
            1.0
        );
        assert_eq!(
            theorem31_exponent(Which::U0only, 2, 3, 3, 2.0, inf),
            -1.0 - 1.0 - 0.75
        );
    }

    #[test]
    fn admissibility() {
        let err = check_admissible(1.5, Exponent(3.0))
            .unwrap_err()
            .to_string();
        assert!(err.contains("2p/(2−p) = 6"), "{err}");
        assert!(check_admissible(1.5, Exponent(6.0)).is_ok());
        assert!(check_admissible(2.0, Exponent(2.0)).is_ok());
        assert!(check_admissible(2.0, Exponent(1.5)).is_err());
        assert!(check_admissible(0.5, Exponent::INFINITY).is_err());
        assert!(check_admissible(1.0, Exponent(2.0)).is_ok());
        assert!(check_admissible(1.0, Exponent(1.9)).is_err());
    }

    #[test]
    fn exponent_serde() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.0.is_infinite());
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"inf\"");
        let e: Exponent = serde_json::from_str("2").unwrap();
        assert_eq!(e, Exponent(2.0));
        assert!(serde_json::from_str::<Exponent>("\"big\"").is_err());
    }

    #[test]
    fn default_configs_are_valid() {
        Lemma23Config::default().validate().unwrap();
        ExperimentConfig::default().validate().unwrap();
        Theorem41Config::default().validate().unwrap();
        assert_eq!(Lemma23Config::default().requests().unwrap().len(), 72);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus":1}"#).is_err());
        assert!(serde_json::from_str::<Lemma23Config>(r#"{"n":3,"x":0}"#).is_err());
    }

    #[test]
    fn small_lemma23_run() {
        let cfg = Lemma23Config {
            variants: vec![Variant::PlainG],
            norms: vec![NormKind::Linf],
            alpha_orders: vec![0],
            time_orders: vec![1],
            ..Default::default()
        };
        let rep = run_lemma23_experiment(&cfg).unwrap();
        assert_eq!(rep.series.len(), 1);
        let s = &rep.series[0];
        assert!(s.passed(), "{s:?}");
        assert!(s.fit.as_ref().unwrap().slope().unwrap().abs() < 0.1);
    }

    #[test]
    fn thm41_rejects_separable_and_marks_bump_degenerate() {
        let bad = Theorem41Config {
            preset: PresetKind::Separable { width: 1.0 },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let cfg = Theorem41Config {
            preset: PresetKind::DrBump { radius: 1.0 },
            t_min: 10.0,
            t_max: 1000.0,
            ..Default::default()
        };
        let rep = run_theorem41_experiment(&cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Degenerate);
        assert!(rep.highpass.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn thm31_requires_band_limited_data() {
        let cfg = ExperimentConfig {
            preset: PresetKind::GaussianPair { sigma: 1.0 },
            ..Default::default()
        };
        assert!(run_theorem31_experiment(&cfg).is_err());
        let cfg = ExperimentConfig {
            p: 1.5,
            q: Exponent(3.0),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
