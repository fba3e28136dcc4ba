//! Log-log least-squares fits of decay series.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of samples for a fit.
pub const MIN_SAMPLES: usize = 6;

/// Ordinary least squares on `(log₁₀ t, log₁₀ value)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Root-mean-square residual in decades.
    pub residual: f64,
    pub local_slopes: Vec<f64>,
}

impl LogLogFit {
    pub fn last_local_slope(&self) -> f64 {
        *self
            .local_slopes
            .last()
            .expect("a fit has at least one local slope")
    }
}

pub fn loglog_fit(times: &[f64], values: &[f64]) -> Result<LogLogFit> {
    if times.len() != values.len() {
        return Err(Error::invalid(
            "values",
            "times and values differ in length",
        ));
    }
    if times.len() < MIN_SAMPLES {
        return Err(Error::invalid(
            "times",
            format!(
                "a fit needs at least {MIN_SAMPLES} samples, got {}",
                times.len()
            ),
        ));
    }
    if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::invalid(
            "times",
            "times must be positive and strictly increasing",
        ));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::invalid(
            "values",
            format!("values must be positive and finite, got {v}"),
        ));
    }
    let x: Vec<f64> = times.iter().map(|t| t.log10()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.log10()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    let local_slopes = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0]))
        .collect();
    Ok(LogLogFit {
        slope,
        intercept,
        stderr,
        residual: (ssr / m).sqrt(),
        local_slopes,
    })
}

/// How a fitted slope is compared with its theoretical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeCriterion {
    /// `|slope − theory| ≤ tol`
    Fitted,
    /// `|last local slope − theory| ≤ tol`
    LastLocal,
    /// `slope ≤ theory + tol`
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The series vanishes identically; there is nothing to fit.
    Degenerate,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Degenerate => "degenerate",
        }
    }
}

/// Empirical constant `C = max value / t^theory` and its drift when the
/// time range is doubled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneSidedBound {
    pub c_emp: f64,
    pub c_emp_doubled: Option<f64>,
    pub drift: Option<f64>,
}

/// Largest admissible relative drift of the empirical constant.
pub const MAX_CONSTANT_DRIFT: f64 = 0.2;

impl OneSidedBound {
    pub fn new(times: &[f64], values: &[f64], theory: f64) -> Self {
        Self {
            c_emp: empirical_constant(times, values, theory),
            c_emp_doubled: None,
            drift: None,
        }
    }

    /// Adds the samples of the extended range `[t₀, 2T]`.
    pub fn with_doubling(mut self, times: &[f64], values: &[f64], theory: f64) -> Self {
        let c = empirical_constant(times, values, theory).max(self.c_emp);
        self.c_emp_doubled = Some(c);
        self.drift = Some((c - self.c_emp).abs() / self.c_emp);
        self
    }

    pub fn stable(&self) -> bool {
        self.c_emp.is_finite() && self.drift.is_none_or(|d| d < MAX_CONSTANT_DRIFT)
    }
}

fn empirical_constant(times: &[f64], values: &[f64], theory: f64) -> f64 {
    times
        .iter()
        .zip(values)
        .map(|(t, v)| v / t.powf(theory))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub theory: f64,
    pub tolerance: f64,
    pub criterion: SlopeCriterion,
    pub fit: Option<LogLogFit>,
    pub bound: Option<OneSidedBound>,
    pub verdict: Verdict,
}

impl DecayFit {
    /// Fits `values` and grades the slope. A series of exact zeros is
    /// degenerate rather than an error.
    pub fn assess(
        times: Vec<f64>,
        values: Vec<f64>,
        theory: f64,
        tolerance: f64,
        criterion: SlopeCriterion,
    ) -> Result<Self> {
        if !values.is_empty() && values.iter().all(|v| *v == 0.0) {
            return Ok(Self {
                times,
                values,
                theory,
                tolerance,
                criterion,
                fit: None,
                bound: None,
                verdict: Verdict::Degenerate,
            });
        }
        let fit = loglog_fit(&times, &values)?;
        let ok = match criterion {
            SlopeCriterion::Fitted => (fit.slope - theory).abs() <= tolerance,
            SlopeCriterion::LastLocal => (fit.last_local_slope() - theory).abs() <= tolerance,
            SlopeCriterion::Upper => fit.slope <= theory + tolerance,
        };
        let bound = OneSidedBound::new(&times, &values, theory);
        Ok(Self {
            times,
            values,
            theory,
            tolerance,
            criterion,
            fit: Some(fit),
            bound: Some(bound),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        })
    }

    /// Attaches doubled-range samples; an unstable constant fails the fit.
    pub fn with_doubling(mut self, times: &[f64], values: &[f64]) -> Self {
        if let Some(b) = self.bound.take() {
            let b = b.with_doubling(times, values, self.theory);
            if !b.stable() && self.verdict == Verdict::Pass {
                self.verdict = Verdict::Fail;
            }
            self.bound = Some(b);
        }
        self
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    pub fn last_local_slope(&self) -> Option<f64> {
        self.fit.as_ref().map(LogLogFit::last_local_slope)
    }
}
