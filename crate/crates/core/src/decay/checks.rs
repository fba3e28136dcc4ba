//! Seeded pointwise checks of the symbol and of the pointwise bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{lemma22_margin, lemma22_rate};
use crate::error::{Error, Result};
use crate::numerics::sampling::uniform_in_ball;
use crate::numerics::HaltonSampler;
use crate::symbol::{
    check_region_parameter, in_dr, ode_residual, rk4_mode_oracle, rk4_recommended_steps,
    FrequencyPoint,
};

pub const ODE_RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const RK4_TOLERANCE: f64 = 1e-6;
pub const MARGIN_TOLERANCE: f64 = 1e-12;

fn default_samples() -> usize {
    10_000
}
fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolCheckConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Dimensions cycled through sample by sample.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_radius")]
    pub max_radius: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_dims() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_radius() -> f64 {
    6.0
}
fn default_t_max() -> f64 {
    50.0
}

impl Default for SymbolCheckConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: default_seed(),
            dims: default_dims(),
            max_radius: default_radius(),
            t_max: default_t_max(),
        }
    }
}

impl SymbolCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be positive"));
        }
        if self.dims.is_empty() || self.dims.iter().any(|n| !(1..=10).contains(n)) {
            return Err(Error::invalid("dims", "each dimension must lie in 1..=10"));
        }
        if !(self.max_radius > 0.0 && self.max_radius.is_finite()) {
            return Err(Error::invalid("max_radius", "must be positive"));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid("t_max", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstSample {
    pub xi: Vec<f64>,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolCheckReport {
    pub samples: usize,
    pub seed: u64,
    /// Largest `|residual| / (1 + |ξ|⁴)`.
    pub worst_residual: WorstSample,
    /// Largest mismatch against the RK4 oracle, relative to the pair size.
    pub worst_rk4: WorstSample,
    pub residual_pass: bool,
    pub rk4_pass: bool,
}

impl SymbolCheckReport {
    pub fn passed(&self) -> bool {
        self.residual_pass && self.rk4_pass
    }
}

/// `max|Δ| / max|·|` over the pair `(Ĝ, Ĝ_t)`; either entry may cross zero.
fn pair_mismatch(a: (f64, f64), b: (f64, f64)) -> f64 {
    let scale = a.0.abs().max(a.1.abs()).max(b.0.abs()).max(b.1.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a.0 - b.0).abs().max((a.1 - b.1).abs()) / scale
    }
}

fn worst(items: impl Iterator<Item = WorstSample>) -> WorstSample {
    items
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one sample")
}

/// Closed-form symbol against its ODE and against RK4 on seeded samples of
/// `|ξ| ≤ R`, `t ∈ [0, T]`.
pub fn run_symbol_check(cfg: &SymbolCheckConfig) -> Result<SymbolCheckReport> {
    cfg.validate()?;
    let max_n = *cfg.dims.iter().max().expect("validated");
    let mut sampler = HaltonSampler::new(max_n + 2, cfg.seed);
    let points: Vec<(FrequencyPoint, f64)> = (0..cfg.samples)
        .map(|i| {
            let u = sampler.next_point();
            let n = cfg.dims[i % cfg.dims.len()];
            let mut ball_u = u[..n].to_vec();
            ball_u.push(u[max_n]);
            let xi = uniform_in_ball(&ball_u, &vec![0.0; n], cfg.max_radius);
            let t = cfg.t_max * u[max_n + 1];
            Ok((FrequencyPoint::new(xi)?, t))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<(WorstSample, WorstSample)> = points
        .par_iter()
        .map(|(xi, t)| {
            let res = ode_residual(xi, *t)?.abs() / (1.0 + xi.norm_sq().powi(2));
            let steps = 4 * rk4_recommended_steps(xi, *t);
            let mismatch = pair_mismatch(xi.mode().ghat_pair(*t), rk4_mode_oracle(xi, *t, steps)?);
            let sample = |value| WorstSample {
                xi: xi.coords().to_vec(),
                t: *t,
                value,
            };
            Ok((sample(res), sample(mismatch)))
        })
        .collect::<Result<_>>()?;
    let (res, rk): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let worst_residual = worst(res.into_iter());
    let worst_rk4 = worst(rk.into_iter());
    Ok(SymbolCheckReport {
        samples: cfg.samples,
        seed: cfg.seed,
        residual_pass: worst_residual.value <= ODE_RESIDUAL_TOLERANCE,
        rk4_pass: worst_rk4.value <= RK4_TOLERANCE,
        worst_residual,
        worst_rk4,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsCheckConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_rs")]
    pub r_values: Vec<f64>,
    #[serde(default = "default_bounds_t")]
    pub t_range: (f64, f64),
}

fn default_n() -> usize {
    3
}
fn default_rs() -> Vec<f64> {
    vec![2.5, 3.0, 4.0]
}
fn default_bounds_t() -> (f64, f64) {
    (0.01, 100.0)
}

impl Default for BoundsCheckConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: default_seed(),
            n: default_n(),
            r_values: default_rs(),
            t_range: default_bounds_t(),
        }
    }
}

impl BoundsCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be positive"));
        }
        if !(1..=10).contains(&self.n) {
            return Err(Error::invalid("n", "dimension must lie in 1..=10"));
        }
        if self.r_values.is_empty() {
            return Err(Error::invalid("r_values", "need at least one r"));
        }
        for &r in &self.r_values {
            check_region_parameter(r)?;
        }
        let (a, b) = self.t_range;
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::invalid(
                "t_range",
                format!("need 0 < t_min < t_max, got [{a}, {b}]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginSummary {
    pub r: f64,
    pub m: f64,
    pub samples: usize,
    /// Smallest margin of the `Ĝ` bound.
    pub min_margin_g: WorstSample,
    /// Smallest margin of the `Ĝ_t` bound.
    pub min_margin_gt: WorstSample,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsCheckReport {
    pub seed: u64,
    pub per_r: Vec<MarginSummary>,
}

impl BoundsCheckReport {
    pub fn passed(&self) -> bool {
        self.per_r.iter().all(|s| s.pass)
    }
}

/// Seeded points of `D_r`: rejection from the ball of radius `r` (which
/// contains `D_r`), times log-uniform in the configured range.
fn dr_samples(
    n: usize,
    r: f64,
    count: usize,
    t_range: (f64, f64),
    seed: u64,
) -> Result<Vec<(FrequencyPoint, f64)>> {
    let mut sampler = HaltonSampler::new(n + 2, seed);
    let (lo, hi) = (t_range.0.ln(), t_range.1.ln());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = sampler.next_point();
        let xi = FrequencyPoint::new(uniform_in_ball(&u[..=n], &vec![0.0; n], r))?;
        if in_dr(xi.mode(), r) {
            out.push((xi, (lo + (hi - lo) * u[n + 1]).exp()));
        }
    }
    Ok(out)
}

/// Both pointwise bounds of the symbol on `D_r`, for each configured `r`.
pub fn run_bounds_check(cfg: &BoundsCheckConfig) -> Result<BoundsCheckReport> {
    cfg.validate()?;
    let per_r = cfg
        .r_values
        .iter()
        .map(|&r| {
            let pts = dr_samples(cfg.n, r, cfg.samples, cfg.t_range, cfg.seed)?;
            let rows: Vec<(WorstSample, WorstSample)> = pts
                .par_iter()
                .map(|(xi, t)| {
                    let (mg, mgt) = lemma22_margin(xi, *t, r)?;
                    // negated so that `worst` picks the smallest margin
                    let s = |v: f64| WorstSample {
                        xi: xi.coords().to_vec(),
                        t: *t,
                        value: -v,
                    };
                    Ok((s(mg), s(mgt)))
                })
                .collect::<Result<_>>()?;
            let (g, gt): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
            let flip = |mut w: WorstSample| {
                w.value = -w.value;
                w
            };
            let min_margin_g = flip(worst(g.into_iter()));
            let min_margin_gt = flip(worst(gt.into_iter()));
            Ok(MarginSummary {
                r,
                m: lemma22_rate(r)?,
                samples: cfg.samples,
                pass: min_margin_g.value >= -MARGIN_TOLERANCE
                    && min_margin_gt.value >= -MARGIN_TOLERANCE,
                min_margin_g,
                min_margin_gt,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BoundsCheckReport {
        seed: cfg.seed,
        per_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_symbol_check_passes_and_is_reproducible() {
        let cfg = SymbolCheckConfig {
            samples: 300,
            ..Default::default()
        };
        let a = run_symbol_check(&cfg).unwrap();
        assert!(a.passed(), "{a:?}");
        assert_eq!(a, run_symbol_check(&cfg).unwrap());
        let other = run_symbol_check(&SymbolCheckConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.worst_rk4, other.worst_rk4);
    }

    #[test]
    fn small_bounds_check_passes() {
        let cfg = BoundsCheckConfig {
            samples: 500,
            ..Default::default()
        };
        let rep = run_bounds_check(&cfg).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.per_r.len(), 3);
        for s in &rep.per_r {
            assert!(s.min_margin_g.value.is_finite());
        }
    }

    #[test]
    fn dr_samples_lie_in_dr() {
        for (xi, t) in dr_samples(3, 2.5, 400, (0.01, 100.0), 3).unwrap() {
            assert!(xi.norm_sq() <= 2.5 * xi.xi1().abs());
            assert!((0.01..=100.0).contains(&t));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = BoundsCheckConfig {
            r_values: vec![2.0],
            ..Default::default()
        };
        assert!(run_bounds_check(&bad).is_err());
        let bad = SymbolCheckConfig {
            dims: vec![0],
            ..Default::default()
        };
        assert!(run_symbol_check(&bad).is_err());
    }
}
