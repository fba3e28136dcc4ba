//! Smooth frequency cutoff `χ` with `χ = 1` on `D_r` and `supp χ ⊂ D_{r+1}`.
//!
//! `D_r = {|ξ|² ≤ r|ξ₁|}` is the sublevel set `{ρ ≤ r}` of
//! `ρ(ξ) = |ξ|²/|ξ₁|`, so `χ(ξ) = η((ρ(ξ) − r))` for a one-dimensional step
//! `η` falling from 1 to 0 on `[0, 1]`. The step shape is a pluggable
//! [`TransitionProfile`].

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::symbol::{check_region_parameter, FrequencyPoint, Mode};

/// A monotone step `η: [0,1] → [0,1]` with `η(0) = 1` and `η(1) = 0`.
pub trait TransitionProfile: Send + Sync {
    fn name(&self) -> &'static str;
    /// Value at `u ∈ [0, 1]`; callers clamp outside.
    fn eta(&self, u: f64) -> f64;
}

/// `η(u) = f(1−u)/(f(1−u)+f(u))`, `f(u) = e^{−1/u}`: C^∞ and flat at both ends.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpBump;

impl TransitionProfile for ExpBump {
    fn name(&self) -> &'static str {
        "exp-bump"
    }

    fn eta(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        // f(u)/f(1-u) = exp(1/(1-u) - 1/u)
        let expo = 1.0 / (1.0 - u) - 1.0 / u;
        1.0 / (1.0 + expo.exp())
    }
}

/// Quintic smootherstep `1 − (6u⁵ − 15u⁴ + 10u³)`: C² with cheap evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolynomialC2;

impl TransitionProfile for PolynomialC2 {
    fn name(&self) -> &'static str {
        "poly-c2"
    }

    fn eta(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        1.0 - u * u * u * (u * (6.0 * u - 15.0) + 10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    #[default]
    ExpBump,
    #[serde(rename = "poly-c2")]
    PolynomialC2,
}

impl ProfileKind {
    pub fn profile(self) -> &'static dyn TransitionProfile {
        match self {
            ProfileKind::ExpBump => &ExpBump,
            ProfileKind::PolynomialC2 => &PolynomialC2,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "exp-bump" => Ok(ProfileKind::ExpBump),
            "poly-c2" => Ok(ProfileKind::PolynomialC2),
            other => Err(Error::UnknownName {
                kind: "cutoff profile",
                name: other.to_string(),
                known: profile_registry().names().join(", "),
            }),
        }
    }
}

pub fn profile_registry() -> &'static Registry<dyn TransitionProfile> {
    static REG: OnceLock<Registry<dyn TransitionProfile>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut reg: Registry<dyn TransitionProfile> = Registry::new("cutoff profile");
        reg.register("exp-bump", Arc::new(ExpBump));
        reg.register("poly-c2", Arc::new(PolynomialC2));
        reg
    })
}

/// 1 for `s ≤ a`, 0 for `s ≥ b`, `η((s−a)/(b−a))` in between.
pub fn smooth_step(s: f64, a: f64, b: f64, profile: ProfileKind) -> Result<f64> {
    if !(a < b) {
        return Err(Error::invalid(
            "step interval",
            format!("need a < b, got [{a}, {b}]"),
        ));
    }
    Ok(step_unchecked(s, a, b, profile.profile()))
}

#[inline]
pub(crate) fn step_unchecked(s: f64, a: f64, b: f64, profile: &dyn TransitionProfile) -> f64 {
    if s <= a {
        1.0
    } else if s >= b {
        0.0
    } else {
        profile.eta((s - a) / (b - a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub r: f64,
    #[serde(default)]
    pub profile: ProfileKind,
}

impl CutoffSpec {
    pub fn new(r: f64, profile: ProfileKind) -> Result<Self> {
        check_region_parameter(r)?;
        Ok(Self { r, profile })
    }

    /// `χ` on a mode. `χ(0) = 1`; `χ = 0` on the punctured `ξ₁ = 0` plane.
    #[inline]
    pub fn chi_mode(&self, mode: Mode) -> f64 {
        let s = mode.norm_sq;
        let x1 = mode.xi1;
        if s <= self.r * x1 {
            return 1.0;
        }
        if s >= (self.r + 1.0) * x1 {
            // includes ξ₁ = 0, ξ ≠ 0
            return if s == 0.0 { 1.0 } else { 0.0 };
        }
        self.profile.profile().eta(s / x1 - self.r)
    }
}

/// `ρ(ξ) = |ξ|²/|ξ₁|`, `+∞` on the `ξ₁ = 0` plane (0 at the origin).
pub fn ratio_coordinate(xi: &FrequencyPoint) -> f64 {
    let s = xi.norm_sq();
    let x1 = xi.xi1().abs();
    if s == 0.0 {
        0.0
    } else if x1 == 0.0 {
        f64::INFINITY
    } else {
        s / x1
    }
}

pub fn chi(xi: &FrequencyPoint, spec: &CutoffSpec) -> f64 {
    spec.chi_mode(xi.mode())
}

/// `(χĜ, (1−χ)Ĝ)` at time `t`.
pub fn split_symbol(xi: &FrequencyPoint, t: f64, spec: &CutoffSpec) -> Result<(f64, f64)> {
    let (g, _) = crate::symbol::ghat_pair(xi, t)?;
    let c = chi(xi, spec);
    Ok((c * g, (1.0 - c) * g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sampling::uniform_in_ball;
    use crate::numerics::HaltonSampler;

    fn p(c: &[f64]) -> FrequencyPoint {
        FrequencyPoint::new(c.to_vec()).unwrap()
    }

    /// ξ = (x, y, 0) with ρ(ξ) = target: solve x² + y² = target·x for y.
    fn point_with_ratio(x: f64, target: f64) -> FrequencyPoint {
        let y2 = target * x - x * x;
        p(&[x, y2.sqrt(), 0.0])
    }

    #[test]
    fn step_boundaries_and_midpoint() {
        for prof in [ProfileKind::ExpBump, ProfileKind::PolynomialC2] {
            assert_eq!(smooth_step(1.0, 1.0, 3.0, prof).unwrap(), 1.0);
            assert_eq!(smooth_step(3.0, 1.0, 3.0, prof).unwrap(), 0.0);
            assert!((smooth_step(2.0, 1.0, 3.0, prof).unwrap() - 0.5).abs() < 1e-15);
            assert!(smooth_step(0.0, 1.0, 1.0, prof).is_err());
            assert!(smooth_step(0.0, 2.0, 1.0, prof).is_err());
        }
    }

    #[test]
    fn step_is_flat_at_both_ends() {
        // Centred first differences straddling the junctions.
        for (prof, h) in [
            (ProfileKind::ExpBump, 1e-4),
            (ProfileKind::PolynomialC2, 1e-5),
        ] {
            for s in [0.0, 1.0] {
                let d = (smooth_step(s + h, 0.0, 1.0, prof).unwrap()
                    - smooth_step(s - h, 0.0, 1.0, prof).unwrap())
                    / (2.0 * h);
                assert!(d.abs() < 1e-8, "{prof:?} at {s}: {d}");
            }
        }
    }

    #[test]
    fn step_monotone() {
        for prof in [ProfileKind::ExpBump, ProfileKind::PolynomialC2] {
            let vals: Vec<f64> = (0..=1000)
                .map(|k| smooth_step(k as f64 / 1000.0, 0.0, 1.0, prof).unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn chi_examples() {
        let spec = CutoffSpec::new(3.0, ProfileKind::ExpBump).unwrap();
        assert_eq!(chi(&p(&[1.0, 0.0, 0.0]), &spec), 1.0);
        assert_eq!(chi(&p(&[0.1, 2.0, 0.0]), &spec), 0.0);
        assert!((chi(&point_with_ratio(1.0, 3.5), &spec) - 0.5).abs() < 1e-12);
        assert_eq!(chi(&p(&[0.0, 0.0, 0.0]), &spec), 1.0);
        assert_eq!(chi(&p(&[0.0, 1e-9, 0.0]), &spec), 0.0);
        assert!(CutoffSpec::new(2.0, ProfileKind::ExpBump).is_err());
    }

    #[test]
    fn split_examples() {
        let spec = CutoffSpec::new(3.0, ProfileKind::ExpBump).unwrap();
        let (g1, g2) = split_symbol(&p(&[1.0, 0.1, 0.0]), 2.0, &spec).unwrap();
        assert_eq!(g2, 0.0);
        assert_eq!(
            g1,
            crate::symbol::ghat_pair(&p(&[1.0, 0.1, 0.0]), 2.0)
                .unwrap()
                .0
        );
        let (g1, g2) = split_symbol(&p(&[0.0, 1.0, 0.0]), 1.0, &spec).unwrap();
        assert_eq!(g1, 0.0);
        assert!((g2 - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let xi = point_with_ratio(0.8, 3.5);
        let (g1, g2) = split_symbol(&xi, 1.5, &spec).unwrap();
        let g = crate::symbol::ghat_pair(&xi, 1.5).unwrap().0;
        assert!((g1 + g2 - g).abs() <= 1e-14 * g.abs());
    }

    #[test]
    fn chi_identity_and_support_on_samples() {
        let spec = CutoffSpec::new(3.0, ProfileKind::ExpBump).unwrap();
        let mut s = HaltonSampler::new(4, 11);
        let mut inside = 0;
        let mut outside = 0;
        while inside < 1000 || outside < 1000 {
            let xi = p(&uniform_in_ball(&s.next_point(), &[0.0, 0.0, 0.0], 6.0));
            let c = chi(&xi, &spec);
            assert!((0.0..=1.0).contains(&c));
            let rho = ratio_coordinate(&xi);
            if rho <= 3.0 {
                assert_eq!(c, 1.0);
                inside += 1;
            } else if rho >= 4.0 {
                assert_eq!(c, 0.0);
                outside += 1;
            }
            if xi.norm() > 4.0 {
                assert_eq!(c, 0.0);
            }
        }
    }

    #[test]
    fn chi_smooth_along_rays() {
        // Along ξ = ξ₀ + s·v through a transition point, 4th-order differences
        // of χ up to order 3 stay bounded and settle as the step shrinks.
        let spec = CutoffSpec::new(3.0, ProfileKind::ExpBump).unwrap();
        let x0 = point_with_ratio(0.9, 3.4);
        let v = [0.3, -0.5, 0.2];
        let f = |s: f64| {
            let c: Vec<f64> = x0.coords().iter().zip(v).map(|(a, b)| a + s * b).collect();
            chi(&p(&c), &spec)
        };
        let d3 = |h: f64| {
            (-f(3.0 * h) + 8.0 * f(2.0 * h) - 13.0 * f(h) + 13.0 * f(-h) - 8.0 * f(-2.0 * h)
                + f(-3.0 * h))
                / (8.0 * h * h * h)
        };
        let (a, b) = (d3(2e-3), d3(1e-3));
        assert!(a.is_finite() && a.abs() < 1e4);
        assert!((a - b).abs() < 1e-2 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn registry_lists_profiles() {
        assert_eq!(profile_registry().names(), vec!["exp-bump", "poly-c2"]);
        assert_eq!(
            ProfileKind::by_name("poly-c2").unwrap(),
            ProfileKind::PolynomialC2
        );
        assert!(ProfileKind::by_name("box").is_err());
    }
}
