//! Initial data given by closed-form spectra.

use serde::{Deserialize, Serialize};

use crate::cutoff::{step_unchecked, ExpBump};
use crate::error::{Error, Result};
use crate::symbol::check_region_parameter;

/// `e^{−x²/2σ²}` drops below `1e−16` beyond this many `σ`.
pub const GAUSSIAN_BAND_SIGMAS: f64 = 8.584;

/// Ratio window `[r − 0.75, r − 0.25]` of the D_r bump.
pub const DR_BUMP_INNER: f64 = 0.75;
pub const DR_BUMP_OUTER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PresetKind {
    /// `e^{−|ξ|²/2σ²}`
    GaussianPair {
        #[serde(default = "one")]
        sigma: f64,
    },
    /// Smooth bump in `|ξ|²/|ξ₁|` over `[r−0.75, r−0.25]` times a radial
    /// bump of the given radius; supported in `D_{r−1/4}`.
    DrBump {
        #[serde(default = "one")]
        radius: f64,
    },
    /// `∏ᵢ exp(1 − 1/(1 − (ξᵢ/w)²))` on `|ξᵢ| < w`.
    Separable {
        #[serde(default = "one")]
        width: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    U0only,
    U1only,
    Both,
}

impl Which {
    pub fn has_u0(self) -> bool {
        matches!(self, Which::U0only | Which::Both)
    }

    pub fn has_u1(self) -> bool {
        matches!(self, Which::U1only | Which::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPreset {
    pub kind: PresetKind,
    pub which: Which,
}

impl DataPreset {
    pub fn new(kind: PresetKind, which: Which) -> Result<Self> {
        let p = Self { kind, which };
        p.validate()?;
        Ok(p)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PresetKind::GaussianPair { .. } => "gaussian-pair",
            PresetKind::DrBump { .. } => "dr-bump",
            PresetKind::Separable { .. } => "separable",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (what, v) = match self.kind {
            PresetKind::GaussianPair { sigma } => ("sigma", sigma),
            PresetKind::DrBump { radius } => ("radius", radius),
            PresetKind::Separable { width } => ("width", width),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(
                "preset",
                format!("{what} must be positive, got {v}"),
            ));
        }
        Ok(())
    }

    /// Depends on `ξ` only through `|ξ₁|` and `|ξ|`.
    pub fn is_cylindrical(&self) -> bool {
        !matches!(self.kind, PresetKind::Separable { .. })
    }

    /// Largest `|ξᵢ|` on the (effective) support.
    pub fn axis_band_limit(&self) -> f64 {
        match self.kind {
            PresetKind::GaussianPair { sigma } => GAUSSIAN_BAND_SIGMAS * sigma,
            PresetKind::DrBump { radius } => radius,
            PresetKind::Separable { width } => width,
        }
    }

    /// Radius of a ball containing the (effective) support in `Rⁿ`.
    pub fn support_radius(&self, n: usize) -> f64 {
        match self.kind {
            PresetKind::Separable { width } => width * (n as f64).sqrt(),
            _ => self.axis_band_limit(),
        }
    }

    /// Spectrum of a cylindrical preset at `(|ξ₁|, |ξ|²)`.
    pub fn radial_value(&self, r: f64, xi1: f64, norm_sq: f64) -> f64 {
        match self.kind {
            PresetKind::GaussianPair { sigma } => (-norm_sq / (2.0 * sigma * sigma)).exp(),
            PresetKind::DrBump { radius } => dr_bump(r, radius, xi1.abs(), norm_sq),
            PresetKind::Separable { .. } => panic!("separable preset has no cylindrical form"),
        }
    }

    /// Spectrum at an explicit point.
    pub fn value(&self, r: f64, xi: &[f64]) -> f64 {
        match self.kind {
            PresetKind::Separable { width } => xi.iter().map(|&x| axis_bump(x / width)).product(),
            _ => {
                let s: f64 = xi.iter().map(|x| x * x).sum();
                self.radial_value(r, xi[0], s)
            }
        }
    }

    /// `|ξ'|`-interval outside which a cylindrical preset vanishes.
    pub fn rho_range(&self, r: f64, xi1: f64, rho_max: f64) -> Option<(f64, f64)> {
        match self.kind {
            PresetKind::DrBump { radius } => {
                let cone = (r - DR_BUMP_OUTER) * xi1 - xi1 * xi1;
                let ball = radius * radius - xi1 * xi1;
                let hi = cone.min(ball);
                (xi1 > 0.0 && hi > 0.0).then(|| (0.0, hi.sqrt().min(rho_max)))
            }
            _ => Some((0.0, rho_max)),
        }
    }

    pub fn check_r(&self, r: f64) -> Result<()> {
        check_region_parameter(r)
    }
}

fn axis_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

fn dr_bump(r: f64, radius: f64, xi1: f64, norm_sq: f64) -> f64 {
    if norm_sq == 0.0 {
        return 1.0;
    }
    if xi1 == 0.0 || norm_sq > (r - DR_BUMP_OUTER) * xi1 || norm_sq >= radius * radius {
        return 0.0;
    }
    let ratio = norm_sq / xi1;
    step_unchecked(ratio, r - DR_BUMP_INNER, r - DR_BUMP_OUTER, &ExpBump)
        * step_unchecked(norm_sq.sqrt(), 0.0, radius, &ExpBump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{in_dr, Mode};

    #[test]
    fn gaussian_values() {
        let p = DataPreset::new(PresetKind::GaussianPair { sigma: 2.0 }, Which::Both).unwrap();
        assert_eq!(p.value(3.0, &[0.0, 0.0, 0.0]), 1.0);
        assert!((p.value(3.0, &[1.0, 1.0, 0.0]) - (-0.25f64).exp()).abs() < 1e-15);
        assert!(p.radial_value(3.0, 0.0, (GAUSSIAN_BAND_SIGMAS * 2.0).powi(2)) < 1e-16);
    }

    #[test]
    fn dr_bump_support_inside_dr() {
        let p = DataPreset::new(PresetKind::DrBump { radius: 1.5 }, Which::U1only).unwrap();
        for i in 0..200 {
            for j in 0..200 {
                let xi1 = -2.0 + 4.0 * i as f64 / 199.0;
                let rho = 2.0 * j as f64 / 199.0;
                let v = p.value(3.0, &[xi1, rho, 0.0]);
                if v != 0.0 {
                    assert!(in_dr(Mode::from_cylindrical(xi1, rho), 3.0));
                    assert!(xi1 * xi1 + rho * rho < 1.5 * 1.5);
                }
            }
        }
        assert_eq!(p.value(3.0, &[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(p.value(3.0, &[0.0, 0.5, 0.0]), 0.0);
    }

    #[test]
    fn separable_is_a_product() {
        let p = DataPreset::new(PresetKind::Separable { width: 2.0 }, Which::U0only).unwrap();
        let v = p.value(3.0, &[0.5, -1.0, 0.0]);
        let e = (1.0f64 - 1.0 / (1.0 - 0.0625)).exp() * (1.0 - 1.0 / 0.75f64).exp();
        assert!((v - e).abs() < 1e-15);
        assert_eq!(p.value(3.0, &[2.0, 0.0, 0.0]), 0.0);
        assert!(!p.is_cylindrical());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DataPreset::new(PresetKind::GaussianPair { sigma: 0.0 }, Which::Both).is_err());
        assert!(DataPreset::new(PresetKind::Separable { width: f64::NAN }, Which::Both).is_err());
    }

    #[test]
    fn parses_tagged_json() {
        let p: DataPreset =
            serde_json::from_str(r#"{"kind":{"kind":"dr-bump","radius":2.0},"which":"U0only"}"#)
                .unwrap();
        assert_eq!(p.kind, PresetKind::DrBump { radius: 2.0 });
        assert!(serde_json::from_str::<DataPreset>(
            r#"{"kind":{"kind":"dr-bump","radius":2.0,"x":1},"which":"U0only"}"#
        )
        .is_err());
    }
}
