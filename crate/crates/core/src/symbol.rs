//! Fourier-side Green function of `u_tt − u_{x₁x₁} = Δu_t`.
//!
//! Per frequency `ξ` the symbol `Ĝ(ξ,t)` solves
//! `Ĝ_tt + |ξ|²Ĝ_t + ξ₁²Ĝ = 0`, `Ĝ(0) = 0`, `Ĝ_t(0) = 1`. Its characteristic
//! roots are `λ± = −a ± d` with `a = |ξ|²/2` and `d = √(|ξ|⁴ − 4ξ₁²)/2`.
//!
//! The textbook quotient `(e^{λ₊t} − e^{λ₋t})/(λ₊ − λ₋)` cancels
//! catastrophically near the double root `|ξ|² = 2|ξ₁|`, so all values here
//! are assembled from `e^{−at}·t·sinhc(dt)` and `e^{−at}cosh(dt)` (or their
//! trigonometric versions when `d` is imaginary), with `λ₊ = −ξ₁²/(a + d)`
//! evaluated without subtraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|dt|` the hyperbolic/trigonometric kernels switch to their
/// Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-3;

/// Default relative band used only to label a mode as degenerate.
pub const DEFAULT_DEGENERACY_DELTA: f64 = 1e-6;

/// Highest time-derivative order served by [`ghat_derivatives`].
pub const MAX_DERIVATIVE_ORDER: usize = 12;

/// A point `ξ ∈ Rⁿ`; `ξ₁` is the propagation direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    coords: Vec<f64>,
}

impl FrequencyPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid(
                "frequency point",
                "dimension must be at least 1",
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "frequency point",
                "coordinates must be finite",
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn xi1(&self) -> f64 {
        self.coords[0]
    }

    pub fn tail_norm(&self) -> f64 {
        self.coords[1..].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn mode(&self) -> Mode {
        Mode::new(self.xi1(), self.norm_sq())
    }
}

/// The two invariants the symbol depends on: `|ξ₁|` and `|ξ|²`.
///
/// Quadrature code works with modes directly so that cylindrically reduced
/// integrals never materialise full coordinate vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// `|ξ₁|`
    pub xi1: f64,
    /// `|ξ|²`, always at least `ξ₁²`.
    pub norm_sq: f64,
}

impl Mode {
    pub fn new(xi1: f64, norm_sq: f64) -> Self {
        let xi1 = xi1.abs();
        Self {
            xi1,
            norm_sq: norm_sq.max(xi1 * xi1),
        }
    }

    /// Mode from `ξ₁` and the tail radius `|ξ'|`.
    pub fn from_cylindrical(xi1: f64, rho: f64) -> Self {
        Self::new(xi1, xi1 * xi1 + rho * rho)
    }

    pub fn xi1_sq(&self) -> f64 {
        self.xi1 * self.xi1
    }

    /// `|ξ|⁴ − 4ξ₁²`, factored to avoid cancellation near the double root.
    pub fn disc(&self) -> f64 {
        (self.norm_sq - 2.0 * self.xi1) * (self.norm_sq + 2.0 * self.xi1)
    }

    pub fn half_norm_sq(&self) -> f64 {
        0.5 * self.norm_sq
    }

    /// `λ₊` when it is real (`disc ≥ 0`), computed as `−ξ₁²/(a + d)`.
    pub fn lambda_plus_real(&self) -> Option<f64> {
        let disc = self.disc();
        if disc < 0.0 {
            return None;
        }
        let a = self.half_norm_sq();
        let d = 0.5 * disc.sqrt();
        if a + d == 0.0 {
            Some(0.0)
        } else {
            Some(-self.xi1_sq() / (a + d))
        }
    }

    /// `(Ĝ, Ĝ_t)` at time `t ≥ 0`.
    pub fn ghat_pair(&self, t: f64) -> (f64, f64) {
        let k = self.kernels(t);
        (k.g, k.gt)
    }

    /// `Ĝ, Ĝ_t` together with `C = e^{−at}cosh(dt)`, the even kernel used by
    /// the second-derivative closed form and `½(e^{λ₊t}+e^{λ₋t})`.
    pub(crate) fn kernels(&self, t: f64) -> Kernels {
        let a = self.half_norm_sq();
        let disc = self.disc();
        if disc >= 0.0 {
            let d = 0.5 * disc.sqrt();
            let z = d * t;
            if z <= SERIES_THRESHOLD {
                let e = (-a * t).exp();
                let z2 = z * z;
                let sh = 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
                let ch = 1.0 + z2 / 2.0 + z2 * z2 / 24.0;
                let g = e * t * sh;
                Kernels {
                    g,
                    gt: e * (ch - a * t * sh),
                    even: e * ch,
                }
            } else {
                let lp = -self.xi1_sq() / (a + d);
                let lm = -(a + d);
                let ep = (lp * t).exp();
                let em = (lm * t).exp();
                Kernels {
                    g: ep * (-(-2.0 * z).exp_m1()) / (2.0 * d),
                    gt: (lp * ep - lm * em) / (2.0 * d),
                    even: 0.5 * (ep + em),
                }
            }
        } else {
            let w = 0.5 * (-disc).sqrt();
            let z = w * t;
            let e = (-a * t).exp();
            let (sinc, cos) = if z <= SERIES_THRESHOLD {
                let z2 = z * z;
                (
                    1.0 - z2 / 6.0 + z2 * z2 / 120.0,
                    1.0 - z2 / 2.0 + z2 * z2 / 24.0,
                )
            } else {
                (z.sin() / z, z.cos())
            };
            let g = e * t * sinc;
            Kernels {
                g,
                gt: e * (cos - a * t * sinc),
                even: e * cos,
            }
        }
    }

    /// Fills `out[k] = ∂_t^k Ĝ` for `k < out.len()` by the exact recurrence
    /// `∂^{k+2}Ĝ = −|ξ|²∂^{k+1}Ĝ − ξ₁²∂^kĜ`.
    pub fn derivatives_into(&self, t: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let (g, gt) = self.ghat_pair(t);
        out[0] = g;
        if out.len() > 1 {
            out[1] = gt;
        }
        let s = self.norm_sq;
        let q = self.xi1_sq();
        for k in 2..out.len() {
            out[k] = -s * out[k - 1] - q * out[k - 2];
        }
    }

    /// `(∂_t + |ξ|²)Ĝ = ½(e^{λ₊t} + e^{λ₋t}) + aĜ`, a sum of non-negative
    /// terms in the overdamped regime.
    pub fn heat_symbol(&self, t: f64) -> f64 {
        let k = self.kernels(t);
        k.even + self.half_norm_sq() * k.g
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernels {
    pub g: f64,
    pub gt: f64,
    pub even: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Overdamped,
    Oscillatory,
    Degenerate,
}

/// Per-mode spectral data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSymbol {
    pub a: f64,
    pub disc: f64,
    pub d: Complex64,
    pub regime: Regime,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub lambda0: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFlags {
    /// `|ξ|² ≤ 2|ξ₁|`
    pub in_a: bool,
    /// `|ξ| < 1`
    pub in_b: bool,
    /// `|ξ|² ≤ r|ξ₁|`
    pub in_dr: bool,
    /// `|ξ₁| ≤ |ξ'|`
    pub in_e: bool,
}

pub fn check_region_parameter(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 2.0) {
        return Err(Error::invalid(
            "region parameter r",
            format!("r must exceed 2, got {r}"),
        ));
    }
    Ok(())
}

pub fn classify_region(xi: &FrequencyPoint, r: f64) -> Result<RegionFlags> {
    check_region_parameter(r)?;
    let s = xi.norm_sq();
    let x1 = xi.xi1().abs();
    Ok(RegionFlags {
        in_a: s <= 2.0 * x1,
        in_b: s < 1.0,
        in_dr: s <= r * x1,
        in_e: x1 <= xi.tail_norm(),
    })
}

/// True when `ξ ∈ D_r`, i.e. `|ξ|² ≤ r|ξ₁|`.
pub fn in_dr(mode: Mode, r: f64) -> bool {
    mode.norm_sq <= r * mode.xi1
}

pub fn mode_decomposition(xi: &FrequencyPoint, degeneracy_delta: f64) -> Result<ModeSymbol> {
    if !(degeneracy_delta > 0.0 && degeneracy_delta.is_finite()) {
        return Err(Error::invalid(
            "degeneracy delta",
            "must be positive and finite",
        ));
    }
    let mode = xi.mode();
    let a = mode.half_norm_sq();
    let disc = mode.disc();
    let scale = (mode.norm_sq * mode.norm_sq).max(1.0);
    let regime = if disc > degeneracy_delta * scale {
        Regime::Overdamped
    } else if disc < -degeneracy_delta * scale {
        Regime::Oscillatory
    } else {
        Regime::Degenerate
    };
    let (d, lambda_plus) = if disc >= 0.0 {
        let d = 0.5 * disc.sqrt();
        let lp = mode.lambda_plus_real().unwrap_or(0.0);
        (Complex64::new(d, 0.0), Complex64::new(lp, 0.0))
    } else {
        let w = 0.5 * (-disc).sqrt();
        (Complex64::new(0.0, w), Complex64::new(-a, w))
    };
    let lambda_minus = Complex64::new(-a, 0.0) - d;
    Ok(ModeSymbol {
        a,
        disc,
        d,
        regime,
        lambda_plus,
        lambda_minus,
        lambda0: 2.0 * d,
    })
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(
            "time",
            format!("t must be finite and non-negative, got {t}"),
        ));
    }
    Ok(())
}

/// `(Ĝ(ξ,t), ∂_tĜ(ξ,t))`.
pub fn ghat_pair(xi: &FrequencyPoint, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    Ok(xi.mode().ghat_pair(t))
}

/// `[Ĝ, ∂_tĜ, …, ∂_t^L Ĝ]`.
pub fn ghat_derivatives(xi: &FrequencyPoint, t: f64, order: usize) -> Result<Vec<f64>> {
    check_time(t)?;
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::invalid(
            "derivative order",
            format!("L = {order} exceeds the cap {MAX_DERIVATIVE_ORDER}"),
        ));
    }
    let mut out = vec![0.0; order + 1];
    xi.mode().derivatives_into(t, &mut out);
    Ok(out)
}

/// `∂_t^l (∂_t + |ξ|²) Ĝ(ξ,t)`.
pub fn heat_combination(xi: &FrequencyPoint, t: f64, l: usize) -> Result<f64> {
    let v = ghat_derivatives(xi, t, l + 1)?;
    Ok(v[l + 1] + xi.norm_sq() * v[l])
}

/// `Ĝ_tt + |ξ|²Ĝ_t + ξ₁²Ĝ` with `Ĝ_tt` from its closed form
/// `(a² + d²)Ĝ − 2a e^{−at}cosh(dt)`; zero up to round-off.
pub fn ode_residual(xi: &FrequencyPoint, t: f64) -> Result<f64> {
    check_time(t)?;
    let mode = xi.mode();
    let k = mode.kernels(t);
    let a = mode.half_norm_sq();
    let q = mode.xi1_sq();
    // a² + d² = 2a² − ξ₁²
    let gtt = (2.0 * a * a - q) * k.g - 2.0 * a * k.even;
    Ok(gtt + mode.norm_sq * k.gt + q * k.g)
}

/// Classical RK4 on `(Ĝ, Ĝ_t)' = (Ĝ_t, −|ξ|²Ĝ_t − ξ₁²Ĝ)` from `(0, 1)`.
///
/// Independent of the closed forms above; used as a cross-check.
pub fn rk4_mode_oracle(xi: &FrequencyPoint, t: f64, steps: usize) -> Result<(f64, f64)> {
    check_time(t)?;
    if steps < 1 {
        return Err(Error::invalid("steps", "RK4 needs at least one step"));
    }
    let s = xi.norm_sq();
    let q = xi.xi1() * xi.xi1();
    Ok(rk4_linear(s, q, t, steps))
}

pub(crate) fn rk4_linear(s: f64, q: f64, t: f64, steps: usize) -> (f64, f64) {
    let f = |g: f64, v: f64| (v, -s * v - q * g);
    let h = t / steps as f64;
    let (mut g, mut v) = (0.0_f64, 1.0_f64);
    for _ in 0..steps {
        let (k1g, k1v) = f(g, v);
        let (k2g, k2v) = f(g + 0.5 * h * k1g, v + 0.5 * h * k1v);
        let (k3g, k3v) = f(g + 0.5 * h * k2g, v + 0.5 * h * k2v);
        let (k4g, k4v) = f(g + h * k3g, v + h * k3v);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (g, v)
}

/// Step count meeting the RK4 stability/accuracy recommendation.
pub fn rk4_recommended_steps(xi: &FrequencyPoint, t: f64) -> usize {
    let n = (8.0 * t * (1.0 + xi.norm_sq())).ceil() as usize;
    n.max(16)
}
