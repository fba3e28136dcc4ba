//! Frequency-space integrals of preset solutions.

use serde::Serialize;

use super::field::{duhamel_multipliers, SpectralField};
use super::preset::{DataPreset, PresetKind};
use crate::bounds::NormEstimate;
use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::quadrature::{
    self, scheme_registry, ChannelKind, ChannelResult, Domain, Integrand, Monomial, Node,
    QuadratureSpec, ScaleHints, Tail,
};
use crate::symbol::Mode;

/// Factor applied to `∂_t^l û` before integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Filter {
    All,
    /// `χ ∂_t^l û`
    Low(CutoffSpec),
    /// `(1 − χ) ∂_t^l û`
    High(CutoffSpec),
}

/// `|ξ^α ∂_t^l û|` integrals for preset data: channel 0 is the L¹ integral,
/// channel 1 the integral of the square.
struct Spectrum<'a> {
    preset: &'a DataPreset,
    r: f64,
    dim: usize,
    time: f64,
    l: usize,
    mono: Monomial,
    filter: Filter,
    radius: f64,
}

const KINDS: [ChannelKind; 2] = [ChannelKind::Integral, ChannelKind::Integral];

impl Spectrum<'_> {
    fn cutoff(&self) -> Option<CutoffSpec> {
        match self.filter {
            Filter::All => None,
            Filter::Low(s) | Filter::High(s) => Some(s),
        }
    }
}

impl Integrand for Spectrum<'_> {
    fn channels(&self) -> &[ChannelKind] {
        &KINDS
    }

    fn domain(&self) -> Domain {
        Domain {
            dim: self.dim,
            radius: self.radius,
        }
    }

    fn hints(&self) -> ScaleHints {
        let r =
            self.cutoff()
                .map(|s| s.r)
                .or(matches!(self.preset.kind, PresetKind::DrBump { .. }).then_some(self.r));
        ScaleHints {
            time: self.time,
            r,
            oscillatory: !matches!(self.filter, Filter::High(_)),
        }
    }

    fn cylindrical(&self) -> bool {
        self.preset.is_cylindrical()
    }

    fn rho_range(&self, xi1: f64, rho_max: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = self.preset.rho_range(self.r, xi1, rho_max)?;
        match self.filter {
            Filter::All => {}
            Filter::Low(s) => {
                let v = (s.r + 1.0) * xi1 - xi1 * xi1;
                if xi1 <= 0.0 || v <= 0.0 {
                    return None;
                }
                hi = hi.min(v.sqrt());
            }
            Filter::High(s) => {
                let v = s.r * xi1 - xi1 * xi1;
                if v > 0.0 {
                    lo = lo.max(v.sqrt());
                }
            }
        }
        (hi > lo).then_some((lo, hi))
    }

    fn eval(&self, node: &Node<'_>, out: &mut [f64]) {
        let s = node.xi1 * node.xi1 + node.rho * node.rho;
        let mode = Mode::new(node.xi1, s);
        let weight = match self.filter {
            Filter::All => 1.0,
            Filter::Low(c) => c.chi_mode(mode),
            Filter::High(c) => 1.0 - c.chi_mode(mode),
        };
        let f = match node.tail {
            Tail::Radial => self.preset.radial_value(self.r, node.xi1, s),
            Tail::Explicit(c) => {
                let mut xi = [0.0; 3];
                xi[0] = node.xi1;
                xi[1..1 + c.len()].copy_from_slice(c);
                self.preset.value(self.r, &xi[..1 + c.len()])
            }
        };
        if weight == 0.0 || f == 0.0 {
            out.fill(0.0);
            return;
        }
        let (h, g) = duhamel_multipliers(mode, self.time, self.l);
        let which = self.preset.which;
        let v = weight
            * f
            * (if which.has_u0() { h } else { 0.0 } + if which.has_u1() { g } else { 0.0 });
        out[0] = v.abs() * self.mono.integral_weight(node, 1);
        out[1] = v * v * self.mono.integral_weight(node, 2);
    }
}

/// Preset data as a closed-form spectrum in `Rⁿ`, evolved by `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuumData {
    pub preset: DataPreset,
    pub n: usize,
    pub r: f64,
    pub time: f64,
}

impl ContinuumData {
    pub fn new(preset: DataPreset, n: usize, r: f64) -> Result<Self> {
        preset.validate()?;
        crate::symbol::check_region_parameter(r)?;
        if !(1..=3).contains(&n) {
            return Err(Error::invalid(
                "dimension",
                format!("n = {n} outside 1..=3"),
            ));
        }
        Ok(Self {
            preset,
            n,
            r,
            time: 0.0,
        })
    }

    /// `(∫|ξ^α φ ∂_t^l û(ξ,t)| dξ, (∫|ξ^α φ ∂_t^l û(ξ,t)|² dξ)^{1/2})`
    /// with `φ` given by `filter` and `t` counted from `self.time`.
    /// Non-cylindrical presets are integrated with a 64-point tensor
    /// Gauss–Legendre rule when a radial scheme was requested.
    pub fn norms(
        &self,
        t: f64,
        alpha: &[u32],
        l: u32,
        filter: Filter,
        quad: &QuadratureSpec,
    ) -> Result<(NormEstimate, NormEstimate)> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("time", format!("need t ≥ 0, got {t}")));
        }
        if alpha.len() != self.n {
            return Err(Error::invalid("alpha", format!("need {} entries", self.n)));
        }
        let mut radius = self.preset.support_radius(self.n);
        if let Filter::Low(s) = filter {
            radius = radius.min(s.r + 1.0);
        }
        let integrand = Spectrum {
            preset: &self.preset,
            r: self.r,
            dim: self.n,
            time: self.time + t,
            l: l as usize,
            mono: Monomial::new(alpha)?,
            filter,
            radius,
        };
        let mut spec = quad.clone();
        if !self.preset.is_cylindrical() && scheme_registry().get(&spec.scheme)?.radial() {
            spec = QuadratureSpec {
                tolerance: quad.tolerance,
                ..QuadratureSpec::tensor_gauss_legendre(64)
            };
        }
        let res = quadrature::integrate(&spec, &integrand)?;
        let l1 = estimate(&res[0], false);
        let l2 = estimate(&res[1], true);
        for e in [&l1, &l2] {
            let rel = e.relative_error();
            if rel > spec.tolerance {
                return Err(Error::NonConvergence {
                    estimate: rel,
                    tolerance: spec.tolerance,
                });
            }
        }
        Ok((l1, l2))
    }

    /// `‖ŵ(·,t)‖_{L¹}` with `ŵ = (1 − χ)û(·,t)`, the high-frequency part of
    /// the solution, over `D_r^c` intersected with the data's support.
    pub fn highpass_l1(
        &self,
        t: f64,
        spec: &CutoffSpec,
        quad: &QuadratureSpec,
    ) -> Result<NormEstimate> {
        require_positive(t)?;
        Ok(self
            .norms(t, &vec![0; self.n], 0, Filter::High(*spec), quad)?
            .0)
    }

    /// `‖v̂(·,t)‖_{L¹}` with `v̂ = χ û(·,t)`.
    pub fn lowpass_l1(
        &self,
        t: f64,
        spec: &CutoffSpec,
        quad: &QuadratureSpec,
    ) -> Result<NormEstimate> {
        require_positive(t)?;
        Ok(self
            .norms(t, &vec![0; self.n], 0, Filter::Low(*spec), quad)?
            .0)
    }
}

impl SpectralField {
    /// The closed-form spectrum behind a preset field.
    pub fn continuum(&self) -> Result<ContinuumData> {
        let meta = self.meta();
        let preset = meta.preset.ok_or_else(|| {
            Error::Unsupported("continuum integrals need preset data, not grid samples".into())
        })?;
        Ok(ContinuumData {
            preset,
            n: self.grid().n,
            r: meta.r.unwrap_or(3.0),
            time: meta.time,
        })
    }
}

/// [`ContinuumData::highpass_l1`] for the preset behind `field`.
pub fn highpass_l1(
    field: &SpectralField,
    t: f64,
    spec: &CutoffSpec,
    quad: &QuadratureSpec,
) -> Result<NormEstimate> {
    field.continuum()?.highpass_l1(t, spec, quad)
}

fn estimate(res: &ChannelResult, root: bool) -> NormEstimate {
    let levels: Vec<f64> = if root {
        res.levels.iter().map(|v| v.max(0.0).sqrt()).collect()
    } else {
        res.levels.clone()
    };
    let n = levels.len();
    NormEstimate {
        value: levels[n - 1],
        error_estimate: (levels[n - 1] - levels[n - 2]).abs(),
        levels,
    }
}

fn require_positive(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("time", format!("need t > 0, got {t}")));
    }
    Ok(())
}
