//! Pointwise bounds on `Ĝ` and weighted norms of the low-frequency part
//! `Ĝ₁ = χĜ`.

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::quadrature::{
    self, ChannelKind, Domain, Integrand, Monomial, Node, QuadratureSpec, ScaleHints,
};
use crate::symbol::{check_region_parameter, in_dr, FrequencyPoint, Mode};

/// Largest `|α|` accepted by [`WeightedNormRequest`].
pub const MAX_ALPHA: u32 = 6;
/// Largest time-derivative order accepted by [`WeightedNormRequest`].
pub const MAX_TIME_ORDER: u32 = 5;

/// Exponential rate `m = 1 − √(1 − 4/r²)` of the pointwise bound on `D_r`.
pub fn lemma22_rate(r: f64) -> Result<f64> {
    check_region_parameter(r)?;
    Ok(1.0 - (1.0 - 4.0 / (r * r)).sqrt())
}

/// `(t e^{−(m/2)|ξ|²t} − |Ĝ|, (1 + |ξ|²t) e^{−(m/2)|ξ|²t} − |Ĝ_t|)` for `ξ ∈ D_r`.
pub fn lemma22_margin(xi: &FrequencyPoint, t: f64, r: f64) -> Result<(f64, f64)> {
    let m = lemma22_rate(r)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("time", format!("need t > 0, got {t}")));
    }
    let mode = xi.mode();
    if !in_dr(mode, r) {
        return Err(Error::invalid(
            "frequency point",
            format!("ξ is outside D_{r}"),
        ));
    }
    let (g, gt) = mode.ghat_pair(t);
    let s = mode.norm_sq;
    let decay = (-0.5 * m * s * t).exp();
    Ok((t * decay - g.abs(), (1.0 + s * t) * decay - gt.abs()))
}

/// `−ξ₁²/|ξ|² − λ₊` for `ξ ∈ D_r^c`; non-negative by the root bound.
pub fn lambda_plus_gap(xi: &FrequencyPoint, r: f64) -> Result<f64> {
    check_region_parameter(r)?;
    let mode = xi.mode();
    if mode.norm_sq == 0.0 {
        return Err(Error::invalid("frequency point", "ξ = 0 is excluded"));
    }
    if in_dr(mode, r) {
        return Err(Error::invalid(
            "frequency point",
            format!("ξ lies in D_{r}"),
        ));
    }
    // D_r^c ⊂ D_2^c, so λ₊ is real
    let lp = mode.lambda_plus_real().expect("overdamped outside D_r");
    Ok(-mode.xi1_sq() / mode.norm_sq - lp)
}

/// `e^{−|ξ|²t/2} − e^{λ₋t}` (the slow-root comparison used on `D_r^c`).
pub fn lambda_minus_margin(xi: &FrequencyPoint, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("time", format!("need t ≥ 0, got {t}")));
    }
    let mode = xi.mode();
    let a = mode.half_norm_sq();
    let re_minus = match mode.lambda_plus_real() {
        // λ₋ = −(a + d)
        Some(_) => -(a + 0.5 * mode.disc().sqrt()),
        None => -a,
    };
    Ok((-a * t).exp() - (re_minus * t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// `ξ^α ∂_t^l Ĝ₁`
    PlainG,
    /// `ξ^α ∂_t^l (∂_t + |ξ|²) Ĝ₁`
    HeatG,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::PlainG, Variant::HeatG];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

    pub fn label(self) -> &'static str {
        match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
            NormKind::Linf => "Linf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormRequest {
    pub alpha: Vec<u32>,
    pub l: u32,
    pub variant: Variant,
    pub p: NormKind,
    pub spec: CutoffSpec,
}

impl WeightedNormRequest {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return Err(Error::invalid(
                "alpha",
                "multi-index needs one entry per dimension",
            ));
        }
        let total: u32 = self.alpha.iter().sum();
        if total > MAX_ALPHA {
            return Err(Error::invalid(
                "alpha",
                format!("|α| = {total} exceeds {MAX_ALPHA}"),
            ));
        }
        if self.l > MAX_TIME_ORDER {
            return Err(Error::invalid(
                "l",
                format!("l = {} exceeds {MAX_TIME_ORDER}", self.l),
            ));
        }
        check_region_parameter(self.spec.r)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

/// Multi-index of length `n` with all of `order` on the first tail axis
/// (on `ξ₁` when `n = 1`).
pub fn tail_alpha(n: usize, order: u32) -> Vec<u32> {
    let mut a = vec![0; n];
    a[if n > 1 { 1 } else { 0 }] = order;
    a
}

/// Decay exponent of the norm table:
/// PlainG `−|α|/2 − ⌊(l−1)/2⌋ − c_p`, HeatG `−|α|/2 − ⌊l/2⌋ − c_p`,
/// `c_p = 0, n/4, n/2` for `L^∞, L², L¹`.
pub fn lemma23_exponent(req: &WeightedNormRequest, n: usize) -> f64 {
    let a: u32 = req.alpha.iter().sum();
    let l = req.l as i64;
    let floor_part = match req.variant {
        Variant::PlainG => (l - 1).div_euclid(2),
        Variant::HeatG => l.div_euclid(2),
    };
    let c_p = match req.p {
        NormKind::Linf => 0.0,
        NormKind::L2 => n as f64 / 4.0,
        NormKind::L1 => n as f64 / 2.0,
    };
    -(a as f64) / 2.0 - floor_part as f64 - c_p
}

/// Value of `∂_t^l Ĝ` (PlainG) or `∂_t^l(∂_t + |ξ|²)Ĝ` (HeatG) from the
/// derivative table `d[k] = ∂_t^k Ĝ`. For HeatG with `l ≥ 1` the identity
/// `∂_t(∂_t + |ξ|²)Ĝ = −ξ₁²Ĝ` is used.
#[inline]
pub(crate) fn variant_value(variant: Variant, l: usize, mode: Mode, t: f64, d: &[f64]) -> f64 {
    match variant {
        Variant::PlainG => d[l],
        Variant::HeatG if l == 0 => mode.heat_symbol(t),
        Variant::HeatG => -mode.xi1_sq() * d[l - 1],
    }
}

/// Pointwise `ξ^α`-free symbol value `V(ξ,t)` of a request (without `χ`).
pub fn variant_symbol(xi: &FrequencyPoint, t: f64, variant: Variant, l: u32) -> Result<f64> {
    let d = crate::symbol::ghat_derivatives(xi, t, l as usize + 1)?;
    Ok(variant_value(variant, l as usize, xi.mode(), t, &d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// Norm value per quadrature level (raw node maximum for `L^∞`).
    pub levels: Vec<f64>,
}

impl NormEstimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error_estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error_estimate / self.value.abs()
        }
    }

    /// Observed order from the last three levels.
    pub fn observed_order(&self) -> Option<f64> {
        let n = self.levels.len();
        if n < 3 {
            return None;
        }
        let e1 = (self.levels[n - 2] - self.levels[n - 3]).abs();
        let e2 = (self.levels[n - 1] - self.levels[n - 2]).abs();
        (e1 > 0.0 && e2 > 0.0).then(|| (e1 / e2).log2())
    }
}

struct Channel {
    variant: Variant,
    l: usize,
    p: NormKind,
    mono: Monomial,
}

struct SymbolNorms {
    t: f64,
    spec: CutoffSpec,
    dim: usize,
    channels: Vec<Channel>,
    kinds: Vec<ChannelKind>,
    table_len: usize,
}

impl Integrand for SymbolNorms {
    fn channels(&self) -> &[ChannelKind] {
        &self.kinds
    }

    fn domain(&self) -> Domain {
        Domain {
            dim: self.dim,
            radius: self.spec.r + 1.0,
        }
    }

    fn hints(&self) -> ScaleHints {
        ScaleHints {
            time: self.t,
            r: Some(self.spec.r),
            oscillatory: true,
        }
    }

    fn cylindrical(&self) -> bool {
        true
    }

    fn rho_range(&self, xi1: f64, rho_max: f64) -> Option<(f64, f64)> {
        // supp χ ⊂ D_{r+1}
        let v = (self.spec.r + 1.0) * xi1 - xi1 * xi1;
        (xi1 > 0.0 && v > 0.0).then(|| (0.0, v.sqrt().min(rho_max)))
    }

    fn eval(&self, node: &Node<'_>, out: &mut [f64]) {
        let mode = Mode::from_cylindrical(node.xi1, node.rho);
        let chi = self.spec.chi_mode(mode);
        if chi == 0.0 {
            out.fill(0.0);
            return;
        }
        let mut d = [0.0; 8];
        let d = &mut d[..self.table_len];
        mode.derivatives_into(self.t, d);
        for (slot, ch) in out.iter_mut().zip(&self.channels) {
            let v = chi * variant_value(ch.variant, ch.l, mode, self.t, d);
            *slot = match ch.p {
                NormKind::L1 => v.abs() * ch.mono.integral_weight(node, 1),
                NormKind::L2 => v * v * ch.mono.integral_weight(node, 2),
                NormKind::Linf => v.abs() * ch.mono.sup_weight(node),
            };
        }
    }
}

/// Norms of several requests at one time `t`, sharing the symbol
/// evaluations. All requests must have the same dimension and cutoff.
/// Each entry fails separately when its Richardson estimate exceeds the
/// quadrature tolerance.
pub fn weighted_symbol_norms(
    reqs: &[WeightedNormRequest],
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<Result<NormEstimate>>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("time", format!("need t > 0, got {t}")));
    }
    let Some(first) = reqs.first() else {
        return Ok(Vec::new());
    };
    for req in reqs {
        req.validate()?;
        if req.dim() != first.dim() || req.spec != first.spec {
            return Err(Error::invalid(
                "request batch",
                "all requests must share dimension and cutoff",
            ));
        }
    }
    let channels = reqs
        .iter()
        .map(|q| {
            Ok(Channel {
                variant: q.variant,
                l: q.l as usize,
                p: q.p,
                mono: Monomial::new(&q.alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kinds = reqs
        .iter()
        .map(|q| match q.p {
            NormKind::Linf => ChannelKind::Supremum,
            _ => ChannelKind::Integral,
        })
        .collect();
    let max_l = reqs.iter().map(|q| q.l as usize).max().unwrap_or(0);
    let integrand = SymbolNorms {
        t,
        spec: first.spec,
        dim: first.dim(),
        channels,
        kinds,
        table_len: max_l + 2,
    };
    let raw = quadrature::integrate(quad, &integrand)?;
    Ok(reqs
        .iter()
        .zip(raw)
        .map(|(req, res)| {
            let est = match req.p {
                NormKind::L2 => {
                    let levels: Vec<f64> = res.levels.iter().map(|v| v.max(0.0).sqrt()).collect();
                    let n = levels.len();
                    NormEstimate {
                        value: levels[n - 1],
                        error_estimate: (levels[n - 1] - levels[n - 2]).abs(),
                        levels,
                    }
                }
                _ => NormEstimate {
                    value: res.value,
                    error_estimate: res.error_estimate,
                    levels: res.levels,
                },
            };
            let rel = est.relative_error();
            if rel <= quad.tolerance {
                Ok(est)
            } else {
                Err(Error::NonConvergence {
                    estimate: rel,
                    tolerance: quad.tolerance,
                })
            }
        })
        .collect())
}

pub fn weighted_symbol_norm(
    req: &WeightedNormRequest,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<NormEstimate> {
    weighted_symbol_norms(std::slice::from_ref(req), t, quad)?
        .pop()
        .expect("one request in, one result out")
}

/// One line of the per-experiment norm table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub variant: Variant,
    pub alpha: String,
    pub l: u32,
    pub p: NormKind,
    pub t: f64,
    pub value: f64,
    pub error_estimate: f64,
}

pub fn format_alpha(alpha: &[u32]) -> String {
    let parts: Vec<String> = alpha.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

impl NormRow {
    pub fn new(req: &WeightedNormRequest, t: f64, est: &NormEstimate) -> Self {
        Self {
            variant: req.variant,
            alpha: format_alpha(&req.alpha),
            l: req.l,
            p: req.p,
            t,
            value: est.value,
            error_estimate: est.error_estimate,
        }
    }
}
