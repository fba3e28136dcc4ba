//! Frequency-space quadrature with registered schemes.
//!
//! An [`Integrand`] exposes several output channels at once: integral
//! channels are summed with the node weights, supremum channels are
//! maximised over the nodes and then refined around the argmax. Schemes
//! only produce nodes, so a new rule is one more [`FrequencyQuadrature`]
//! implementation added to [`scheme_registry`].
//!
//! Two families are provided:
//!
//! * `tensor-midpoint` and `tensor-gauss-legendre` place a Cartesian
//!   product rule on the cube `[−R, R]ⁿ` and keep the nodes inside the ball.
//!   They accept any integrand.
//! * `cylindrical-graded` integrates over `(ξ₁, |ξ'|)` with composite
//!   Gauss–Legendre panels whose breakpoints follow the heat scale
//!   `t^{−1/2}`, the oscillation period of `sin(ξ₁t)` and the cone
//!   boundaries of the frequency regions. It requires integrands that depend
//!   on the tail only through `|ξ'|` and a monomial (see [`Monomial`]).
//!
//! Every level refines all panels by a factor of two. Results carry the
//! per-level values; the error estimate is the difference of the last two.
//! Accumulation is a fixed-order pairwise sum, so values do not depend on
//! the number of worker threads.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::sphere::{sphere_max, sphere_moment};
use crate::numerics::{pairwise_sum, GaussLegendre};
use crate::registry::Registry;

/// Accepted relative Richardson estimate unless a spec overrides it.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Relative stability a refined supremum is expected to reach.
pub const SUP_STABILITY: f64 = 1e-4;

const REFINE_PASSES: usize = 44;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Registered scheme name.
    #[serde(default = "default_scheme")]
    pub scheme: String,
    /// Points per axis for tensor rules, points per panel for graded rules.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Number of nested levels evaluated (at least 2).
    #[serde(default = "default_levels")]
    pub refinement_levels: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_scheme() -> String {
    "cylindrical-graded".to_string()
}
fn default_points() -> usize {
    8
}
fn default_levels() -> u32 {
    2
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            points: default_points(),
            refinement_levels: default_levels(),
            tolerance: default_tolerance(),
        }
    }
}

impl QuadratureSpec {
    pub fn tensor_gauss_legendre(points: usize) -> Self {
        Self {
            scheme: "tensor-gauss-legendre".into(),
            points,
            ..Self::default()
        }
    }

    pub fn tensor_midpoint(points: usize) -> Self {
        Self {
            scheme: "tensor-midpoint".into(),
            points,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::invalid("quadrature points", "must be positive"));
        }
        if self.refinement_levels < 2 {
            return Err(Error::invalid(
                "quadrature refinement_levels",
                format!("need at least 2 levels, got {}", self.refinement_levels),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerance", "must be positive"));
        }
        scheme_registry().get(&self.scheme).map(|_| ())
    }
}

/// Integration domain: the ball `|ξ| ≤ radius` in `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub radius: f64,
}

/// Scale information used by graded schemes to place breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleHints {
    /// Evolution time; sets the heat scale `t^{−1/2}`.
    pub time: f64,
    /// Cone parameter `r` of the cutoff, when one is involved.
    pub r: Option<f64>,
    /// Integrand contains `sin(ξ₁t)`-type oscillation near `ξ₁ = 0`.
    pub oscillatory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Integral,
    Supremum,
}

/// Tail part `ξ' = (ξ₂, …, ξₙ)` of a node.
#[derive(Debug, Clone, Copy)]
pub enum Tail<'a> {
    /// Only `|ξ'|` is known; angular factors are the integrand's business.
    Radial,
    Explicit(&'a [f64]),
}

#[derive(Debug, Clone, Copy)]
pub struct Node<'a> {
    pub xi1: f64,
    /// `|ξ'|`
    pub rho: f64,
    pub tail: Tail<'a>,
}

pub trait Integrand: Sync {
    fn channels(&self) -> &[ChannelKind];
    fn domain(&self) -> Domain;
    fn hints(&self) -> ScaleHints;

    /// True when the value depends on the tail only through `|ξ'|` and the
    /// integrand can handle [`Tail::Radial`] nodes. Such integrands must be
    /// even in `ξ₁`.
    fn cylindrical(&self) -> bool;

    /// Sub-interval of `[0, rho_max]` outside which the integrand vanishes
    /// at this `ξ₁` (used to skip empty panels).
    fn rho_range(&self, _xi1: f64, rho_max: f64) -> Option<(f64, f64)> {
        Some((0.0, rho_max))
    }

    /// Write one value per channel. Integral channels receive the density
    /// (including angular moments for radial nodes), supremum channels the
    /// pointwise value (maximised over the sphere for radial nodes).
    fn eval(&self, node: &Node<'_>, out: &mut [f64]);
}

/// Inner nodes for one outer `ξ₁`.
#[derive(Debug, Default, Clone)]
pub struct InnerNodes {
    /// Tail coordinates per node (`stride` values each); empty for radial nodes.
    pub coords: Vec<f64>,
    pub stride: usize,
    pub rho: Vec<f64>,
    pub weight: Vec<f64>,
}

impl InnerNodes {
    fn clear(&mut self) {
        self.coords.clear();
        self.rho.clear();
        self.weight.clear();
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    fn tail(&self, i: usize) -> Tail<'_> {
        if self.stride == 0 {
            Tail::Radial
        } else {
            Tail::Explicit(&self.coords[i * self.stride..(i + 1) * self.stride])
        }
    }
}

/// A node generator. Implementations must be deterministic.
pub trait FrequencyQuadrature: Send + Sync {
    fn name(&self) -> &'static str;

    /// Algebraic order in the panel width for smooth integrands.
    fn order(&self, points: usize) -> f64;

    /// Whether the scheme emits [`Tail::Radial`] nodes.
    fn radial(&self) -> bool;

    /// Outer `(ξ₁, weight)` pairs at refinement `level`.
    fn outer(
        &self,
        domain: &Domain,
        hints: &ScaleHints,
        points: usize,
        level: u32,
    ) -> Vec<(f64, f64)>;

    /// Inner nodes at fixed `ξ₁`; `range` restricts `|ξ'|` where supported.
    #[allow(clippy::too_many_arguments)]
    fn inner(
        &self,
        domain: &Domain,
        hints: &ScaleHints,
        points: usize,
        level: u32,
        xi1: f64,
        range: (f64, f64),
        out: &mut InnerNodes,
    );
}

pub fn scheme_registry() -> &'static Registry<dyn FrequencyQuadrature> {
    static REG: OnceLock<Registry<dyn FrequencyQuadrature>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut reg: Registry<dyn FrequencyQuadrature> = Registry::new("quadrature scheme");
        reg.register("tensor-midpoint", Arc::new(Tensor { gauss: false }));
        reg.register("tensor-gauss-legendre", Arc::new(Tensor { gauss: true }));
        reg.register("cylindrical-graded", Arc::new(CylindricalGraded));
        reg
    })
}

// ---------------------------------------------------------------- tensor

struct Tensor {
    gauss: bool,
}

impl Tensor {
    fn axis(&self, radius: f64, points: usize, level: u32) -> Vec<(f64, f64)> {
        if self.gauss {
            GaussLegendre::new(points).composite(&[-radius, radius], level)
        } else {
            let m = points << level;
            let h = 2.0 * radius / m as f64;
            (0..m)
                .map(|i| (-radius + h * (i as f64 + 0.5), h))
                .collect()
        }
    }
}

impl FrequencyQuadrature for Tensor {
    fn name(&self) -> &'static str {
        if self.gauss {
            "tensor-gauss-legendre"
        } else {
            "tensor-midpoint"
        }
    }

    fn order(&self, points: usize) -> f64 {
        if self.gauss {
            2.0 * points as f64
        } else {
            2.0
        }
    }

    fn radial(&self) -> bool {
        false
    }

    fn outer(
        &self,
        domain: &Domain,
        _hints: &ScaleHints,
        points: usize,
        level: u32,
    ) -> Vec<(f64, f64)> {
        self.axis(domain.radius, points, level)
    }

    fn inner(
        &self,
        domain: &Domain,
        _hints: &ScaleHints,
        points: usize,
        level: u32,
        xi1: f64,
        _range: (f64, f64),
        out: &mut InnerNodes,
    ) {
        out.clear();
        let k = domain.dim - 1;
        out.stride = k;
        let r2 = domain.radius * domain.radius - xi1 * xi1;
        if k == 0 {
            if r2 >= 0.0 {
                out.rho.push(0.0);
                out.weight.push(1.0);
            }
            return;
        }
        let axis = self.axis(domain.radius, points, level);
        let mut idx = vec![0usize; k];
        'outer: loop {
            let mut s = 0.0;
            let mut w = 1.0;
            for &i in &idx {
                s += axis[i].0 * axis[i].0;
                w *= axis[i].1;
            }
            if s <= r2 {
                out.coords.extend(idx.iter().map(|&i| axis[i].0));
                out.rho.push(s.sqrt());
                out.weight.push(w);
            }
            for d in (0..k).rev() {
                idx[d] += 1;
                if idx[d] < axis.len() {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
    }
}

// ---------------------------------------------------------------- graded

struct CylindricalGraded;

const GEOMETRIC_RATIO: f64 = 1.5;
const MAX_OSCILLATION_PANELS: usize = 4000;

fn push_geometric(out: &mut Vec<f64>, start: f64, end: f64) {
    let mut x = start;
    while x < end {
        out.push(x);
        x *= GEOMETRIC_RATIO;
    }
}

/// Sorted, deduplicated breakpoints within `[lo, hi]`, endpoints included.
fn finish_breaks(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|&x| x.is_finite() && x > lo && x < hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    let gap = 1e-12 * hi.abs().max(1e-300);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for x in pts {
        if out.last().is_none_or(|&y| x - y > gap) {
            out.push(x);
        }
    }
    if out.len() >= 2 && *out.last().unwrap() != hi {
        *out.last_mut().unwrap() = hi;
    }
    out
}

impl CylindricalGraded {
    fn outer_breaks(domain: &Domain, hints: &ScaleHints) -> Vec<f64> {
        let big = domain.radius;
        let tau = hints.time.max(1e-12);
        let heat = 1.0 / tau.sqrt();
        let mut pts = Vec::new();
        push_geometric(&mut pts, 1e-6 * (1.0 / tau).min(1.0), big);
        for k in 1..=48 {
            pts.push(0.25 * k as f64 * heat);
        }
        if hints.oscillatory {
            let step = std::f64::consts::FRAC_PI_2 / tau;
            let end = big.min(12.0 * heat);
            let count = ((end / step) as usize).min(MAX_OSCILLATION_PANELS);
            pts.extend((1..=count).map(|k| step * k as f64));
        }
        pts.extend([1.0, 2.0]);
        if let Some(r) = hints.r {
            pts.extend([r, r + 1.0]);
        }
        finish_breaks(pts, 0.0, big)
    }

    fn inner_breaks(hints: &ScaleHints, xi1: f64, lo: f64, hi: f64) -> Vec<f64> {
        let tau = hints.time.max(1e-12);
        let heat = 1.0 / tau.sqrt();
        let mut pts = Vec::new();
        push_geometric(&mut pts, 0.05 * heat.min(hi), hi);
        for k in 1..=16 {
            pts.push(0.25 * k as f64 * heat);
        }
        for k in 5..=40 {
            pts.push(k as f64 * heat);
        }
        let feature = |c: f64| c * xi1 - xi1 * xi1;
        let mut cones = vec![2.0];
        if let Some(r) = hints.r {
            cones.extend([r, r + 1.0]);
        }
        for c in cones {
            let v = feature(c);
            if v > 0.0 {
                pts.push(v.sqrt());
            }
        }
        let s = xi1 * tau.sqrt();
        for m in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            pts.push(m * s);
        }
        finish_breaks(pts, lo, hi)
    }
}

impl FrequencyQuadrature for CylindricalGraded {
    fn name(&self) -> &'static str {
        "cylindrical-graded"
    }

    fn order(&self, points: usize) -> f64 {
        2.0 * points as f64
    }

    fn radial(&self) -> bool {
        true
    }

    fn outer(
        &self,
        domain: &Domain,
        hints: &ScaleHints,
        points: usize,
        level: u32,
    ) -> Vec<(f64, f64)> {
        let breaks = Self::outer_breaks(domain, hints);
        // even in ξ₁: integrate over [0, R] and double
        GaussLegendre::new(points)
            .composite(&breaks, level)
            .into_iter()
            .map(|(x, w)| (x, 2.0 * w))
            .collect()
    }

    fn inner(
        &self,
        domain: &Domain,
        hints: &ScaleHints,
        points: usize,
        level: u32,
        xi1: f64,
        range: (f64, f64),
        out: &mut InnerNodes,
    ) {
        out.clear();
        out.stride = 0;
        if domain.dim == 1 {
            out.rho.push(0.0);
            out.weight.push(1.0);
            return;
        }
        let (lo, hi) = range;
        if !(hi > lo) {
            return;
        }
        let breaks = Self::inner_breaks(hints, xi1, lo, hi);
        let jac = (domain.dim - 2) as i32;
        for (rho, w) in GaussLegendre::new(points).composite(&breaks, level) {
            out.rho.push(rho);
            out.weight.push(w * rho.powi(jac));
        }
    }
}

// ---------------------------------------------------------------- monomials

/// `|ξ^α|` in cylindrical form.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    alpha: Vec<u32>,
    tail_degree: i32,
    /// `∫_{S^{n−2}} |ω^{α'}|^p` for p = 1, 2.
    moment: [f64; 2],
    sup: f64,
}

impl Monomial {
    pub fn new(alpha: &[u32]) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid(
                "multi-index",
                "must have at least one entry",
            ));
        }
        let tail = &alpha[1..];
        Ok(Self {
            alpha: alpha.to_vec(),
            tail_degree: tail.iter().sum::<u32>() as i32,
            moment: [sphere_moment(tail, 1), sphere_moment(tail, 2)],
            sup: if tail.is_empty() {
                1.0
            } else {
                sphere_max(tail)
            },
        })
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }

    /// `|ξ^α|^p` (p ∈ {1, 2}) integrated over the tail sphere for radial nodes.
    #[inline]
    pub fn integral_weight(&self, node: &Node<'_>, p: u32) -> f64 {
        debug_assert!(p == 1 || p == 2);
        let pi = p as i32;
        let head = node.xi1.abs().powi(pi * self.alpha[0] as i32);
        match node.tail {
            Tail::Radial => {
                head * node.rho.powi(pi * self.tail_degree) * self.moment[(p - 1) as usize]
            }
            Tail::Explicit(c) => head * self.explicit_tail(c).powi(pi),
        }
    }

    /// `|ξ^α|` at an explicit node, or its maximum over the tail sphere.
    #[inline]
    pub fn sup_weight(&self, node: &Node<'_>) -> f64 {
        let head = node.xi1.abs().powi(self.alpha[0] as i32);
        match node.tail {
            Tail::Radial => head * node.rho.powi(self.tail_degree) * self.sup,
            Tail::Explicit(c) => head * self.explicit_tail(c),
        }
    }

    fn explicit_tail(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(&self.alpha[1..])
            .map(|(x, &a)| x.abs().powi(a as i32))
            .product()
    }
}

// ---------------------------------------------------------------- driver

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelResult {
    pub kind: ChannelKindTag,
    /// Value at the finest level (refined maximum for supremum channels).
    pub value: f64,
    /// Absolute error estimate.
    pub error_estimate: f64,
    /// Raw value per level (before refinement for supremum channels).
    pub levels: Vec<f64>,
    /// `(ξ₁, |ξ'|)` of the maximiser for supremum channels.
    pub argmax: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKindTag {
    Integral,
    Supremum,
}

impl ChannelResult {
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

    /// Observed convergence order from the last three levels, if available.
    pub fn observed_order(&self) -> Option<f64> {
        let n = self.levels.len();
        if n < 3 {
            return None;
        }
        let e1 = (self.levels[n - 2] - self.levels[n - 3]).abs();
        let e2 = (self.levels[n - 1] - self.levels[n - 2]).abs();
        if e1 == 0.0 || e2 == 0.0 {
            return None;
        }
        Some((e1 / e2).log2())
    }

    /// The value, or a non-convergence error when the relative estimate
    /// exceeds `tolerance`.
    pub fn accept(&self, tolerance: f64) -> Result<f64> {
        let rel = self.relative_error();
        if rel <= tolerance {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                estimate: rel,
                tolerance,
            })
        }
    }
}

#[derive(Clone)]
struct SupHit {
    value: f64,
    xi1: f64,
    rho: f64,
    dir: Vec<f64>,
}

struct Partial {
    sums: Vec<f64>,
    sups: Vec<Option<SupHit>>,
}

fn better(candidate: f64, current: &Option<SupHit>) -> bool {
    match current {
        None => candidate.is_finite(),
        Some(h) => candidate > h.value,
    }
}

fn direction(tail: Tail<'_>, rho: f64, k: usize) -> Vec<f64> {
    match tail {
        Tail::Radial => Vec::new(),
        Tail::Explicit(c) => {
            if rho > 0.0 {
                c.iter().map(|x| x / rho).collect()
            } else {
                let mut d = vec![0.0; k];
                if k > 0 {
                    d[0] = 1.0;
                }
                d
            }
        }
    }
}

fn run_level(
    scheme: &dyn FrequencyQuadrature,
    integrand: &dyn Integrand,
    points: usize,
    level: u32,
) -> Partial {
    let domain = integrand.domain();
    let hints = integrand.hints();
    let kinds = integrand.channels();
    let nc = kinds.len();
    let k = domain.dim - 1;
    let outer = scheme.outer(&domain, &hints, points, level);

    let partials: Vec<Partial> = outer
        .par_iter()
        .map_init(
            || (InnerNodes::default(), vec![0.0; nc], Vec::<f64>::new()),
            |(nodes, vals, buf), &(xi1, wx)| {
                let rho_max = (domain.radius * domain.radius - xi1 * xi1).max(0.0).sqrt();
                let range = if scheme.radial() {
                    integrand.rho_range(xi1.abs(), rho_max)
                } else {
                    Some((0.0, rho_max))
                };
                let mut sups: Vec<Option<SupHit>> = vec![None; nc];
                let Some(range) = range else {
                    return Partial {
                        sums: vec![0.0; nc],
                        sups,
                    };
                };
                scheme.inner(&domain, &hints, points, level, xi1, range, nodes);
                let m = nodes.len();
                buf.clear();
                buf.resize(nc * m, 0.0);
                for i in 0..m {
                    let node = Node {
                        xi1,
                        rho: nodes.rho[i],
                        tail: nodes.tail(i),
                    };
                    integrand.eval(&node, vals);
                    for (c, kind) in kinds.iter().enumerate() {
                        match kind {
                            ChannelKind::Integral => buf[c * m + i] = nodes.weight[i] * vals[c],
                            ChannelKind::Supremum => {
                                if better(vals[c], &sups[c]) {
                                    sups[c] = Some(SupHit {
                                        value: vals[c],
                                        xi1,
                                        rho: node.rho,
                                        dir: direction(node.tail, node.rho, k),
                                    });
                                }
                            }
                        }
                    }
                }
                let sums = (0..nc)
                    .map(|c| match kinds[c] {
                        ChannelKind::Integral if m > 0 => {
                            wx * pairwise_sum(&buf[c * m..(c + 1) * m])
                        }
                        _ => 0.0,
                    })
                    .collect();
                Partial { sums, sups }
            },
        )
        .collect();

    let mut column = Vec::with_capacity(partials.len());
    let mut sums = vec![0.0; nc];
    let mut sups: Vec<Option<SupHit>> = vec![None; nc];
    for (c, kind) in kinds.iter().enumerate() {
        match kind {
            ChannelKind::Integral => {
                column.clear();
                column.extend(partials.iter().map(|p| p.sums[c]));
                sums[c] = pairwise_sum(&column);
            }
            ChannelKind::Supremum => {
                for p in &partials {
                    if let Some(h) = &p.sups[c] {
                        if better(h.value, &sups[c]) {
                            sups[c] = Some(h.clone());
                        }
                    }
                }
            }
        }
    }
    Partial { sums, sups }
}

/// Evaluate one supremum channel at a refinement point: `[ξ₁, ρ]` for
/// radial schemes, `[ξ₁, ξ₂, …, ξₙ]` otherwise.
fn probe(
    integrand: &dyn Integrand,
    channel: usize,
    radial: bool,
    p: &[f64],
    vals: &mut [f64],
) -> f64 {
    let node = if radial {
        Node {
            xi1: p[0],
            rho: p[1],
            tail: Tail::Radial,
        }
    } else {
        Node {
            xi1: p[0],
            rho: p[1..].iter().map(|x| x * x).sum::<f64>().sqrt(),
            tail: Tail::Explicit(&p[1..]),
        }
    };
    integrand.eval(&node, vals);
    vals[channel]
}

/// Local refinement of a supremum: a stencil of 5 points per coordinate
/// around the current maximiser, halving the box each pass until it is
/// below round-off scale (far past the [`SUP_STABILITY`] target). Returns
/// the refined value and point.
fn refine_sup(
    integrand: &dyn Integrand,
    channel: usize,
    start: &SupHit,
    radial: bool,
) -> (f64, Vec<f64>) {
    let domain = integrand.domain();
    let hints = integrand.hints();
    let nc = integrand.channels().len();
    let mut vals = vec![0.0; nc];
    let tau = hints.time.max(1.0);
    let mut p: Vec<f64> = if radial {
        vec![start.xi1, start.rho]
    } else {
        let mut v = vec![start.xi1];
        v.extend(start.dir.iter().map(|d| d * start.rho));
        v
    };
    let m = p.len();
    let mut h: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, c)| 0.25 * c.abs() + if i == 0 { 0.5 / tau } else { 0.5 / tau.sqrt() })
        .collect();
    let mut best = start.value;
    let stencil = 5usize.pow(m as u32);
    let mut q = vec![0.0; m];
    for _ in 0..REFINE_PASSES {
        let centre = p.clone();
        for code in 0..stencil {
            let mut rest = code;
            for i in 0..m {
                let offset = (rest % 5) as f64 - 2.0;
                rest /= 5;
                q[i] = centre[i] + h[i] * offset / 2.0;
            }
            if radial {
                q[0] = q[0].max(0.0);
                q[1] = q[1].max(0.0);
            }
            if q.iter().map(|x| x * x).sum::<f64>() > domain.radius * domain.radius {
                continue;
            }
            let v = probe(integrand, channel, radial, &q, &mut vals);
            if v > best {
                best = v;
                p.copy_from_slice(&q);
            }
        }
        h.iter_mut().for_each(|x| *x *= 0.5);
    }
    (best, p)
}

/// Maximiser of one supremum channel at one level: the best node or the
/// origin, refined.
fn refined_sup(
    integrand: &dyn Integrand,
    channel: usize,
    hit: Option<&SupHit>,
    radial: bool,
) -> (f64, Vec<f64>) {
    let dim = integrand.domain().dim;
    let nc = integrand.channels().len();
    let mut vals = vec![0.0; nc];
    // the origin is never a graded node but often the maximiser
    let origin = vec![0.0; if radial { 2 } else { dim }];
    let at_origin = probe(integrand, channel, radial, &origin, &mut vals);
    let start = match hit {
        Some(h) if h.value >= at_origin => h.clone(),
        _ => SupHit {
            value: at_origin,
            xi1: 0.0,
            rho: 0.0,
            dir: vec![0.0; if radial { 0 } else { dim - 1 }],
        },
    };
    refine_sup(integrand, channel, &start, radial)
}

/// Integrate all channels of `integrand` with the named scheme.
pub fn integrate(spec: &QuadratureSpec, integrand: &dyn Integrand) -> Result<Vec<ChannelResult>> {
    spec.validate()?;
    let scheme = scheme_registry().get(&spec.scheme)?;
    let domain = integrand.domain();
    if domain.dim == 0 || !(domain.radius > 0.0) {
        return Err(Error::invalid(
            "quadrature domain",
            "need dim ≥ 1 and radius > 0",
        ));
    }
    if scheme.radial() && !integrand.cylindrical() {
        return Err(Error::Unsupported(format!(
            "scheme `{}` needs an integrand that depends on the tail only through |ξ'|",
            scheme.name()
        )));
    }
    let kinds = integrand.channels().to_vec();
    let nc = kinds.len();
    let mut per_level: Vec<Partial> = Vec::with_capacity(spec.refinement_levels as usize);
    for level in 0..spec.refinement_levels {
        per_level.push(run_level(scheme.as_ref(), integrand, spec.points, level));
    }
    let finest = per_level.last().expect("at least two levels");

    let mut results = Vec::with_capacity(nc);
    for (c, kind) in kinds.iter().enumerate() {
        match kind {
            ChannelKind::Integral => {
                let levels: Vec<f64> = per_level.iter().map(|p| p.sums[c]).collect();
                let n = levels.len();
                results.push(ChannelResult {
                    kind: ChannelKindTag::Integral,
                    value: levels[n - 1],
                    error_estimate: (levels[n - 1] - levels[n - 2]).abs(),
                    levels,
                    argmax: None,
                });
            }
            ChannelKind::Supremum => {
                let levels: Vec<f64> = per_level
                    .iter()
                    .map(|p| p.sups[c].as_ref().map_or(0.0, |h| h.value))
                    .collect();
                let n = per_level.len();
                let (value, p) =
                    refined_sup(integrand, c, finest.sups[c].as_ref(), scheme.radial());
                let (coarse, _) = refined_sup(
                    integrand,
                    c,
                    per_level[n - 2].sups[c].as_ref(),
                    scheme.radial(),
                );
                let (x, r) = (p[0], p[1..].iter().map(|v| v * v).sum::<f64>().sqrt());
                results.push(ChannelResult {
                    kind: ChannelKindTag::Supremum,
                    value,
                    error_estimate: (value - coarse).abs(),
                    levels,
                    argmax: Some((x, r)),
                });
            }
        }
    }
    Ok(results)
}
