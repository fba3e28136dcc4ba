use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `Δξ·√t` for continuum-limit measurements.
pub const CONTINUUM_GUARD: f64 = 0.3;

/// Required ratio between `ξ_max` and the data's band limit.
pub const BAND_MARGIN: f64 = 1.5;

/// Periodic grid on `[0, L)ⁿ` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub extent: f64,
    pub points: usize,
}

pub fn build_grid(n: usize, extent: f64, points: usize) -> Result<GridSpec> {
    let g = GridSpec { n, extent, points };
    g.validate()?;
    Ok(g)
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::Guard(format!(
                "dimension n = {} outside 1..=3",
                self.n
            )));
        }
        if !(self.extent > 0.0) || !self.extent.is_finite() {
            return Err(Error::Guard(format!(
                "extent L = {} must be positive",
                self.extent
            )));
        }
        if self.points < 2 || !self.points.is_power_of_two() {
            return Err(Error::Guard(format!(
                "N = {} is not a power of two",
                self.points
            )));
        }
        Ok(())
    }

    /// `Δξ = 2π/L`
    pub fn d_xi(&self) -> f64 {
        2.0 * PI / self.extent
    }

    /// `ξ_max = πN/L`
    pub fn xi_max(&self) -> f64 {
        PI * self.points as f64 / self.extent
    }

    pub fn cell_volume(&self) -> f64 {
        (self.extent / self.points as f64).powi(self.n as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed wavenumber index of FFT slot `k`: `0, 1, …, N/2−1, −N/2, …, −1`.
    #[inline]
    pub fn signed_index(&self, k: usize) -> i64 {
        let m = self.points as i64;
        let k = k as i64;
        if k < m / 2 {
            k
        } else {
            k - m
        }
    }

    /// Dual nodes along one axis in FFT order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| self.d_xi() * self.signed_index(k) as f64)
            .collect()
    }

    /// Frequency vector of flat (row-major) index `idx`.
    pub fn wavevector(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for axis in (0..self.n).rev() {
            let k = rest % self.points;
            rest /= self.points;
            out[axis] = self.d_xi() * self.signed_index(k) as f64;
        }
    }

    /// Flat index of the node `−ξ` for the node at `idx`.
    pub fn mirror(&self, idx: usize) -> usize {
        let mut rest = idx;
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.n {
            let k = rest % self.points;
            rest /= self.points;
            out += ((self.points - k) % self.points) * scale;
            scale *= self.points;
        }
        out
    }

    /// `Δξ·√t ≤ 0.3`
    pub fn check_continuum(&self, t: f64) -> Result<()> {
        let v = self.d_xi() * t.max(0.0).sqrt();
        if v > CONTINUUM_GUARD {
            return Err(Error::Guard(format!(
                "continuum guard Δξ·√t = {v:.3} exceeds {CONTINUUM_GUARD} at t = {t}"
            )));
        }
        Ok(())
    }

    /// `ξ_max ≥ 1.5 × band limit`
    pub fn check_band_limit(&self, band: f64) -> Result<()> {
        if self.xi_max() < BAND_MARGIN * band {
            return Err(Error::Guard(format!(
                "band limit guard: ξ_max = {:.4} < {BAND_MARGIN} × {band:.4}",
                self.xi_max()
            )));
        }
        Ok(())
    }
}
