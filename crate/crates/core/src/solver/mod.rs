//! Spectral representation of initial data, evolution by the Duhamel
//! multipliers and norms of the solution.
//!
//! On the Fourier side the solution is
//! `û(ξ,t) = (∂_t + |ξ|²)Ĝ(ξ,t) û₀(ξ) + Ĝ(ξ,t) û₁(ξ)`; every time
//! derivative is obtained from the same two multipliers.

pub mod continuum;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod preset;

pub use continuum::{highpass_l1, ContinuumData, Filter};
pub use field::{FieldMeta, SpectralField};
pub use grid::{build_grid, GridSpec};
pub use norms::{
    backend_registry, observable_norm, Backend, GuardStatus, NormBackend, NormTableRow, NormValue,
};
pub use preset::{DataPreset, PresetKind, Which};

use crate::error::Result;

/// Sample a preset on a grid (see [`SpectralField::synthesize`]).
pub fn synthesize_data(preset: DataPreset, grid: GridSpec, r: f64) -> Result<SpectralField> {
    SpectralField::synthesize(preset, grid, r)
}

/// Evolve by `t` (see [`SpectralField::evolve`]).
pub fn evolve(field: &SpectralField, t: f64) -> Result<SpectralField> {
    field.evolve(t)
}
