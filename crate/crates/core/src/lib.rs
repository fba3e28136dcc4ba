//! Numerical laboratory for the anisotropically damped wave equation
//! `u_tt − u_{x₁x₁} = Δu_t` on `Rⁿ`.
//!
//! * [`symbol`]: the Fourier-side Green function `Ĝ(ξ,t)`, its time
//!   derivatives and the frequency regions `A`, `B`, `D_r`, `E`.
//! * [`cutoff`]: the smooth cutoff `χ` isolating `D_r`.
//! * [`quadrature`]: frequency-space quadrature schemes (registered by name).
//! * [`bounds`]: pointwise bounds and weighted symbol norms.
//! * [`solver`]: initial data, Duhamel evolution and solution norms.
//! * [`decay`]: log-log fits and the decay-rate experiments.

// `!(x > 0.0)` guards reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cutoff;
pub mod decay;
pub mod error;
pub mod numerics;
pub mod quadrature;
pub mod registry;
pub mod solver;
pub mod symbol;

pub use error::{Error, Result};
