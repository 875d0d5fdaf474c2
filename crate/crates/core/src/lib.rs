//! Spectral laboratory for mixing and enhanced dissipation in linear
//! advection-diffusion `d_t f + B f + nu A f = 0`, with `A` positive
//! self-adjoint and `B` skew.
//!
//! * [`spectral`]: bases, Sobolev norms, projections, fractional multipliers.
//! * [`models`]: shear, Kolmogorov, spiral and kinetic model problems.
//! * [`evolution`]: Strang-split time stepping and worst-case measurements.
//! * [`diagnostics`]: rate fits, dissipation times, explicit decay bounds.
//! * [`sweep`]: resumable parallel viscosity sweeps.
//! * [`report`]: aggregation and SVG plots.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod models;
pub mod report;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use spectral::{Field, Spectrum};
