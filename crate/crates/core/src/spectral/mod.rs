//! Bases, spectral Sobolev norms, projections and fractional multipliers.

pub mod eigen;
pub mod field;
pub mod fractional;
pub mod inner;
pub mod radial;
pub mod spectrum;
pub mod torus;

pub use eigen::{dual_norm_hminus, EigenBasis};
pub use field::{Basis, Field};
pub use fractional::fractional_symbol;
pub use inner::InnerProduct;
pub use radial::RadialLaplacian;
pub use spectrum::{project_low, sobolev_norm, Spectrum};
pub use torus::TorusGrid;
