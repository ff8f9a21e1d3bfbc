//! Special functions, quadrature, finite differences and unit conversions.

pub mod constants;
pub mod gradient;
pub mod laguerre;
pub mod legendre;
pub mod quadrature;
pub mod summation;

pub use constants::PhysicalConstants;
pub use gradient::central_difference_gradient;
pub use laguerre::laguerre;
pub use legendre::{assoc_legendre, spherical_harmonic, HarmonicsAtPoint, LegendreTable};
pub use quadrature::{build_grid, gauss_legendre, GridSpec, QuadratureGrid};
pub use summation::{CompensatedComplex, CompensatedSum};
