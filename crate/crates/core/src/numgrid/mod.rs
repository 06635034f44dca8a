//! Radial grid, cubic-spline interpolation, quadrature, and the tabulated
//! potential-curve type shared by every other module.

mod grid;
mod potential;
mod spline;

pub use grid::RadialGrid;
pub use potential::{EnergyUnit, LengthUnit, PotentialCurve};
pub use spline::NaturalSpline;
