//! Reconstruction of an excited-state diatomic potential from Q-branch
//! fluorescence line positions and intensities.
//!
//! Weak lines that fall below the detection threshold are regenerated from a
//! Morse model fitted to the lowest band origins and the measured intensity
//! profile; the merged signed overlaps then feed the pointwise inversion
//!
//! ```text
//! V_ex(R) = Σ_s (Σ_i d_is ω_is χ_i(R)) (Σ_j d_js χ_j(R)) / Σ_s (Σ_i d_is χ_i(R))² + V_g(R)
//! ```
//!
//! All internal quantities are in atomic units; I/O uses cm⁻¹ and bohr.

// `!(a < b)` is used on purpose so NaN fails validation; banded kernels
// index several arrays with one loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod inversion;
pub mod morse;
pub mod numgrid;
pub mod pipeline;
pub mod schrodinger;
pub mod spectrum;
pub mod twin;
pub mod units;

pub use analysis::{Gauge, NoiseStudyConfig, NoiseStudyReport, RegionSpec, RmsScore};
pub use error::{Error, Result};
pub use inversion::{Calibration, ExtractedPotential, ExtrapolationKind, SignedOverlapSet};
pub use morse::MorseParams;
pub use numgrid::{PotentialCurve, RadialGrid};
pub use pipeline::{PipelineConfig, PipelineSetup};
pub use schrodinger::{EffectivePotentialSpec, RovibState};
pub use spectrum::{Band, EmissionLine, Provenance, SpectrumDataset, Threshold, ThresholdMode};
pub use units::ReducedMass;
