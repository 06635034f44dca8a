//! Synthetic twin: a fully known ground/excited pair at alkali-dimer scale
//! (depth ~5900 cm⁻¹, Rₑ ~6.5 bohr, μ(⁷Li⁸⁵Rb) ≈ 6.48 amu) used to run the
//! whole extraction against a verifiable truth.

use crate::error::Result;
use crate::morse::MorseParams;
use crate::numgrid::{PotentialCurve, RadialGrid};
use crate::spectrum::{apply_threshold, synthesize_spectrum, Band, SpectrumDataset, ThresholdMode};
use crate::units::{to_hartree, ReducedMass};

pub const TWIN_BANDS: [Band; 3] = [Band { v: 0, j: 4 }, Band { v: 1, j: 5 }, Band { v: 2, j: 8 }];
pub const DETECTION_THRESHOLD: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionShape {
    /// Local bump exp(-x²).
    Gaussian,
    /// Step tanh(x) across the well.
    Step,
    /// Well widening 1 - exp(-x²), zero at the center.
    Widening,
}

/// Smooth non-Morse distortion added to the excited Morse base (cm⁻¹),
/// with x = (r - center) / width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub shape: DistortionShape,
    pub amplitude_invcm: f64,
    pub center: f64,
    pub width: f64,
}

impl Distortion {
    pub fn eval(&self, r: f64) -> f64 {
        let x = (r - self.center) / self.width;
        let s = match self.shape {
            DistortionShape::Gaussian => (-x * x).exp(),
            DistortionShape::Step => x.tanh(),
            DistortionShape::Widening => 1.0 - (-x * x).exp(),
        };
        to_hartree(self.amplitude_invcm) * s
    }
}

#[derive(Debug, Clone)]
pub struct TwinSystem {
    pub grid: RadialGrid,
    pub mass: ReducedMass,
    pub ground_params: MorseParams,
    pub excited_base: MorseParams,
    pub distortion: Distortion,
    pub ground: PotentialCurve,
    pub excited: PotentialCurve,
    pub bands: Vec<Band>,
}

impl TwinSystem {
    pub fn lirb_like() -> Result<Self> {
        let grid = RadialGrid::lirb_default();
        let ground_params = MorseParams::from_invcm(5928.0, 5928.0, 0.4155, 6.55);
        let excited_base = MorseParams::from_invcm(19000.0, 4000.0, 0.44, 7.05);
        let distortion = Distortion { shape: DistortionShape::Step, amplitude_invcm: 30.0, center: 7.05, width: 1.0 };
        Self::build(grid, ReducedMass::lirb(), ground_params, excited_base, distortion)
    }

    pub fn build(
        grid: RadialGrid,
        mass: ReducedMass,
        ground_params: MorseParams,
        excited_base: MorseParams,
        distortion: Distortion,
    ) -> Result<Self> {
        let ground = ground_params.curve(grid)?;
        let excited = PotentialCurve::from_fn(grid, |r| excited_base.eval(r) + distortion.eval(r))?;
        Ok(Self { grid, mass, ground_params, excited_base, distortion, ground, excited, bands: TWIN_BANDS.to_vec() })
    }

    /// The same twin with the excited curve replaced by its pure Morse base.
    pub fn morse_truth(&self) -> Result<Self> {
        let flat = Distortion { amplitude_invcm: 0.0, ..self.distortion };
        Self::build(self.grid, self.mass, self.ground_params, self.excited_base, flat)
    }

    /// Full forward spectrum with signed amplitudes.
    pub fn full_spectrum(&self, n_lower: usize) -> Result<SpectrumDataset> {
        synthesize_spectrum(&self.ground, &self.excited, self.mass, &self.bands, n_lower)
    }

    /// Forward spectrum after the global detection threshold.
    pub fn measured_spectrum(&self, n_lower: usize, fraction: f64) -> Result<SpectrumDataset> {
        apply_threshold(&self.full_spectrum(n_lower)?, fraction, ThresholdMode::Global)
    }
}
