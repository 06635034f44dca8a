//! End-to-end extraction: band origins → Morse energy fit → Rₑ from the
//! intensity profile → regeneration → inversion → tail continuation.

use crate::analysis::Gauge;
use crate::error::{Error, Result};
use crate::inversion::{
    completeness_report, extract_potential, merge_with_measured_using, BandCompleteness, Calibration, ExtractedPotential,
    ExtrapolationKind, MorseModel, SignedOverlapSet, DEFAULT_DENSITY_CUTOFF, DEFAULT_N_LOWER,
};
use crate::morse::{band_origins_from_spectrum, fit_morse_energies, fit_morse_re, BandOrigin, EnergyFit, MorseParams, ReFit, ReSearch};
use crate::numgrid::PotentialCurve;
use crate::spectrum::{LowerStates, SpectrumDataset};
use crate::units::ReducedMass;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mass: ReducedMass,
    pub n_lower: usize,
    pub density_cutoff: f64,
    pub extrapolation: ExtrapolationKind,
    /// `None` scans [R_g − 1, R_g + 2.5] bohr around the ground minimum R_g.
    pub re_search: Option<ReSearch>,
    pub gauge: Gauge,
    pub calibration: Calibration,
    /// Alternations between the energy fit and the Rₑ fit.
    pub fit_rounds: usize,
}

impl PipelineConfig {
    pub fn new(mass: ReducedMass) -> Self {
        Self {
            mass,
            n_lower: DEFAULT_N_LOWER,
            density_cutoff: DEFAULT_DENSITY_CUTOFF,
            extrapolation: ExtrapolationKind::default(),
            re_search: None,
            gauge: Gauge::default(),
            calibration: Calibration::default(),
            fit_rounds: 3,
        }
    }

    pub fn re_search_for(&self, ground: &PotentialCurve) -> ReSearch {
        self.re_search.unwrap_or_else(|| {
            let (k, _) = ground.minimum();
            let r_g = ground.grid().r(k);
            ReSearch { lo: r_g - 1.0, hi: r_g + 2.5, steps: 71 }
        })
    }
}

/// Everything that does not depend on the measured intensities' noise:
/// lower states, the fitted Morse model and its overlaps.
#[derive(Debug, Clone)]
pub struct PipelineSetup {
    pub config: PipelineConfig,
    pub ground: PotentialCurve,
    pub lower: LowerStates,
    pub measured: SpectrumDataset,
    pub origins: Vec<BandOrigin>,
    pub energy_fit: EnergyFit,
    pub re_fit: ReFit,
    pub morse: MorseParams,
    pub model: MorseModel,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub overlaps: SignedOverlapSet,
    pub completeness: Vec<BandCompleteness>,
    pub extracted: ExtractedPotential,
}

impl PipelineSetup {
    pub fn prepare(ground: &PotentialCurve, measured: &SpectrumDataset, config: PipelineConfig) -> Result<Self> {
        if measured.bands.is_empty() {
            return Err(Error::InsufficientData("spectrum declares no bands".into()));
        }
        let lower = LowerStates::solve(ground, config.mass, &measured.bands, config.n_lower)?;
        let origins = band_origins_from_spectrum(measured, &lower)?;
        let search = config.re_search_for(ground);
        let grid = *ground.grid();

        let mut r_e = 0.5 * (search.lo + search.hi);
        let mut energy_fit = fit_morse_energies(&origins, config.mass, grid, r_e)?;
        let mut re_fit = fit_morse_re(&energy_fit.params, measured, &lower, config.mass, search)?;
        for _ in 1..config.fit_rounds.max(1) {
            let moved = (re_fit.r_e - r_e).abs();
            r_e = re_fit.r_e;
            energy_fit = fit_morse_energies(&origins, config.mass, grid, r_e)?;
            if moved < crate::morse::RE_TOLERANCE {
                break;
            }
            re_fit = fit_morse_re(&energy_fit.params, measured, &lower, config.mass, search)?;
        }
        let morse = energy_fit.params.with_r_e(re_fit.r_e);
        let model = MorseModel::build(&morse, &lower, &measured.bands, config.mass, config.n_lower)?;
        Ok(Self {
            config,
            ground: ground.clone(),
            lower,
            measured: measured.clone(),
            origins,
            energy_fit,
            re_fit,
            morse,
            model,
        })
    }

    /// Merge `measured` with the fixed model, invert, and continue the tails.
    pub fn extract(&self, measured: &SpectrumDataset) -> Result<Extraction> {
        let overlaps = merge_with_measured_using(&self.model, measured, self.config.calibration)?;
        self.extract_from(overlaps)
    }

    /// Inversion from measured lines only (model supplies signs and scale).
    pub fn extract_measured_only(&self, measured: &SpectrumDataset) -> Result<Extraction> {
        let overlaps = merge_with_measured_using(&self.model, measured, self.config.calibration)?.measured_only();
        self.extract_from(overlaps)
    }

    pub fn extract_from(&self, overlaps: SignedOverlapSet) -> Result<Extraction> {
        let method = self.config.extrapolation.with_model(&self.morse);
        let extracted = extract_potential(&overlaps, &self.lower, &self.ground, self.config.density_cutoff, method)?;
        let completeness = completeness_report(&overlaps);
        Ok(Extraction { overlaps, completeness, extracted })
    }
}
