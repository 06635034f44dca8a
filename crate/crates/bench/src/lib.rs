//! Shared fixtures for the criterion benches in `benches/`.

use fluorinv_core::inversion::DEFAULT_N_LOWER;
use fluorinv_core::twin::{TwinSystem, DETECTION_THRESHOLD};
use fluorinv_core::{PipelineConfig, PipelineSetup, SpectrumDataset};

pub fn twin() -> TwinSystem {
    TwinSystem::lirb_like().expect("built-in twin")
}

pub fn measured(twin: &TwinSystem) -> SpectrumDataset {
    twin.measured_spectrum(DEFAULT_N_LOWER, DETECTION_THRESHOLD).expect("twin spectrum")
}

pub fn setup(twin: &TwinSystem) -> PipelineSetup {
    PipelineSetup::prepare(&twin.ground, &measured(twin), PipelineConfig::new(twin.mass)).expect("twin setup")
}
