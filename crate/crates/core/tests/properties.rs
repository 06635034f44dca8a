mod common;

use common::exact_twin_overlaps;
use fluorinv_core::analysis::perturb_intensities;
use fluorinv_core::inversion::invert_potential;
use fluorinv_core::spectrum::{apply_threshold, LowerStates};
use fluorinv_core::twin::TwinSystem;
use fluorinv_core::units::{to_hartree, to_invcm};
use fluorinv_core::{Band, EmissionLine, Provenance, SignedOverlapSet, SpectrumDataset, ThresholdMode};
use proptest::prelude::*;
use std::sync::OnceLock;

fn spectrum_from(intensities: &[Vec<f64>]) -> SpectrumDataset {
    let bands: Vec<Band> = (0..intensities.len()).map(|v| Band { v, j: v as u32 + 1 }).collect();
    let mut lines = Vec::new();
    for (b, ints) in bands.iter().zip(intensities) {
        for (i, &x) in ints.iter().enumerate() {
            lines.push(EmissionLine {
                v_upper: b.v,
                j_upper: b.j,
                v_lower: i,
                j_lower: b.j,
                omega_invcm: 15000.0 - 150.0 * i as f64,
                intensity: x,
                amplitude: Some(x.sqrt()),
                provenance: Provenance::Measured,
            });
        }
    }
    SpectrumDataset::new(lines, bands, None).unwrap()
}

fn intensities() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, 1..20), 1..4)
}

proptest! {
    #[test]
    fn threshold_is_idempotent(ints in intensities(), fraction in 0.0f64..0.99, per_band in any::<bool>()) {
        let mode = if per_band { ThresholdMode::PerBand } else { ThresholdMode::Global };
        let once = apply_threshold(&spectrum_from(&ints), fraction, mode).unwrap();
        let twice = apply_threshold(&once, fraction, mode).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.lines.iter().all(|l| l.amplitude.is_none()));
        prop_assert!(once.lines.iter().all(|l| l.intensity <= 1.0));
    }

    #[test]
    fn global_threshold_keeps_exactly_the_lines_above_cut(ints in intensities(), fraction in 0.0f64..0.99) {
        let s = spectrum_from(&ints);
        let max = s.lines.iter().map(|l| l.intensity).fold(0.0, f64::max);
        let kept = apply_threshold(&s, fraction, ThresholdMode::Global).unwrap();
        let expected = s.lines.iter().filter(|l| l.intensity >= fraction * max).count();
        prop_assert_eq!(kept.lines.len(), expected);
    }

    #[test]
    fn noise_is_a_pure_function_of_seed(ints in intensities(), seed in any::<u64>(), level in 0.0f64..0.5) {
        let s = spectrum_from(&ints);
        prop_assert_eq!(perturb_intensities(&s, level, seed).unwrap(), perturb_intensities(&s, level, seed).unwrap());
    }
}

struct Exact {
    twin: TwinSystem,
    set: SignedOverlapSet,
    lower: LowerStates,
}

fn exact() -> &'static Exact {
    static E: OnceLock<Exact> = OnceLock::new();
    E.get_or_init(|| {
        let twin = TwinSystem::lirb_like().unwrap();
        let (set, lower) = exact_twin_overlaps(&twin, 31);
        Exact { twin, set, lower }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn inversion_is_dipole_scale_and_gauge_invariant(factor in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0], shift in -5000.0f64..5000.0) {
        let e = exact();
        let base = invert_potential(&e.set, &e.lower, &e.twin.ground, 1e-3).unwrap();
        let scaled = invert_potential(&e.set.scaled(factor), &e.lower, &e.twin.ground, 1e-3).unwrap();
        let shifted = invert_potential(&e.set.omega_shifted(to_hartree(shift)), &e.lower, &e.twin.ground, 1e-3).unwrap();
        prop_assert_eq!(base.valid_range, scaled.valid_range);
        let vr = base.valid_range;
        for k in vr.start..=vr.end {
            let v = base.curve.values()[k];
            prop_assert!((scaled.curve.values()[k] - v).abs() <= 1e-10 * v.abs());
            prop_assert!((to_invcm(shifted.curve.values()[k] - v) - shift).abs() < 1e-8);
        }
    }
}
