//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use fluorinv_core::inversion::{BandOverlaps, OverlapEntry, SignedOverlapSet};
use fluorinv_core::spectrum::{synthesize_spectrum, LowerStates};
use fluorinv_core::twin::TwinSystem;
use fluorinv_core::units::to_hartree;
use fluorinv_core::{PotentialCurve, Provenance, RadialGrid};

/// Generalized Laguerre polynomial L_n^(a)(x) by the three-term recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// ⟨χ_m | φ_n⟩ for equal-frequency harmonic wells, φ displaced by `d` to
/// larger R, both in the positive-inner-lobe sign convention.
///
/// Textbook Hermite functions have inner-lobe sign (−1)^n, so the
/// displacement-operator matrix element picks up (−1)^(m+n).
pub fn displaced_ho_overlap(m: usize, n: usize, mass: f64, omega: f64, d: f64) -> f64 {
    let lambda = d * (mass * omega / 2.0).sqrt();
    let l2 = lambda * lambda;
    let textbook = if m >= n {
        (factorial(n) / factorial(m)).sqrt() * lambda.powi((m - n) as i32) * (-l2 / 2.0).exp()
            * laguerre(n, (m - n) as f64, l2)
    } else {
        (factorial(m) / factorial(n)).sqrt() * (-lambda).powi((n - m) as i32) * (-l2 / 2.0).exp()
            * laguerre(m, (n - m) as f64, l2)
    };
    if (m + n).is_multiple_of(2) { textbook } else { -textbook }
}

pub fn harmonic(grid: RadialGrid, mass: f64, omega: f64, center: f64) -> PotentialCurve {
    PotentialCurve::from_fn(grid, |r| 0.5 * mass * omega * omega * (r - center).powi(2)).unwrap()
}

/// Exact, un-thresholded overlaps of the twin's true excited curve with
/// `n_lower` ground states per band, all marked measured.
pub fn exact_twin_overlaps(twin: &TwinSystem, n_lower: usize) -> (SignedOverlapSet, LowerStates) {
    let full = synthesize_spectrum(&twin.ground, &twin.excited, twin.mass, &twin.bands, n_lower).unwrap();
    let lower = LowerStates::solve(&twin.ground, twin.mass, &twin.bands, n_lower).unwrap();
    let bands = twin
        .bands
        .iter()
        .map(|b| BandOverlaps {
            band: *b,
            calibration: None,
            entries: full
                .lines_for(*b)
                .map(|l| OverlapEntry {
                    lower: l.v_lower,
                    amplitude: l.amplitude.unwrap(),
                    omega: to_hartree(l.omega_invcm),
                    provenance: Provenance::Measured,
                    sign_ambiguous: false,
                })
                .collect(),
        })
        .collect();
    (SignedOverlapSet::new(bands, vec![]).unwrap(), lower)
}

/// Position of the curve's minimum, refined by golden section on the spline.
pub fn curve_minimum(curve: &PotentialCurve) -> f64 {
    let (k, _) = curve.minimum();
    let h = curve.grid().spacing();
    let r = curve.grid().r(k);
    fluorinv_core::morse::golden_section_min(|x| curve.interpolate(x), r - h, r + h, 1e-9).unwrap().0
}
