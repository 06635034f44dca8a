//! Weak-line regeneration and pointwise potential inversion.
//!
//! Measured lines supply |d|²; the Morse model supplies every sign and every
//! line that fell below the detection threshold. The merged signed overlaps
//! reconstruct the excited potential point by point, and the tails where the
//! reconstructed density is negligible are continued analytically.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::morse::MorseParams;
use crate::numgrid::{PotentialCurve, RadialGrid};
use crate::schrodinger::RovibState;
use crate::spectrum::{franck_condon_amplitude, Band, LowerStates, Provenance, SpectrumDataset};
use crate::units::{to_hartree, ReducedMass};

/// Bands whose Σᵢ dᵢₛ² falls below this are flagged.
pub const COMPLETENESS_FLOOR: f64 = 0.999;
/// Model overlaps smaller than this cannot be trusted for a sign.
pub const SIGN_AMBIGUITY_LIMIT: f64 = 1e-10;
pub const DEFAULT_DENSITY_CUTOFF: f64 = 1e-3;
pub const DEFAULT_N_LOWER: usize = 31;

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapEntry {
    /// Lower-state vibrational index.
    pub lower: usize,
    /// Signed dᵢₛ.
    pub amplitude: f64,
    /// ωᵢₛ in hartree.
    pub omega: f64,
    pub provenance: Provenance,
    pub sign_ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandOverlaps {
    pub band: Band,
    pub entries: Vec<OverlapEntry>,
    /// Factor that put the measured intensities on the model's absolute
    /// scale; `None` when the band had no measured lines.
    pub calibration: Option<f64>,
}

impl BandOverlaps {
    pub fn completeness(&self) -> f64 {
        self.entries.iter().map(|e| e.amplitude * e.amplitude).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OverlapWarning {
    SignAmbiguous { band: Band, lower: usize },
    NoMeasuredLines { band: Band },
}

impl fmt::Display for OverlapWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverlapWarning::SignAmbiguous { band, lower } => {
                write!(f, "band {band}: model overlap with v''={lower} too small to fix the sign")
            }
            OverlapWarning::NoMeasuredLines { band } => {
                write!(f, "band {band}: no measured lines, pure model prediction")
            }
        }
    }
}

/// Signed dᵢₛ with transition energies, grouped per band.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedOverlapSet {
    pub bands: Vec<BandOverlaps>,
    pub warnings: Vec<OverlapWarning>,
}

impl SignedOverlapSet {
    pub fn new(bands: Vec<BandOverlaps>, warnings: Vec<OverlapWarning>) -> Result<Self> {
        for b in &bands {
            let mut seen = std::collections::BTreeSet::new();
            if let Some(e) = b.entries.iter().find(|e| !seen.insert(e.lower)) {
                return Err(Error::InputShape(format!("band {} lists v''={} twice", b.band, e.lower)));
            }
        }
        Ok(Self { bands, warnings })
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.bands
            .iter()
            .flat_map(|b| &b.entries)
            .filter(|e| e.provenance == provenance)
            .count()
    }

    /// The same set with regenerated entries dropped.
    pub fn measured_only(&self) -> Self {
        let bands = self
            .bands
            .iter()
            .map(|b| BandOverlaps {
                entries: b.entries.iter().filter(|e| e.provenance == Provenance::Measured).cloned().collect(),
                ..b.clone()
            })
            .collect();
        Self { bands, warnings: self.warnings.clone() }
    }

    /// Every dᵢₛ multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        self.map_entries(|e| OverlapEntry { amplitude: e.amplitude * factor, ..e.clone() })
    }

    /// Every ωᵢₛ shifted by `delta` hartree.
    pub fn omega_shifted(&self, delta: f64) -> Self {
        self.map_entries(|e| OverlapEntry { omega: e.omega + delta, ..e.clone() })
    }

    fn map_entries(&self, f: impl Fn(&OverlapEntry) -> OverlapEntry) -> Self {
        let bands = self
            .bands
            .iter()
            .map(|b| BandOverlaps { entries: b.entries.iter().map(&f).collect(), ..b.clone() })
            .collect();
        Self { bands, warnings: self.warnings.clone() }
    }
}

/// Upper states and overlaps predicted by a Morse model for a band list.
#[derive(Debug, Clone)]
pub struct MorseModel {
    pub params: MorseParams,
    pub bands: Vec<Band>,
    pub upper: Vec<RovibState>,
    /// overlaps[s][i] = fᵢₛ.
    pub overlaps: Vec<Vec<f64>>,
    /// omegas[s][i] = Eₛ − Eᵢ in hartree.
    pub omegas: Vec<Vec<f64>>,
}

impl MorseModel {
    pub fn build(
        params: &MorseParams,
        lower: &LowerStates,
        bands: &[Band],
        mass: ReducedMass,
        n_lower: usize,
    ) -> Result<Self> {
        let upper = params.band_states(*lower.grid(), mass, bands)?;
        let mut overlaps = Vec::with_capacity(bands.len());
        let mut omegas = Vec::with_capacity(bands.len());
        for (band, phi) in bands.iter().zip(&upper) {
            let chis = lower.for_j(band.j)?;
            if chis.len() < n_lower {
                return Err(Error::InputShape(format!(
                    "{n_lower} lower states requested but only {} solved",
                    chis.len()
                )));
            }
            let chis = &chis[..n_lower];
            overlaps.push(chis.iter().map(|c| franck_condon_amplitude(c, phi)).collect::<Result<Vec<_>>>()?);
            omegas.push(chis.iter().map(|c| phi.energy - c.energy).collect());
        }
        Ok(Self { params: *params, bands: bands.to_vec(), upper, overlaps, omegas })
    }

    pub fn n_lower(&self) -> usize {
        self.overlaps.first().map_or(0, Vec::len)
    }

    /// Model intensity f² of band `s`, line `i`.
    pub fn intensity(&self, s: usize, i: usize) -> f64 {
        self.overlaps[s][i].powi(2)
    }
}

/// Combines measured magnitudes with model signs, and fills every line the
/// measurement lacks with the full model value.
///
/// Measured intensities are relative, so each band's are first put on the
/// model's absolute scale (see [`Calibration`]).
pub fn merge_with_measured(model: &MorseModel, measured: &SpectrumDataset) -> Result<SignedOverlapSet> {
    merge_with_measured_using(model, measured, Calibration::default())
}

/// Like [`merge_with_measured`] with an explicit calibration rule.
pub fn merge_with_measured_using(
    model: &MorseModel,
    measured: &SpectrumDataset,
    rule: Calibration,
) -> Result<SignedOverlapSet> {
    let n_lower = model.n_lower();
    for line in &measured.lines {
        if !model.bands.contains(&line.band()) {
            return Err(Error::InputShape(format!("measured line in band {} not covered by the model", line.band())));
        }
    }
    let mut bands = Vec::with_capacity(model.bands.len());
    let mut warnings = Vec::new();
    for (s, band) in model.bands.iter().enumerate() {
        let mut meas: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for line in measured.lines_for(*band).filter(|l| l.provenance == Provenance::Measured) {
            if line.v_lower >= n_lower {
                return Err(Error::InputShape(format!(
                    "measured line to v''={} exceeds n_lower = {n_lower}",
                    line.v_lower
                )));
            }
            meas.insert(line.v_lower, (line.intensity, to_hartree(line.omega_invcm)));
        }
        let calibration = if meas.is_empty() {
            warnings.push(OverlapWarning::NoMeasuredLines { band: *band });
            None
        } else {
            Some(rule.factor(model, s, &meas))
        };
        let mut entries = Vec::with_capacity(n_lower);
        for i in 0..n_lower {
            let f = model.overlaps[s][i];
            let entry = match meas.get(&i) {
                Some(&(int, omega)) => {
                    let ambiguous = f.abs() < SIGN_AMBIGUITY_LIMIT;
                    if ambiguous {
                        warnings.push(OverlapWarning::SignAmbiguous { band: *band, lower: i });
                    }
                    let sign = if f < 0.0 { -1.0 } else { 1.0 };
                    let magnitude = (calibration.unwrap_or(1.0) * int).max(0.0).sqrt();
                    OverlapEntry {
                        lower: i,
                        amplitude: sign * magnitude,
                        omega,
                        provenance: Provenance::Measured,
                        sign_ambiguous: ambiguous,
                    }
                }
                None => OverlapEntry {
                    lower: i,
                    amplitude: f,
                    omega: model.omegas[s][i],
                    provenance: Provenance::Regenerated,
                    sign_ambiguous: false,
                },
            };
            entries.push(entry);
        }
        bands.push(BandOverlaps { band: *band, entries, calibration });
    }
    SignedOverlapSet::new(bands, warnings)
}

/// How relative measured intensities are put on the model's absolute scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Calibration {
    /// Scale chosen so the merged band satisfies completeness exactly; the
    /// model only supplies the weight of the missing lines.
    #[default]
    Completeness,
    /// Least-squares match of measured to model intensities.
    LeastSquares,
}

impl Calibration {
    fn factor(self, model: &MorseModel, s: usize, meas: &BTreeMap<usize, (f64, f64)>) -> f64 {
        let least_squares = || {
            let (num, den) = meas.iter().fold((0.0, 0.0), |(n, d), (&i, &(int, _))| {
                (n + model.intensity(s, i) * int, d + int * int)
            });
            if den > 0.0 { num / den } else { 0.0 }
        };
        match self {
            Calibration::LeastSquares => least_squares(),
            Calibration::Completeness => {
                let missing: f64 = (0..model.n_lower())
                    .filter(|i| !meas.contains_key(i))
                    .map(|i| model.intensity(s, i))
                    .sum();
                let measured: f64 = meas.values().map(|(int, _)| int).sum();
                // a model that claims all the weight leaves nothing to scale
                // against; fall back to the intensity match
                if measured > 0.0 && missing < 1.0 { (1.0 - missing) / measured } else { least_squares() }
            }
        }
    }
}

impl FromStr for Calibration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "completeness" => Ok(Calibration::Completeness),
            "least-squares" => Ok(Calibration::LeastSquares),
            other => Err(Error::Config(format!("unknown calibration '{other}' (expected completeness or least-squares)"))),
        }
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calibration::Completeness => "completeness",
            Calibration::LeastSquares => "least-squares",
        })
    }
}

/// Builds the Morse model for the measured bands and merges it with the
/// measurement.
pub fn regenerate_weak_lines(
    params: &MorseParams,
    lower: &LowerStates,
    measured: &SpectrumDataset,
    mass: ReducedMass,
    n_lower: usize,
) -> Result<SignedOverlapSet> {
    let model = MorseModel::build(params, lower, &measured.bands, mass, n_lower)?;
    merge_with_measured(&model, measured)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandCompleteness {
    pub band: Band,
    pub value: f64,
    pub flagged: bool,
}

/// Σᵢ dᵢₛ² per band; values below [`COMPLETENESS_FLOOR`] are flagged.
pub fn completeness_report(overlaps: &SignedOverlapSet) -> Vec<BandCompleteness> {
    overlaps
        .bands
        .iter()
        .map(|b| {
            let value = b.completeness();
            BandCompleteness { band: b.band, value, flagged: value < COMPLETENESS_FLOOR }
        })
        .collect()
}

/// Grid indices `[start, end]` (inclusive) where the reconstruction is
/// trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidRange {
    pub start: usize,
    pub end: usize,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl ValidRange {
    pub fn contains(&self, k: usize) -> bool {
        k >= self.start && k <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtrapolationKind {
    LinearSlope,
    #[default]
    MorseContinuation,
}

impl FromStr for ExtrapolationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-slope" => Ok(ExtrapolationKind::LinearSlope),
            "morse-continuation" => Ok(ExtrapolationKind::MorseContinuation),
            other => Err(Error::Config(format!(
                "unknown extrapolation method '{other}' (expected linear-slope or morse-continuation)"
            ))),
        }
    }
}

impl fmt::Display for ExtrapolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtrapolationKind::LinearSlope => "linear-slope",
            ExtrapolationKind::MorseContinuation => "morse-continuation",
        })
    }
}

impl ExtrapolationKind {
    /// Attaches the fitted model the Morse continuation borrows β and Tₑ from.
    pub fn with_model(self, model: &MorseParams) -> ExtrapolationMethod {
        match self {
            ExtrapolationKind::LinearSlope => ExtrapolationMethod::LinearSlope,
            ExtrapolationKind::MorseContinuation => {
                ExtrapolationMethod::MorseContinuation { beta: model.beta, asymptote: model.t_e }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtrapolationMethod {
    LinearSlope,
    /// Morse form with fixed β and asymptote; Dₑ and Rₑ are chosen so value
    /// and slope match at each edge.
    MorseContinuation { beta: f64, asymptote: f64 },
}

/// Analytic continuation attached at one edge of the valid range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Linear { r_edge: f64, value: f64, slope: f64 },
    Morse { params: MorseParams },
}

impl Tail {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Tail::Linear { r_edge, value, slope } => value + slope * (r - r_edge),
            Tail::Morse { params } => params.eval(r),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            Tail::Linear { slope, .. } => slope,
            Tail::Morse { params } => params.derivative(r),
        }
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Linear { r_edge, value, slope } => write!(
                f,
                "linear from R={r_edge:.4} bohr, V={:.4} cm-1, slope={:.4} cm-1/bohr",
                crate::units::to_invcm(*value),
                crate::units::to_invcm(*slope)
            ),
            Tail::Morse { params } => write!(
                f,
                "morse T_e={:.4} cm-1 D_e={:.4} cm-1 beta={:.6} bohr-1 R_e={:.6} bohr",
                params.t_e_invcm(),
                params.d_e_invcm(),
                params.beta,
                params.r_e
            ),
        }
    }
}

/// How the curve was continued outside the valid range.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationSpec {
    pub method: Option<ExtrapolationMethod>,
    pub inner: Option<Tail>,
    pub outer: Option<Tail>,
    /// Edge slopes of the reconstructed curve the tails were matched to.
    pub inner_slope: Option<f64>,
    pub outer_slope: Option<f64>,
    pub notes: Vec<String>,
}

impl ExtrapolationSpec {
    fn none() -> Self {
        Self { method: None, inner: None, outer: None, inner_slope: None, outer_slope: None, notes: Vec::new() }
    }

    pub fn describe(&self) -> String {
        let name = match self.method {
            None => "none (flat fill)".to_string(),
            Some(ExtrapolationMethod::LinearSlope) => "linear-slope".into(),
            Some(ExtrapolationMethod::MorseContinuation { .. }) => "morse-continuation".into(),
        };
        let mut s = name;
        if let Some(t) = &self.inner {
            s.push_str(&format!("; inner: {t}"));
        }
        if let Some(t) = &self.outer {
            s.push_str(&format!("; outer: {t}"));
        }
        for n in &self.notes {
            s.push_str(&format!("; {n}"));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExtractedPotential {
    pub curve: PotentialCurve,
    pub valid_range: ValidRange,
    /// Σₛ (Σᵢ χᵢ(R) dᵢₛ)² at every grid point.
    pub density: Vec<f64>,
    /// Pointwise inversion value wherever the density is nonzero (NaN
    /// elsewhere), before any tail handling.
    pub raw: Vec<f64>,
    pub density_cutoff: f64,
    pub extrapolation: ExtrapolationSpec,
}

/// Evaluates the inversion formula on the grid shared by `lower` and `v_g`.
///
/// Per band the numerator is accumulated as (Σᵢ dᵢₛ ωᵢₛ χᵢ)(Σⱼ dⱼₛ χⱼ), so
/// the cost is O(points × states). Band partial sums are formed in parallel
/// and reduced in band order. Outside the valid range the curve is filled
/// with the edge values until [`extrapolate_tail`] replaces them.
pub fn invert_potential(
    overlaps: &SignedOverlapSet,
    lower: &LowerStates,
    v_g: &PotentialCurve,
    density_cutoff: f64,
) -> Result<ExtractedPotential> {
    let grid = *v_g.grid();
    if *lower.grid() != grid {
        return Err(Error::InputShape("lower states and ground potential use different grids".into()));
    }
    if !(density_cutoff > 0.0 && density_cutoff < 1.0) {
        return Err(Error::Config(format!("density cutoff must lie in (0, 1), got {density_cutoff}")));
    }
    let n = grid.len();
    let partials: Vec<(Vec<f64>, Vec<f64>)> = overlaps
        .bands
        .par_iter()
        .map(|b| band_partials(b, lower, n))
        .collect::<Result<_>>()?;
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for (bn, bd) in &partials {
        for k in 0..n {
            num[k] += bn[k];
            den[k] += bd[k];
        }
    }

    let max_density = den.iter().copied().fold(0.0, f64::max);
    if !(max_density > 0.0 && max_density.is_finite()) {
        return Err(Error::NoSupport);
    }
    let peak = den.iter().position(|&d| d == max_density).unwrap_or(0);
    let floor = density_cutoff * max_density;
    let mut start = peak;
    while start > 0 && den[start - 1] >= floor {
        start -= 1;
    }
    let mut end = peak;
    while end + 1 < n && den[end + 1] >= floor {
        end += 1;
    }

    let raw: Vec<f64> = (0..n)
        .map(|k| if den[k] > 0.0 { num[k] / den[k] + v_g.values()[k] } else { f64::NAN })
        .collect();
    for k in start..=end {
        if !raw[k].is_finite() {
            return Err(Error::NumericalFailure { r: grid.r(k), what: "non-finite inverted value".into() });
        }
    }
    let values: Vec<f64> = (0..n).map(|k| raw[k.clamp(start, end)]).collect();
    let curve = PotentialCurve::new(grid, values)?;
    Ok(ExtractedPotential {
        curve,
        valid_range: ValidRange { start, end, r_inner: grid.r(start), r_outer: grid.r(end) },
        density: den,
        raw,
        density_cutoff,
        extrapolation: ExtrapolationSpec::none(),
    })
}

fn band_partials(band: &BandOverlaps, lower: &LowerStates, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let chis = lower.for_j(band.band.j)?;
    let mut psi = vec![0.0; n];
    let mut weighted = vec![0.0; n];
    for e in &band.entries {
        let chi = chis.get(e.lower).ok_or_else(|| {
            Error::InputShape(format!("overlap with v''={} but only {} lower states", e.lower, chis.len()))
        })?;
        let dw = e.amplitude * e.omega;
        for k in 0..n {
            psi[k] += e.amplitude * chi.wavefunction[k];
            weighted[k] += dw * chi.wavefunction[k];
        }
    }
    let num = psi.iter().zip(&weighted).map(|(p, w)| p * w).collect();
    let den = psi.iter().map(|p| p * p).collect();
    Ok((num, den))
}

/// One-sided second-order slope at the edge of the valid range.
fn edge_slope(values: &[f64], grid: &RadialGrid, k: usize, inward: isize) -> f64 {
    let h = grid.spacing();
    let at = |off: isize| values[(k as isize + off * inward) as usize];
    let one_sided = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    // inward = +1 for the inner edge (forward difference), −1 for the outer
    one_sided * inward as f64
}

fn morse_tail(r_edge: f64, value: f64, slope: f64, beta: f64, asymptote: f64, inner: bool) -> Option<Tail> {
    let u = value - asymptote;
    if !(u < 0.0) {
        return None;
    }
    let q = slope / (-2.0 * beta * u);
    if (1.0 - q).abs() < 1e-14 {
        return None;
    }
    let x = (1.0 - 2.0 * q) / (1.0 - q);
    if !(x > 0.0 && x < 2.0) || (inner && x <= 1.0) {
        return None;
    }
    let d_e = u / (x * (x - 2.0));
    let r_e = r_edge + x.ln() / beta;
    MorseParams::new(asymptote, d_e, beta, r_e).ok().map(|params| Tail::Morse { params })
}

/// Replaces the curve outside the valid range by an analytic continuation
/// that matches the value and slope at each edge. A Morse continuation that
/// cannot match an edge (slope too steep for the fixed β, or the edge above
/// the asymptote) falls back to the linear tail, recorded in the notes.
pub fn extrapolate_tail(partial: &ExtractedPotential, method: ExtrapolationMethod) -> Result<ExtractedPotential> {
    let grid = *partial.curve.grid();
    let n = grid.len();
    let ValidRange { start, end, .. } = partial.valid_range;
    if end < start || end >= n {
        return Err(Error::Config("empty valid range".into()));
    }
    let mut spec = ExtrapolationSpec { method: Some(method), ..ExtrapolationSpec::none() };
    let inside: Vec<f64> = partial.curve.values().to_vec();
    let mut values = inside.clone();

    let make_tail = |k: usize, inward: isize, inner: bool, notes: &mut Vec<String>| -> (Tail, f64) {
        let r_edge = grid.r(k);
        let value = inside[k];
        let slope = if end - start >= 2 {
            edge_slope(&inside, &grid, k, inward)
        } else if end > start {
            (inside[end] - inside[start]) / (grid.r(end) - grid.r(start))
        } else {
            0.0
        };
        let linear = Tail::Linear { r_edge, value, slope };
        let tail = match method {
            ExtrapolationMethod::LinearSlope => linear,
            ExtrapolationMethod::MorseContinuation { beta, asymptote } => {
                morse_tail(r_edge, value, slope, beta, asymptote, inner).unwrap_or_else(|| {
                    let side = if inner { "inner" } else { "outer" };
                    notes.push(format!("{side} edge: Morse continuation infeasible, used linear slope"));
                    linear
                })
            }
        };
        (tail, slope)
    };

    let mut notes = Vec::new();
    if start > 0 {
        let (tail, slope) = make_tail(start, 1, true, &mut notes);
        for (k, v) in values.iter_mut().enumerate().take(start) {
            *v = tail.eval(grid.r(k));
        }
        spec.inner = Some(tail);
        spec.inner_slope = Some(slope);
    }
    if end + 1 < n {
        let (tail, slope) = make_tail(end, -1, false, &mut notes);
        for (k, v) in values.iter_mut().enumerate().skip(end + 1) {
            *v = tail.eval(grid.r(k));
        }
        spec.outer = Some(tail);
        spec.outer_slope = Some(slope);
    }
    spec.notes = notes;
    let curve = PotentialCurve::new(grid, values)?;
    Ok(ExtractedPotential { curve, extrapolation: spec, ..partial.clone() })
}

/// [`invert_potential`] followed by [`extrapolate_tail`].
pub fn extract_potential(
    overlaps: &SignedOverlapSet,
    lower: &LowerStates,
    v_g: &PotentialCurve,
    density_cutoff: f64,
    method: ExtrapolationMethod,
) -> Result<ExtractedPotential> {
    let partial = invert_potential(overlaps, lower, v_g, density_cutoff)?;
    extrapolate_tail(&partial, method)
}
