//! Q-branch emission spectra: Franck–Condon amplitudes between lower and
//! upper rovibrational states, forward synthesis from two potentials, and the
//! detection threshold that turns a full spectrum into "measured" data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numgrid::{PotentialCurve, RadialGrid};
use crate::schrodinger::{solve_bound_states, EffectivePotentialSpec, RovibState};
use crate::units::{to_invcm, ReducedMass};

pub const SPECTRUM_HEADER: &str = "# v_upper J_upper v_lower J_lower omega_cm-1 intensity [amplitude] provenance";

/// Upper rovibrational level (v′, J′) feeding one emission progression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Band {
    pub v: usize,
    pub j: u32,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.v, self.j)
    }
}

impl FromStr for Band {
    type Err = Error;
    /// `v:J`, e.g. `1:5`.
    fn from_str(s: &str) -> Result<Self> {
        let (v, j) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("band '{s}' is not of the form v:J")))?;
        let v = v.trim().parse().map_err(|_| Error::Config(format!("bad v in band '{s}'")))?;
        let j = j.trim().parse().map_err(|_| Error::Config(format!("bad J in band '{s}'")))?;
        Ok(Band { v, j })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Measured,
    Regenerated,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Measured => "measured",
            Provenance::Regenerated => "regenerated",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(Provenance::Measured),
            "regenerated" => Ok(Provenance::Regenerated),
            other => Err(Error::Config(format!("unknown provenance '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionLine {
    pub v_upper: usize,
    pub j_upper: u32,
    pub v_lower: usize,
    pub j_lower: u32,
    pub omega_invcm: f64,
    /// |d|², dimensionless.
    pub intensity: f64,
    /// Signed d when known; thresholded data carries none.
    pub amplitude: Option<f64>,
    pub provenance: Provenance,
}

impl EmissionLine {
    pub fn band(&self) -> Band {
        Band { v: self.v_upper, j: self.j_upper }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// Relative to the strongest line in the whole dataset.
    #[default]
    Global,
    /// Relative to the strongest line of each band.
    PerBand,
}

impl FromStr for ThresholdMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(ThresholdMode::Global),
            "per-band" => Ok(ThresholdMode::PerBand),
            other => Err(Error::Config(format!("unknown threshold mode '{other}'"))),
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::Global => "global",
            ThresholdMode::PerBand => "per-band",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub fraction: f64,
    pub mode: ThresholdMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDataset {
    pub lines: Vec<EmissionLine>,
    pub bands: Vec<Band>,
    pub threshold: Option<Threshold>,
}

impl SpectrumDataset {
    pub fn new(lines: Vec<EmissionLine>, bands: Vec<Band>, threshold: Option<Threshold>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for l in &lines {
            if l.j_lower != l.j_upper {
                return Err(Error::InputShape(format!(
                    "not a Q-branch line: J'={} J''={}",
                    l.j_upper, l.j_lower
                )));
            }
            if !(l.intensity >= 0.0 && l.intensity.is_finite()) {
                return Err(Error::InputShape(format!("bad intensity {}", l.intensity)));
            }
            if !seen.insert((l.v_upper, l.j_upper, l.v_lower)) {
                return Err(Error::InputShape(format!(
                    "duplicate line v'={} J'={} v''={}",
                    l.v_upper, l.j_upper, l.v_lower
                )));
            }
            if !bands.contains(&l.band()) {
                return Err(Error::InputShape(format!("line belongs to undeclared band {}", l.band())));
            }
        }
        Ok(Self { lines, bands, threshold })
    }

    pub fn lines_for(&self, band: Band) -> impl Iterator<Item = &EmissionLine> + '_ {
        self.lines.iter().filter(move |l| l.band() == band)
    }

    pub fn max_intensity(&self) -> f64 {
        self.lines.iter().map(|l| l.intensity).fold(0.0, f64::max)
    }

    /// Retained line count per band, in band order.
    pub fn counts_per_band(&self) -> Vec<usize> {
        self.bands.iter().map(|b| self.lines_for(*b).count()).collect()
    }

    /// Σ |d|² over each band's lines, in band order.
    pub fn intensity_sums(&self) -> Vec<f64> {
        self.bands.iter().map(|b| self.lines_for(*b).map(|l| l.intensity).sum()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(SPECTRUM_HEADER);
        out.push('\n');
        let bands: Vec<String> = self.bands.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "# bands {}", bands.join(" "));
        if let Some(t) = self.threshold {
            let _ = writeln!(out, "# threshold_fraction {}", t.fraction);
            let _ = writeln!(out, "# threshold_mode {}", t.mode);
        }
        for l in &self.lines {
            let _ = write!(
                out,
                "{} {} {} {} {:.6} {:.12e}",
                l.v_upper, l.j_upper, l.v_lower, l.j_lower, l.omega_invcm, l.intensity
            );
            if let Some(a) = l.amplitude {
                let _ = write!(out, " {a:.12e}");
            }
            let _ = writeln!(out, " {}", l.provenance);
        }
        out
    }

    /// Two-column (ω, intensity) stick plot.
    pub fn stick_plot(&self) -> String {
        let mut out = String::from("# omega_cm-1 intensity\n");
        for l in &self.lines {
            let _ = writeln!(out, "{:.6} {:.12e}", l.omega_invcm, l.intensity);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        let mut bands: Vec<Band> = Vec::new();
        let mut fraction = None;
        let mut mode = ThresholdMode::Global;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let perr = |msg: String| Error::Parse { line: lineno, msg };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                let mut toks = c.split_whitespace();
                match toks.next() {
                    Some("bands") => {
                        for t in toks {
                            bands.push(t.parse().map_err(|e: Error| perr(e.to_string()))?);
                        }
                    }
                    Some("threshold_fraction") => {
                        let v = toks.next().ok_or_else(|| perr("missing fraction".into()))?;
                        fraction = Some(v.parse::<f64>().map_err(|e| perr(e.to_string()))?);
                    }
                    Some("threshold_mode") => {
                        let v = toks.next().ok_or_else(|| perr("missing mode".into()))?;
                        mode = v.parse().map_err(|e: Error| perr(e.to_string()))?;
                    }
                    _ => {}
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 7 && toks.len() != 8 {
                return Err(perr(format!("expected 7 or 8 columns, got {}", toks.len())));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|e| perr(format!("'{s}': {e}")));
            let float = |s: &str| s.parse::<f64>().map_err(|e| perr(format!("'{s}': {e}")));
            let amplitude = if toks.len() == 8 { Some(float(toks[6])?) } else { None };
            let line = EmissionLine {
                v_upper: int(toks[0])? as usize,
                j_upper: int(toks[1])? as u32,
                v_lower: int(toks[2])? as usize,
                j_lower: int(toks[3])? as u32,
                omega_invcm: float(toks[4])?,
                intensity: float(toks[5])?,
                amplitude,
                provenance: toks[toks.len() - 1].parse().map_err(|e: Error| perr(e.to_string()))?,
            };
            if !bands.contains(&line.band()) {
                bands.push(line.band());
            }
            lines.push(line);
        }
        let threshold = fraction.map(|fraction| Threshold { fraction, mode });
        Self::new(lines, bands, threshold)
    }
}

/// Lower-state eigenfunctions for every J that appears in a band list. In a
/// Q branch the lower states of band (v′, J′) are the ground levels at J′.
#[derive(Debug, Clone)]
pub struct LowerStates {
    grid: RadialGrid,
    by_j: BTreeMap<u32, Vec<RovibState>>,
}

impl LowerStates {
    pub fn solve(ground: &PotentialCurve, mass: ReducedMass, bands: &[Band], n_lower: usize) -> Result<Self> {
        if n_lower == 0 {
            return Err(Error::Config("n_lower must be at least 1".into()));
        }
        let mut by_j = BTreeMap::new();
        for j in bands.iter().map(|b| b.j).collect::<BTreeSet<_>>() {
            let spec = EffectivePotentialSpec::new(ground.clone(), mass, j)?;
            by_j.insert(j, solve_bound_states(&spec, n_lower - 1)?);
        }
        Ok(Self { grid: *ground.grid(), by_j })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn for_j(&self, j: u32) -> Result<&[RovibState]> {
        self.by_j
            .get(&j)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InputShape(format!("no lower states solved for J={j}")))
    }

    pub fn n_lower(&self) -> usize {
        self.by_j.values().map(Vec::len).min().unwrap_or(0)
    }
}

/// f = ∫ χ(R) φ(R) dR with a unit electronic transition dipole.
pub fn franck_condon_amplitude(lower: &RovibState, upper: &RovibState) -> Result<f64> {
    if lower.grid != upper.grid {
        return Err(Error::InputShape("states live on different grids".into()));
    }
    lower.grid.integrate_product(&lower.wavefunction, &upper.wavefunction)
}

/// Forward model: for each band, lines to the lowest `n_lower` ground levels
/// at the same J with ω = E′ − E″, intensity f², amplitude f.
pub fn synthesize_spectrum(
    ground: &PotentialCurve,
    excited: &PotentialCurve,
    mass: ReducedMass,
    bands: &[Band],
    n_lower: usize,
) -> Result<SpectrumDataset> {
    if ground.grid() != excited.grid() {
        return Err(Error::InputShape("ground and excited potentials are on different grids".into()));
    }
    let lower = LowerStates::solve(ground, mass, bands, n_lower)?;
    let mut vmax_by_j: BTreeMap<u32, usize> = BTreeMap::new();
    for b in bands {
        let e = vmax_by_j.entry(b.j).or_default();
        *e = (*e).max(b.v);
    }
    let mut upper_by_j = BTreeMap::new();
    for (j, vmax) in vmax_by_j {
        let spec = EffectivePotentialSpec::new(excited.clone(), mass, j)?;
        upper_by_j.insert(j, solve_bound_states(&spec, vmax)?);
    }
    let mut lines = Vec::with_capacity(bands.len() * n_lower);
    for band in bands {
        let phi = &upper_by_j[&band.j][band.v];
        for chi in lower.for_j(band.j)? {
            let f = franck_condon_amplitude(chi, phi)?;
            lines.push(EmissionLine {
                v_upper: band.v,
                j_upper: band.j,
                v_lower: chi.v,
                j_lower: band.j,
                omega_invcm: to_invcm(phi.energy - chi.energy),
                intensity: f * f,
                amplitude: Some(f),
                provenance: Provenance::Measured,
            });
        }
    }
    SpectrumDataset::new(lines, bands.to_vec(), None)
}

/// Drops lines weaker than `fraction` of the reference maximum, strips the
/// amplitudes (detected data carries only |d|²), and rescales the survivors
/// so the strongest line has intensity 1.
pub fn apply_threshold(spectrum: &SpectrumDataset, fraction: f64, mode: ThresholdMode) -> Result<SpectrumDataset> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Config(format!("threshold fraction must lie in [0, 1), got {fraction}")));
    }
    let global = spectrum.max_intensity();
    let band_max: BTreeMap<Band, f64> = spectrum
        .bands
        .iter()
        .map(|b| (*b, spectrum.lines_for(*b).map(|l| l.intensity).fold(0.0, f64::max)))
        .collect();
    let kept: Vec<EmissionLine> = spectrum
        .lines
        .iter()
        .filter(|l| {
            let reference = match mode {
                ThresholdMode::Global => global,
                ThresholdMode::PerBand => band_max[&l.band()],
            };
            l.intensity >= fraction * reference
        })
        .cloned()
        .collect();
    let scale = kept.iter().map(|l| l.intensity).fold(0.0, f64::max);
    let lines = kept
        .into_iter()
        .map(|l| EmissionLine {
            intensity: if scale > 0.0 { l.intensity / scale } else { l.intensity },
            amplitude: None,
            ..l
        })
        .collect();
    SpectrumDataset::new(lines, spectrum.bands.clone(), Some(Threshold { fraction, mode }))
}
