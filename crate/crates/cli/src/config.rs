//! Run configuration: a fixed key schema resolved from defaults, a
//! `key = value` file, the output-directory environment variable and
//! command-line flags, in increasing precedence.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use fluorinv_core::analysis::NoiseDistribution;
use fluorinv_core::morse::ReSearch;
use fluorinv_core::numgrid::LengthUnit;
use fluorinv_core::units::{lirb_reduced_mass_amu, reduced_mass_amu};
use fluorinv_core::{Band, Calibration, ExtrapolationKind, Gauge, RadialGrid, ReducedMass, ThresholdMode};

pub const OUT_ENV: &str = "FLUORINV_OUT";

/// Keys that do not change any computed number and stay out of the hash.
const UNHASHED: [&str; 2] = ["out", "jobs"];

pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

const fn k(key: &'static str, default: &'static str, doc: &'static str) -> KeySpec {
    KeySpec { key, default, doc }
}

pub const SCHEMA: &[KeySpec] = &[
    k("ground", "twin", "ground potential file, or `twin` for the built-in synthetic ground curve"),
    k("excited", "twin", "excited potential file, `twin`, or `none`"),
    k("reference", "excited", "curve to score against: a file, `excited`, or `none`"),
    k("spectrum", "none", "measured spectrum file; `none` synthesizes it from ground and excited"),
    k("test", "none", "potential file scored by `rms`"),
    k("length_unit", "header", "R unit of potential files: `header` follows each file's units line (bohr if absent); bohr or angstrom force it"),
    k("mass_amu", "auto", "reduced mass in amu; `auto` uses 7Li85Rb unless `masses` is given"),
    k("masses", "none", "two atomic masses in amu, e.g. `7.016 84.912`"),
    k("grid_r_min", "4.0", "grid start (bohr)"),
    k("grid_r_max", "20.0", "grid end (bohr)"),
    k("grid_points", "2001", "grid points"),
    k("solve_target", "ground", "curve `solve` diagonalizes: ground, excited or reference"),
    k("v_max", "20", "highest vibrational level `solve` dumps"),
    k("j", "0", "rotational quantum number for `solve`"),
    k("bands", "0:4 1:5 2:8", "upper levels v:J feeding the progressions"),
    k("threshold", "0.025", "detection threshold as a fraction of the strongest line"),
    k("threshold_mode", "global", "global or per-band"),
    k("n_lower", "31", "ground vibrational levels per band"),
    k("density_cutoff", "1e-3", "relative density below which the inversion is not trusted"),
    k("extrapolation", "morse-continuation", "tail method: morse-continuation or linear-slope"),
    k("calibration", "completeness", "measured-intensity scale: completeness or least-squares"),
    k("gauge", "align-minimum", "RMS gauge: align-minimum or absolute"),
    k("fit_rounds", "3", "alternations between the Morse energy fit and the R_e fit"),
    k("re_lo", "auto", "R_e scan start (bohr); `auto` is R_g - 1"),
    k("re_hi", "auto", "R_e scan end (bohr); `auto` is R_g + 2.5"),
    k("re_steps", "71", "R_e scan candidates before golden-section refinement"),
    k("regions", "2 5 10 20", "region cutoffs V < E(v') of the reference at J = 0"),
    k("noise_levels", "0.02 0.05 0.1", "relative rms noise levels"),
    k("noise_trials", "100", "trials per noise level"),
    k("noise_distribution", "gaussian", "gaussian or uniform"),
    k("noise_bootstrap", "200", "bootstrap resamples for standard errors; 0 disables"),
    k("seed", "20130501", "noise study seed"),
    k("out", "fluorinv-out", "output directory"),
    k("jobs", "0", "worker threads; 0 uses every core"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Env,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Env => "env",
            Source::Flag => "flag",
        })
    }
}

/// Raw string values for every schema key plus where each came from.
#[derive(Debug, Clone)]
pub struct Settings {
    values: Vec<(String, Source)>,
    pub config_path: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self { values: SCHEMA.iter().map(|s| (s.default.to_string(), Source::Default)).collect(), config_path: None }
    }
}

fn index_of(key: &str) -> Option<usize> {
    SCHEMA.iter().position(|s| s.key == key)
}

impl Settings {
    pub fn get(&self, key: &str) -> &str {
        let i = index_of(key).unwrap_or_else(|| panic!("key '{key}' is not in the schema"));
        &self.values[i].0
    }

    pub fn set(&mut self, key: &str, value: &str, source: Source) -> Result<()> {
        let i = index_of(key).ok_or_else(|| anyhow!("unknown key '{key}'"))?;
        self.values[i] = (value.trim().to_string(), source);
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment; blank lines are
    /// skipped; repeated or unknown keys are errors.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        self.apply_text(&text).with_context(|| format!("in config file {}", path.display()))?;
        self.config_path = Some(path.to_path_buf());
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected `key = value`", idx + 1))?;
            let key = key.trim();
            if seen.contains(&key) {
                bail!("line {}: key '{key}' set twice", idx + 1);
            }
            seen.push(key);
            self.set(key, value, Source::File).with_context(|| format!("line {}", idx + 1))?;
        }
        Ok(())
    }

    /// `key = value  # source` for every key, in schema order; parseable as
    /// a config file.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (spec, (value, source)) in SCHEMA.iter().zip(&self.values) {
            out.push_str(&format!("{} = {}  # {}\n", spec.key, value, source));
        }
        out
    }

    /// SHA-256 over the canonical `key = value` lines of every key that can
    /// change a result.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (spec, (value, _)) in SCHEMA.iter().zip(&self.values) {
            if !UNHASHED.contains(&spec.key) {
                h.update(format!("{} = {}\n", spec.key, value).as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Where a curve comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Twin,
    File(PathBuf),
    None,
    /// Reference only: reuse the excited curve.
    Excited,
}

/// Typed, validated view of [`Settings`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ground: CurveSource,
    pub excited: CurveSource,
    pub reference: CurveSource,
    pub spectrum: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// `None` follows each file's units header.
    pub length_unit: Option<LengthUnit>,
    pub mass: ReducedMass,
    pub grid: RadialGrid,
    pub solve_target: String,
    pub v_max: usize,
    pub j: u32,
    pub bands: Vec<Band>,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub n_lower: usize,
    pub density_cutoff: f64,
    pub extrapolation: ExtrapolationKind,
    pub calibration: Calibration,
    pub gauge: Gauge,
    pub fit_rounds: usize,
    pub re_search: Option<ReSearch>,
    pub regions: Vec<usize>,
    pub noise_levels: Vec<f64>,
    pub noise_trials: usize,
    pub noise_distribution: NoiseDistribution,
    pub noise_bootstrap: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
}

fn parse<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    let v = s.get(key);
    v.parse::<T>().map_err(|e| anyhow!("{key} = '{v}': {e}"))
}

fn parse_list<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    s.get(key)
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| anyhow!("{key}: '{t}': {e}")))
        .collect()
}

fn curve_source(s: &Settings, key: &str, allow_excited: bool) -> CurveSource {
    match s.get(key) {
        "twin" => CurveSource::Twin,
        "none" => CurveSource::None,
        "excited" if allow_excited => CurveSource::Excited,
        path => CurveSource::File(PathBuf::from(path)),
    }
}

fn optional_path(s: &Settings, key: &str) -> Option<PathBuf> {
    match s.get(key) {
        "none" | "" => None,
        p => Some(PathBuf::from(p)),
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        bail!("{key} must be positive and finite, got {x}")
    }
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let ground = curve_source(s, "ground", false);
        if ground == CurveSource::None {
            bail!("ground = none: a ground potential is always required");
        }
        let excited = curve_source(s, "excited", false);
        let mut reference = curve_source(s, "reference", true);
        if reference == CurveSource::Twin {
            reference = CurveSource::Excited;
        }

        let mass_amu = match (s.get("mass_amu"), s.get("masses")) {
            ("auto", "none") => lirb_reduced_mass_amu(),
            ("auto", _) => {
                let m: Vec<f64> = parse_list(s, "masses")?;
                if m.len() != 2 {
                    bail!("masses needs exactly two values, got {}", m.len());
                }
                reduced_mass_amu(positive("masses", m[0])?, positive("masses", m[1])?)
            }
            (_, "none") => positive("mass_amu", parse(s, "mass_amu")?)?,
            _ => bail!("set either mass_amu or masses, not both"),
        };

        let grid = RadialGrid::new(parse(s, "grid_r_min")?, parse(s, "grid_r_max")?, parse(s, "grid_points")?)
            .map_err(|e| anyhow!("grid: {e}"))?;

        let solve_target = s.get("solve_target").to_string();
        if !["ground", "excited", "reference"].contains(&solve_target.as_str()) {
            bail!("solve_target = '{solve_target}': expected ground, excited or reference");
        }

        let bands: Vec<Band> = parse_list(s, "bands")?;
        if bands.is_empty() {
            bail!("bands is empty");
        }
        let threshold: f64 = parse(s, "threshold")?;
        if !(0.0..1.0).contains(&threshold) {
            bail!("threshold must lie in [0, 1), got {threshold}");
        }
        let n_lower: usize = parse(s, "n_lower")?;
        if n_lower == 0 {
            bail!("n_lower must be at least 1");
        }
        let density_cutoff = positive("density_cutoff", parse(s, "density_cutoff")?)?;

        let re_search = match (s.get("re_lo"), s.get("re_hi")) {
            ("auto", "auto") => None,
            ("auto", _) | (_, "auto") => bail!("set both re_lo and re_hi, or neither"),
            _ => {
                let (lo, hi): (f64, f64) = (parse(s, "re_lo")?, parse(s, "re_hi")?);
                if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                    bail!("re_lo must be below re_hi");
                }
                Some(ReSearch { lo, hi, steps: parse(s, "re_steps")? })
            }
        };

        let regions: Vec<usize> = parse_list(s, "regions")?;
        if regions.is_empty() || regions.windows(2).any(|w| w[1] <= w[0]) {
            bail!("regions must be a non-empty strictly increasing list of v'");
        }
        let noise_levels: Vec<f64> = parse_list(s, "noise_levels")?;
        if noise_levels.is_empty() {
            bail!("noise_levels is empty");
        }
        if let Some(l) = noise_levels.iter().find(|l| !(0.0..1.0).contains(*l)) {
            bail!("noise_levels: level {l} outside [0, 1)");
        }
        let noise_trials: usize = parse(s, "noise_trials")?;
        if noise_trials == 0 {
            bail!("noise_trials must be at least 1");
        }

        Ok(Self {
            ground,
            excited,
            reference,
            spectrum: optional_path(s, "spectrum"),
            test: optional_path(s, "test"),
            length_unit: match s.get("length_unit") {
                "header" => None,
                _ => Some(parse(s, "length_unit")?),
            },
            mass: ReducedMass::from_amu(mass_amu),
            grid,
            solve_target,
            v_max: parse(s, "v_max")?,
            j: parse(s, "j")?,
            bands,
            threshold,
            threshold_mode: parse(s, "threshold_mode")?,
            n_lower,
            density_cutoff,
            extrapolation: parse(s, "extrapolation")?,
            calibration: parse(s, "calibration")?,
            gauge: parse(s, "gauge")?,
            fit_rounds: parse(s, "fit_rounds")?,
            re_search,
            regions,
            noise_levels,
            noise_trials,
            noise_distribution: parse(s, "noise_distribution")?,
            noise_bootstrap: parse(s, "noise_bootstrap")?,
            seed: parse(s, "seed")?,
            out: PathBuf::from(s.get("out")),
            jobs: parse(s, "jobs")?,
        })
    }

    /// Every file the run reads, for the fail-fast existence check.
    pub fn input_files(&self) -> Vec<(&'static str, &Path)> {
        let mut files = Vec::new();
        for (key, src) in [("ground", &self.ground), ("excited", &self.excited), ("reference", &self.reference)] {
            if let CurveSource::File(p) = src {
                files.push((key, p.as_path()));
            }
        }
        if let Some(p) = &self.spectrum {
            files.push(("spectrum", p.as_path()));
        }
        if let Some(p) = &self.test {
            files.push(("test", p.as_path()));
        }
        files
    }
}

/// Schema documentation, one block per key.
pub fn schema_help() -> String {
    let mut out = String::new();
    for s in SCHEMA {
        out.push_str(&format!("{} = {}\n    {}\n", s.key, s.default, s.doc));
    }
    out
}
