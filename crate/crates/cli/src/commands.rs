//! The six subcommands. Every input is loaded and parsed before any
//! computation starts; each command returns the artifacts it wrote.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use fluorinv_core::analysis::{regions_from_reference, run_noise_study, score_regions};
use fluorinv_core::inversion::{BandCompleteness, COMPLETENESS_FLOOR};
use fluorinv_core::pipeline::Extraction;
use fluorinv_core::schrodinger::{format_state, solve_bound_states};
use fluorinv_core::spectrum::{apply_threshold, synthesize_spectrum};
use fluorinv_core::twin::TwinSystem;
use fluorinv_core::units::to_invcm;
use fluorinv_core::{
    EffectivePotentialSpec, NoiseStudyConfig, PipelineConfig, PipelineSetup, PotentialCurve, Provenance, RegionSpec,
    RmsScore, SpectrumDataset,
};

use crate::config::{CurveSource, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Synth,
    FitMorse,
    Invert,
    NoiseStudy,
    Rms,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Synth => "synth",
            Command::FitMorse => "fit-morse",
            Command::Invert => "invert",
            Command::NoiseStudy => "noise-study",
            Command::Rms => "rms",
        }
    }
}

/// A curve plus a label naming where it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub label: String,
    pub curve: PotentialCurve,
}

/// Everything read from disk (or built in) for one run.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub ground: Loaded,
    pub excited: Option<Loaded>,
    pub reference: Option<Loaded>,
    pub spectrum: Option<(String, SpectrumDataset)>,
    pub test: Option<Loaded>,
    /// (key, path, sha256) of every input file.
    pub files: Vec<(String, PathBuf, String)>,
}

fn read_file(key: &str, path: &Path, files: &mut Vec<(String, PathBuf, String)>) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("{key}: cannot read {}", path.display()))?;
    files.push((key.to_string(), path.to_path_buf(), hex::encode(Sha256::digest(&bytes))));
    String::from_utf8(bytes).map_err(|_| anyhow!("{key}: {} is not UTF-8 text", path.display()))
}

fn load_curve(key: &str, path: &Path, cfg: &RunConfig, files: &mut Vec<(String, PathBuf, String)>) -> Result<Loaded> {
    let text = read_file(key, path, files)?;
    let curve = PotentialCurve::parse(&text, cfg.length_unit, Some(cfg.grid))
        .with_context(|| format!("{key}: {}", path.display()))?;
    Ok(Loaded { label: path.display().to_string(), curve })
}

impl Inputs {
    /// Fail-fast load: every referenced file must exist and parse.
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let missing: Vec<String> = cfg
            .input_files()
            .iter()
            .filter(|(_, p)| !p.is_file())
            .map(|(k, p)| format!("{k} = {}", p.display()))
            .collect();
        if !missing.is_empty() {
            bail!("input file not found: {}", missing.join(", "));
        }

        let mut files = Vec::new();
        let twin = if cfg.ground == CurveSource::Twin || cfg.excited == CurveSource::Twin {
            let t = TwinSystem::lirb_like()?;
            Some(TwinSystem::build(cfg.grid, cfg.mass, t.ground_params, t.excited_base, t.distortion)?)
        } else {
            None
        };
        let twin_curve = |excited: bool| {
            let t = twin.as_ref().expect("twin built when requested");
            let (label, curve) = if excited { ("twin excited", &t.excited) } else { ("twin ground", &t.ground) };
            Loaded { label: label.into(), curve: curve.clone() }
        };

        let ground = match &cfg.ground {
            CurveSource::Twin => twin_curve(false),
            CurveSource::File(p) => load_curve("ground", p, cfg, &mut files)?,
            other => bail!("ground: unsupported source {other:?}"),
        };
        let excited = match &cfg.excited {
            CurveSource::Twin => Some(twin_curve(true)),
            CurveSource::File(p) => Some(load_curve("excited", p, cfg, &mut files)?),
            _ => None,
        };
        let reference = match &cfg.reference {
            CurveSource::Excited => excited.clone(),
            CurveSource::File(p) => Some(load_curve("reference", p, cfg, &mut files)?),
            _ => None,
        };
        let spectrum = match &cfg.spectrum {
            Some(p) => {
                let text = read_file("spectrum", p, &mut files)?;
                let s = SpectrumDataset::parse(&text).with_context(|| format!("spectrum: {}", p.display()))?;
                Some((p.display().to_string(), s))
            }
            None => None,
        };
        let test = match &cfg.test {
            Some(p) => Some(load_curve("test", p, cfg, &mut files)?),
            None => None,
        };
        Ok(Self { ground, excited, reference, spectrum, test, files })
    }

    fn excited(&self) -> Result<&Loaded> {
        self.excited.as_ref().ok_or_else(|| anyhow!("excited = none, but this step needs an excited potential"))
    }

    /// The measured spectrum: the input file, or the thresholded forward
    /// model of ground and excited.
    fn measured(&self, cfg: &RunConfig) -> Result<(String, SpectrumDataset)> {
        if let Some(s) = &self.spectrum {
            return Ok(s.clone());
        }
        let excited = self.excited().context("spectrum = none needs an excited potential to synthesize from")?;
        let full = synthesize_spectrum(&self.ground.curve, &excited.curve, cfg.mass, &cfg.bands, cfg.n_lower)?;
        let measured = apply_threshold(&full, cfg.threshold, cfg.threshold_mode)?;
        Ok((format!("synthesized from {} and {}", self.ground.label, excited.label), measured))
    }
}

/// Writes artifacts into the output directory and remembers them.
pub struct Output {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(PathBuf::from(name));
        Ok(())
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, inputs: &Inputs, out: &mut Output, config_echo: &str) -> Result<()> {
    match cmd {
        Command::Solve => solve(cfg, inputs, out),
        Command::Synth => synth(cfg, inputs, out),
        Command::FitMorse => fit_morse(cfg, inputs, out),
        Command::Invert => invert(cfg, inputs, out, config_echo),
        Command::NoiseStudy => noise_study(cfg, inputs, out),
        Command::Rms => rms(cfg, inputs, out),
    }
}

fn solve(cfg: &RunConfig, inputs: &Inputs, out: &mut Output) -> Result<()> {
    let target = match cfg.solve_target.as_str() {
        "ground" => &inputs.ground,
        "excited" => inputs.excited()?,
        _ => inputs.reference.as_ref().ok_or_else(|| anyhow!("solve_target = reference, but reference = none"))?,
    };
    let spec = EffectivePotentialSpec::new(target.curve.clone(), cfg.mass, cfg.j)?;
    let states = solve_bound_states(&spec, cfg.v_max)
        .with_context(|| format!("solving {} at J = {} for v = 0..={}", target.label, cfg.j, cfg.v_max))?;
    let mut levels = String::from("# v J energy_cm-1\n");
    let _ = writeln!(levels, "# potential {}", target.label);
    for s in &states {
        let _ = writeln!(levels, "{} {} {:.8}", s.v, s.j, s.energy_invcm());
        for w in &s.warnings {
            let _ = writeln!(levels, "# warning v={}: {w:?}", s.v);
        }
        out.write(&format!("states/v{:03}_J{}.txt", s.v, s.j), &format_state(s))?;
    }
    out.write("levels.txt", &levels)
}

fn synth(cfg: &RunConfig, inputs: &Inputs, out: &mut Output) -> Result<()> {
    let excited = inputs.excited()?;
    let full = synthesize_spectrum(&inputs.ground.curve, &excited.curve, cfg.mass, &cfg.bands, cfg.n_lower)?;
    let measured = apply_threshold(&full, cfg.threshold, cfg.threshold_mode)?;
    out.write("spectrum.txt", &measured.to_text())?;
    out.write("sticks.txt", &measured.stick_plot())?;
    out.write("spectrum_full.txt", &full.to_text())?;
    out.write("sticks_full.txt", &full.stick_plot())?;
    let counts: Vec<String> = measured
        .bands
        .iter()
        .zip(measured.counts_per_band())
        .map(|(b, n)| format!("{b}={n}"))
        .collect();
    eprintln!("synth: {} lines above threshold ({})", measured.lines.len(), counts.join(" "));
    Ok(())
}

fn pipeline_config(cfg: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        n_lower: cfg.n_lower,
        density_cutoff: cfg.density_cutoff,
        extrapolation: cfg.extrapolation,
        re_search: cfg.re_search,
        gauge: cfg.gauge,
        calibration: cfg.calibration,
        fit_rounds: cfg.fit_rounds,
        ..PipelineConfig::new(cfg.mass)
    }
}

fn prepare(cfg: &RunConfig, inputs: &Inputs) -> Result<(String, PipelineSetup)> {
    let (label, measured) = inputs.measured(cfg)?;
    let setup = PipelineSetup::prepare(&inputs.ground.curve, &measured, pipeline_config(cfg))
        .with_context(|| format!("fitting the Morse model to spectrum ({label})"))?;
    Ok((label, setup))
}

fn fit_morse(cfg: &RunConfig, inputs: &Inputs, out: &mut Output) -> Result<()> {
    let (label, setup) = prepare(cfg, inputs)?;
    let m = &setup.morse;
    let fit = &setup.energy_fit;
    let mut s = String::new();
    let _ = writeln!(s, "# Morse fit to spectrum: {label}");
    let _ = writeln!(s, "T_e_cm-1 = {:.6}", m.t_e_invcm());
    let _ = writeln!(s, "D_e_cm-1 = {:.6}", m.d_e_invcm());
    let _ = writeln!(s, "beta_bohr-1 = {:.8}", m.beta);
    let _ = writeln!(s, "R_e_bohr = {:.6}", m.r_e);
    let _ = writeln!(s, "omega_e_cm-1 = {:.6}", to_invcm(m.omega_e(cfg.mass)));
    let _ = writeln!(s, "omega_e_x_e_cm-1 = {:.6}", to_invcm(m.omega_e_xe(cfg.mass)));
    let _ = writeln!(s, "energy_fit_iterations = {}", fit.iterations);
    let _ = writeln!(s, "max_abs_level_residual_cm-1 = {:.6e}", fit.max_abs_residual());
    let _ = writeln!(s, "re_misfit = {:.6e}", setup.re_fit.misfit);
    let _ = writeln!(s, "\n# band origins: v J input_cm-1 model_cm-1 residual_cm-1");
    for r in &fit.residuals {
        let _ = writeln!(s, "{} {} {:.6} {:.6} {:.6e}", r.v, r.j, r.input_invcm, r.model_invcm, r.residual());
    }
    let _ = writeln!(s, "\n# predicted J=0 levels: v morse_cm-1 reference_cm-1 deviation_cm-1");
    let reference_levels = match &inputs.reference {
        Some(r) => {
            let spec = EffectivePotentialSpec::new(r.curve.clone(), cfg.mass, 0)?;
            Some(solve_bound_states(&spec, fit.predicted_levels_invcm.len() - 1)?)
        }
        None => None,
    };
    for (v, e) in fit.predicted_levels_invcm.iter().enumerate() {
        match &reference_levels {
            Some(levels) => {
                let r = levels[v].energy_invcm();
                let _ = writeln!(s, "{v} {e:.6} {r:.6} {:.6}", e - r);
            }
            None => {
                let _ = writeln!(s, "{v} {e:.6} absent absent");
            }
        }
    }
    if let Some(levels) = &reference_levels {
        let v10 = fit.predicted_levels_invcm[10] - levels[10].energy_invcm();
        let _ = writeln!(s, "\nv10_deviation_cm-1 = {v10:.6}");
    }
    out.write("fit_summary.txt", &s)?;

    let mut curve = String::from("# R_e_bohr misfit\n");
    for (r, f) in &setup.re_fit.misfit_curve {
        let _ = writeln!(curve, "{r:.6} {f:.10e}");
    }
    out.write("misfit_curve.txt", &curve)
}

fn regions(cfg: &RunConfig, reference: &Loaded) -> Result<Vec<RegionSpec>> {
    regions_from_reference(&reference.curve, cfg.mass, &cfg.regions)
        .with_context(|| format!("building regions from the reference {}", reference.label))
}

/// `# region cutoff_cm-1 rms_cm-1 n_points offset_cm-1` rows.
pub fn rms_rows(regions: &[RegionSpec], scores: &[RmsScore]) -> String {
    let mut s = String::from("# region cutoff_cm-1 rms_cm-1 n_points offset_cm-1\n");
    for (r, sc) in regions.iter().zip(scores) {
        let _ = writeln!(
            s,
            "{} {:.6} {:.6} {} {:.6}",
            r.label,
            r.energy_cutoff_invcm,
            sc.rms_invcm,
            sc.n_points(),
            sc.offset_invcm
        );
    }
    s
}

/// Completeness lines with a warning for every band below the floor.
pub fn completeness_section(measured_only: &[BandCompleteness], merged: &[BandCompleteness]) -> String {
    let mut s = String::from("# completeness: band measured_only merged\n");
    for (a, b) in measured_only.iter().zip(merged) {
        let _ = writeln!(s, "{} {:.6} {:.6}", b.band, a.value, b.value);
    }
    for b in merged.iter().filter(|b| b.flagged) {
        let _ = writeln!(s, "warning: band {} completeness {:.6} is below {COMPLETENESS_FLOOR}", b.band, b.value);
    }
    s
}

fn invert(cfg: &RunConfig, inputs: &Inputs, out: &mut Output, config_echo: &str) -> Result<()> {
    let (label, setup) = prepare(cfg, inputs)?;
    let Extraction { overlaps, completeness, extracted } = setup.extract(&setup.measured)?;
    let measured_only = fluorinv_core::inversion::completeness_report(&overlaps.measured_only());
    let grid = *extracted.curve.grid();
    let vr = extracted.valid_range;

    out.write("potential.txt", &extracted.curve.to_text())?;

    let mut density = String::from("# R_bohr density\n");
    for (k, d) in extracted.density.iter().enumerate() {
        let _ = writeln!(density, "{:.10} {d:.12e}", grid.r(k));
    }
    out.write("density.txt", &density)?;

    let mut merged = String::from("# v_upper J_upper v_lower J_lower omega_cm-1 intensity amplitude provenance\n");
    for b in &overlaps.bands {
        for e in &b.entries {
            let _ = writeln!(
                merged,
                "{} {} {} {} {:.6} {:.12e} {:.12e} {}",
                b.band.v,
                b.band.j,
                e.lower,
                b.band.j,
                to_invcm(e.omega),
                e.amplitude * e.amplitude,
                e.amplitude,
                e.provenance
            );
        }
    }
    out.write("overlaps.txt", &merged)?;

    let mut diag = String::new();
    let _ = writeln!(diag, "# diagnostics for potential.txt");
    let _ = writeln!(diag, "valid_range_index = {} {}", vr.start, vr.end);
    let _ = writeln!(diag, "valid_range_bohr = {:.6} {:.6}", vr.r_inner, vr.r_outer);
    let _ = writeln!(diag, "density_cutoff = {}", extracted.density_cutoff);
    let _ = writeln!(diag, "extrapolation = {}", extracted.extrapolation.describe());
    let _ = writeln!(diag, "density_profile = density.txt");
    let _ = writeln!(diag, "lines_measured = {}", overlaps.count(Provenance::Measured));
    let _ = writeln!(diag, "lines_regenerated = {}", overlaps.count(Provenance::Regenerated));
    diag.push('\n');
    diag.push_str(&completeness_section(&measured_only, &completeness));
    diag.push_str("\n# config used\n");
    diag.push_str(config_echo);
    out.write("potential_diagnostics.txt", &diag)?;

    let mut report = String::new();
    let _ = writeln!(report, "# inversion report");
    let _ = writeln!(report, "spectrum: {label}");
    let _ = writeln!(
        report,
        "morse: T_e={:.4} cm-1 D_e={:.4} cm-1 beta={:.6} bohr-1 R_e={:.6} bohr",
        setup.morse.t_e_invcm(),
        setup.morse.d_e_invcm(),
        setup.morse.beta,
        setup.morse.r_e
    );
    let _ = writeln!(
        report,
        "lines: {} measured, {} regenerated",
        overlaps.count(Provenance::Measured),
        overlaps.count(Provenance::Regenerated)
    );
    for w in &overlaps.warnings {
        let _ = writeln!(report, "warning: {w}");
    }
    report.push('\n');
    report.push_str(&completeness_section(&measured_only, &completeness));
    report.push('\n');
    match &inputs.reference {
        Some(reference) => {
            let regions = regions(cfg, reference)?;
            let scores = score_regions(&extracted.curve, &reference.curve, &regions, cfg.gauge)?;
            let _ = writeln!(report, "scoring: reference {} (gauge {})", reference.label, cfg.gauge);
            report.push_str(&rms_rows(&regions, &scores));
        }
        None => report.push_str("scoring: absent (no reference provided)\n"),
    }
    out.write("report.txt", &report)
}

fn noise_study(cfg: &RunConfig, inputs: &Inputs, out: &mut Output) -> Result<()> {
    let reference = inputs.reference.as_ref().ok_or_else(|| anyhow!("noise-study needs a reference; reference = none"))?;
    let regions = regions(cfg, reference)?;
    let (_, setup) = prepare(cfg, inputs)?;
    let study = NoiseStudyConfig {
        rel_rms_levels: cfg.noise_levels.clone(),
        n_trials: cfg.noise_trials,
        seed: cfg.seed,
        distribution: cfg.noise_distribution,
        bootstrap: cfg.noise_bootstrap,
    };
    let report = run_noise_study(&setup, &reference.curve, &study, &regions)?;
    let mut table = report.table();
    for l in &report.levels {
        let _ = writeln!(table, "# level {}: {} intensities clamped at zero", l.rel_rms, l.clamped);
    }
    out.write("noise_table.txt", &table)?;
    out.write("noise_rows.txt", &report.machine_rows())
}

fn rms(cfg: &RunConfig, inputs: &Inputs, out: &mut Output) -> Result<()> {
    let test = inputs.test.as_ref().ok_or_else(|| anyhow!("rms needs a test curve; set test = <file>"))?;
    let reference = inputs.reference.as_ref().ok_or_else(|| anyhow!("rms needs a reference; reference = none"))?;
    let regions = regions(cfg, reference)?;
    let scores = score_regions(&test.curve, &reference.curve, &regions, cfg.gauge)?;
    let mut s = String::new();
    let _ = writeln!(s, "# test {} against reference {} (gauge {})", test.label, reference.label, cfg.gauge);
    s.push_str(&rms_rows(&regions, &scores));
    out.write("rms_report.txt", &s)
}
