//! `fluorinv`: solve, synthesize, fit, invert and score from the command
//! line. Every run writes `manifest.txt` into the output directory.

mod commands;
mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{Command, Inputs, Output};
use config::{RunConfig, Settings, Source, OUT_ENV};

#[derive(Parser, Debug)]
#[command(name = "fluorinv", version, about = "Excited-state potentials from Q-branch fluorescence")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config file and $FLUORINV_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Detection threshold as a fraction of the strongest line.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    density_cutoff: Option<f64>,
    /// morse-continuation or linear-slope.
    #[arg(long, global = true)]
    extrapolation: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Read potential files in angstrom regardless of their header.
    #[arg(long, global = true)]
    angstrom: bool,
    /// Any config key, e.g. `--set bands="0:4 1:5"`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Bound states of one potential: levels.txt and states/.
    Solve,
    /// Forward Q-branch spectrum, thresholded and complete, with stick plots.
    Synth,
    /// Morse model from band origins and the intensity profile.
    FitMorse,
    /// Full extraction: regeneration, inversion, tails, scoring.
    Invert,
    /// Seeded intensity-noise robustness table.
    NoiseStudy,
    /// Region RMS of a test curve against the reference.
    Rms,
    /// Print every config key with its default and meaning.
    Schema,
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    if let Ok(dir) = std::env::var(OUT_ENV) {
        if !dir.is_empty() {
            s.set("out", &dir, Source::Env)?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set {kv}: expected KEY=VALUE"))?;
        s.set(k.trim(), v, Source::Flag).with_context(|| format!("--set {kv}"))?;
    }
    let flags: [(&str, Option<String>); 6] = [
        ("seed", cli.seed.map(|v| v.to_string())),
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
        ("threshold", cli.threshold.map(|v| v.to_string())),
        ("density_cutoff", cli.density_cutoff.map(|v| v.to_string())),
        ("extrapolation", cli.extrapolation.clone()),
        ("jobs", cli.jobs.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, &v, Source::Flag)?;
        }
    }
    if cli.angstrom {
        s.set("length_unit", "angstrom", Source::Flag)?;
    }
    Ok(s)
}

fn manifest(cmd: Command, settings: &Settings, inputs: Option<&Inputs>, out: &Output, status: &str) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "# fluorinv run manifest; the key lines below are a valid --config");
    let _ = writeln!(m, "# command: {}", cmd.name());
    let _ = writeln!(m, "# version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "# config_hash: sha256:{}", settings.hash());
    let config_file = settings.config_path.as_ref().map_or("none".to_string(), |p| p.display().to_string());
    let _ = writeln!(m, "# config_file: {config_file}");
    let _ = writeln!(m, "# seed: {}", settings.get("seed"));
    let _ = writeln!(m, "# threads: {}", rayon::current_num_threads());
    let _ = writeln!(m, "# status: {status}");
    for (key, path, digest) in inputs.map(|i| i.files.as_slice()).unwrap_or_default() {
        let _ = writeln!(m, "# input {key}: {} sha256:{digest}", path.display());
    }
    for a in &out.written {
        let _ = writeln!(m, "# artifact: {}", a.display());
    }
    m.push_str(&settings.echo());
    m
}

fn execute(cmd: Command, settings: &Settings) -> Result<()> {
    let cfg = RunConfig::from_settings(settings).context("invalid configuration")?;
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global().context("thread pool")?;
    }
    let inputs = Inputs::load(&cfg);
    let mut out = Output::new(&cfg.out)?;
    let result = inputs
        .as_ref()
        .map_err(|e| anyhow::anyhow!("{e:#}"))
        .and_then(|inputs| commands::run(cmd, &cfg, inputs, &mut out, &settings.echo()));
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("failed: {}", format!("{e:#}").replace('\n', " ")),
    };
    let text = manifest(cmd, settings, inputs.as_ref().ok(), &out, &status);
    std::fs::write(cfg.out.join("manifest.txt"), text)
        .with_context(|| format!("cannot write manifest in {}", cfg.out.display()))?;
    result?;
    eprintln!("{}: wrote {} artifacts to {}", cmd.name(), out.written.len() + 1, cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Synth => Command::Synth,
        Cmd::FitMorse => Command::FitMorse,
        Cmd::Invert => Command::Invert,
        Cmd::NoiseStudy => Command::NoiseStudy,
        Cmd::Rms => Command::Rms,
        Cmd::Schema => {
            print!("{}", config::schema_help());
            return ExitCode::SUCCESS;
        }
    };
    match resolve(&cli).and_then(|s| execute(cmd, &s)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
