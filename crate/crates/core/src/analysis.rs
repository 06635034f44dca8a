//! Region-wise RMS scoring against a reference curve and the seeded
//! intensity-noise robustness study.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numgrid::PotentialCurve;
use crate::pipeline::PipelineSetup;
use crate::schrodinger::{solve_bound_states, EffectivePotentialSpec};
use crate::spectrum::{Provenance, SpectrumDataset};
use crate::units::{to_invcm, ReducedMass};

/// Region V(R) < cutoff of the reference curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub label: String,
    pub energy_cutoff_invcm: f64,
}

/// Regions V < E(v′=k) for each k, with levels of `reference` at J = 0.
pub fn regions_from_reference(reference: &PotentialCurve, mass: ReducedMass, ks: &[usize]) -> Result<Vec<RegionSpec>> {
    let kmax = ks.iter().copied().max().ok_or_else(|| Error::Config("empty region list".into()))?;
    let spec = EffectivePotentialSpec::new(reference.clone(), mass, 0)?;
    let levels = solve_bound_states(&spec, kmax)?;
    let regions: Vec<RegionSpec> = ks
        .iter()
        .map(|&k| RegionSpec { label: format!("V<E({k})"), energy_cutoff_invcm: levels[k].energy_invcm() })
        .collect();
    validate_regions(&regions)?;
    Ok(regions)
}

pub fn validate_regions(regions: &[RegionSpec]) -> Result<()> {
    if regions.windows(2).any(|w| !(w[1].energy_cutoff_invcm > w[0].energy_cutoff_invcm)) {
        return Err(Error::Config("region cutoffs must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// Compare absolute values.
    Absolute,
    /// Shift the test curve so its minimum over the region equals the
    /// reference minimum.
    #[default]
    AlignMinimum,
}

impl FromStr for Gauge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(Gauge::Absolute),
            "align-minimum" => Ok(Gauge::AlignMinimum),
            other => Err(Error::Config(format!("unknown gauge '{other}' (expected absolute or align-minimum)"))),
        }
    }
}

impl std::fmt::Display for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Gauge::Absolute => "absolute",
            Gauge::AlignMinimum => "align-minimum",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsScore {
    pub label: String,
    pub rms_invcm: f64,
    /// Reference grid indices inside the region.
    pub points: Vec<usize>,
    pub offset_invcm: f64,
}

impl RmsScore {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }
}

/// RMS of test − reference over the reference grid points where the
/// reference lies below the region cutoff. The test curve is evaluated at
/// those points by spline.
pub fn rms_error(test: &PotentialCurve, reference: &PotentialCurve, region: &RegionSpec, gauge: Gauge) -> Result<RmsScore> {
    let grid = reference.grid();
    let points: Vec<usize> = (0..grid.len())
        .filter(|&k| to_invcm(reference.values()[k]) < region.energy_cutoff_invcm)
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyRegion(region.label.clone()));
    }
    let test_vals = points.iter().map(|&k| test.interpolate(grid.r(k))).collect::<Result<Vec<_>>>()?;
    let ref_vals: Vec<f64> = points.iter().map(|&k| reference.values()[k]).collect();
    let offset = match gauge {
        Gauge::Absolute => 0.0,
        Gauge::AlignMinimum => {
            let rmin = ref_vals.iter().copied().fold(f64::INFINITY, f64::min);
            let tmin = test_vals.iter().copied().fold(f64::INFINITY, f64::min);
            rmin - tmin
        }
    };
    let sum: f64 = test_vals.iter().zip(&ref_vals).map(|(t, r)| (t + offset - r).powi(2)).sum();
    Ok(RmsScore {
        label: region.label.clone(),
        rms_invcm: to_invcm((sum / points.len() as f64).sqrt()),
        points,
        offset_invcm: to_invcm(offset),
    })
}

pub fn score_regions(test: &PotentialCurve, reference: &PotentialCurve, regions: &[RegionSpec], gauge: Gauge) -> Result<Vec<RmsScore>> {
    regions.iter().map(|r| rms_error(test, reference, r, gauge)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
    /// Zero-mean uniform with the same rms.
    Uniform,
}

impl FromStr for NoiseDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseDistribution::Gaussian),
            "uniform" => Ok(NoiseDistribution::Uniform),
            other => Err(Error::Config(format!("unknown noise distribution '{other}'"))),
        }
    }
}

impl std::fmt::Display for NoiseDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseDistribution::Gaussian => "gaussian",
            NoiseDistribution::Uniform => "uniform",
        })
    }
}

/// Deterministic RNG stream for `(seed, trial)`; independent of thread
/// scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub spectrum: SpectrumDataset,
    /// Intensities that went negative and were clamped to zero.
    pub clamped: usize,
}

/// Adds zero-mean noise with standard deviation `rel_rms` × mean measured
/// |d|² to every measured intensity. Regenerated lines are left untouched.
pub fn perturb_intensities_with(
    spectrum: &SpectrumDataset,
    rel_rms: f64,
    distribution: NoiseDistribution,
    rng: &mut impl Rng,
) -> Result<Perturbed> {
    if !(0.0..1.0).contains(&rel_rms) {
        return Err(Error::Config(format!("relative rms must lie in [0, 1), got {rel_rms}")));
    }
    if rel_rms == 0.0 {
        return Ok(Perturbed { spectrum: spectrum.clone(), clamped: 0 });
    }
    let measured: Vec<f64> = spectrum
        .lines
        .iter()
        .filter(|l| l.provenance == Provenance::Measured)
        .map(|l| l.intensity)
        .collect();
    if measured.is_empty() {
        return Ok(Perturbed { spectrum: spectrum.clone(), clamped: 0 });
    }
    let sigma = rel_rms * measured.iter().sum::<f64>() / measured.len() as f64;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let half_width = 3f64.sqrt();
    let mut clamped = 0;
    let mut out = spectrum.clone();
    for line in out.lines.iter_mut().filter(|l| l.provenance == Provenance::Measured) {
        let z = match distribution {
            NoiseDistribution::Gaussian => normal.sample(rng),
            NoiseDistribution::Uniform => rng.random_range(-half_width..half_width),
        };
        let v = line.intensity + sigma * z;
        if v < 0.0 {
            clamped += 1;
            line.intensity = 0.0;
        } else {
            line.intensity = v;
        }
        line.amplitude = None;
    }
    Ok(Perturbed { spectrum: out, clamped })
}

/// [`perturb_intensities_with`] using Gaussian noise from stream 0 of `seed`.
pub fn perturb_intensities(spectrum: &SpectrumDataset, rel_rms: f64, seed: u64) -> Result<Perturbed> {
    perturb_intensities_with(spectrum, rel_rms, NoiseDistribution::Gaussian, &mut trial_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudyConfig {
    pub rel_rms_levels: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub distribution: NoiseDistribution,
    /// Bootstrap resamples for the standard error of the averaged-potential
    /// score; 0 disables it.
    pub bootstrap: usize,
}

impl Default for NoiseStudyConfig {
    fn default() -> Self {
        Self {
            rel_rms_levels: vec![0.02, 0.05, 0.10],
            n_trials: 100,
            seed: 20130501,
            distribution: NoiseDistribution::Gaussian,
            bootstrap: 200,
        }
    }
}

impl NoiseStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        if let Some(l) = self.rel_rms_levels.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::Config(format!("noise level {l} outside [0, 1)")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStat {
    pub label: String,
    /// RMS error of the trial-averaged potential.
    pub average_potential_rms: f64,
    /// Bootstrap standard error of `average_potential_rms` (NaN if disabled).
    pub average_potential_se: f64,
    /// Mean and standard deviation of the per-trial RMS errors.
    pub trial_mean: f64,
    pub trial_std: f64,
}

impl RegionStat {
    pub fn trial_standard_error(&self, n_ok: usize) -> f64 {
        if n_ok == 0 {
            f64::NAN
        } else {
            self.trial_std / (n_ok as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub rel_rms: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    pub clamped: usize,
    pub regions: Vec<RegionStat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudyReport {
    pub config: NoiseStudyConfig,
    pub levels: Vec<LevelResult>,
}

impl NoiseStudyReport {
    /// Rows `level region mean_rms_cm-1 std_cm-1 n_ok n_failed`, where
    /// `mean_rms` scores the trial-averaged potential and `std` is the
    /// spread of the per-trial scores.
    pub fn machine_rows(&self) -> String {
        let mut out = String::from("# level region mean_rms_cm-1 std_cm-1 n_ok n_failed\n");
        for l in &self.levels {
            for r in &l.regions {
                let _ = writeln!(
                    out,
                    "{} {} {:.6} {:.6} {} {}",
                    l.rel_rms, r.label, r.average_potential_rms, r.trial_std, l.n_ok, l.n_failed
                );
            }
        }
        out
    }

    /// Aligned table: one row per region, one column per noise level, each
    /// cell the averaged-potential score ± its bootstrap standard error.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<12}", "Region");
        for l in &self.levels {
            let _ = write!(out, " {:>22}", format!("RMS @ {:.0}% (cm-1)", l.rel_rms * 100.0));
        }
        out.push('\n');
        let n_regions = self.levels.first().map_or(0, |l| l.regions.len());
        for i in 0..n_regions {
            let _ = write!(out, "{:<12}", self.levels[0].regions[i].label);
            for l in &self.levels {
                let r = &l.regions[i];
                let _ = write!(out, " {:>22}", format!("{:.3} ± {:.3}", r.average_potential_rms, r.average_potential_se));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<12}", "trials ok");
        for l in &self.levels {
            let _ = write!(out, " {:>22}", format!("{}/{}", l.n_ok, l.n_ok + l.n_failed));
        }
        out.push('\n');
        out
    }
}

/// Extracted curve values, region scores and clamp count of one trial.
type TrialOutcome = (Vec<f64>, Vec<f64>, usize);

/// For each noise level and trial: perturb the measured intensities, merge
/// with the fixed Morse model, invert, extrapolate, and score. Potentials are
/// averaged pointwise over the successful trials before the headline score.
pub fn run_noise_study(
    setup: &PipelineSetup,
    reference: &PotentialCurve,
    config: &NoiseStudyConfig,
    regions: &[RegionSpec],
) -> Result<NoiseStudyReport> {
    config.validate()?;
    validate_regions(regions)?;
    let gauge = setup.config.gauge;
    let mut levels = Vec::with_capacity(config.rel_rms_levels.len());
    for (level_index, &rel_rms) in config.rel_rms_levels.iter().enumerate() {
        let trials: Vec<Result<TrialOutcome>> = (0..config.n_trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(config.seed, t as u64);
                let p = perturb_intensities_with(&setup.measured, rel_rms, config.distribution, &mut rng)?;
                let ex = setup.extract(&p.spectrum)?;
                let scores = score_regions(&ex.extracted.curve, reference, regions, gauge)?;
                Ok((ex.extracted.curve.values().to_vec(), scores.iter().map(|s| s.rms_invcm).collect(), p.clamped))
            })
            .collect();

        let mut curves: Vec<Vec<f64>> = Vec::new();
        let mut per_trial: Vec<Vec<f64>> = Vec::new();
        let mut n_failed = 0;
        let mut clamped = 0;
        for t in trials {
            match t {
                Ok((values, scores, c)) => {
                    curves.push(values);
                    per_trial.push(scores);
                    clamped += c;
                }
                Err(_) => n_failed += 1,
            }
        }
        let n_ok = per_trial.len();
        let regions_out = if n_ok == 0 {
            regions
                .iter()
                .map(|r| RegionStat {
                    label: r.label.clone(),
                    average_potential_rms: f64::NAN,
                    average_potential_se: f64::NAN,
                    trial_mean: f64::NAN,
                    trial_std: f64::NAN,
                })
                .collect()
        } else {
            let grid = *setup.ground.grid();
            let average = |pick: &mut dyn Iterator<Item = usize>| -> Result<Vec<f64>> {
                // mean as first + Σ(x − first)/n: exact when all trials agree
                let picks: Vec<usize> = pick.collect();
                let first = &curves[picks[0]];
                let mut sum = vec![0.0; grid.len()];
                for &k in &picks {
                    sum.iter_mut().zip(curves[k].iter().zip(first)).for_each(|(s, (v, f))| *s += v - f);
                }
                let n = picks.len() as f64;
                let avg = PotentialCurve::new(grid, first.iter().zip(&sum).map(|(f, s)| f + s / n).collect())?;
                Ok(score_regions(&avg, reference, regions, gauge)?.iter().map(|s| s.rms_invcm).collect())
            };
            let avg_scores = average(&mut (0..n_ok))?;
            let se = if config.bootstrap > 0 && n_ok > 1 {
                let mut rng = trial_rng(config.seed, u64::MAX - level_index as u64);
                let mut samples = Vec::with_capacity(config.bootstrap);
                for _ in 0..config.bootstrap {
                    let picks: Vec<usize> = (0..n_ok).map(|_| rng.random_range(0..n_ok)).collect();
                    samples.push(average(&mut picks.into_iter())?);
                }
                (0..regions.len()).map(|i| sample_std(samples.iter().map(|s| s[i]))).collect()
            } else {
                vec![f64::NAN; regions.len()]
            };
            regions
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let xs = per_trial.iter().map(|t| t[i]);
                    RegionStat {
                        label: r.label.clone(),
                        average_potential_rms: avg_scores[i],
                        average_potential_se: se[i],
                        trial_mean: per_trial.iter().map(|t| t[i]).sum::<f64>() / n_ok as f64,
                        trial_std: sample_std(xs),
                    }
                })
                .collect()
        };
        levels.push(LevelResult { rel_rms, n_ok, n_failed, clamped, regions: regions_out });
    }
    Ok(NoiseStudyReport { config: config.clone(), levels })
}

fn sample_std(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    (xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::MorseParams;
    use crate::numgrid::RadialGrid;
    use crate::spectrum::{Band, EmissionLine};
    use crate::units::to_hartree;

    fn reference() -> PotentialCurve {
        MorseParams::from_invcm(19000.0, 4000.0, 0.44, 7.05).curve(RadialGrid::lirb_default()).unwrap()
    }

    fn region(cut: f64) -> RegionSpec {
        RegionSpec { label: format!("V<{cut}"), energy_cutoff_invcm: cut }
    }

    #[test]
    fn identical_curves_score_zero() {
        let r = reference();
        let s = rms_error(&r, &r, &region(16000.0), Gauge::AlignMinimum).unwrap();
        assert_eq!(s.rms_invcm, 0.0);
        assert!(s.n_points() > 10);
        assert!(s.points.iter().all(|&k| r.values_invcm()[k] < 16000.0));
    }

    #[test]
    fn constant_offset_depends_on_gauge() {
        let r = reference();
        let shifted = r.shifted(to_hartree(1.0)).unwrap();
        let abs = rms_error(&shifted, &r, &region(16000.0), Gauge::Absolute).unwrap();
        assert!((abs.rms_invcm - 1.0).abs() < 1e-9);
        assert_eq!(abs.offset_invcm, 0.0);
        let aligned = rms_error(&shifted, &r, &region(16000.0), Gauge::AlignMinimum).unwrap();
        assert!(aligned.rms_invcm < 1e-9);
        assert!((aligned.offset_invcm + 1.0).abs() < 1e-9);
    }

    #[test]
    fn region_below_minimum_is_empty() {
        let r = reference();
        assert!(matches!(rms_error(&r, &r, &region(14000.0), Gauge::Absolute), Err(Error::EmptyRegion(_))));
    }

    #[test]
    fn regions_follow_reference_levels() {
        let regions = regions_from_reference(&reference(), ReducedMass::lirb(), &[2, 5, 10, 20]).unwrap();
        let labels: Vec<&str> = regions.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["V<E(2)", "V<E(5)", "V<E(10)", "V<E(20)"]);
        let p = MorseParams::from_invcm(19000.0, 4000.0, 0.44, 7.05);
        for (r, k) in regions.iter().zip([2, 5, 10, 20]) {
            assert!((r.energy_cutoff_invcm - p.level_invcm(k, ReducedMass::lirb())).abs() < 1e-3);
        }
        assert!(validate_regions(&[region(2.0), region(1.0)]).is_err());
        assert!(regions_from_reference(&reference(), ReducedMass::lirb(), &[]).is_err());
    }

    fn flat_spectrum(n: usize) -> SpectrumDataset {
        let band = Band { v: 0, j: 0 };
        let lines = (0..n)
            .map(|i| EmissionLine {
                v_upper: 0,
                j_upper: 0,
                v_lower: i,
                j_lower: 0,
                omega_invcm: 14000.0 - 100.0 * i as f64,
                intensity: 0.4 + 0.02 * i as f64,
                amplitude: None,
                provenance: if i == n - 1 { Provenance::Regenerated } else { Provenance::Measured },
            })
            .collect();
        SpectrumDataset::new(lines, vec![band], None).unwrap()
    }

    #[test]
    fn zero_noise_is_identity_and_seeds_are_deterministic() {
        let s = flat_spectrum(8);
        assert_eq!(perturb_intensities(&s, 0.0, 7).unwrap().spectrum, s);
        let a = perturb_intensities(&s, 0.05, 7).unwrap();
        let b = perturb_intensities(&s, 0.05, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.spectrum, perturb_intensities(&s, 0.05, 8).unwrap().spectrum);
        // regenerated lines are never perturbed
        assert_eq!(a.spectrum.lines[7].intensity, s.lines[7].intensity);
        assert!(perturb_intensities(&s, 1.0, 7).is_err());
    }

    fn empirical_rel_std(dist: NoiseDistribution) -> Vec<f64> {
        let s = flat_spectrum(11);
        let measured: Vec<f64> = s.lines[..10].iter().map(|l| l.intensity).collect();
        let mean = measured.iter().sum::<f64>() / 10.0;
        let n = 10_000;
        let mut sums = [(0.0, 0.0); 10];
        for t in 0..n {
            let p = perturb_intensities_with(&s, 0.05, dist, &mut trial_rng(99, t)).unwrap();
            assert_eq!(p.clamped, 0);
            for (acc, (l, l0)) in sums.iter_mut().zip(p.spectrum.lines.iter().zip(&s.lines)) {
                let d = l.intensity - l0.intensity;
                acc.0 += d;
                acc.1 += d * d;
            }
        }
        sums.iter()
            .map(|(s1, s2)| {
                let m = s1 / n as f64;
                ((s2 / n as f64 - m * m) * n as f64 / (n - 1) as f64).sqrt() / mean
            })
            .collect()
    }

    #[test]
    fn gaussian_noise_has_requested_relative_rms() {
        for r in empirical_rel_std(NoiseDistribution::Gaussian) {
            assert!((r / 0.05 - 1.0).abs() < 0.02, "{r}");
        }
    }

    #[test]
    fn uniform_noise_has_requested_relative_rms() {
        for r in empirical_rel_std(NoiseDistribution::Uniform) {
            assert!((r / 0.05 - 1.0).abs() < 0.02, "{r}");
        }
    }

    #[test]
    fn negative_intensities_are_clamped_and_counted() {
        let mut s = flat_spectrum(4);
        s.lines[0].intensity = 1e-6;
        let mut total = 0;
        for t in 0..50 {
            let p = perturb_intensities_with(&s, 0.5, NoiseDistribution::Gaussian, &mut trial_rng(1, t)).unwrap();
            assert!(p.spectrum.lines.iter().all(|l| l.intensity >= 0.0));
            total += p.clamped;
        }
        assert!(total > 10);
    }

    #[test]
    fn study_config_is_validated() {
        let ok = NoiseStudyConfig::default();
        assert!(ok.validate().is_ok());
        assert!(NoiseStudyConfig { n_trials: 0, ..ok.clone() }.validate().is_err());
        assert!(NoiseStudyConfig { rel_rms_levels: vec![0.1, 1.5], ..ok.clone() }.validate().is_err());
        assert!(NoiseStudyConfig { rel_rms_levels: vec![-0.1], ..ok }.validate().is_err());
    }

    #[test]
    fn distribution_names_round_trip() {
        for d in [NoiseDistribution::Gaussian, NoiseDistribution::Uniform] {
            assert_eq!(d.to_string().parse::<NoiseDistribution>().unwrap(), d);
        }
        assert!("cauchy".parse::<NoiseDistribution>().is_err());
        for g in [Gauge::Absolute, Gauge::AlignMinimum] {
            assert_eq!(g.to_string().parse::<Gauge>().unwrap(), g);
        }
        assert!("shifted".parse::<Gauge>().is_err());
    }
}
