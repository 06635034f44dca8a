//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs as a plain binary so the verdict lines are always printed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{displaced_ho_overlap, exact_twin_overlaps, harmonic};
use fluorinv_core::analysis::{regions_from_reference, run_noise_study, score_regions, Gauge, NoiseStudyConfig};
use fluorinv_core::inversion::{extract_potential, invert_potential, ExtrapolationMethod, COMPLETENESS_FLOOR};
use fluorinv_core::pipeline::Extraction;
use fluorinv_core::schrodinger::solve_bound_states;
use fluorinv_core::spectrum::{apply_threshold, franck_condon_amplitude, ThresholdMode};
use fluorinv_core::twin::{TwinSystem, DETECTION_THRESHOLD};
use fluorinv_core::units::{to_hartree, to_invcm};
use fluorinv_core::{EffectivePotentialSpec, PipelineConfig, PipelineSetup, RadialGrid, ReducedMass, RegionSpec};

const MORSE_LEVEL_TOL_INVCM: f64 = 1e-4;
const HARMONIC_REL_TOL: f64 = 1e-6;
const SOLVER_BUDGET: Duration = Duration::from_secs(5);

const ROUND_TRIP_TOL_INVCM: f64 = 0.05;
const ROUND_TRIP_N_LOWER: usize = 50;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(30);

const TWIN_E2_TOL_INVCM: f64 = 0.5;
const TWIN_E10_TOL_INVCM: f64 = 10.0;
const TWIN_BUDGET: Duration = Duration::from_secs(120);

const NOISE_LEVELS: [f64; 4] = [0.0, 0.02, 0.05, 0.10];
const NOISE_TRIALS: usize = 100;
const NOISE_BUDGET: Duration = Duration::from_secs(15 * 60);

const SCALE_REL_TOL: f64 = 1e-10;
const GAUGE_TOL_INVCM: f64 = 1e-8;

const FC_TOL: f64 = 1e-6;
const FC_IDENTITY_TOL: f64 = 1e-8;

const REGION_KS: [usize; 4] = [2, 5, 10, 20];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mass = ReducedMass::lirb();
    let p = fluorinv_core::MorseParams::from_invcm(19000.0, 4000.0, 0.44, 7.05);
    let spec = EffectivePotentialSpec::new(p.curve(RadialGrid::lirb_default()).unwrap(), mass, 0).unwrap();
    let morse_err = max_abs(solve_bound_states(&spec, 20).unwrap().iter().map(|s| s.energy_invcm() - p.level_invcm(s.v, mass)));

    let grid = RadialGrid::new(2.0, 22.0, 2001).unwrap();
    let spec = EffectivePotentialSpec::new(harmonic(grid, 1.0, 1.0, 12.0), ReducedMass(1.0), 0).unwrap();
    let ho_err = max_abs(solve_bound_states(&spec, 10).unwrap().iter().map(|s| {
        let exact = s.v as f64 + 0.5;
        (s.energy - exact) / exact
    }));
    let elapsed = t.elapsed();
    verdict(
        morse_err < MORSE_LEVEL_TOL_INVCM && ho_err < HARMONIC_REL_TOL && elapsed < SOLVER_BUDGET,
        format!(
            "Morse v<=20 max |dE| = {morse_err:.2e} cm-1 (tol {MORSE_LEVEL_TOL_INVCM:e}); harmonic v<=10 max rel = {ho_err:.2e} (tol {HARMONIC_REL_TOL:e}); {elapsed:.2?} (limit {SOLVER_BUDGET:?})"
        ),
    )
}

fn criterion_2(twin: &TwinSystem, regions: &[RegionSpec]) -> Verdict {
    let t = Instant::now();
    let (set, lower) = exact_twin_overlaps(twin, ROUND_TRIP_N_LOWER);
    let ex = extract_potential(&set, &lower, &twin.ground, 1e-3, ExtrapolationMethod::LinearSlope).unwrap();
    let rms = fluorinv_core::analysis::rms_error(&ex.curve, &twin.excited, &regions[0], Gauge::Absolute).unwrap();
    let elapsed = t.elapsed();
    verdict(
        rms.rms_invcm < ROUND_TRIP_TOL_INVCM && elapsed < ROUND_TRIP_BUDGET,
        format!(
            "exact overlaps, {} lower states/band: RMS over {} = {:.2e} cm-1 on {} points, no gauge shift (tol {ROUND_TRIP_TOL_INVCM}); {elapsed:.2?} (limit {ROUND_TRIP_BUDGET:?})",
            ROUND_TRIP_N_LOWER, rms.label, rms.rms_invcm, rms.n_points()
        ),
    )
}

struct Pipeline {
    twin: TwinSystem,
    measured: fluorinv_core::SpectrumDataset,
    setup: PipelineSetup,
    full: Extraction,
    thin: Extraction,
    elapsed: Duration,
}

fn run_pipeline(twin: TwinSystem) -> Pipeline {
    let t = Instant::now();
    let measured = twin.measured_spectrum(31, DETECTION_THRESHOLD).unwrap();
    let setup = PipelineSetup::prepare(&twin.ground, &measured, PipelineConfig::new(twin.mass)).unwrap();
    let full = setup.extract(&measured).unwrap();
    let thin = setup.extract_measured_only(&measured).unwrap();
    Pipeline { twin, measured, setup, full, thin, elapsed: t.elapsed() }
}

fn scores(p: &Pipeline, ex: &Extraction, regions: &[RegionSpec]) -> Vec<f64> {
    score_regions(&ex.extracted.curve, &p.twin.excited, regions, p.setup.config.gauge)
        .unwrap()
        .iter()
        .map(|s| s.rms_invcm)
        .collect()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" / ")
}

fn criterion_3(p: &Pipeline, regions: &[RegionSpec]) -> Verdict {
    let s = scores(p, &p.full, regions);
    let monotone = s.windows(2).all(|w| w[1] >= w[0]);
    verdict(
        s[0] < TWIN_E2_TOL_INVCM && s[2] < TWIN_E10_TOL_INVCM && monotone && p.elapsed < TWIN_BUDGET,
        format!(
            "lines kept {:?}; RMS V<E(2/5/10/20) = {} cm-1 (tol {TWIN_E2_TOL_INVCM} / - / {TWIN_E10_TOL_INVCM} / -, monotone: {monotone}); {:.2?} (limit {TWIN_BUDGET:?})",
            p.measured.counts_per_band(),
            fmt_list(&s),
            p.elapsed
        ),
    )
}

fn criterion_4(p: &Pipeline, regions: &[RegionSpec]) -> Verdict {
    let before: Vec<f64> = p.thin.completeness.iter().map(|c| c.value).collect();
    let after: Vec<f64> = p.full.completeness.iter().map(|c| c.value).collect();
    let rises = before.iter().zip(&after).all(|(b, a)| a > b && *a >= COMPLETENESS_FLOOR);
    let full = scores(p, &p.full, regions);
    let thin = scores(p, &p.thin, regions);
    let better = full.iter().zip(&thin).all(|(f, t)| f <= t);
    verdict(
        rises && better,
        format!(
            "completeness {} -> {} (floor {COMPLETENESS_FLOOR}); RMS measured-only {} vs regenerated {} cm-1",
            fmt_list(&before),
            fmt_list(&after),
            fmt_list(&thin),
            fmt_list(&full)
        ),
    )
}

fn criterion_5(p: &Pipeline, regions: &[RegionSpec]) -> Verdict {
    let t = Instant::now();
    let config = NoiseStudyConfig { rel_rms_levels: NOISE_LEVELS.to_vec(), n_trials: NOISE_TRIALS, ..Default::default() };
    let report = run_noise_study(&p.setup, &p.twin.excited, &config, regions).unwrap();
    let elapsed = t.elapsed();
    println!("{}", report.table());

    let clean = scores(p, &p.full, regions);
    let zero_exact = report.levels[0].regions.iter().zip(&clean).all(|(r, c)| r.average_potential_rms == *c);
    let mut separated = true;
    let mut worst_margin = f64::INFINITY;
    for i in 0..regions.len() {
        for w in report.levels[1..].windows(2) {
            let (a, b) = (&w[0].regions[i], &w[1].regions[i]);
            let se = (a.average_potential_se.powi(2) + b.average_potential_se.powi(2)).sqrt();
            let margin = (b.average_potential_rms - a.average_potential_rms) / se;
            worst_margin = worst_margin.min(margin);
            separated &= margin > 1.0;
        }
    }
    let all_ok = report.levels.iter().all(|l| l.n_failed == 0);
    verdict(
        zero_exact && separated && elapsed < NOISE_BUDGET,
        format!(
            "seed {}, {} trials/level: level 0 equals noiseless run: {zero_exact}; 2%<5%<10% in every region, smallest separation {worst_margin:.2} standard errors (need > 1); all trials inverted: {all_ok}; {elapsed:.2?} (limit {NOISE_BUDGET:?})",
            config.seed, config.n_trials
        ),
    )
}

fn criterion_6(p: &Pipeline, regions: &[RegionSpec]) -> Verdict {
    let (set, lower) = exact_twin_overlaps(&p.twin, 31);
    let base = invert_potential(&set, &lower, &p.twin.ground, 1e-3).unwrap();
    let mut scale_err: f64 = 0.0;
    for factor in [-1.0, 1e-3, 7.5, 1e4] {
        let s = invert_potential(&set.scaled(factor), &lower, &p.twin.ground, 1e-3).unwrap();
        let vr = base.valid_range;
        for k in vr.start..=vr.end {
            let v = base.curve.values()[k];
            scale_err = scale_err.max((s.curve.values()[k] - v).abs() / v.abs());
        }
    }
    let mut gauge_err: f64 = 0.0;
    for c in [-2500.0, 0.37, 12000.0] {
        let s = invert_potential(&set.omega_shifted(to_hartree(c)), &lower, &p.twin.ground, 1e-3).unwrap();
        let vr = base.valid_range;
        for k in vr.start..=vr.end {
            gauge_err = gauge_err.max((to_invcm(s.curve.values()[k] - base.curve.values()[k]) - c).abs());
        }
    }
    let full = p.twin.full_spectrum(31).unwrap();
    let idempotent = [ThresholdMode::Global, ThresholdMode::PerBand].iter().all(|&m| {
        let once = apply_threshold(&full, DETECTION_THRESHOLD, m).unwrap();
        apply_threshold(&once, DETECTION_THRESHOLD, m).unwrap() == once
    });
    let config = NoiseStudyConfig { rel_rms_levels: vec![0.05], n_trials: 12, bootstrap: 50, ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_noise_study(&p.setup, &p.twin.excited, &config, regions).unwrap())
    };
    let (a, b, c) = (run(1), run(1), run(4));
    let deterministic = a.machine_rows() == b.machine_rows()
        && a.table() == b.table()
        && a.machine_rows() == c.machine_rows()
        && a.table() == c.table();
    verdict(
        scale_err <= SCALE_REL_TOL && gauge_err < GAUGE_TOL_INVCM && idempotent && deterministic,
        format!(
            "dipole scale max rel change {scale_err:.2e} (tol {SCALE_REL_TOL:e}); gauge shift max error {gauge_err:.2e} cm-1 (tol {GAUGE_TOL_INVCM:e}); threshold idempotent: {idempotent}; noise tables bit-identical across reruns and thread counts: {deterministic}"
        ),
    )
}

fn criterion_7() -> Verdict {
    let grid = RadialGrid::new(2.0, 22.0, 2001).unwrap();
    let states = |center: f64| {
        let spec = EffectivePotentialSpec::new(harmonic(grid, 1.0, 1.0, center), ReducedMass(1.0), 0).unwrap();
        solve_bound_states(&spec, 8).unwrap()
    };
    let lower = states(12.0);
    let mut displaced_err: f64 = 0.0;
    for d in [0.5, 1.5] {
        let upper = states(12.0 + d);
        for (m, chi) in lower.iter().enumerate() {
            for (n, phi) in upper.iter().enumerate() {
                let f = franck_condon_amplitude(chi, phi).unwrap();
                displaced_err = displaced_err.max((f - displaced_ho_overlap(m, n, 1.0, 1.0, d)).abs());
            }
        }
    }
    let mut identity_err: f64 = 0.0;
    for (i, a) in lower.iter().enumerate() {
        for (j, b) in lower.iter().enumerate() {
            let f = franck_condon_amplitude(a, b).unwrap();
            identity_err = identity_err.max((f - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    verdict(
        displaced_err < FC_TOL && identity_err < FC_IDENTITY_TOL,
        format!(
            "displaced wells (d = 0.5, 1.5; v <= 8) max error {displaced_err:.2e} (tol {FC_TOL:e}); identical wells max |S - I| {identity_err:.2e} (tol {FC_IDENTITY_TOL:e})"
        ),
    )
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        }
    }
}

fn main() -> ExitCode {
    let twin = TwinSystem::lirb_like().expect("twin");
    let regions = regions_from_reference(&twin.excited, twin.mass, &REGION_KS).expect("regions");
    let mut results: Vec<(&str, Verdict)> = Vec::new();

    results.push(("1 solver oracle", guarded(criterion_1)));
    results.push(("2 forward/inverse round trip", guarded(|| criterion_2(&twin, &regions))));
    let pipeline = catch_unwind(AssertUnwindSafe(|| run_pipeline(twin.clone()))).ok();
    let with_pipeline = |f: &dyn Fn(&Pipeline) -> Verdict| match &pipeline {
        Some(p) => guarded(|| f(p)),
        None => verdict(false, "twin pipeline failed to run".into()),
    };
    results.push(("3 synthetic-twin pipeline", with_pipeline(&|p| criterion_3(p, &regions))));
    results.push(("4 regeneration improves", with_pipeline(&|p| criterion_4(p, &regions))));
    results.push(("5 noise study trend", with_pipeline(&|p| criterion_5(p, &regions))));
    results.push(("6 invariances", with_pipeline(&|p| criterion_6(p, &regions))));
    results.push(("7 Franck-Condon oracle", guarded(criterion_7)));

    let mut failed = 0;
    for (name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            failed += 1;
        }
        println!("[{tag}] criterion {name}: {}", v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
