use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fluorinv_core::spectrum::synthesize_spectrum;
use fluorinv_core::twin::{TwinSystem, DETECTION_THRESHOLD};
use fluorinv_core::{MorseParams, RadialGrid, ReducedMass};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fluorinv"));
    c.env_remove("FLUORINV_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("spawn fluorinv")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

/// Region name → rms from `# region cutoff rms n offset` rows.
fn rms_column(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .filter(|l| l.starts_with("V<E("))
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            (t[0].to_string(), t[2].parse().unwrap())
        })
        .collect()
}

fn write_curve(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn solve_morse_file_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let params = MorseParams::from_invcm(0.0, 5928.0, 0.4155, 6.55);
    let file = write_curve(tmp.path(), "morse.txt", &params.curve(RadialGrid::lirb_default()).unwrap().to_text());
    let out = tmp.path().join("out");
    let o = run(&["solve", "--set", &format!("ground={}", file.display()), "--set", "v_max=20"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let mass = ReducedMass::lirb();
    let levels = read(&out, "levels.txt");
    let mut n = 0;
    for line in levels.lines().filter(|l| !l.starts_with('#')) {
        let t: Vec<f64> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        let v = t[0] as usize;
        assert!((t[2] - params.level_invcm(v, mass)).abs() < 1e-4, "v={v}: {} vs {}", t[2], params.level_invcm(v, mass));
        n += 1;
    }
    assert_eq!(n, 21);
    assert!(out.join("states/v020_J0.txt").is_file());
}

#[test]
fn missing_file_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["invert", "--set", "ground=/no/such/ground.txt"], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/no/such/ground.txt"), "{}", stderr(&o));
    assert!(read(tmp.path(), "manifest.txt").contains("# status: failed"));
}

#[test]
fn too_many_levels_reports_the_bound_count() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--set", "v_max=500"], tmp.path());
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("requested 501") && msg.contains("only"), "{msg}");
}

#[test]
fn invalid_config_fails_before_any_work() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["invert", "--threshold", "1.5"], &out);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("threshold"), "{}", stderr(&o));
    assert!(!out.exists());

    let cfg = write_curve(tmp.path(), "bad.cfg", "colour = red\n");
    let o = run(&["invert", "--config", cfg.to_str().unwrap()], &out);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn synth_identical_potentials_gives_one_line_per_band() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--set", "excited=twin", "--set", "ground=twin"], &tmp.path().join("twin"));
    assert!(o.status.success(), "{}", stderr(&o));
    let ground = write_curve(tmp.path(), "g.txt", &TwinSystem::lirb_like().unwrap().ground.to_text());
    let g = format!("ground={}", ground.display());
    let e = format!("excited={}", ground.display());
    let out = tmp.path().join("same");
    let o = run(&["synth", "--set", &g, "--set", &e], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let spectrum = read(&out, "spectrum.txt");
    let rows: Vec<Vec<&str>> =
        spectrum.lines().filter(|l| !l.starts_with('#')).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 3, "{spectrum}");
    for r in rows {
        assert_eq!(r[0], r[2], "diagonal line expected: {r:?}");
    }
}

#[test]
fn synth_twin_count_matches_brute_force_and_echoes_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["synth"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let spectrum = read(tmp.path(), "spectrum.txt");
    assert!(spectrum.contains("# threshold_fraction 0.025"), "{spectrum}");
    let sticks = read(tmp.path(), "sticks.txt");
    let n_sticks = sticks.lines().filter(|l| !l.starts_with('#')).count();

    let twin = TwinSystem::lirb_like().unwrap();
    let full = synthesize_spectrum(&twin.ground, &twin.excited, twin.mass, &twin.bands, 31).unwrap();
    let max = full.lines.iter().map(|l| l.intensity).fold(0.0, f64::max);
    let expected = full.lines.iter().filter(|l| l.intensity >= DETECTION_THRESHOLD * max).count();
    assert_eq!(n_sticks, expected);
    assert_eq!(spectrum.lines().filter(|l| !l.starts_with('#')).count(), expected);
}

#[test]
fn invert_twin_end_to_end_and_manifest_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = run(&["invert"], &a);
    assert!(o.status.success(), "{}", stderr(&o));
    let scores = rms_column(&read(&a, "report.txt"));
    assert_eq!(scores.len(), 4);
    assert_eq!(scores[0].0, "V<E(2)");
    assert!(scores[0].1 < 0.5, "{scores:?}");
    for name in ["potential.txt", "potential_diagnostics.txt", "density.txt", "overlaps.txt"] {
        assert!(a.join(name).is_file(), "{name}");
    }
    let diag = read(&a, "potential_diagnostics.txt");
    assert!(diag.contains("valid_range_bohr") && diag.contains("extrapolation = morse-continuation"));

    let b = tmp.path().join("b");
    let manifest = a.join("manifest.txt");
    let o = run(&["invert", "--config", manifest.to_str().unwrap()], &b);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read(&a, "potential.txt"), read(&b, "potential.txt"));
    let hash = |d: &Path| read(d, "manifest.txt").lines().find(|l| l.starts_with("# config_hash")).unwrap().to_string();
    assert_eq!(hash(&a), hash(&b));

    // the inverted curve scores the same through `rms`
    let c = tmp.path().join("c");
    let test = format!("test={}", a.join("potential.txt").display());
    let o = run(&["rms", "--set", &test], &c);
    assert!(o.status.success(), "{}", stderr(&o));
    let via_rms = rms_column(&read(&c, "rms_report.txt"));
    for ((_, x), (_, y)) in scores.iter().zip(&via_rms) {
        assert!((x - y).abs() < 1e-4, "{x} vs {y}");
    }
}

#[test]
fn invert_without_reference_marks_scoring_absent() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["invert", "--set", "reference=none"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read(tmp.path(), "report.txt");
    assert!(report.contains("scoring: absent"), "{report}");
    assert!(rms_column(&report).is_empty());
}

#[test]
fn flags_override_file_and_env_sets_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_curve(tmp.path(), "run.cfg", "threshold = 0.05\nseed = 11\n");
    let env_out = tmp.path().join("from_env");
    let o = bin()
        .args(["synth", "--config", cfg.to_str().unwrap(), "--threshold", "0.03"])
        .env("FLUORINV_OUT", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = read(&env_out, "manifest.txt");
    assert!(manifest.contains("threshold = 0.03  # flag"), "{manifest}");
    assert!(manifest.contains("seed = 11  # file"));
    assert!(manifest.contains("out = ") && manifest.contains("# env"));
    assert!(manifest.contains("n_lower = 31  # default"));
    assert!(read(&env_out, "spectrum.txt").contains("# threshold_fraction 0.03"));

    let flag_out = tmp.path().join("from_flag");
    let o = bin().args(["synth", "--out", flag_out.to_str().unwrap()]).env("FLUORINV_OUT", &env_out).output().unwrap();
    assert!(o.status.success());
    assert!(flag_out.join("manifest.txt").is_file());
}

#[test]
fn noise_study_cli_is_seeded_monotone_and_level_zero_matches_invert() {
    let tmp = tempfile::tempdir().unwrap();
    let levels = "noise_levels=0 0.02 0.05 0.1";
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = run(&["noise-study", "--seed", "5", "--set", levels], d);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(read(&a, "noise_table.txt"), read(&b, "noise_table.txt"));
    assert_eq!(read(&a, "noise_rows.txt"), read(&b, "noise_rows.txt"));

    let rows: Vec<(f64, String, f64)> = read(&a, "noise_rows.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            (t[0].parse().unwrap(), t[1].to_string(), t[2].parse().unwrap())
        })
        .collect();
    let at = |level: f64, region: &str| rows.iter().find(|r| r.0 == level && r.1 == region).unwrap().2;

    let inv = tmp.path().join("inv");
    assert!(run(&["invert"], &inv).status.success());
    for (region, rms) in rms_column(&read(&inv, "report.txt")) {
        assert_eq!(at(0.0, &region), rms, "{region}");
        assert!(at(0.02, &region) < at(0.05, &region) && at(0.05, &region) < at(0.1, &region), "{region}");
    }
}
