use std::fs;
use std::path::Path;
use std::process::Command;

use gamowlab::catalog::{builtin_scenarios, find};
use gamowlab::config::{InitialState, OutputKind};
use gamowlab::output::MANIFEST_NAME;
use gamowlab::{parse_config, run_scenario, CliError};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gamowlab"));
    c.env("RUST_LOG", "off");
    c
}

fn failing_config() -> &'static str {
    r#"{"name":"coarse_pde","initial":{"kind":"bump","epsilon":1.0},"representation":"uv",
        "propagator":{"kind":"pde","gamma":1.0,"dt":0.01},
        "times":[0.0,0.5,1.0,1.5,2.0],"outputs":[{"kind":"coefficient_traces","n_list":[0,2,4]}],
        "grid":{"points":41,"min":-1.25,"max":1.25}}"#
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["fig_coeff_bump", "fig_background_tails", "fig_bump_xp_profiles"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let config = find(name).unwrap();
        run_scenario(&config, a.path()).unwrap();
        run_scenario(&config, b.path()).unwrap();
        let (x, y) = (csv_bodies(&a.path().join(name)), csv_bodies(&b.path().join(name)));
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn manifest_lists_every_emitted_file() {
    let out = tempfile::tempdir().unwrap();
    let manifest = run_scenario(&find("fig_fit_eps0").unwrap(), out.path()).unwrap();
    let dir = out.path().join("fig_fit_eps0");
    let on_disk: Vec<String> = csv_bodies(&dir).into_iter().map(|(n, _)| n).collect();
    let mut listed: Vec<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
    for f in &manifest.files {
        let lines = fs::read_to_string(dir.join(&f.path)).unwrap().lines().count();
        assert_eq!(lines, f.rows + 1, "{}", f.path);
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.join(MANIFEST_NAME)).unwrap()).unwrap();
    for key in ["scenario", "version", "files", "checks"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(!dir.join(format!(".{MANIFEST_NAME}.partial")).exists());
}

#[test]
fn csv_fields_use_full_precision_scientific_notation() {
    let out = tempfile::tempdir().unwrap();
    run_scenario(&find("fig_coeff_bump").unwrap(), out.path()).unwrap();
    let text = fs::read_to_string(out.path().join("fig_coeff_bump/coefficient_traces.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,t,re,im,abs"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    for field in &row[1..] {
        let (mantissa, exponent) = field.split_once('e').unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{field}");
        assert!(exponent.starts_with('+') || exponent.starts_with('-'));
    }
}

#[test]
fn empty_times_is_a_usage_error_and_emits_nothing() {
    let out = tempfile::tempdir().unwrap();
    let mut config = find("fig_gauss_uv").unwrap();
    config.times.clear();
    match run_scenario(&config, out.path()) {
        Err(e @ CliError::Usage(_)) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected a usage error, got {other:?}"),
    }
    assert!(!out.path().join("fig_gauss_uv").exists());
}

#[test]
fn builtins_round_trip_through_json() {
    for config in builtin_scenarios() {
        let text = serde_json::to_string_pretty(&config).unwrap();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, config);
        assert!(parsed.validate().is_empty());
    }
}

#[test]
fn diagnostics_name_the_offending_fields() {
    let mut config = find("fig_gauss_uv").unwrap();
    config.times = vec![0.0, 2.0, 1.0];
    let diags = config.validate();
    assert!(diags.iter().any(|d| d.path == "times"), "{diags:?}");
    let text = serde_json::to_string(&find("fig_gauss_uv").unwrap()).unwrap().replace("field_snapshots", "spectrum");
    let diags = parse_config(&text).unwrap_err();
    assert_eq!(diags.len(), 1);
    assert!(diags[0].path.starts_with("outputs[0]"), "{}", diags[0].path);
    for name in OutputKind::NAMES {
        assert!(diags[0].message.contains(name), "{}", diags[0].message);
    }
}

#[test]
fn list_prints_the_sorted_catalog() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names.len(), 14);
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(text.lines().all(|l| l.contains("\tFigure:")));
    assert_eq!(bin().arg("list").output().unwrap().stdout, text.as_bytes());
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let failing = dir.path().join("fail.json");
    fs::write(&failing, failing_config()).unwrap();
    let out = dir.path().join("out");

    let status = bin().args(["run", "fig_proj_gauss", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("fig_proj_gauss").join(MANIFEST_NAME).exists());

    let status = bin().arg("run").arg(&failing).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(out.join("coarse_pde").join(MANIFEST_NAME).exists(), "manifest must survive a check failure");

    let status = bin().args(["run", "no_such_scenario", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, failing_config().replace("[0.0,0.5,1.0,1.5,2.0]", "[]")).unwrap();
    let output = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stdout).contains("times"));
    assert_eq!(bin().arg("validate").arg(&failing).status().unwrap().code(), Some(0));

    let status = bin().args(["run", "fig_gauss_uv", "--grid-points", "3", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["run", "fig_coeff_bump"]).env("GAMOWLAB_OUT", dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("fig_coeff_bump").join(MANIFEST_NAME).exists());
}

#[test]
fn failed_runs_leave_no_manifest() {
    let out = tempfile::tempdir().unwrap();
    let mut config = find("fig_background_tails").unwrap();
    // The tail region lies outside this domain, so the run fails midway.
    config.grid.min = -1.0;
    config.grid.max = 1.0;
    config.grid.points = 201;
    let dir = out.path().join(&config.name);
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join(MANIFEST_NAME), "{}").unwrap();
    let err = run_scenario(&config, out.path()).unwrap_err();
    assert_eq!(err.exit_code(), 1, "{err}");
    assert!(!dir.join(MANIFEST_NAME).exists());
}

#[test]
fn custom_states_are_loaded_and_resampled() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.csv");
    let mut body = String::from("u,re,im\n");
    for k in 0..=800 {
        let u = -8.0 + 0.02 * k as f64;
        body.push_str(&format!("{u},{},0\n", std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp()));
    }
    fs::write(&path, body).unwrap();
    let mut config = find("fig_proj_gauss").unwrap();
    config.name = "custom_gauss".into();
    config.initial = InitialState::CustomFile { path: path.clone() };
    config.outputs = vec![OutputKind::CoefficientTraces { n_list: vec![0, 2, 4] }];
    let manifest = run_scenario(&config, dir.path()).unwrap();
    assert!(manifest.all_enforced_pass());
    let text = fs::read_to_string(dir.path().join("custom_gauss/coefficient_traces.csv")).unwrap();
    let c0: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((c0 - 2f64.sqrt() * std::f64::consts::PI.powf(0.25)).abs() < 1e-6, "{c0}");

    fs::write(&path, "u,re\n0,1\n").unwrap();
    assert_eq!(run_scenario(&config, dir.path()).unwrap_err().exit_code(), 2);
}

#[test]
fn xp_residue_scenario_reports_poles() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = find("fig_proj_gauss").unwrap();
    config.name = "residues".into();
    config.outputs = vec![OutputKind::SpectraResidues { n_list: vec![0, 1, 2] }];
    let manifest = run_scenario(&config, dir.path()).unwrap();
    for c in &manifest.checks {
        assert!(c.passed, "{c:?}");
    }
    assert_eq!(manifest.checks.iter().filter(|c| c.name.starts_with("pole_position")).count(), 3);
}
