use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cnlse_core::{preset, serialize_scenario, Scheme};
use tempfile::TempDir;

fn cnlse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnlse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn value(text: &str, key: &str) -> String {
    key_values(text)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .1
}

/// A small, fast NLS soliton scenario.
fn small_config(scheme: Scheme) -> String {
    let mut s = preset("nls-a1").unwrap();
    s.grid.x_min = -20.0;
    s.grid.x_max = 20.0;
    s.grid.n_space = 199;
    s.grid.tau = 0.01;
    s.grid.n_time = 100;
    s.observe_every = 5;
    s.scheme = scheme;
    serialize_scenario(&s)
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn linear_config(sigma: f64, k: f64, x_span: f64, n_space: usize, tau: f64) -> String {
    format!(
        "x_min = {}\nx_max = {}\nn_space = {n_space}\ntau = {tau}\nn_time = 10\n\
         sigma = {sigma}\nk = {k}\na = 0\nb = 0\nc = 0\nd = 0\n\
         ic_u.kind = zero\nic_u.amplitude = 0\nic_u.offset = 0\nic_u.velocity = 0\n\
         ic_v.kind = zero\nic_v.amplitude = 0\nic_v.offset = 0\nic_v.velocity = 0\n\
         scheme = explicit\n",
        -x_span / 2.0,
        x_span / 2.0
    )
}

#[test]
fn unreadable_config_leaves_no_output() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("run");
    let out = cnlse(&[
        "run",
        "--config",
        tmp.path().join("missing.cfg").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn invalid_config_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "x_min = 0\nbogus = 1\n");
    let out_dir = tmp.path().join("run");
    let out = cnlse(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_preset_lists_presets() {
    let out = cnlse(&["stability", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("group-velocity-a"));
}

#[test]
fn precision_outside_range_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("run");
    let out = cnlse(&[
        "run",
        "--preset",
        "nls-a1",
        "--steps",
        "2",
        "--precision",
        "4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn stability_of_all_zero_coefficients() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "zero.cfg", &linear_config(0.0, 0.0, 10.0, 19, 0.1));
    let out = cnlse(&["stability", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value(&text, "rho"), "0");
    assert_eq!(value(&text, "verdict"), "stable-regime");
    assert_eq!(value(&text, "recommended_tau"), "inf");
}

#[test]
fn stability_by_substitution() {
    // h = 10 / 20 = 0.5
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "adv.cfg", &linear_config(1.0, 0.0, 10.0, 19, 0.1));
    let out = cnlse(&["stability", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value(&text, "rho").parse::<f64>().unwrap(), 8.0);
    assert!((value(&text, "rho_tau").parse::<f64>().unwrap() - 0.8).abs() < 1e-14);
    assert_eq!(value(&text, "verdict"), "unstable-regime");
    assert!((value(&text, "T11").parse::<f64>().unwrap() - 1.2).abs() < 1e-14);
    for key in ["T12", "T21", "T34", "T43"] {
        assert_eq!(value(&text, key).parse::<f64>().unwrap(), 0.0, "{key}");
    }
}

#[test]
fn stability_verdicts_differ_across_the_manakov_sweep() {
    let out = cnlse(&["stability", "--preset", "manakov-stability-sweep"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let verdicts: Vec<String> = key_values(&text)
        .into_iter()
        .filter(|(k, _)| k == "verdict")
        .map(|(_, v)| v)
        .collect();
    assert_eq!(verdicts.len(), 6);
    assert_eq!(verdicts.first().unwrap(), "unstable-regime");
    assert_eq!(verdicts.last().unwrap(), "stable-regime");
    assert!(text.contains("# steps_10000"));
}

#[test]
fn manakov_explicit_at_rho_tau_half_blows_up() {
    let stab = stdout(&cnlse(&["stability", "--preset", "manakov"]));
    let rho: f64 = value(&stab, "rho").parse().unwrap();
    let tau = 0.5 / rho;
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("run");
    let out = cnlse(&[
        "run",
        "--preset",
        "manakov",
        "--scheme",
        "explicit",
        "--tau",
        &tau.to_string(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("failing step"), "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("run_summary.txt")).unwrap();
    assert!(value(&summary, "termination").starts_with("blew-up-at-step"));
    let step: u64 = value(&summary, "failing_step").parse().unwrap();
    assert!(step > 0);
    assert!((value(&summary, "rho_tau").parse::<f64>().unwrap() - 0.5).abs() < 1e-9);
}

fn run_small(dir: &Path, scheme: Scheme) -> Output {
    let cfg = write_config(dir, "small.cfg", &small_config(scheme));
    cnlse(&["run", "--config", &cfg, "--out", dir.join("out").to_str().unwrap()])
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out = run_small(dir.path(), Scheme::Implicit);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let mut names: Vec<_> = fs::read_dir(a.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 3);
    for name in names {
        if name == "run_timing.txt" {
            continue;
        }
        let fa = fs::read(a.path().join("out").join(&name)).unwrap();
        let fb = fs::read(b.path().join("out").join(&name)).unwrap();
        assert!(fa == fb, "{name:?} differs");
    }
}

#[test]
fn csv_files_are_rectangular_with_documented_columns() {
    let tmp = TempDir::new().unwrap();
    let out = run_small(tmp.path(), Scheme::Implicit);
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = tmp.path().join("out");
    let ts = fs::read_to_string(dir.join("timeseries.csv")).unwrap();
    assert_eq!(
        ts.lines().next().unwrap(),
        "t,I_u,I_v,max_abs_u,max_abs_v,error_l2,error_max,iterations"
    );
    let mut snapshots = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let text = fs::read_to_string(&path).unwrap();
            let mut lines = text.lines();
            let width = lines.next().unwrap().split(',').count();
            for line in lines {
                let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
                assert_eq!(cells.len(), width, "{path:?}");
            }
            if path.file_name().unwrap().to_str().unwrap().starts_with("snapshot_t") {
                snapshots += 1;
                assert!(text.starts_with("x,re_u,im_u,abs_u,re_v,im_v,abs_v\n"));
                assert_eq!(text.lines().count(), 200);
            }
        }
    }
    // 20 observation intervals -> every observation is a snapshot.
    assert_eq!(snapshots, 21);
}

#[test]
fn explicit_timeseries_has_no_iteration_column() {
    let tmp = TempDir::new().unwrap();
    let out = run_small(tmp.path(), Scheme::Explicit);
    assert!(out.status.success(), "{}", stderr(&out));
    let ts = fs::read_to_string(tmp.path().join("out/timeseries.csv")).unwrap();
    assert_eq!(
        ts.lines().next().unwrap(),
        "t,I_u,I_v,max_abs_u,max_abs_v,error_l2,error_max"
    );
}

#[test]
fn compare_with_itself_is_zero() {
    let tmp = TempDir::new().unwrap();
    assert!(run_small(tmp.path(), Scheme::Implicit).status.success());
    let dir = tmp.path().join("out");
    let out = cnlse(&["compare", dir.to_str().unwrap(), dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value(&text, "common_times"), "21");
    assert_eq!(value(&text, "max_difference").parse::<f64>().unwrap(), 0.0);
}

#[test]
fn compare_without_common_times_fails() {
    let tmp = TempDir::new().unwrap();
    assert!(run_small(tmp.path(), Scheme::Implicit).status.success());
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = cnlse(&[
        "compare",
        tmp.path().join("out").to_str().unwrap(),
        empty.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no common snapshot times"));
}

#[test]
fn compare_missing_directory_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope");
    let out = cnlse(&["compare", missing.to_str().unwrap(), missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn sweep_presets_write_one_directory_per_run() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("sweep");
    let out = cnlse(&[
        "run",
        "--preset",
        "rectangular-decay",
        "--steps",
        "20",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for w in 1..=4 {
        let sub = out_dir.join(format!("width_{w}"));
        assert!(sub.join("run_summary.txt").exists(), "{sub:?}");
        assert!(sub.join("timeseries.csv").exists());
    }
}

#[test]
fn missing_source_is_a_usage_error() {
    let out = cnlse(&["run"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cnlse(&["stability", "--preset", "manakov", "--config", "x.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}
