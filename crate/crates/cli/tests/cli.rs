use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "
[scenario]
name = small
model = rabi
t_final = 0.5 us
sample_dt = 0.05 us
n_max = 8
[effective]
omega = 1 MHz_over_2pi
delta = 0.18 MHz_over_2pi
eta = 0.5 MHz_over_2pi
kappa = 5 MHz
";

fn dqrm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqrm")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn header(csv: &str) -> Vec<&str> {
    csv.lines().next().unwrap().split(',').collect()
}

#[test]
fn bad_unit_tag_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("t_final = 0.5 us", "t_final = 0.5 ms"));
    let out = dqrm(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scenario.t_final"), "{err}");
    assert!(!dir.path().join("small.csv").exists());
}

#[test]
fn missing_config_is_an_io_error() {
    let out = dqrm(&["simulate", "--config", "/nonexistent/scenario.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}[sweep]\neta_grid = 0.2, 0.4, 0.6 MHz_over_2pi\n");
    let cfg = write_config(dir.path(), &text);
    let run = |sub: &str, jobs: &str| {
        let out_dir = dir.path().join(format!("{sub}{jobs}"));
        let out = dqrm(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--jobs", jobs]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("small.csv")).unwrap()
    };
    let first = run("a", "1");
    assert_eq!(first, run("b", "1"));
    assert_eq!(first, run("c", "2"));
    let csv = String::from_utf8(first).unwrap();
    assert_eq!(
        header(&csv),
        ["t[us]", "p_e_eta0.2[1]", "n_eta0.2[1]", "p_e_eta0.4[1]", "n_eta0.4[1]", "p_e_eta0.6[1]", "n_eta0.6[1]"]
    );
    assert_eq!(csv.lines().count(), 1 + 11);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a1/small.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "simulate");
}

#[test]
fn figs3b_has_one_column_per_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqrm(&["simulate", "--preset", "figS3b", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("figS3b.csv")).unwrap();
    let h = header(&csv);
    assert_eq!(h.len(), 11);
    assert_eq!(h[0], "t[us]");
    assert!(h[1..].iter().all(|c| c.starts_with("n_eta")), "{h:?}");
    assert_eq!(csv.lines().count(), 1 + 301);
}

#[test]
fn single_point_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}[sweep]\neta_grid = 0.5 MHz_over_2pi\nslope_window = 0.25, 0.5 us\n");
    let cfg = write_config(dir.path(), &text);
    let out = dqrm(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("small_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(header(&csv)[0], "eta[MHz_over_2pi]");
    assert!(csv.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn vacuum_signal_gives_vacuum_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}[tomography]\ntruth = 1, 0, 0\n");
    let cfg = write_config(dir.path(), &text);
    let out = dqrm(&["tomography", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("small_tomography.json")).unwrap()).unwrap();
    let p0 = json["fit"]["p"][0].as_f64().unwrap();
    assert!((p0 - 1.0).abs() < 1e-9, "P0 = {p0}");
    assert!(dir.path().join("small_tomography.csv").exists());
}

#[test]
fn presets_are_listed_and_printable() {
    let out = dqrm(&["presets"]);
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2", "figS3a", "figS3b", "figS4a", "figS4b", "fig3a", "fig3b", "figS2"] {
        assert!(names.lines().any(|l| l == name), "{name}");
    }
    let text = String::from_utf8(dqrm(&["presets", "fig2"]).stdout).unwrap();
    assert!(text.contains("model = interaction"));
    assert_eq!(dqrm(&["presets", "nope"]).status.code(), Some(2));
}

#[test]
fn check_passes_on_a_preset() {
    let out = dqrm(&["check", "--preset", "figS3a"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}
