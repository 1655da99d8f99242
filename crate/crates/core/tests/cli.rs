use std::path::Path;
use std::process::{Command, Output};

use cascade_steering::cli::PointRecord;
use cascade_steering::Regime;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cascade-steering"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn point(args: &[&str]) -> PointRecord {
    let out = run(&[&["point"], args].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn near_full_inversion_point_has_no_steering() {
    let rec = point(&["--eta", "0.999", "--gain-khz", "200", "--kappa-khz", "3.85", "--squeeze-r", "1.75"]);
    assert_eq!(rec.report.regime, Regime::NoWay);
}

#[test]
fn reference_point_values() {
    let rec = point(&["--eta", "0.5", "--gain-khz", "200", "--kappa-khz", "3.85", "--squeeze-r", "1.75"]);
    // Independent 50-digit solve of the photon-number equations.
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1.0);
    assert!(close(rec.n1, 3.423_318_482_740_548_2));
    assert!(close(rec.n2, 1.741_576_359_844_309_2));
    assert!(close(rec.m12, 2.747_769_689_323_027_4));
    assert!(close(rec.report.g_ab, 0.455_314_231_596_461_21));
    assert_eq!(rec.report.g_ba, 0.0);
    assert!(close(rec.report.nu_minus, 1.111_996_475_806_207_1));
    assert_eq!(rec.report.regime, Regime::OneWayAB);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# lab settings\nkappa_khz = 5\neta = 0.2\nr0_khz = 54\ng_khz = 43\ngamma_khz = 20\n").unwrap();
    let rec = point(&["--config", cfg.to_str().unwrap(), "--eta", "0.3"]);
    assert_eq!(rec.parameters.kappa_khz, 5.0);
    assert_eq!(rec.parameters.eta, 0.3);
    assert_eq!(rec.parameters.r0_khz, Some(54.0));
    assert!((rec.parameters.gain_khz - 499.23).abs() < 1e-9);

    std::fs::write(&cfg, "kapa_khz = 5\n").unwrap();
    let out = run(&["point", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kapa_khz"));
}

#[test]
fn sweep_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"axes": [{"param": "eta", "min": 0.0, "max": 1.0, "count": 5}],
            "fixed": {"gain_khz": 500, "squeeze_r": 1.0},
            "outputs": ["g_ab", "g_ba", "regime", "nu_minus"],
            "source": "linear_solve"}"#,
    )
    .unwrap();
    let csv_path = dir.path().join("out.csv");
    let out = run(&["sweep", "--spec", spec.to_str().unwrap(), "--out", csv_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&csv_path);
    assert_eq!(header, ["eta", "g_ab", "g_ba", "regime", "nu_minus"]);
    assert_eq!(rows.len(), 5);

    let seq = run(&["sweep", "--spec", spec.to_str().unwrap(), "--sequential", "--format", "json"]);
    let par = run(&["sweep", "--spec", spec.to_str().unwrap(), "--format", "json"]);
    assert_eq!(seq.stdout, par.stdout);
    let v: serde_json::Value = serde_json::from_slice(&par.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["spec"]["source"], "linear_solve");

    std::fs::write(&spec, r#"{"axes": [], "outputs": ["g_ab"]}"#).unwrap();
    assert_eq!(run(&["sweep", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn figure_fig2a_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig2a", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("fig2a.csv"));
    assert_eq!(header, ["eta", "g_ab", "g_ba", "asymmetry"]);
    assert_eq!(rows.len(), 401);
    assert!(!dir.path().join("fig2a.svg").exists());
}

#[test]
fn figure_fig4a_plot_values_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig4a", "--plot", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("fig4a.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let (_, rows) = read_csv(&dir.path().join("fig4a.csv"));
    assert_eq!(rows.len(), 201 * 201);
    for row in rows {
        let v: f64 = row[2].parse().unwrap();
        assert!((0.0..=0.62).contains(&v), "{v}");
    }
}

#[test]
fn plot_does_not_change_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&["figure", "fig3a", "--out", a.path().to_str().unwrap()]).status.success());
    assert!(run(&["figure", "fig3a", "--plot", "--out", b.path().to_str().unwrap()]).status.success());
    assert_eq!(
        std::fs::read(a.path().join("fig3a.csv")).unwrap(),
        std::fs::read(b.path().join("fig3a.csv")).unwrap()
    );
}

#[test]
fn figure_fig3b_b_to_a_dies_first() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["figure", "fig3b", "--out", dir.path().to_str().unwrap()]).status.success());
    let (_, rows) = read_csv(&dir.path().join("fig3b.csv"));
    let parsed: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    assert!(parsed.iter().any(|&(ab, ba)| ab > 0.0 && ba == 0.0));
}

#[test]
fn figure_rejects_overrides_and_unknown_names() {
    assert_eq!(run(&["figure", "fig2a", "--eta", "0.3"]).status.code(), Some(1));
    let out = run(&["figure", "fig7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig2a"));
}

#[test]
fn unwritable_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let out = run(&["figure", "fig2a", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);
}

#[test]
fn verify_is_deterministic_and_can_fail() {
    let a = run(&["verify", "--samples", "300", "--seed", "11"]);
    let b = run(&["verify", "--samples", "300", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("FAIL"));

    let bad = run(&["verify", "--samples", "50", "--tolerance-scale", "0"]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["point", "--squeeze-r", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--kappa-khz", "0"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--format", "xml"]).status.code(), Some(1));
}
