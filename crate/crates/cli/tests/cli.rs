use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn berry_echo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berry-echo")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn value_of<'a>(report: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key} = ");
    report
        .lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn uncoupled_single_run_has_unit_fidelity() {
    let o = berry_echo(&["single", "--lambda-norm", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    let f: f64 = value_of(&report, "F(2T0)").parse().unwrap();
    assert!((f - 1.0).abs() <= 1e-9, "F(2T0) = {f}");
    assert!(value_of(&report, "F(2T0)").starts_with("1.000000"));
    assert_eq!(value_of(&report, "l1_plus_l2"), "0.00000000000e0");
}

#[test]
fn multinoise_single_run_has_no_phase_correction() {
    let o = berry_echo(&["single", "--multinoise", "--cutoff", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert_eq!(value_of(&report, "delta_Phi"), "0.00000000000e0");
    assert_eq!(value_of(&report, "variant"), "multinoise");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fig3.json", r#"{"t0_list": [1.5, 0.5, 4.0], "cutoffs": [20, 2]}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = berry_echo(&["fig3", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn csv_has_provenance_header_and_sorted_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fig3.json", r#"{"t0_list": [4.0, 0.5, 1.5], "cutoffs": [20, 2]}"#);
    let out = dir.path().join("fig3.csv");
    let o = berry_echo(&["fig3", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), concat!("# berry-echo ", env!("CARGO_PKG_VERSION")));
    assert_eq!(lines.next().unwrap(), "# experiment: fig3");
    assert!(lines.next().unwrap().starts_with("# config: {\"experiment\":\"fig3\""));
    let data = data_lines(&csv);
    assert_eq!(data[0], "T0,cutoff,n1,l1,k1,k1_minus_k2");
    let keys: Vec<(String, String)> = data[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 6);
            (f[1].to_string(), f[0].to_string())
        })
        .collect();
    let t0s = ["5.00000000000e-1", "1.50000000000e0", "4.00000000000e0"];
    let expected: Vec<(String, String)> = ["2.00000000000e0", "2.00000000000e1"]
        .iter()
        .flat_map(|c| t0s.iter().map(move |t| (c.to_string(), t.to_string())))
        .collect();
    assert_eq!(keys, expected);
    let summary = stdout(&o);
    assert!(summary.contains("Phi = ") && summary.contains("delta_Phi = ") && summary.contains("l1_plus_l2 = "));
}

#[test]
fn single_run_matches_the_fig3_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fig3.json", r#"{"t0_list": [2.5], "cutoffs": [2]}"#);
    let out = dir.path().join("fig3.csv");
    let o = berry_echo(&["fig3", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read(&out);
    let row: Vec<&str> = data_lines(&csv)[1].split(',').collect();

    let omega0 = (std::f64::consts::TAU / 2.5).to_string();
    let o = berry_echo(&["single", "--omega0", &omega0, "--cutoff", "2", "--temp", "0", "--theta", "0.7853981633974483"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert_eq!(value_of(&report, "n1"), row[2]);
    assert_eq!(value_of(&report, "l1"), row[3]);
    assert_eq!(value_of(&report, "k1"), row[4]);
}

#[test]
fn fig1_default_covers_both_spectra_over_one_period() {
    let o = berry_echo(&["fig1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.contains(r#""coupling":{"lambda_norm":2.0}"#));
    let data = data_lines(&csv);
    assert_eq!(data[0], "t,theta,cutoff,F");
    let rows: Vec<Vec<f64>> =
        data[1..].iter().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    for cutoff in [2.0, 20.0] {
        let curve: Vec<&Vec<f64>> = rows.iter().filter(|r| r[2] == cutoff).collect();
        assert!(!curve.is_empty(), "no rows for cutoff {cutoff}");
        let t_max = curve.iter().map(|r| r[0]).fold(0.0, f64::max);
        assert!((t_max - std::f64::consts::PI).abs() < 1e-9);
        assert!(curve.iter().all(|r| r[0] >= 0.0 && r[3] > 0.0 && r[3] <= 1.0 + 1e-9));
    }
    // the fidelity starts at one
    assert!(rows.iter().filter(|r| r[0] == 0.0).all(|r| (r[3] - 1.0).abs() < 1e-9));
}

#[test]
fn fig2_reports_the_isolated_spin_alongside() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "fig2.json", r#"{"t0_list": [1.0], "temperatures": [0]}"#);
    let o = berry_echo(&["fig2", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let data = data_lines(&csv);
    assert_eq!(data[0], "T0,cutoff,temperature,F_2T0,F_isolated");
    assert_eq!(data.len(), 4);
    let isolated: Vec<&str> = data[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(isolated.iter().all(|v| *v == isolated[0]));
    for l in &data[1..] {
        let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(f[3] <= f[4] + 1e-9, "bath run beats the isolated spin: {l}");
    }
}

#[test]
fn fig6_gamma_list_flag_sets_the_sweep() {
    let o = berry_echo(&["fig6", "--gamma-list", "0,0.2", "--theta-prime", "0.7853981633974483"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let data = data_lines(&csv);
    assert_eq!(data[0], "gamma,theta_prime,F_2T0");
    assert_eq!(data.len(), 3);
    assert!(data[1].starts_with("0.00000000000e0,") && data[2].starts_with("2.00000000000e-1,"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.json", r#"{"B": 50, "cutoff": 2}"#);
    let out = dir.path().join("s.csv");
    let o = berry_echo(&["sweep", "--config", &cfg, "--B", "100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read(&out);
    assert!(csv.contains(r#""B":100.0"#), "{csv}");
    assert!(csv.contains(r#""cutoffs":[2.0]"#), "{csv}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("empty.json", r#"{"cutoffs": []}"#),
        ("unknown.json", r#"{"B": 100, "temprature": 1}"#),
        ("negative.json", r#"{"cutoff": -1}"#),
        ("malformed.json", r#"{"B": 100"#),
        ("wrong.json", r#"{"experiment": "fig2"}"#),
    ];
    for (name, body) in cases {
        let cfg = write_config(&dir, name, body);
        let o = berry_echo(&["sweep", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains("config error"), "{name}: {}", stderr(&o));
    }
    let o = berry_echo(&["sweep", "--config", "/nonexistent/berry.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = berry_echo(&["fig4", "--theta", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = berry_echo(&["fig6", "--multinoise"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn too_coarse_grid_override_is_a_config_error() {
    let o = berry_echo(&["single", "--max-step", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("resolution"), "{}", stderr(&o));
}

#[test]
fn unknown_experiment_is_rejected() {
    let o = berry_echo(&["fig5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tilted_loop_single_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "loop.json",
        r#"{"cutoff": 2, "path": {"kind": "tilted", "theta_prime": 0.7853981633974483, "gamma": 0.3}}"#,
    );
    let o = berry_echo(&["single", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    let phi: f64 = value_of(&report, "Phi").parse().unwrap();
    // half the solid angle of the cone, independent of the tilt
    let expected = std::f64::consts::PI * (1.0 - std::f64::consts::FRAC_PI_4.cos());
    assert!((phi - expected).abs() < 1e-6, "Phi = {phi}");
}
