use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_freqdiv");

fn case_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (head, rows)
}

#[test]
fn fd_writes_coefficient_tables_with_unit_row_sums() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let case = case_path("wecc9_gfl.json");
    let o = run(&["fd", "--case", case.to_str().unwrap(), "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (name, sum_col) in [("node_coeffs.csv", 0), ("branch_coeffs.csv", 1)] {
        let (head, rows) = read_csv(&dir.path().join(name));
        assert_eq!(head.last().unwrap(), "row_sum");
        assert!(head.iter().any(|h| h == "omega_gfl10"));
        for r in rows {
            if sum_col == 1 && r[2] == "false" {
                continue;
            }
            let s: f64 = r.last().unwrap().parse().unwrap();
            assert!((s - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn sg_only_case_has_no_gfl_columns() {
    let dir = tempfile::tempdir().unwrap();
    let case = case_path("two_bus.json");
    let o = run(&["fd", "--case", case.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let (head, _) = read_csv(&dir.path().join("node_coeffs.csv"));
    assert_eq!(head, ["node", "omega_sg01", "row_sum"]);
}

#[test]
fn bad_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["fd", "--case", "/no/such/case.json", "--out", out]).status.code(), Some(2));
    let case = case_path("wecc9_gfl.json");
    let c = case.to_str().unwrap();
    assert_eq!(run(&["simulate", "--case", c, "--dt", "0.002", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--case", c, "--disturbance", "9:boom:0.1:1", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--case", c, "--disturbance", "42:load-step:0.1:1", "--out", out]).status.code(), Some(2));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run(&["fd", "--case", broken.to_str().unwrap(), "--out", out]).status.code(), Some(2));
}

#[test]
fn undisturbed_simulation_gives_flat_traces() {
    let dir = tempfile::tempdir().unwrap();
    let case = case_path("wecc9_gfl.json");
    let o = run(&["simulate", "--case", case.to_str().unwrap(), "--horizon", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (head, rows) = read_csv(&dir.path().join("frequencies.csv"));
    assert!(head.iter().all(|h| !h.ends_with("prop0")));
    for r in rows {
        for v in &r[1..] {
            assert!(v.parse::<f64>().unwrap().abs() < 1e-6);
        }
    }
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn validate_orders_methods_and_is_deterministic() {
    let case = case_path("wecc9_gfl.json");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&[
            "validate",
            "--case",
            case.to_str().unwrap(),
            "--disturbance",
            "9:load-step:0.1:1",
            "--horizon",
            "6",
            "--fixed-coeffs",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(dir.path().join("errors.csv")).unwrap());
        let (_, rows) = read_csv(&dir.path().join("errors.csv"));
        let col = |m: &str| -> Vec<f64> {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r[0] == "node" && r[2] == m)
                .map(|r| r[3].parse().unwrap())
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let (trd, prop) = (col("trd-fd"), col("prop"));
        assert!(trd[trd.len() / 2] > prop[prop.len() / 2]);
        assert!(!col("prop0").is_empty());
        assert!(rows.iter().any(|r| r[2] == "imp-fd" && r[3].is_empty()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_with_flag_override_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"inertia_scale": [1.0], "pll_gain_scale": [1.0], "load_buses": [5, 9]}"#).unwrap();
    let cfg = dir.path().join("run.json");
    let case = case_path("wecc9_gfl.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"case": {:?}, "dt": 0.002, "horizon": 4.0, "sweep": {:?}, "toggles": {{"compare": false}}}}"#,
            case.to_str().unwrap(),
            grid.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    // dt in the file is above the CLI limit; the flag fixes it.
    let bad = run(&["validate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    let o = run(&["validate", "--config", cfg.to_str().unwrap(), "--dt", "0.001", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("errors.csv").exists());
    let (_, rows) = read_csv(&out.join("sweep_box.csv"));
    assert!(rows.iter().any(|r| r[0] == "node" && r[1] == "prop"));
}

#[test]
fn report_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let case = case_path("wecc9_gfl.json");
    let o = run(&["report", "--case", case.to_str().unwrap(), "--alt-p-ref", "0.38", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["coeff_report.json", "coeff_report.csv", "coeff_report.svg"] {
        assert!(dir.path().join(f).metadata().unwrap().len() > 0);
    }
    let svg = std::fs::read_to_string(dir.path().join("coeff_report.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}
