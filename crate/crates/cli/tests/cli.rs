use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn dickesep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dickesep"))
        .args(args)
        .env_remove("DICKESEP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn superrad_table_shape_and_values() {
    let out = dickesep(&["superrad", "--n", "4", "--tau", "1e-3:10:200:geom"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("tau,chi_n0_0,chi_n0_1,chi_n0_2,chi_n0_3,chi_n0_4\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 200);
    assert!(rows.windows(2).all(|w| w[1][5] >= w[0][5] - 1e-13));
    for row in &rows {
        assert!((row[1..].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    let out = dickesep(&["superrad", "--n", "4", "--tau", "0.1:0.1:1:lin"]);
    let rows = csv_rows(&stdout(&out));
    assert!((rows[0][1] - 0.670320046).abs() < 1e-9);
}

#[test]
fn superrad_eight_qubit_rows_are_normalized() {
    let out = dickesep(&["superrad", "--n", "8", "--tau", "1e-3:10:50:geom"]);
    assert_eq!(out.status.code(), Some(0));
    for row in csv_rows(&stdout(&out)) {
        assert_eq!(row.len(), 10);
        assert!((row[1..].iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bad_grid_is_a_usage_error() {
    for grid in ["1:2:3", "1e-3:10:0:geom", "0:10:5:geom", "1:10:5:log"] {
        assert_eq!(dickesep(&["superrad", "--n", "4", "--tau", grid]).status.code(), Some(2), "{grid}");
    }
}

#[test]
fn certify_sweeps_stay_in_the_box() {
    for n in ["4", "8"] {
        let out = dickesep(&["certify", "--superrad", "--n", n, "--tau", "1e-3:10:40:geom"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        let j = (header.len() - 3) / 2;
        for line in text.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(*cells.last().unwrap(), "true");
            let params: Vec<f64> = cells[1..=2 * j].iter().map(|c| c.parse().unwrap()).collect();
            assert!(params.iter().all(|&p| (-1e-9..=1.0 + 1e-9).contains(&p)));
            let weight: f64 = params[..j].iter().sum();
            assert!((weight - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn entangled_dicke_level_is_not_certified() {
    let out = dickesep(&["certify", "--chi", "0,0,0,1,0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "NotCertified");
    assert!(!v["reason"].is_null());
}

#[test]
fn certify_reads_state_files_and_rejects_malformed_ones() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("state.json");
    fs::write(&good, r#"{"n": 2, "chi": [0.25, 0.5, 0.25]}"#).unwrap();
    let out = dickesep(&["certify", "--chi-file", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "CertifiedSeparable");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0.5,0.6\n").unwrap();
    assert_eq!(dickesep(&["certify", "--chi-file", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dickesep(&["certify"]).status.code(), Some(2));
    assert_eq!(dickesep(&["certify", "--chi", "0.25,0.5,0.25", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn unproven_range_prints_caveat() {
    let out = dickesep(&["certify", "--chi", "0,0,1,0,0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N >= 5"));
}

#[test]
fn ppt_single_state_and_sweep() {
    let out = dickesep(&["ppt", "--chi", "0.25,0.5,0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let out = dickesep(&["ppt", "--chi", "0,1,0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["bipartitions"][0]["min_eig"].as_f64().unwrap() + 0.5).abs() < 1e-12);

    let out = dickesep(&["ppt", "--superrad", "--n", "6", "--tau", "1e-3:10:20:geom"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("tau,min_eig_k1,min_eig_k2,min_eig_k3,ppt\n"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn volume_requires_seed_and_is_reproducible() {
    assert_eq!(dickesep(&["volume", "--n", "4", "--method", "ppt-mc"]).status.code(), Some(2));
    let args = ["volume", "--n", "4", "--method", "ppt-mc", "--samples", "50000", "--seed", "9"];
    let a = dickesep(&args);
    let b = dickesep(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["method"], "MC-indicator");
    assert_eq!(v["seed"], 9);
    assert!(String::from_utf8_lossy(&a.stderr).contains('±'));
}

#[test]
fn exact_volumes() {
    let out = dickesep(&["volume", "--n", "4", "--method", "sds-formula"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["exact"], "2/525");
    let out = dickesep(&["volume", "--n", "4", "--method", "gds"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["exact"], "1/24");
}

#[test]
fn bound_table_and_state_check() {
    let out = dickesep(&["bound", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[2][1], 0.375);
    assert_eq!(dickesep(&["bound", "--chi", "0,0,1,0,0"]).status.code(), Some(1));
    assert_eq!(dickesep(&["bound", "--chi", "0.0625,0.25,0.375,0.25,0.0625"]).status.code(), Some(0));
    assert_eq!(dickesep(&["bound"]).status.code(), Some(2));
}

#[test]
fn output_files_are_deterministic_and_honor_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dickesep"))
            .args(["certify", "--superrad", "--n", "5", "--tau", "1e-2:5:30:geom", "--out", name])
            .env("DICKESEP_OUT_DIR", dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        fs::read(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv");
    let b = run("sub/b.csv");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn json_format_for_sweeps() {
    let out = dickesep(&["superrad", "--n", "2", "--tau", "0:1:3:lin", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["chi"].as_array().unwrap().len(), 3);
    assert_eq!(v["chi"][0], serde_json::json!([1.0, 0.0, 0.0]));
}
