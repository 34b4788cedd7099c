use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use denjoy::json::load_descriptor;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_denjoy"));
    c.env_remove("DENJOY_OUT_DIR");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("denjoy-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn analyze_reports_orbit_data() {
    let o = run(&["analyze", "--beta", "sqrt2", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["t"], 3);
    assert_eq!(v["m"], 1);
    assert_eq!(v["renorm_depth"], 1);
    assert_eq!(v["orbit"][2]["exact"], "-1 + b");
}

#[test]
fn poly_input_matches_catalog() {
    let a = run(&["analyze", "--beta-poly", "1,-1,-1", "--isolate", "1", "2", "--json"]);
    let b = run(&["analyze", "--beta", "golden", "--json"]);
    assert_eq!(code(&a), 0);
    let (a, b): (serde_json::Value, serde_json::Value) =
        (serde_json::from_str(&stdout(&a)).unwrap(), serde_json::from_str(&stdout(&b)).unwrap());
    assert_eq!(a["orbit"], b["orbit"]);
    assert_eq!(a["t"], b["t"]);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["analyze", "--beta", "pi"][..],
        &["analyze", "--beta-poly", "1,-3", "--isolate", "2", "4"],
        &["analyze", "--beta-poly", "1,0,-2"],
        &["eval", "--beta", "full", "--eps", "-1", "--x", "0.5"],
        &["nonsense"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn failed_check_exits_1_and_passing_exits_0() {
    let dir = scratch("exit");
    let report = dir.join("golden.json");
    let o = run(&[
        "verify", "--beta", "golden", "--eps", "1e-5", "--depth", "10", "--suite", "absorption", "--basin-seeds", "20",
        "--json", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let lines: Vec<serde_json::Value> = serde_json::from_slice(&read(&report)).unwrap();
    let failed: Vec<_> = lines.iter().filter(|l| l["status"] == "FAIL").map(|l| l["check_name"].clone()).collect();
    assert_eq!(failed, ["attracting_cycle"]);

    let o = run(&["verify", "--beta", "full", "--eps", "1e-5", "--depth", "8", "--suite", "spectral,growth"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS spectral_radius"));
}

#[test]
fn count_table_for_full_tent() {
    let o = run(&["count", "--beta", "full", "--levels", "10", "--tree-cap", "10"]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    for (i, row) in r.records().enumerate() {
        let row = row.unwrap();
        let n: u32 = row[0].parse().unwrap();
        assert_eq!(n as usize, i + 1);
        let expect = if n == 1 { 1u64 } else { 1 << (n - 2) };
        assert_eq!(row[1].parse::<u64>().unwrap(), expect);
        assert_eq!(row[2].parse::<u64>().unwrap(), expect);
    }
}

#[test]
fn build_load_eval_round_trip() {
    let dir = scratch("roundtrip");
    let desc = dir.join("d.json");
    let common = ["--beta", "golden", "--eps", "1e-5", "--depth", "9"];
    let o = bin().args(["build", "--out", desc.to_str().unwrap()]).args(common).output().unwrap();
    assert_eq!(code(&o), 0);
    let xs = "0,0.1,0.25,0.5,0.61803,0.9,1";
    let fresh = bin().args(["eval", "--x", xs]).args(common).output().unwrap();
    let loaded = run(&["eval", "--descriptor", desc.to_str().unwrap(), "--x", xs]);
    assert_eq!(code(&fresh), 0);
    assert_eq!(stdout(&fresh), stdout(&loaded));

    // Save, load, save again: identical bytes.
    let d = load_descriptor(&desc).unwrap();
    assert_eq!(denjoy::json::descriptor_to_string(&d).as_bytes(), read(&desc).as_slice());
}

#[test]
fn descriptor_with_other_beta_is_rejected() {
    let dir = scratch("mismatch");
    let desc = dir.join("d.json");
    let o = run(&["build", "--beta", "full", "--eps", "1e-5", "--depth", "6", "--out", desc.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = run(&["eval", "--beta", "golden", "--descriptor", desc.to_str().unwrap(), "--x", "0.5"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn plots_are_deterministic() {
    let dir = scratch("determinism");
    for what in ["tree", "map", "lengths"] {
        let mut outs = Vec::new();
        for k in 0..2 {
            let svg = dir.join(format!("{what}{k}.svg"));
            let o = run(&[
                "plot", "--beta", "golden", "--eps", "1e-5", "--depth", "8", "--samples", "256", "--what", what,
                "--out", svg.to_str().unwrap(),
            ]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            outs.push((read(&svg), read(&svg.with_extension("csv"))));
        }
        assert!(outs[0] == outs[1], "{what} output differs between runs");
        let svg = String::from_utf8(outs[0].0.clone()).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}

#[test]
fn plotted_map_respects_lipschitz_bound() {
    let dir = scratch("lipschitz");
    let desc = dir.join("d.json");
    let svg = dir.join("map.svg");
    let o = run(&["build", "--beta", "sqrt2", "--eps", "1e-5", "--depth", "10", "--out", desc.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "plot", "--what", "map", "--samples", "512", "--descriptor", desc.to_str().unwrap(), "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let lip = load_descriptor(&desc).unwrap().lipschitz_bound();
    let mut rows = Vec::new();
    for r in csv::Reader::from_path(svg.with_extension("csv")).unwrap().records() {
        let r = r.unwrap();
        let v: Vec<f64> = (0..3).map(|i| r[i].parse().unwrap()).collect();
        rows.push(v);
    }
    assert_eq!(rows.len(), 512);
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        // Largest possible change between any points of the two enclosures.
        let spread = (b[2] - a[1]).abs().max((a[2] - b[1]).abs());
        let slack = (a[2] - a[1]) + (b[2] - b[1]);
        assert!(spread <= lip * (b[0] - a[0]) + slack, "x = {}: spread {spread}, bound {lip}", a[0]);
        assert!(a[1] >= -1e-9 && a[2] <= 1.0 + 1e-9);
    }
}

#[test]
fn config_file_and_env() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# plot settings\nbeta = golden\ndepth = 8\neps = 1e-5\nsamples = 64\n").unwrap();
    // out-dir from the environment when neither flag nor file sets it.
    let o = bin()
        .env("DENJOY_OUT_DIR", dir.join("env"))
        .args(["--config", cfg.to_str().unwrap(), "plot", "--what", "tree"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("env/tree.svg").exists());
    assert!(dir.join("env/tree.csv").exists());

    // A flag beats the file.
    let o = bin().args(["--config", cfg.to_str().unwrap(), "analyze", "--beta", "full", "--json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["beta"], "full");

    std::fs::write(&cfg, "depht = 8\n").unwrap();
    let o = bin().args(["--config", cfg.to_str().unwrap(), "analyze"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn markov_prints_matrix() {
    let o = run(&["markov", "--beta", "golden"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("partition (4 intervals)"));
    assert!(s.contains("charpoly  [1, -2, 0, 1, 0]"));
}
