use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn skelink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skelink")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn row<'a>(table: &'a Value, object: u64, target: &Value) -> &'a Value {
    table["rows"].as_array().unwrap().iter().find(|r| r["object"] == object && &r["target"] == target).expect("row present")
}

#[test]
fn analyze_two_squares_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let cfg = data("two_squares.json");
    for out in [&a, &b] {
        let o = skelink(&["analyze", path(&cfg), "--bounding", "box", "--box", "-3,-3,9,3", "--samples", "512", "-o", path(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb, "reports differ between identical runs");
    let r: Value = serde_json::from_slice(&ta).unwrap();
    let c12 = r["closeness"][0]["product"][0][1].as_f64().unwrap();
    assert!((c12 - 1.0 / 81.0).abs() < 0.04 / 81.0, "c12 = {c12}");
    assert_eq!(r["volumes"][0]["source"], "skeletal");
    assert_eq!(r["tool"]["name"], "skelink");
}

#[test]
fn thread_cap_does_not_change_the_report() {
    let cfg = data("three_objects.json");
    let plain = skelink(&["analyze", path(&cfg)]);
    let capped = Command::new(env!("CARGO_BIN_EXE_skelink"))
        .args(["analyze", path(&cfg)])
        .env("SKELINK_THREADS", "1")
        .output()
        .unwrap();
    assert!(plain.status.success() && capped.status.success());
    assert_eq!(plain.stdout, capped.stdout);
    let seq = skelink(&["--sequential", "analyze", path(&cfg)]);
    let (a, b): (Value, Value) = (serde_json::from_slice(&plain.stdout).unwrap(), serde_json::from_slice(&seq.stdout).unwrap());
    assert_eq!(a["volumes"], b["volumes"]);
}

#[test]
fn threshold_square_gives_steiner_area() {
    let o = skelink(&["analyze", path(&data("square_box.json")), "--bounding", "threshold", "--tau", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let n = r["skeletons"][0]["neighborhood"].as_f64().unwrap();
    let want = 8.0 + std::f64::consts::PI;
    assert!((n - want).abs() < 0.01 * want, "neighborhood {n}");
}

#[test]
fn input_errors_exit_2() {
    let o = skelink(&["analyze", "no/such/file.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error [cli]"), "{}", stderr(&o));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"objects": [{"vertices": [[0,0],[1,0]]}]}"#).unwrap();
    let o = skelink(&["analyze", path(&bad), "--bounding", "hull"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error [config_model]"), "{}", stderr(&o));
    let o = skelink(&["oracle", path(&data("two_squares.json")), "--resolution", "128"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn weights_of_the_published_matrix() {
    let o = skelink(&["weights", path(&data("five_objects.json")), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w: Value = serde_json::from_slice(&o.stdout).unwrap();
    let got: Vec<f64> = w["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (x, want) in got.iter().zip([0.10, 0.19, 0.26, 0.28, 0.17]) {
        assert!((x - want).abs() <= 0.015, "{got:?}");
    }
    let o = skelink(&["weights", path(&data("five_objects.json")), "--v", "0.49,0.11,0.15,0.10,0.15", "--json"]);
    let w: Value = serde_json::from_slice(&o.stdout).unwrap();
    let got: Vec<f64> = w["renormalized"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (x, want) in got.iter().zip([0.30, 0.12, 0.24, 0.19, 0.15]) {
        assert!((x - want).abs() <= 0.02, "{got:?}");
    }
}

#[test]
fn reducible_matrix_exits_3() {
    let o = skelink(&["weights", path(&data("identity.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("{1} {2} {3}"), "{}", stderr(&o));
}

#[test]
fn graph_thresholds() {
    let g = data("five_objects.json");
    let o = skelink(&["graph", path(&g), "--edge-threshold", "0.21"]);
    assert!(stdout(&o).contains("components: {1,2} {3,4,5}"), "{}", stdout(&o));
    let o = skelink(&["graph", path(&g), "--vertex-threshold", "0.45"]);
    assert!(stdout(&o).contains("components: {1} {4,5}"), "{}", stdout(&o));
    assert!(stdout(&o).contains("4-5"));
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("g.svg");
    let o = skelink(&["graph", path(&g), "--edge-threshold", "0", "--vertex-threshold", "0", "--svg", path(&svg), "--json"]);
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["subgraph"]["edges"].as_array().unwrap().len(), 7);
    assert_eq!(out["subgraph"]["components"].as_array().unwrap().len(), 1);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("class=\"edge\"").count(), 7);
}

#[test]
fn render_structure_report_and_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let (report, structure) = (dir.path().join("r.json"), dir.path().join("s.json"));
    let o = skelink(&["analyze", path(&data("two_squares.json")), "-o", path(&report), "--structure", path(&structure)]);
    assert!(o.status.success());
    let figs = dir.path().join("fig");
    let o = skelink(&["render", path(&structure), "--out-dir", path(&figs)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["overlay.svg", "regions.svg", "levels.svg", "graph.svg"] {
        assert!(figs.join(f).exists(), "{f} missing");
    }
    // box [-3, 9] at 800 px: x = 3 sits at 10 + 6 * 800 / 12 = 410
    let overlay = std::fs::read_to_string(figs.join("overlay.svg")).unwrap();
    let axis_at_3 = overlay
        .lines()
        .filter(|l| l.contains("linking-axis"))
        .any(|l| l.contains("410.00,") && l.matches("410.00,").count() > 10);
    assert!(axis_at_3, "x = 3 axis segment missing");
    let levels = std::fs::read_to_string(figs.join("levels.svg")).unwrap();
    for t in ["level-0\"", "level-0.25\"", "level-0.5\"", "level-0.75\"", "level-1\""] {
        assert!(levels.contains(t), "{t}");
    }
    let o = skelink(&["render", path(&report), "--out-dir", path(&dir.path().join("fig2"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "{}").unwrap();
    let o = skelink(&["render", path(&empty), "--out-dir", path(&dir.path().join("fig3"))]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
}

#[test]
fn oracle_two_squares_with_diff() {
    let dir = tempfile::tempdir().unwrap();
    let (report, raster, legend) = (dir.path().join("r.json"), dir.path().join("l.pgm"), dir.path().join("l.json"));
    assert!(skelink(&["analyze", path(&data("two_squares.json")), "-o", path(&report)]).status.success());
    let o = skelink(&[
        "oracle",
        path(&data("two_squares.json")),
        "--resolution",
        "2048",
        "--raster",
        path(&raster),
        "--legend",
        path(&legend),
        "--diff",
        path(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["volumes"]["source"], "oracle");
    let n = row(&out["volumes"], 0, &serde_json::json!({"object": 1}))["neighborhood"].as_f64().unwrap();
    assert!((n - 8.0).abs() < 0.08, "N = {n}");
    assert!(out["diff"]["max_relative"].as_f64().unwrap() <= 0.02);
    let pgm = std::fs::read(&raster).unwrap();
    assert!(pgm.starts_with(b"P5\n2048 1024\n"));
    let legend: Value = serde_json::from_slice(&std::fs::read(&legend).unwrap()).unwrap();
    assert!(legend.as_array().unwrap().len() >= 8);
}
