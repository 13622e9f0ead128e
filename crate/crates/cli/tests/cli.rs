use fracmax::operator_engine::io::from_bytes;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn fracmax(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracmax"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = fracmax(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dim_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("c");
    ok(&["dim", "--cantor", "1/3:12", "--assouad"], &o);
    let v = json(&o.join("dim.json"));
    assert!((v["value"].as_f64().unwrap() - 2f64.ln() / 3f64.ln()).abs() < 0.05);
    assert!(v["assouad"]["value"].is_f64());
    let o = tmp.path().join("i");
    ok(&["dim", "--interval", "1,2"], &o);
    assert!((json(&o.join("dim.json"))["value"].as_f64().unwrap() - 1.0).abs() < 0.02);
    let o = tmp.path().join("p");
    ok(&["dim", "--point", "1"], &o);
    assert_eq!(json(&o.join("dim.json"))["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn region_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("s");
    ok(&["region", "--sufficient", "multiscale", "--d", "2", "--a", "3/2", "--beta", "0"], &o);
    let text = std::fs::read_to_string(o.join("region.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let verts = v["vertices"].as_array().unwrap();
    assert!(verts.iter().any(|p| p[0] == "1/2" && p[1] == "3/4"), "{text}");
    assert!(std::fs::read_to_string(o.join("region.csv")).unwrap().lines().count() > 1);
    let o = tmp.path().join("n");
    ok(&["region", "--necessary", "--d", "2", "--beta", "1", "--gamma", "1", "--r", "1"], &o);
    assert_eq!(json(&o.join("region.json"))["ceiling"], "3/2");
    let o = tmp.path().join("g");
    ok(&["region", "--gap", "--d", "2", "--a", "3/2", "--beta", "1/2", "--r", "2"], &o);
    assert!(json(&o.join("gap.json"))["gap_f64"].as_f64().unwrap() >= 0.0);
}

#[test]
fn run_with_ones_gives_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("r");
    ok(&["run", "--m", "spherical", "--d", "1", "--t", "1", "--f", "ones", "--g", "ones"], &o);
    let f = from_bytes(&std::fs::read(o.join("output.bin")).unwrap()).unwrap();
    assert!(f.samples().iter().all(|v| (v.re - 1.0).abs() < 1e-10 && v.im.abs() < 1e-10));
    let names: Vec<String> = std::fs::read_dir(&o)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().all(|n| !n.ends_with(".tmp")), "{names:?}");
    let manifest = json(&o.join("manifest.json"));
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn decay_and_scaling_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("d");
    ok(&["decay", "--m", "envelope:2", "--E", "point:1", "--d", "1", "--bands", "2..7"], &o);
    assert!(json(&o.join("decay.json"))["slope"].as_f64().unwrap() <= -1.2);
    let o = tmp.path().join("s");
    ok(&["scaling", "--kind", "ball", "--d", "1", "--E", "point:1", "--p", "2", "--q", "2", "--r", "1"], &o);
    assert_eq!(json(&o.join("scaling.json"))["verdict"], "pass");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["continuity", "--m", "envelope:1", "--E", "point:1", "--n", "256", "--h", "2..5", "--seed", "7"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&args, &a);
    ok(&args, &b);
    for f in ["continuity.json", "continuity.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    // Replaying the written config reproduces the run without any flags.
    let c = tmp.path().join("c");
    let cfg = a.join("config.json");
    ok(&["continuity", "--m", "constant", "--E", "point:2", "--config", cfg.to_str().unwrap()], &c);
    assert_eq!(std::fs::read(a.join("manifest.json")).unwrap(), std::fs::read(c.join("manifest.json")).unwrap());
}

#[test]
fn config_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"point": "1", "interval": null}"#).unwrap();
    let o = tmp.path().join("o");
    ok(&["dim", "--interval", "1,2", "--config", cfg.to_str().unwrap()], &o);
    assert_eq!(json(&o.join("dim.json"))["value"].as_f64().unwrap(), 0.0);
    std::fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    let e = fracmax(&["dim", "--point", "1", "--config", cfg.to_str().unwrap()], &o);
    assert_eq!(e.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("x");
    let bad = fracmax(&["dim", "--E", "disc:1"], &o);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("malformed"));
    assert_eq!(fracmax(&["bogus"], &o).status.code(), Some(1));
    assert_eq!(fracmax(&["region", "--necessary", "--d", "2"], &o).status.code(), Some(1));
    // Circle averages in d = 1 lie outside every sparse region.
    let gated = fracmax(&["sparse", "--n", "256", "--widths", "0.1", "--shifts", "1"], &o);
    assert_eq!(gated.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&gated.stderr).contains("exponent not in region"));
    let sub = fracmax(&["scaling", "--kind", "ball", "--E", "point:1", "--deltas", "3..4"], &o);
    assert_eq!(sub.status.code(), Some(1));
    // Unwritable output directory is an internal failure.
    let file = tmp.path().join("file");
    std::fs::write(&file, b"x").unwrap();
    let io = fracmax(&["dim", "--point", "1"], &file.join("sub"));
    assert_eq!(io.status.code(), Some(2));
}

#[test]
fn ungated_sparse_sweep_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("s");
    ok(
        &["sparse", "--no-gate", "--n", "512", "--period", "16", "--widths", "0.1,0.2", "--shifts", "2", "--scales", "-4..2"],
        &o,
    );
    let v = json(&o.join("sparse.json"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["all_sparse"], true);
}
