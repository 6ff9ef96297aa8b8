use std::path::PathBuf;
use std::process::{Command, Output};

fn quidd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quidd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn script(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "scripts", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bell_check_passes() {
    let o = quidd(&["run", &script("bell.qpd"), "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("check passed"));
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.qpd");
    std::fs::write(&path, "qubits 2\nh 0\nhadamard 1\n").unwrap();
    let o = quidd(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("3:1"), "{}", stderr(&o));
}

#[test]
fn stats_file_has_required_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.json");
    let o = quidd(&["run", &script("ghz3.qpd"), "--stats", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["n_qubits", "steps", "peak_nodes", "wall_ms"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(json["steps"].is_array());
}

fn strip_wall_times(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("wall_ms");
            map.values_mut().for_each(strip_wall_times);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_wall_times),
        _ => {}
    }
}

#[test]
fn stats_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let path = dir.path().join(name);
        let o = quidd(&["run", &script("sampled.qpd"), "--seed", "3", "--stats", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        strip_wall_times(&mut v);
        (v, stdout(&o))
    };
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn grover_bench_emits_one_row_per_size() {
    let o = quidd(&["bench", "grover", "--n-min", "5", "--n-max", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,gates,engine,wall_ms,peak_nodes,peak_bytes"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn dense_bench_reports_over_cap() {
    let o = quidd(&["bench", "grover", "--n-min", "12", "--n-max", "12", "--engine", "dense"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("12,"), "{row}");
    assert!(row.contains("OVER-CAP"), "{row}");
}

#[test]
fn adder_bench_covers_all_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adder.csv");
    let o = quidd(&["bench", "rc_adder", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 257);
    assert!(!stderr(&o).contains("warning"));
}

#[test]
fn json_output_mirrors_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.json");
    let o = quidd(&["bench", "bitflip3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["verified"] == serde_json::Value::Bool(true)));
}
