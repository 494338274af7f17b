use std::path::Path;
use std::process::{Command, Output};

fn run(sub: &str, config: &str, out: &Path, threads: Option<&str>) -> Output {
    let dir = out.parent().unwrap();
    let path = dir.join(format!("{sub}.json"));
    std::fs::write(&path, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heatlab"));
    cmd.args([sub, "--config"]).arg(&path).arg("--out").arg(out);
    if let Some(n) = threads {
        cmd.env("HEATLAB_THREADS", n);
    }
    cmd.output().unwrap()
}

const INTERVAL: &str = r#"{"space": {"model": {"kind": "interval", "length": 3.141592653589793}, "samples": 1025, "cutoff": 200},
    "t_schedule": [0.04, 0.02, 0.01]}"#;

#[test]
fn interval_distortion_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run("distortion", INTERVAL, &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("distortion.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][col("l1")] < w[0][col("l1")]));
    assert!(rows.iter().all(|r| r[col("linf")] >= 0.99));
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("distortion.csv"));
}

#[test]
fn takahashi_on_the_circle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = r#"{"space": {"model": {"kind": "circle", "radius": 1.0}, "samples": 256, "cutoff": 40},
        "t_schedule": [0.1, 0.05], "sphere_map": {"kind": "position"}}"#;
    let o = run("takahashi", config, &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "PASS");
}

#[test]
fn bad_schedule_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"space": {"model": {"kind": "circle", "radius": 1.0}, "samples": 128, "cutoff": 60},
        "t_schedule": [0.04, -0.02]}"#;
    let o = run("energy", config, &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_schedule"));
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"space": {"model": {"kind": "circle", "radius": 1.0}, "samples": 256, "cutoff": 80},
        "t_schedule": [0.04, 0.02], "r_schedule": [0.3, 0.2], "seed": 5}"#;
    let mut dumps = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("ks-{threads}"));
        let o = run("ks", config, &out, Some(threads));
        assert_ne!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        dumps.push(files);
    }
    assert_eq!(dumps[0], dumps[1]);
}

#[test]
fn overrides_replace_config_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let path = dir.path().join("c.json");
    std::fs::write(&path, INTERVAL).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(["energy", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(["--set", "seed=42", "--set", "t_schedule=[0.1,0.05]"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["t_schedule"][1], 0.05);
}
