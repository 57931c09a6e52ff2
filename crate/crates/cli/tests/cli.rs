use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spherecut(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spherecut"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SPHERECUT_OUT_DIR")
        .output()
        .expect("running spherecut")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn numerical_lemma_grid_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = spherecut(dir.path(), &["verify", "--suite", "numerical-lemma", "--grid", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.starts_with("# spherecut verify"));
    assert!(csv.contains("# grid = 1000"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r[5] == "true"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["config"]["grid"], "1000");
}

#[test]
fn construct_reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["construct", "--theta", "2.0944", "--epsilon", "0.3", "--d", "3", "--seed", "1"];
    let oa = spherecut(a.path(), &["--jobs", "1"].iter().chain(&args).copied().collect::<Vec<_>>());
    let ob = spherecut(b.path(), &["--jobs", "4"].iter().chain(&args).copied().collect::<Vec<_>>());
    assert!(oa.status.success() && ob.status.success(), "{}", stderr(&oa));
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["graph.txt", "points.txt", "construction.json"] {
        let (x, y) = (fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        assert!(x == y, "{name} differs");
    }
    let graph = fs::read_to_string(a.path().join("graph.txt")).unwrap();
    assert!(graph.contains("# theta = 2.0944\n# epsilon = 0.3\n# d = 3\n# seed = 1\n"));
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn complete_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = spherecut(dir.path(), &["sweep", "--family", "complete", "--n", "3..9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&fs::read_to_string(dir.path().join("sweep.csv")).unwrap());
    assert_eq!(rows.len(), 7);
    for (row, n) in rows.iter().zip(3i64..) {
        assert_eq!(row[0], format!("K_{n}"));
        // odd n: 2n/(n-1); even n: exactly 2
        let want = if n % 2 == 1 {
            let g = gcd(2 * n, n - 1);
            let (p, q) = (2 * n / g, (n - 1) / g);
            if q == 1 { p.to_string() } else { format!("{p}/{q}") }
        } else {
            "2".to_string()
        };
        assert_eq!(row[9], want, "K_{n}");
    }
}

#[test]
fn pipeline_on_a_small_construction() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = |args: &[&str]| {
        let o = spherecut(p, args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    };
    run(&["construct", "--theta-frac", "0.7", "--epsilon", "0.1", "--d", "3", "--gamma", "1.1"]);
    let graph = p.join("graph.txt");
    let graph = graph.to_str().unwrap();
    let points = p.join("points.txt");
    run(&["maxcut", "--graph", graph]);
    let cut = fs::read_to_string(p.join("cut.txt")).unwrap();
    assert!(cut.contains("\nexact true\n"));
    run(&["solve", "--graph", graph, "--points", points.to_str().unwrap(), "--seed", "3", "--trials", "500"]);
    let kappa: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("kappa.json")).unwrap()).unwrap();
    assert_eq!(kappa["converged"], true);
    let identity = 1.0 - 1.0 / (0.7 * std::f64::consts::PI).cos();
    assert!(kappa["kappa_upper"].as_f64().unwrap() <= identity + 1e-4);
    run(&[
        "verify", "--suite", "construction", "--suite", "hemisphere", "--suite", "surplus-bound", "--theta-frac", "0.7",
        "--epsilon", "0.1", "--d", "3", "--gamma", "1.1", "--graph", graph, "--seed", "2", "--samples", "100000",
    ]);
    run(&["report"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["sources"].as_array().unwrap().len(), 3);
}

#[test]
fn report_fails_when_a_merged_check_failed() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("verify.json"), r#"{"pass": false, "failures": 1, "checks": [{}]}"#).unwrap();
    let o = spherecut(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_name_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let o = spherecut(dir.path(), &["construct", "--theta", "1.0", "--epsilon", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("between π/2 and π"), "{}", stderr(&o));
    let o = spherecut(dir.path(), &["construct", "--theta-frac", "0.7", "--epsilon", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon"));
    let o = spherecut(dir.path(), &["construct", "--theta", "2", "--theta-frac", "0.7", "--epsilon", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = spherecut(dir.path(), &["verify", "--suite", "hemisphere", "--theta-frac", "0.7", "--d", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
    let o = spherecut(dir.path(), &["sweep", "--family", "complete", "--n", "9..3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = spherecut(dir.path(), &["maxcut", "--graph", "/does/not/exist"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_spherecut"))
        .args(["verify", "--suite", "numerical-lemma", "--grid", "5"])
        .env("SPHERECUT_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_dir.join("verify.csv").exists());
    let flag_dir = dir.path().join("from-flag");
    let o = Command::new(env!("CARGO_BIN_EXE_spherecut"))
        .args(["verify", "--suite", "numerical-lemma", "--grid", "5", "--out"])
        .arg(&flag_dir)
        .env("SPHERECUT_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_dir.join("verify.csv").exists());
}
