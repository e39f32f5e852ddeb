use std::path::PathBuf;
use std::process::{Command, Output};

fn bintab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bintab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bintab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    let _ = std::fs::remove_file(&path);
    path
}

#[test]
fn count_three_by_three() {
    let out = bintab(&["count", "--rows", "2,2,2", "--cols", "2,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rows,cols,feasible,count,ln_count,gZ,lower_log,gamma,lnI,rho"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[3], "6");
    let rho: f64 = fields[9].parse().unwrap();
    assert!((rho - 0.691_358).abs() < 1e-6);
}

#[test]
fn count_family_json() {
    let out = bintab(&[
        "count", "--n", "4", "--B", "0.5", "--C", "0.5", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"], "9876");
    assert!(v["rho"].as_f64().unwrap() < 1.0);
}

#[test]
fn infeasible_is_reported_with_exit_two() {
    let out = bintab(&["count", "--rows", "2,2", "--cols", "3,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",false,0,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no 0-1 matrix"));
}

#[test]
fn malformed_margins_exit_two() {
    let out = bintab(&["count", "--rows", "2,2", "--cols", "3,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn state_cap_exit_four() {
    let out = bintab(&[
        "count",
        "--rows",
        "2,2,2,2,2",
        "--cols",
        "2,2,2,2,2",
        "--state-cap",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn empty_interior_exit_two() {
    let out = bintab(&["typical", "--rows", "3,3,1,1", "--cols", "3,3,1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn typical_blocks() {
    let out = bintab(&["typical", "--n", "100", "--B", "0.5", "--C", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "row_margin,col_margin,z,multiplicity"
    );
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn delta_domain_error() {
    assert_eq!(
        bintab(&["delta", "--B", "2", "--C", "0.5"]).status.code(),
        Some(2)
    );
    let out = bintab(&["delta", "--B", "1", "--C", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("1.00000000000000e0,5.00000000000000e-1,0.00000000000000e0,"));
}

#[test]
fn empty_sweep_grid_writes_nothing() {
    let path = scratch("empty.csv");
    let out = bintab(&["sweep", "--c-steps", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn output_is_identical_across_thread_counts() {
    let a = scratch("sweep1.csv");
    let b = scratch("sweep8.csv");
    for (path, threads) in [(&a, "1"), (&b, "8")] {
        let out = bintab(&[
            "sweep",
            "--c-steps",
            "20",
            "--b-steps",
            "20",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert!(!ta.contains(&b'\r'));

    let meta = PathBuf::from(format!("{}.meta.json", a.display()));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(meta).unwrap()).unwrap();
    assert_eq!(v["command"], "sweep");
    assert_eq!(v["rows"], 400);
    assert_eq!(v["summary"]["points"], 400);
}

#[test]
fn figure1_rows_are_non_positive() {
    let out = bintab(&["figure1", "--resolution", "50"]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[2] <= 0.0);
        assert_eq!(f[2] == 0.0, f[1] == 1.0);
    }
}

#[test]
fn convergence_failure_is_recorded_and_exits_three() {
    let path = scratch("conv.csv");
    let out = bintab(&[
        "convergence",
        "--ns",
        "50,100",
        "--max-iter",
        "1",
        "--tol",
        "1e-15",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("did not converge"));
}

#[test]
fn missing_instance_is_usage_error() {
    assert_eq!(bintab(&["count"]).status.code(), Some(2));
    assert_eq!(bintab(&["count", "--n", "4"]).status.code(), Some(2));
}
