use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use congested_crowd::output::read_field_csv;
use congested_crowd::{run_cli, EXIT_OK, EXIT_USAGE, THREADS_VAR};

const WALL: &str = r#"
[grid]
dim = 1
extent = [2.0]
cells = [32]

[initial]
kind = "box"
lo = [0.0]
hi = [1.0]

[velocity]
kind = "constant"
value = [-1.0]

[solver]
tau = 0.02
horizon = 0.1
frame_every = 2
"#;

fn well(center: f64) -> String {
    format!(
        r#"
[grid]
dim = 1
extent = [2.0]
cells = [32]

[initial]
kind = "bump"
center = [{center}]
radius = 0.5

[velocity]
kind = "potential-well"
center = [1.0]
strength = 1.0

[solver]
tau = 0.01
horizon = 0.2
frame_every = 5
"#
    )
}

fn run(args: &[&str]) -> (i32, String, String) {
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(&args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn sorted_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn simulate_writes_frames_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "wall.toml", WALL);
    let out = dir.path().join("out");
    let (code, stdout, stderr) = run(&["simulate", &s, "-o", out.to_str().unwrap(), "--pgm"]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert!(!stdout.is_empty());
    for name in ["manifest.txt", "metrics.csv", "frames.csv", "frame_000000.csv", "frame_000000.pgm", "pressure_000001.csv"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let first = read_field_csv(&fs::read_to_string(out.join("frame_000000.csv")).unwrap()).unwrap();
    assert_eq!((first.dim, first.nx, first.ny, first.h, first.t), (1, 32, 1, 2.0 / 32.0, 0.0));
    let mass: f64 = first.values.iter().sum::<f64>() * first.h;
    assert!((mass - 1.0).abs() < 1e-10);
    assert!(first.values[..16].iter().all(|&v| (v - 1.0).abs() < 1e-12));
    let frames = fs::read_to_string(out.join("frames.csv")).unwrap();
    assert!(frames.lines().nth(1).unwrap().contains(",reconstructed,"), "{frames}");
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("# congested-crowd simulate"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "well.toml", &well(0.6));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["simulate", &s, "-o", a.to_str().unwrap()]).0, EXIT_OK);
    assert_eq!(run(&["simulate", &s, "-o", b.to_str().unwrap()]).0, EXIT_OK);
    let (fa, fb) = (sorted_files(&a), sorted_files(&b));
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        if x.file_name().unwrap() == "manifest.txt" {
            continue;
        }
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn contract_w2_prints_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.toml", &well(0.6));
    let b = write(dir.path(), "b.toml", &well(1.3));
    let out = dir.path().join("out");
    let (code, stdout, stderr) = run(&["contract-w2", &a, &b, "-o", out.to_str().unwrap(), "--lambda=-1"]);
    assert_eq!(code, EXIT_OK, "{stdout}{stderr}");
    let last = stdout.lines().last().unwrap();
    assert!(last.starts_with("VERDICT: PASS max_slack="), "{last}");
    let slack: f64 = last.rsplit('=').next().unwrap().parse().unwrap();
    assert!(slack <= 0.10, "{slack}");
    assert!(out.join("report.csv").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "wall.toml", WALL);
    let missing = dir.path().join("nope.toml");
    for args in [
        vec!["teleport", s.as_str()],
        vec!["simulate", missing.to_str().unwrap()],
        vec!["simulate", s.as_str(), "--lambda=2"],
        vec!["simulate", s.as_str(), "--solver.tau=-1"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(err.starts_with("error: "), "{err}");
    }
    let (_, _, err) = run(&["simulate", s.as_str(), "--solver.tau=-1"]);
    assert!(err.contains("solver.tau"), "{err}");
}

#[test]
fn duplicate_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = WALL.replace("tau = 0.02", "tau = 0.02\ntau = 0.01");
    let s = write(dir.path(), "dup.toml", &text);
    let (code, _, err) = run(&["simulate", &s, "-o", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("tau"), "{err}");
}

#[test]
fn binary_reports_exit_codes_and_thread_variable() {
    let exe = env!("CARGO_BIN_EXE_congested-crowd");
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "wall.toml", WALL);
    let out = dir.path().join("out");

    let status = Command::new(exe).args(["simulate", &s, "-o"]).arg(&out).env(THREADS_VAR, "2").output().unwrap().status;
    assert_eq!(status.code(), Some(0));

    let bad = Command::new(exe).args(["simulate", &s, "-o"]).arg(&out).env(THREADS_VAR, "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains(THREADS_VAR));

    let none = Command::new(exe).output().unwrap();
    assert_eq!(none.status.code(), Some(2));
}
