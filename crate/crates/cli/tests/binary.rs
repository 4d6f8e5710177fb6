//! Exit codes and file output of the `mucorr` binary.

use std::process::Command;

fn mucorr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mucorr")).args(args).output().unwrap()
}

#[test]
fn success_paths() {
    for args in [
        vec!["list"],
        vec!["validate", "paper-standard"],
        vec!["run", "paper-55-35", "--format", "json"],
        vec!["sweep", "--parameter", "theta_degrees", "--min", "0", "--max", "90", "--step", "5"],
        vec!["--help"],
        vec!["--version"],
    ] {
        let out = mucorr(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "id = \"bad\"\nkind = \"nsbox\"\n[nsbox]\nisotropic_p = 1.5\n").unwrap();
    for args in [
        vec!["run", "no-such-scenario"],
        vec!["validate", bad.to_str().unwrap()],
        vec!["sweep", "--parameter", "phi", "--min", "0", "--max", "1", "--step", "0.1"],
        vec!["sweep", "--parameter", "isotropic_p", "--min", "0", "--max", "1", "--step", "0"],
        vec!["run", "paper-coin", "--samples", "0"],
        vec!["frobnicate"],
        vec!["run", "paper-coin", "--format", "xml"],
    ] {
        let out = mucorr(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_two() {
    let out = mucorr(&["run", "paper-coin", "--out", "/nonexistent-dir/x.csv", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn writes_csv_file_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shapes.csv");
    let p = path.to_str().unwrap();
    let args = ["run", "paper-shapes", "--mc", "--samples", "50000", "--seed", "5", "--format", "csv", "--out", p];
    assert_eq!(mucorr(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(mucorr(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
    assert!(first.starts_with("scenario,quantity,analytic"));
    assert_eq!(first.lines().count(), 2);
}
