use std::fs;
use std::path::Path;
use std::process::Command;

use sdnlw_cli::output::{verify_manifest, RunManifest, MANIFEST};
use sdnlw_cli::run;

fn sdnlw(args: &[&str]) -> i32 {
    let mut argv = vec!["sdnlw"];
    argv.extend_from_slice(args);
    run(argv)
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sdnlw")).args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_slice(&read(dir, MANIFEST)).unwrap()
}

#[test]
fn quick_selftest_passes() {
    assert_eq!(sdnlw(&["selftest", "--quick"]), 0);
}

#[test]
fn partition_is_reproducible_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let common = ["partition", "--s", "1", "--N", "8", "--samples", "1000", "--seed", "7"];
    let mut args = common.to_vec();
    args.extend(["--threads", "1", "--out", a.to_str().unwrap()]);
    assert_eq!(sdnlw(&args), 0);
    let mut args = common.to_vec();
    args.extend(["--threads", "4", "--out", b.to_str().unwrap()]);
    assert_eq!(sdnlw(&args), 0);
    assert_eq!(read(&a, "reports.jsonl"), read(&b, "reports.jsonl"));
    assert_eq!(read(&a, "summary.csv"), read(&b, "summary.csv"));
    assert_eq!(manifest(&a).outputs, manifest(&b).outputs);
    assert!(verify_manifest(&a).unwrap().is_empty());
}

#[test]
fn missing_flag_is_named_on_stderr() {
    let out = binary(&["partition", "--N", "4", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--s"));
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(binary(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(binary(&["partition", "--s", "1", "--N", "2", "--samples", "4", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(binary(&["partition", "--s", "one", "--N", "2", "--samples", "4"]).status.code(), Some(1));
    assert_eq!(binary(&["evolve", "--s", "1", "--N", "2", "--dt", "-1", "--T", "1"]).status.code(), Some(1));
    assert_eq!(binary(&[]).status.code(), Some(1));
}

#[test]
fn degenerate_weights_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = binary(&[
        "density-check", "--s", "1", "--N", "2", "--dt", "0.01", "--T", "0.02", "--samples", "64",
        "--ess-floor", "1e9", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("effective sample size"));
}

#[test]
fn blow_up_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = binary(&[
        "evolve", "--s", "0.2", "--N", "2", "--dt", "1", "--T", "100", "--splitting", "lie", "--noise", "false",
        "--out", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up"));
}

#[test]
fn snapshots_feed_the_field_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mu");
    let d = dir.to_str().unwrap();
    assert_eq!(sdnlw(&["sample-mu", "--s", "1", "--N", "6", "--count", "3", "--seed", "2", "--out", d]), 0);
    let bytes = read(&dir, "samples.bin");
    let per = 4 + 4 + 4 + 8 + 2 * 13 * 13 * 16;
    assert_eq!(bytes.len(), 3 * per);
    let one = tmp.path().join("one.bin");
    fs::write(&one, &bytes[..per]).unwrap();
    let f = one.to_str().unwrap();
    let fdir = tmp.path().join("f");
    assert_eq!(sdnlw(&["functionals", "--in", f, "--out", fdir.to_str().unwrap()]), 0);
    let report: serde_json::Value = serde_json::from_slice(&read(&fdir, "functionals.json")).unwrap();
    assert_eq!(report["cutoff"], 6);
    assert_eq!(report["s"], 1.0);
    let bdir = tmp.path().join("b");
    assert_eq!(sdnlw(&["besov", "--in", f, "--alpha", "0.5", "--p", "inf", "--q", "inf", "--out", bdir.to_str().unwrap()]), 0);
    let b: serde_json::Value = serde_json::from_slice(&read(&bdir, "besov.json")).unwrap();
    assert!(b["norm"].as_f64().unwrap() > 0.0);
    let kdir = tmp.path().join("k");
    assert_eq!(sdnlw(&["kr-check", "--in", f, "--alpha", "0.5", "--R", "100", "--out", kdir.to_str().unwrap()]), 0);
    assert!(String::from_utf8(read(&kdir, "kr.jsonl")).unwrap().contains("\"member\":true"));
}

#[test]
fn evolve_writes_trajectories_and_observables() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    let args = [
        "evolve", "--s", "1", "--N", "3", "--dt", "0.05", "--T", "0.5", "--count", "2", "--seed", "4",
        "--snapshot-every", "5", "--out", d,
    ];
    assert_eq!(sdnlw(&args), 0);
    let per = 20 + 2 * 49 * 16;
    assert_eq!(read(tmp.path(), "trajectory_00000.bin").len(), 3 * per);
    let lines = String::from_utf8(read(tmp.path(), "observables.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2 * 3 * 3);
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    for key in ["seed", "sample", "t", "name", "value"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}

#[test]
fn manifest_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = [
        "qi-scan", "--s", "1", "--N", "2", "--dt", "0.1", "--T", "0.5", "--samples", "200", "--seed", "3",
        "--out", a.to_str().unwrap(),
    ];
    assert_eq!(sdnlw(&args), 0);
    let cfg = a.join(MANIFEST);
    assert_eq!(sdnlw(&["qi-scan", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]), 0);
    assert_eq!(read(&a, "reports.jsonl"), read(&b, "reports.jsonl"));
    assert_eq!(manifest(&a).config, manifest(&b).config);
}

#[test]
fn ini_config_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let ini = tmp.path().join("run.ini");
    let out = tmp.path().join("out");
    fs::write(
        &ini,
        format!("s = 1\nseed = 5\n[partition]\nN = 3\nsamples = 2e2\nout_dir = {}\n", out.display()),
    )
    .unwrap();
    assert_eq!(sdnlw(&["partition", "--config", ini.to_str().unwrap(), "--N", "2"]), 0);
    let m = manifest(&out);
    assert_eq!(m.config["N"], "2");
    assert_eq!(m.config["samples"], "2e2");
    assert_eq!(m.seed, Some(5));
    assert_eq!(m.parameters["samples"], 200);
}

#[test]
fn environment_sets_default_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sdnlw"))
        .args(["commutator-sweep", "--Nmin", "4", "--Nmax", "8", "--samples", "3"])
        .env("SDNLW_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(read(tmp.path(), "commutator.csv")).unwrap();
    assert!(csv.starts_with("N,ratio_mean,ratio_max"));
    assert_eq!(csv.lines().count(), 3);
}
