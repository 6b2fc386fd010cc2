use std::path::Path;
use std::process::Command;

fn skewspec(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_skewspec"))
        .current_dir(dir)
        .env_remove("SKEWSPEC_THREADS")
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(skewspec(d, &["--help"]).0, 0);
    assert_eq!(skewspec(d, &["--version"]).0, 0);
    assert_eq!(skewspec(d, &["frobnicate"]).0, 1);
    assert_eq!(skewspec(d, &["lyapunov", "--lambda", "1.2"]).0, 1);
    assert_eq!(skewspec(d, &["lyapunov", "--steps", "10"]).0, 1);
    assert_eq!(skewspec(d, &["verify", "--suite", "slow"]).0, 1);
    let (code, stdout) = skewspec(d, &["verify", "--suite", "fast"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(d.join("verify.manifest.json").exists());
}

#[test]
fn flag_beats_file_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.cfg"), "steps = 3000\nsamples = 3 # few\nz_angle = 0.25\n").unwrap();
    let (code, _) = skewspec(
        d,
        &["--config", "run.cfg", "lyapunov", "--samples", "2", "--out", "l.csv"],
    );
    assert_eq!(code, 0);
    let m = manifest(&d.join("l.manifest.json"));
    assert_eq!(m["command"], "lyapunov");
    assert_eq!(m["config"]["samples"], 2);
    assert_eq!(m["config"]["steps"], 3000);
    assert_eq!(m["config"]["z-angle"], 0.25);
    assert_eq!(m["config"]["lambda"], 0.5);
    assert_eq!(m["outputs"][0], "l.csv");

    std::fs::write(d.join("typo.cfg"), "stpes = 3000\n").unwrap();
    assert_eq!(skewspec(d, &["--config", "typo.cfg", "lyapunov"]).0, 1);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = ["suitability", "--N", "12,24", "--samples", "30", "--seed", "5"];
    let mut files = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = format!("s{i}.json");
        let ver = format!("v{i}.csv");
        let mut args = vec!["--threads", threads];
        args.extend(base);
        args.extend(["--out", &out, "--verdicts", &ver]);
        assert_eq!(skewspec(d, &args).0, 0);
        files.push((
            std::fs::read(d.join(&out)).unwrap(),
            std::fs::read(d.join(&ver)).unwrap(),
        ));
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn ids_column_is_a_distribution_function() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _) = skewspec(
        d,
        &["ids", "--N", "128", "--samples", "8", "--grid", "100", "--g", "0.7"],
    );
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(d.join("ids.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("energy,k"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (e, k) = l.split_once(',').unwrap();
            (e.parse().unwrap(), k.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    assert_eq!(rows[99].1, 1.0);
    assert!(!text.contains('\r'));
}

#[test]
fn threads_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_skewspec"))
        .current_dir(dir.path())
        .env("SKEWSPEC_THREADS", "not-a-number")
        .arg("verify")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn in_process_entry_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let code = skewspec_cli::run_command([
        "skewspec",
        "zero-spectrum",
        "--sizes",
        "64,256",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("N,min_abs_eig\n64,"));
    assert!(skewspec_cli::manifest_path(&out).exists());
}
