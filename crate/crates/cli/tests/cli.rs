use std::fs;
use std::path::Path;
use std::process::{Command, Output};

/// A ring lattice with chords: every node links to its four nearest neighbors on each side.
fn write_graph(dir: &Path) -> std::path::PathBuf {
    let n = 40;
    let mut text = String::from("# ring lattice\n");
    for i in 0..n {
        for step in 1..=4 {
            text.push_str(&format!("n{} n{}\n", i, (i + step) % n));
        }
    }
    let path = dir.join("ring.txt");
    fs::write(&path, text).unwrap();
    path
}

fn phlp(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_phlp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const QUICK: [&str; 10] = [
    "--pi-res",
    "3",
    "--set",
    "epochs=5",
    "--set",
    "patience=3",
    "--set",
    "hidden=8,4",
    "--max-hop",
    "1",
];

#[test]
fn split_writes_one_directory_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_graph(tmp.path());
    let out = tmp.path().join("out");
    let o = phlp(&[
        "split",
        "--dataset",
        data.to_str().unwrap(),
        "--seeds",
        "0..2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
    for seed in 0..2 {
        let dir = out.join(format!("split_{seed}"));
        for file in [
            "train.csv",
            "val.csv",
            "test.csv",
            "split.meta",
            "nodes.csv",
        ] {
            assert!(dir.join(file).is_file(), "missing {file}");
        }
    }
    let nodes = fs::read_to_string(out.join("split_0/nodes.csv")).unwrap();
    assert_eq!(nodes.lines().count(), 41);
}

#[test]
fn export_features_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_graph(tmp.path());
    let mut exports = Vec::new();
    for run in 0..2 {
        let out = tmp.path().join(format!("out{run}"));
        let mut args = vec![
            "export-features",
            "--dataset",
            data.to_str().unwrap(),
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend(QUICK);
        phlp(&args);
        exports.push(fs::read(out.join("features.csv")).unwrap());
        assert!(out.join("train.csv").is_file());
    }
    assert_eq!(exports[0], exports[1]);
    let text = String::from_utf8(exports.pop().unwrap()).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 5 + 2 * 9);
}

#[test]
fn run_and_analyze_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_graph(tmp.path());
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("exp.cfg");
    fs::write(
        &cfg,
        format!("# quick run\ndataset = {}\nseeds = 0..2\n", data.display()),
    )
    .unwrap();
    let mut args = vec![
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(QUICK);
    let o = phlp(&args);
    assert!(!o.stdout.is_empty());
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 1);
    assert!(lines[3].starts_with("aggregate,complete,"), "{}", lines[3]);
    assert!(out.join("summary.txt").is_file());

    let mut args = vec![
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(QUICK);
    phlp(&args);
    let projection = fs::read_to_string(out.join("projection.csv")).unwrap();
    assert_eq!(
        projection.lines().next().unwrap(),
        "u,v,label,h_with_link,h_without_link"
    );
    assert!(projection.lines().count() > 1);
}

#[test]
fn bad_arguments_fail() {
    let status = Command::new(env!("CARGO_BIN_EXE_phlp"))
        .args([
            "run",
            "--dataset",
            "/does/not/exist.txt",
            "--set",
            "bogus=1",
        ])
        .output()
        .unwrap()
        .status;
    assert!(!status.success());
}
