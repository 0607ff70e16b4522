use std::path::Path;
use std::process::{Command, Output};

use ira_bench::config::load_code_files;
use ira_bench::sim::CSV_HEADER;
use ira_concat::interleaver::{count_bad_mappings, BlockPermutation, SensitiveSets};

fn irabench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irabench")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = irabench(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn construct(dir: &Path, seed: &str, stem: &str) {
    let alist = format!("{stem}.alist");
    let sidecar = format!("{stem}.ira");
    ok(dir, &["construct", "--k", "128", "--n", "181", "--seed", seed, "--alist", &alist, "--sidecar", &sidecar]);
}

#[test]
fn construct_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "1", "a");
    construct(dir.path(), "1", "b");
    assert_eq!(read(dir.path(), "a.alist"), read(dir.path(), "b.alist"));
    assert_eq!(read(dir.path(), "a.ira"), read(dir.path(), "b.ira"));
    let code = load_code_files(&dir.path().join("a.alist"), &dir.path().join("a.ira")).unwrap();
    assert!(code.audit().is_empty());
}

#[test]
fn analyze_writes_181_rows_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "1", "o");
    ok(dir.path(), &["analyze", "--alist", "o.alist", "--sidecar", "o.ira", "--csv", "h.csv", "--report", "r.csv"]);
    let csv = read(dir.path(), "h.csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 181);
    for (i, row) in rows.iter().enumerate() {
        let (idx, count) = row.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), i);
        assert!(count.parse::<usize>().unwrap() <= 181);
    }
    assert_eq!(read(dir.path(), "r.csv").lines().count(), 182);
}

#[test]
fn designed_permutation_reloads_clean() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "1", "o");
    construct(dir.path(), "2", "i");
    ok(
        dir.path(),
        &[
            "design-interleaver", "--outer-alist", "o.alist", "--outer-sidecar", "o.ira", "--inner-alist", "i.alist",
            "--inner-sidecar", "i.ira", "--out", "pi.txt", "--sets", "pi.sets", "--pi0-out", "pi0.txt",
            "--candidates", "2", "--pilot-blocks", "2", "--pilot-ebno", "3",
        ],
    );
    let pi = BlockPermutation::parse(&read(dir.path(), "pi.txt")).unwrap();
    let sets = SensitiveSets::parse(&read(dir.path(), "pi.sets")).unwrap();
    assert!(pi.is_bijection());
    assert!(pi.design().t > 0);
    assert_eq!(sets.row_code_nodes.len(), pi.design().t);
    assert_eq!(count_bad_mappings(&pi, &sets).unwrap().0, 0);
    let pi0 = BlockPermutation::parse(&read(dir.path(), "pi0.txt")).unwrap();
    assert!(count_bad_mappings(&pi0, &sets).unwrap().0 > 0);
}

const SINGLE: &str = r#"
mode = "single"
ebno_db = [0.0, 1.0, 2.0]
master_seed = 11
output = "curve.csv"
min_block_errors = 20
max_blocks = 3000
[outer]
k = 128
n = 181
seed = 1
[schedule]
inner_iters = 100
"#;

#[test]
fn simulate_is_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sim.toml"), SINGLE).unwrap();
    ok(dir.path(), &["simulate", "--config", "sim.toml", "--workers", "1"]);
    ok(dir.path(), &["simulate", "--config", "sim.toml", "--workers", "4", "--output", "curve4.csv"]);
    let one = read(dir.path(), "curve.csv");
    assert_eq!(one, read(dir.path(), "curve4.csv"));
    let lines: Vec<&str> = one.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], CSV_HEADER);

    // Resume: nothing new is appended for points already present.
    let stdout = ok(dir.path(), &["simulate", "--config", "sim.toml"]);
    assert!(stdout.is_empty());
    assert_eq!(read(dir.path(), "curve.csv"), one);

    // A new seed adds rows below the old ones.
    ok(dir.path(), &["simulate", "--config", "sim.toml", "--master-seed", "12", "--ebno", "2.0"]);
    assert_eq!(read(dir.path(), "curve.csv").lines().count(), 5);

    ok(dir.path(), &["report", "--out", "merged.csv", "curve.csv", "curve4.csv"]);
    let merged = read(dir.path(), "merged.csv");
    assert_eq!(merged.lines().count(), 1 + 4 + 3);
    assert!(merged.starts_with(&format!("series,{CSV_HEADER}\n")));
}

#[test]
fn noiseless_flag_gives_zero_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sim.toml"), SINGLE).unwrap();
    ok(dir.path(), &["simulate", "--config", "sim.toml", "--noiseless", "--max-blocks", "50", "--ebno", "-3"]);
    let csv = read(dir.path(), "curve.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..4], ["-3", "50", "0", "0"]);
}

#[test]
fn config_dir_env_is_searched() {
    let dir = tempfile::tempdir().unwrap();
    let confs = dir.path().join("confs");
    std::fs::create_dir(&confs).unwrap();
    std::fs::write(confs.join("sim.toml"), SINGLE.replace("[0.0, 1.0, 2.0]", "[9.0]")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_irabench"))
        .current_dir(dir.path())
        .env("IRABENCH_CONFIG_DIR", &confs)
        .args(["simulate", "--config", "sim.toml", "--max-blocks", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(confs.join("curve.csv").exists());
}

#[test]
fn failures_are_one_line_and_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["construct", "--k", "128"],
        vec!["simulate", "--config", "missing.toml"],
        vec!["analyze", "--alist", "x", "--sidecar", "y", "--csv", "a", "--report", "b"],
        vec!["frobnicate"],
    ] {
        let out = irabench(dir.path(), &args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("irabench: error: "));
    }
    std::fs::write(dir.path().join("curve.csv"), "wrong,header\n").unwrap();
    std::fs::write(dir.path().join("sim.toml"), SINGLE).unwrap();
    assert!(!irabench(dir.path(), &["simulate", "--config", "sim.toml"]).status.success());
    let v = irabench(dir.path(), &["--version"]);
    assert!(String::from_utf8(v.stdout).unwrap().contains("curve-csv/1"));
}
