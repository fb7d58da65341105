use std::path::Path;
use std::process::{Command, Output};

fn seqmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqmo")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    let text = format!(
        "version = 1\nproblem = motsp\nn = 8\nalgorithm = seqmo-moead\npop_size = 20\nneighborhood_size = 5\n\
         max_fe = 400\nepochs = 2\nhidden_units = 8\nembedding_dim = 4\ntrain_every = 2\nsnapshot_every = 2\n{extra}"
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_result_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = seqmo(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["results.csv", "population.csv", "update_trace.csv", "loss_trace.csv", "snapshots.jsonl", "manifest.json", "run.cfg"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let trace = seqmo(&["trace", out.join("update_trace.csv").to_str().unwrap()]);
    assert!(trace.status.success());
    assert!(String::from_utf8_lossy(&trace.stdout).starts_with("iteration"));
}

#[test]
fn gen_instance_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("motsp8.txt");
    let o = seqmo(&["gen-instance", "--n", "8", "--seed", "4", "--out", inst.to_str().unwrap()]);
    assert!(o.status.success());
    let cfg = small_config(dir.path(), "instance_path = motsp8.txt\nalgorithm = nsga2\n");
    // the second algorithm key is a duplicate and must be rejected
    let o = seqmo(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = small_config(dir.path(), "instance_path = motsp8.txt\n");
    let o = seqmo(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--set",
        "algorithm=nsga2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "max_fe_typo = 3\n");
    let o = seqmo(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = seqmo(&["run", "--config", dir.path().join("absent.cfg").to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = dir.path().join("cmp");
    let o = seqmo(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--algorithms",
        "moead,seqmo-moead",
        "--seeds",
        "1-2",
        "--jobs",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "instance,moead,seqmo-moead");
    assert!(table.lines().nth(1).unwrap().starts_with("MOTSP8,"));
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 5);
}
