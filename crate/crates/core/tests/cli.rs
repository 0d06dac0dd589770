use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_v2i-secrecy")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["--preset", "power_budget", "--no-timing"], out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["summary.csv", "slots.csv", "trace.csv", "effective_config.toml"] {
        let x = fs::read(a.join(name)).unwrap();
        assert!(!x.contains(&b'\r'));
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn zero_budget_config_gives_zero_rate() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("zero.toml");
    fs::write(&config, "power_budget = 0.0\nn_slots = 10\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", config.to_str().unwrap(), "--no-timing"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("summary.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][2], "10");
    assert_eq!(&rows[0][9], "0");
    assert_eq!(&rows[0][10], "0");
    assert_eq!(read_csv(&out.join("slots.csv")).len(), 10);
}

#[test]
fn beta_sweep_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--preset", "beta_sweep"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let optima = read_csv(&dir.path().join("beta_optima.csv"));
    assert_eq!(optima.len(), 12);
    assert!(optima.iter().all(|r| &r[8] == "true"));
    assert!(dir.path().join("beta_curve_11.csv").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--preset", "nonsense"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let config = dir.path().join("bad.toml");
    fs::write(&config, "n_slots = 0\n").unwrap();
    let o = run(&["--config", config.to_str().unwrap()], dir.path());
    assert!(!o.status.success());

    fs::write(&config, "no_such_key = 1\n").unwrap();
    let o = run(&["--config", config.to_str().unwrap()], dir.path());
    assert!(!o.status.success());

    fs::write(&config, "this is not toml").unwrap();
    let o = run(&["--config", config.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
}
