use std::path::Path;
use std::process::{Command, Output};

fn qarbench(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qarbench"));
    cmd.args(args).env_remove("QARBENCH_THREADS");
    if let Some(t) = threads {
        cmd.env("QARBENCH_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{stdout}"))
        .parse()
        .unwrap()
}

#[test]
fn steady_prints_a_balanced_cooling_record() {
    let out = qarbench(&["steady"], None);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    let p_c = field(&s, "P_c");
    assert!(p_c > 0.0);
    let max = [field(&s, "P_h"), p_c, field(&s, "P_w")].iter().fold(0.0f64, |m, p| m.max(p.abs()));
    assert!(field(&s, "sum_P").abs() <= 1e-10 * max);
    assert_eq!(field(&s, "g"), 0.25);
}

#[test]
fn unknown_config_key_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "chi = 0.01\nomega_q = 3\n").unwrap();
    let out = qarbench(&["sweep-g", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega_q"));
    assert!(!dir.path().join("sweep_coupling.csv").exists());

    let out = qarbench(&["map", "--grid", "kappa.count=1"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.kappa.count"));
}

#[test]
fn no_completed_rows_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "entropy",
        "--grid",
        "g.min=-2",
        "--grid",
        "g.max=-1",
        "--grid",
        "g.scale=linear",
        "--grid",
        "g.count=3",
        "--out",
        dir.path().to_str().unwrap(),
    ];
    let out = qarbench(&args, None);
    assert_eq!(out.status.code(), Some(3));
    let csv = std::fs::read_to_string(dir.path().join("entropy_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
}

fn run_into(dir: &Path, args: &[&str], threads: Option<&str>) -> String {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    let out = qarbench(&all, threads);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    names.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect::<Vec<_>>().join("\u{0}")
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let small = cfg_dir.path().join("small.cfg");
    std::fs::write(&small, "samples = 4\npanels = 1, 4\n").unwrap();
    let cases: [&[&str]; 3] = [
        &["sweep-g", "--seed", "7", "--grid", "g.count=6"],
        &[
            "random-opt",
            "--seed",
            "7",
            "--grid",
            "g.count=4",
            "--grid",
            "chi.count=4",
            "--config",
            small.to_str().unwrap(),
        ],
        &["window", "--grid", "g.count=2", "--grid", "T_h.count=4", "--grid", "T_w.count=8"],
    ];
    for args in cases {
        let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run_into(a.path(), args, Some("1"));
        assert_eq!(first, run_into(b.path(), args, Some("1")), "{args:?}");
        assert_eq!(first, run_into(c.path(), args, Some("3")), "{args:?}");
    }
}

#[test]
fn evolve_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = qarbench(&["evolve", "--t-max", "4", "--points", "11", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,P_c_instantaneous,trace,min_eigenvalue,status");
    assert_eq!(lines.count(), 11);
}
