use std::fs;
use std::process::{Command, Output};

fn crowdgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowdgame"))
        .args(args)
        .env_remove("CROWDGAME_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = crowdgame(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn payoff_series_of_uncond_ca() {
    let s = stdout(&[
        "payoff", "--n", "0", "--m", "0", "--d", "1/5", "--q", "1/20", "--series", "2",
    ]);
    assert!(s.contains("series: [9/20, 1/10, -1/20]"), "{s}");
}

#[test]
fn payoff_accepts_action_tables() {
    let a = stdout(&[
        "payoff",
        "--n",
        "CA,CA,CA,CA,CA,SA",
        "--m",
        "2",
        "--d",
        "1/5",
        "--q",
        "1/20",
    ]);
    let b = stdout(&[
        "payoff", "--n", "2", "--m", "2", "--d", "1/5", "--q", "1/20",
    ]);
    assert_eq!(a, b);
}

#[test]
fn float_payoff_in_the_zero_noise_limit() {
    let s = stdout(&[
        "payoff", "--n", "2730", "--m", "1365", "--d", "1/5", "--q", "1/20", "--eps", "0",
        "--mode", "float",
    ]);
    assert!(s.contains("payoff: 0.15"), "{s}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "payoff", "--n", "2562", "--m", "1706", "--d", "3/5", "--q", "3/10", "--format", "json",
    ];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn ess_scan_examples() {
    let s = stdout(&["ess-scan", "--d", "3/5", "--q", "3/10", "--format", "csv"]);
    assert_eq!(
        s,
        "d,q,ess,efficient,regions\n3/5,3/10,2560;2562;2730,2730,C;G;H\n"
    );
    let s = stdout(&["ess-scan", "--d", "1/5", "--q", "1/2", "--format", "csv"]);
    assert!(s.contains("1/5,1/2,1365,1365,"), "{s}");
}

#[test]
fn worker_count_does_not_change_output() {
    let base = [
        "single-shot",
        "--d-grid",
        "1/10:9/10:5",
        "--q-grid",
        "1/10:9/10:5",
    ];
    let one = stdout(&[&base[..], &["--workers", "1"]].concat());
    let three = stdout(&[&base[..], &["--workers", "3"]].concat());
    assert_eq!(one, three);
    assert_eq!(one.lines().count(), 26);
}

#[test]
fn phase_diagram_resumes_to_the_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phase.csv");
    let p = path.to_str().unwrap();
    let grid = ["--d-grid", "1/4:3/4:2", "--q-grid", "1/8:5/8:2"];
    let mut args = vec!["phase-diagram", "--out", p];
    args.extend(grid);
    stdout(&args);
    let full = fs::read_to_string(&path).unwrap();
    assert_eq!(full.lines().count(), 5);
    assert!(full.starts_with("d,q,ess,efficient,regions\n"));

    // Simulate an interruption after two points: a log that records them and
    // a torn third line.
    let lines: Vec<&str> = full.lines().collect();
    let mut partial = format!("{}\n{}\n{}\n", lines[0], lines[1], lines[2]);
    let offset = partial.len();
    partial.push_str(&lines[3][..5]);
    fs::write(&path, partial).unwrap();
    let key = |l: &str| l.split(',').take(2).collect::<Vec<_>>().join(",");
    let log = format!(
        "{}\t{}\n{}\t{}\n",
        key(lines[1]),
        lines[0].len() + lines[1].len() + 2,
        key(lines[2]),
        offset
    );
    fs::write(dir.path().join("phase.csv.done"), log).unwrap();
    stdout(&args);
    assert_eq!(fs::read_to_string(&path).unwrap(), full);
    assert!(!dir.path().join("phase.csv.done").exists());
}

#[test]
fn basins_reject_points_outside_region_a() {
    let out = crowdgame(&["basins", "--d", "1/5", "--q", "1/2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside region (A)"));
}

#[test]
fn basins_in_l2_use_the_closed_form() {
    let s = stdout(&["basins", "--d", "2/5", "--q", "1/4"]);
    let rows: Vec<&str> = s.lines().collect();
    assert_eq!(
        rows[0],
        "d,q,epsilon,strategy_index,share,unresolved_fraction"
    );
    assert_eq!(rows.len(), 4);
    assert!(rows[2].starts_with("2/5,1/4,0.001,2,0,"), "{s}");
}

#[test]
fn verify_filters_by_id() {
    let s = stdout(&["verify", "--only", "table4"]);
    assert!(s.contains("criterion  2 table4"), "{s}");
    assert_eq!(s.lines().count(), 2);
    let bad = crowdgame(&["verify", "--only", "nonsense"]);
    assert!(!bad.status.success());
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert!(
        !crowdgame(&["payoff", "--n", "9999", "--m", "0", "--d", "1/5", "--q", "1/20"])
            .status
            .success()
    );
    assert!(
        !crowdgame(&["payoff", "--n", "0", "--m", "0", "--d", "3/2", "--q", "1/20"])
            .status
            .success()
    );
}
