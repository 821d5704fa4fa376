use std::fs;
use std::process::Command;

fn sandwich() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sandwich"));
    c.env_remove("SANDWICH_SEED");
    c
}

#[test]
fn sample_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "kind = \"sample\"\nmodel = \"pairing\"\nn = 4\nd = 2\ntrials = 3\nseed = 7\n").unwrap();
    for sub in ["a", "b"] {
        let st = sandwich()
            .args(["sample", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert!(st.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.iter().filter(|n| n.to_string_lossy().ends_with(".pairing")).count(), 3);
    for n in names {
        assert_eq!(fs::read(dir.path().join("a").join(&n)).unwrap(), fs::read(dir.path().join("b").join(&n)).unwrap());
    }
}

#[test]
fn flags_override_file_and_env_is_lowest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "model = \"gnp\"\nn = 5\np = 0.5\ntrials = 2\n").unwrap();
    let out = sandwich().args(["sample", "--trials", "4", "--config"]).arg(&cfg).env("SANDWICH_SEED", "11").output().unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.contains(",4,11,"), "{row}");
    let out = sandwich().args(["sample", "--seed", "12", "--config"]).arg(&cfg).env("SANDWICH_SEED", "11").output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().lines().nth(1).unwrap().contains(",2,12,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(sandwich().args(["sample", "--d", "2"]).status().unwrap().code(), Some(2));
    assert_eq!(sandwich().args(["frobnicate"]).status().unwrap().code(), Some(2));
    assert_eq!(sandwich().args(["sample", "--n", "4", "--d", "2", "--model", "nope"]).status().unwrap().code(), Some(2));
}

#[test]
fn micro_study_gate_passes() {
    let out = sandwich()
        .args(["micro-study", "--model", "pairing-plus-matchings", "--i", "1", "--n", "4", "--d", "2", "--model-b", "loopless-pairing", "--d-b", "3"])
        .output()
        .unwrap();
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("deficiency,")));
}

#[test]
fn gate_failure_exits_three() {
    // Edge count of G(n, p) compared against its mean with an absurdly tight gate.
    let out = sandwich()
        .args(["moments", "--model", "gnp", "--n", "30", "--p", "0.5", "--statistics", "edges", "--trials", "50", "--gate-se", "0.0001"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
