use std::fs;

use sandwich_core::harness::{run_experiment, ExperimentConfig};

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

#[test]
fn sandwich_reports_containment_rate() {
    let rs = run_experiment(cfg("kind = \"sandwich\"\nn = 10000\nd = 2\nx = 4.0\ntrials = 50\nseed = 3\n")).unwrap();
    let row = rs.row("containment").expect("containment row");
    assert_eq!(row.trials, 50);
    assert!((0.0..=1.0).contains(&row.mean));
    let stage = rs.row("stage:dout-in-gnp").expect("d-out stage row");
    assert!(stage.mean >= 0.9, "{stage:?}");
    assert!(rs.to_csv().lines().skip(1).all(|l| l.contains(",2,,50,3,")));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let base = "kind = \"couple\"\nmodel = \"dout-gnp\"\nn = 60\nd = 2\np = 0.3\ntrials = 40\nseed = 12\n";
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        let mut c = cfg(base);
        let out = dir.path().join(format!("t{threads}"));
        c.out = Some(out.clone());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_experiment(c)).unwrap();
        outputs.push((fs::read(out.join("results.csv")).unwrap(), fs::read(out.join("results.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn moments_gate_uses_standard_errors() {
    let rs = run_experiment(cfg(
        "kind = \"moments\"\nmodel = \"loopless-pairing\"\nn = 2000\nd = 4\ntrials = 400\nseed = 1\nstatistics = \"double-edges,triangles,edges\"\ngate-se = 4.0\n",
    ))
    .unwrap();
    assert!(rs.gates_passed(), "{:?}", rs.gates);
    assert_eq!(rs.row("edges").unwrap().mean, 4000.0);
}

#[test]
fn enumerate_writes_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg("kind = \"enumerate\"\nmodel = \"grd\"\nn = 6\nd = 3\n");
    c.out = Some(dir.path().to_path_buf());
    let rs = run_experiment(c).unwrap();
    assert_eq!(rs.row("support-size").unwrap().mean, 70.0);
    assert_eq!(fs::read_to_string(dir.path().join("distribution.txt")).unwrap().lines().count(), 70);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ExperimentConfig::from_toml("kind = \"sample\"\nbogus = 1\n").is_err());
    assert!(run_experiment(cfg("kind = \"sample\"\nd = 3\n")).is_err());
    assert!(run_experiment(cfg("kind = \"sample\"\nn = 4\nd = 2\ntrials = 0\n")).is_err());
    assert!(run_experiment(cfg("kind = \"micro-study\"\nn = 4\nd = 2\n")).is_err());
}
