use assert_cmd::Command;
use serde_json::Value;

fn nodedp() -> Command {
    Command::cargo_bin("nodedp").unwrap()
}

fn json_line(out: &[u8]) -> Value {
    serde_json::from_slice(out).unwrap()
}

#[test]
fn sample_then_estimate_density() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    nodedp().args(["sample", "--model", "gnm", "--n", "20", "--m", "95", "--seed", "3", "--out"]).arg(&g).assert().success();
    let text = std::fs::read_to_string(&g).unwrap();
    assert!(text.starts_with("20 95\n"));
    for (mode, scope) in [("baseline", "all-graphs"), ("promise", "homogeneous-only"), ("restricted", "homogeneous-only")] {
        let out = nodedp()
            .args(["estimate", "density", "--epsilon", "1", "--mode", mode, "--rho", "0.5", "--C", "49", "--seed", "1", "--input"])
            .arg(&g)
            .output()
            .unwrap();
        assert!(out.status.success());
        let v = json_line(&out.stdout);
        assert_eq!(v["scope"], scope);
        let value = v["value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&value));
    }
    let out = nodedp()
        .args(["estimate", "density", "--epsilon", "1", "--mode", "extended", "--promise-in-H", "--input"])
        .arg(&g)
        .output()
        .unwrap();
    assert_eq!(json_line(&out.stdout)["mode"], "promise");
    // exact extension beyond n = 5 is refused
    nodedp().args(["estimate", "density", "--epsilon", "1", "--mode", "extended", "--input"]).arg(&g).assert().code(2);
}

#[test]
fn estimate_blocks_from_stdin() {
    let out = nodedp()
        .args(["estimate", "blocks", "--epsilon", "5", "--k", "2", "--input", "-"])
        .write_stdin("4 2\n0 1\n2 3\n")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_line(&out.stdout);
    assert_eq!(v["b_hat"].as_array().unwrap().len(), 2);
    assert_eq!(v["sensitivity_mode"], "theoretical");
}

#[test]
fn audit_exit_codes_follow_violations() {
    let out = nodedp().args(["audit", "dp", "--mechanism", "laplace", "--n", "3", "--epsilon", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_line(&out.stdout)["passes"], true);
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("audit.csv");
    nodedp()
        .args(["audit", "dp", "--mechanism", "laplace", "--n", "3", "--epsilon", "1", "--scale-factor", "0.3", "--csv"])
        .arg(&csv)
        .assert()
        .code(1);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("pair_id,i,j,d_v,q,log_ratio,bound,violation"));
    nodedp().args(["audit", "sensitivity", "--n", "4", "--d", "2", "--mu", "0.5"]).assert().success();
}

#[test]
fn experiments_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.conf");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg, "estimator = baseline\nmodel = gnm\nn = 16, 32, 64\nepsilon = 1\ntrials = 20\nseed = 5\n").unwrap();
    nodedp().args(["experiment", "mse", "--config"]).arg(&cfg).arg("--out").arg(&csv).assert().success();
    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(first.starts_with("# schema=1\n"));
    assert_eq!(first.lines().count(), 5);
    nodedp().args(["experiment", "mse", "--config"]).arg(&cfg).arg("--out").arg(&csv).assert().success();
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);

    let out = nodedp().args(["experiment", "coupling", "--n", "5", "--m", "4", "--k", "1", "--trials", "2000"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(json_line(&out.stdout)["structural_violations"], 0);
    nodedp().args(["experiment", "homogeneity", "--n", "8", "--p", "0.25", "--samples", "20"]).assert().success();
    nodedp().args(["experiment", "reduction", "--n", "4", "--epsilon", "1"]).assert().success();
}

#[test]
fn bad_arguments_fail() {
    nodedp().args(["sample", "--model", "gnm", "--n", "5"]).assert().code(2);
    nodedp().args(["estimate", "density", "--epsilon", "1", "--input", "/nonexistent"]).assert().code(2);
}
