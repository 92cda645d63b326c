use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mds-pir")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn exhaustive_run_reports_exact_mean() {
    let out = bin(&["run", "--n", "3", "--t", "2", "--k", "3", "--scheme", "a", "--exhaustive", "--output", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["mean_download"], "38/9");
    assert_eq!(v["observed_rate"], "9/19");
    assert_eq!(v["capacity"], "9/19");
    assert_eq!(v["retrievals"], 27);
}

#[test]
fn sampled_run_over_the_wire() {
    let out = bin(&["run", "--n", "3", "--t", "2", "--k", "3", "--scheme", "a", "--trials", "9", "--seed", "7", "--mode", "wire", "--output", "-"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["failures"], 0);
    assert_eq!(v["retrievals"], 9);
    assert_eq!(v["mean_uploaded_bytes"], "9/1");
}

#[test]
fn verify_high_rate_example() {
    let out = bin(&["verify", "--n", "5", "--t", "3", "--k", "4", "--scheme", "b", "--output", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        assert_eq!(r["pass"], true, "{r}");
        for key in ["claim", "params", "expected", "observed", "enumeration_size", "ms"] {
            assert!(r.get(key).is_some());
        }
    }
}

#[test]
fn bad_parameters_exit_two() {
    let out = bin(&["run", "--n", "3", "--t", "5", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid parameters"));
    assert_eq!(bin(&["run", "--n", "3"]).status.code(), Some(2));
    assert_eq!(bin(&["verify", "--n", "3", "--t", "2", "--k", "3", "--scheme", "k2"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn identical_seeds_give_identical_files() {
    let dir = std::env::temp_dir().join(format!("mds-pir-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let run = dir.join(format!("run{i}.json"));
        let verify = dir.join(format!("verify{i}.csv"));
        let r = bin(&["run", "--n", "5", "--t", "2", "--k", "3", "--seed", "3", "--trials", "50", "--output", run.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(0));
        let v = bin(&["verify", "--n", "4", "--t", "3", "--k", "3", "--seed", "3", "--no-timing", "--format", "csv", "--output", verify.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0));
        files.push((std::fs::read(run).unwrap(), std::fs::read(verify).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    assert!(String::from_utf8(files[0].1.clone()).unwrap().starts_with("claim,"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn small_sweep() {
    let out = bin(&["sweep", "--max-n", "4", "--max-k", "2", "--samples", "2", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
}
