use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nonlocal_lab::runner::{exit_code, EXIT_CERTIFICATE, EXIT_CONFIG, EXIT_NUMERICAL};
use nonlocal_lab::LabError;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn lab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-lab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn run_writes_outputs_and_a_resolved_config_that_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = lab(&["run"], &configs().join("run-constant.toml"), &a);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["solution.csv", "diagnostics.json", "config.resolved.toml"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let o = lab(&["run"], &a.join("config.resolved.toml"), &b);
    assert_eq!(code(&o), 0);
    for f in ["solution.csv", "diagnostics.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // the resolved copies differ only in the output directory
    let strip = |p: &Path| -> String {
        fs::read_to_string(p.join("config.resolved.toml"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("dir ="))
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = Command::new(env!("CARGO_BIN_EXE_nonlocal-lab"))
        .arg("run")
        .output()
        .unwrap();
    assert_eq!(code(&missing), EXIT_CONFIG);

    let o = lab(&["run"], &tmp.path().join("nope.toml"), tmp.path());
    assert_eq!(code(&o), EXIT_CONFIG);

    let base = fs::read_to_string(configs().join("run-constant.toml")).unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, base.replace("alpha = 1.0", "alpha = 1.0\nbeta = 2.0")).unwrap();
    let o = lab(&["run"], &bad, tmp.path());
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));

    fs::write(&bad, base.replace("alpha = 1.0", "alpha = 2.5")).unwrap();
    assert_eq!(code(&lab(&["run"], &bad, tmp.path())), EXIT_CONFIG);

    let o = lab(
        &["run", "--threads", "0"],
        &configs().join("run-constant.toml"),
        tmp.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
}

#[test]
fn cfl_violation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["run"], &configs().join("run-explicit-cfl.toml"), tmp.path());
    assert_eq!(code(&o), EXIT_NUMERICAL);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn certificate_failures_map_to_exit_4() {
    assert_eq!(exit_code(&LabError::Certificate("margin".into())), EXIT_CERTIFICATE);
    assert_eq!(
        exit_code(&LabError::Cfl {
            step: 0,
            dt: 1.0,
            limit: 0.5
        }),
        EXIT_NUMERICAL
    );
    assert_eq!(exit_code(&LabError::NonFinite { step: 3 }), EXIT_NUMERICAL);
}

#[test]
fn counterexample_pipeline_certifies() {
    let tmp = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(configs().join("counterexample.toml")).unwrap();
    let small = tmp.path().join("cx.toml");
    fs::write(
        &small,
        base.replace("k_max = 40", "k_max = 16")
            .replace("holder_k = [1, 40]", "holder_k = [1, 16]"),
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = lab(&["counterexample"], &small, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["certified"], true);
    assert_eq!(summary["lower_bound_pass"], true);
    for f in ["holder.csv", "partial.csv", "lower_bound.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_output_does_not_depend_on_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(configs().join("sweep-harnack.toml")).unwrap();
    let small = tmp.path().join("sweep.toml");
    fs::write(
        &small,
        base.replace("alphas = [0.5, 1.0, 1.5, 1.9]", "alphas = [1.0, 1.5]"),
    )
    .unwrap();
    let runs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|n| {
            let out = tmp.path().join(format!("t{n}"));
            let o = lab(&["sweep", "--threads", n, "--seed", "5"], &small, &out);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            fs::read(out.join("sweep.csv")).unwrap()
        })
        .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
}
