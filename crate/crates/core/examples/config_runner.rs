//! Drive the runner from an in-memory config instead of the binary: parse,
//! validate, execute into a temporary directory and list what was written.
//!
//!     cargo run --release --example config_runner

use nonlocal_lab::config::ExperimentConfig;
use nonlocal_lab::runner::{execute, Command, RunOptions};

const CONFIG: &str = r#"
schema = 1

[kernel]
dim = 1
alpha = 1.5
alpha0 = 0.5
lambda = 1.0
Lambda = 2.0
coefficient = { kind = "checkerboard", cell = 0.125, low = 1.0, high = 2.0 }

[grid]
dim = 1
shape = "ball"
radius = 1.0
r_trunc = 3.0
h = 0.03125

[scenario]
t_start = 0.0
t_end = 0.25
initial = { kind = "exterior" }
exterior = { terms = [{ profile = { kind = "one" }, shape = { kind = "annulus", inner = 1.5, outer = 2.0, value = 1.0 } }] }
schedule = { kind = "uniform", dt = 0.015625 }
"#;

fn main() -> nonlocal_lab::Result<()> {
    // unknown keys are rejected before anything runs
    let typo = CONFIG.replace("alpha0", "alpha_0");
    if let Err(e) = ExperimentConfig::from_toml_str(&typo) {
        println!("rejected: {e}");
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("run.toml");
    std::fs::write(&path, CONFIG)?;
    let outcome = execute(
        Command::Run,
        &RunOptions {
            config: path,
            out: Some(dir.path().join("out")),
            threads: Some(2),
            seed: None,
        },
    )?;
    for f in &outcome.files {
        println!("{} ({} bytes)", f.display(), std::fs::metadata(f)?.len());
    }
    Ok(())
}
