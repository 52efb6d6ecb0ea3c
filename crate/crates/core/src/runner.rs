//! Config-driven commands behind the `nonlocal-lab` binary. Each command
//! writes its outputs atomically into one directory together with the
//! resolved config, and maps failures onto the documented exit codes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ExperimentConfig, Measurement, Oracle, SweepBlock, SweepOp};
use crate::counterexample::{
    build_counterexample, certify_failure, certify_lower_bound, write_holder_csv, write_partial_csv,
};
use crate::experiments::{bump_setup, heat_gaussian, SweepCoefficient};
use crate::solver::{residual_check, solve, write_solution_csv_to, SolveOptions};
use crate::verifier::{
    axes_harnack, harnack_quotient, harnack_with_tails, holder_report, locbd_ratio, weak_harnack_ratio,
    write_reports_csv, Report,
};
use crate::{LabError, Result};

pub const EXIT_OK: i32 = 0;
/// I/O failures while writing outputs.
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Verify,
    Sweep,
    Counterexample,
    Axes,
}

/// Command-line overrides. `None` falls back to the config, then to the defaults
/// (`./out`, all cores, seed 0).
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Exit code for an error.
pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Cfl { .. } | LabError::NonFinite { .. } | LabError::LinearSolve { .. } => EXIT_NUMERICAL,
        LabError::Certificate(_) => EXIT_CERTIFICATE,
        LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Files written by a command.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Run a command and report errors on stderr; returns the exit code.
pub fn main_entry(cmd: Command, opts: &RunOptions) -> i32 {
    match execute(cmd, opts) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cmd: Command, opts: &RunOptions) -> Result<Outcome> {
    let cfg = ExperimentConfig::load(&opts.config)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(LabError::Config {
                key: "--threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| LabError::Unsupported(format!("thread pool: {e}")))?;
    pool.install(|| {
        // validate everything the command needs before creating any output
        let mut out = Outputs::new(dir.clone());
        match cmd {
            Command::Run => cmd_run(&cfg, seed, &mut out),
            Command::Verify => cmd_verify(&cfg, seed, &mut out),
            Command::Sweep => cmd_sweep(&cfg, seed, &mut out),
            Command::Counterexample => cmd_counterexample(&cfg, seed, &mut out),
            Command::Axes => cmd_axes(&cfg, &mut out),
        }?;
        out.write("config.resolved.toml", cfg.resolved(seed, &dir)?.as_bytes())?;
        Ok(Outcome { dir, files: out.files })
    })
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Self {
        Outputs { dir, files: Vec::new() }
    }

    /// Temp file in the target directory, then rename.
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        let path = self.dir.join(name);
        tmp.persist(&path).map_err(|e| LabError::Io(e.error))?;
        self.files.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }
}

fn cmd_run(cfg: &ExperimentConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let (scenario, options) = cfg.build_scenario()?;
    let sol = solve(&scenario, &options)?;
    let block = cfg.scenario.as_ref().expect("checked by build_scenario");
    let mut diag = json!({
        "seed": seed,
        "steps": sol.diagnostics.len(),
        "stored_slices": sol.field.len(),
        "min": sol.min(),
        "max": sol.max(),
        "max_linear_residual": sol.diagnostics.iter().map(|d| d.residual).fold(0.0, f64::max),
        "truncation": sol.truncation,
        "diagnostics": sol.diagnostics,
    });
    if block.weak_residual {
        diag["weak_residual"] = serde_json::to_value(residual_check(&sol, &scenario)?)?;
    }
    if let Some(Oracle::HeatGaussian { sigma, radius }) = &block.oracle {
        let grid = sol.grid();
        let last = sol.field.fields().last().unwrap();
        let elapsed = scenario.t_end - scenario.t_start;
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for i in grid.nodes_in_ball(&[0.0; 2], *radius) {
            let exact = heat_gaussian(grid.dim(), *sigma, elapsed, &grid.coord(i));
            err = err.max((last.value(i) - exact).abs());
            scale = scale.max(exact.abs());
        }
        diag["heat_oracle_error"] = json!(err / scale);
    }
    out.write_with("solution.csv", |buf| write_solution_csv_to(&sol.field, buf))?;
    out.write_json("diagnostics.json", &diag)
}

fn measure(sol: &crate::solver::Solution, m: &Measurement) -> Result<Vec<Report>> {
    Ok(match m {
        Measurement::Harnack { t0, x0, r } => vec![harnack_quotient(sol, *t0, x0, *r)?],
        Measurement::HarnackTails { t0, x0, r } => vec![harnack_with_tails(sol, *t0, x0, *r)?],
        Measurement::WeakHarnack { t0, x0, r } => vec![weak_harnack_ratio(sol, *t0, x0, *r)?],
        Measurement::LocalBoundedness { t0, x0, r } => vec![locbd_ratio(sol, *t0, x0, *r)?],
        Measurement::Holder { t0, x0, r, gammas, eps } => holder_report(sol, *t0, x0, *r, gammas, *eps)?,
        Measurement::AxesHarnack { t0, x0, r } => vec![axes_harnack(sol, *t0, x0, *r)?],
    })
}

fn cmd_verify(cfg: &ExperimentConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    if cfg.measurement.is_empty() {
        return Err(LabError::Config {
            key: "measurement".into(),
            reason: "verify needs at least one [[measurement]]".into(),
        });
    }
    let (scenario, options) = cfg.build_scenario()?;
    let sol = solve(&scenario, &options)?;
    let mut reports = Vec::new();
    for (k, m) in cfg.measurement.iter().enumerate() {
        let rs = measure(&sol, m).map_err(|e| match e {
            e @ (LabError::Cfl { .. } | LabError::NonFinite { .. } | LabError::Io(_)) => e,
            other => LabError::Config {
                key: format!("measurement[{k}]"),
                reason: other.to_string(),
            },
        })?;
        reports.extend(rs.into_iter().map(|r| r.with_seed(seed)));
    }
    out.write_with("reports.csv", |buf| write_reports_csv(&reports, buf))?;
    out.write_json("reports.json", &reports)
}

/// Index of a coefficient family in the `param_coefficient` column.
pub fn coefficient_code(c: SweepCoefficient) -> f64 {
    match c {
        SweepCoefficient::Constant => 0.0,
        SweepCoefficient::Checkerboard => 1.0,
        SweepCoefficient::TimeOscillating => 2.0,
        SweepCoefficient::RandomPiecewise => 3.0,
    }
}

/// All reports of a sweep, in `alphas × radii × coefficients × ops` order.
pub fn sweep_reports(block: &SweepBlock, seed: u64) -> Result<Vec<Report>> {
    let mut cells = Vec::new();
    for &alpha in &block.alphas {
        for &r in &block.radii {
            for &c in &block.coefficients {
                cells.push((alpha, r, c));
            }
        }
    }
    let per_cell = cells
        .par_iter()
        .map(|&(alpha, r, c)| {
            let setup = bump_setup(block.dim, alpha, r, c.rule(alpha, r, seed), block.h, block.background)?;
            let sol = solve(&setup.scenario, &SolveOptions::implicit())?;
            let x0 = [0.0; 2];
            block
                .ops
                .iter()
                .map(|op| {
                    let rep = match op {
                        SweepOp::Harnack => harnack_quotient(&sol, setup.t0, &x0, r),
                        SweepOp::HarnackTails => harnack_with_tails(&sol, setup.t0, &x0, r),
                        SweepOp::WeakHarnack => weak_harnack_ratio(&sol, setup.t0, &x0, r),
                        SweepOp::LocalBoundedness => locbd_ratio(&sol, setup.t0, &x0, r),
                    }?;
                    let mut rep = rep.with_seed(seed);
                    rep.provenance.extra.insert("coefficient".into(), coefficient_code(c));
                    rep.provenance.extra.insert("background".into(), block.background);
                    Ok(rep)
                })
                .collect::<Result<Vec<Report>>>()
        })
        .collect::<Result<Vec<Vec<Report>>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Range of measured constants for one inequality across a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub finite: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// `max / min` over the finite constants.
    pub ratio: Option<f64>,
}

pub fn summarize(reports: &[Report]) -> BTreeMap<String, SweepSummary> {
    let mut groups: BTreeMap<String, Vec<&Report>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.id.clone()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(id, rs)| {
            let owned: Vec<Report> = rs.iter().map(|r| (*r).clone()).collect();
            let range = crate::verifier::constant_range(&owned);
            let summary = SweepSummary {
                rows: rs.len(),
                finite: rs.iter().filter(|r| r.constant.is_finite()).count(),
                min: range.map(|r| r.0),
                max: range.map(|r| r.1),
                ratio: range.map(|r| r.1 / r.0),
            };
            (id, summary)
        })
        .collect()
}

fn cmd_sweep(cfg: &ExperimentConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let block = cfg.sweep_block()?;
    let reports = sweep_reports(block, seed)?;
    out.write_with("sweep.csv", |buf| write_reports_csv(&reports, buf))?;
    out.write_json("summary.json", &summarize(&reports))
}

fn cmd_counterexample(cfg: &ExperimentConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let (spec, block) = cfg.counterexample_spec()?;
    let scenario = build_counterexample(&spec)?;
    let sol = solve(&scenario, &SolveOptions::implicit())?;
    let times: Vec<f64> = (block.lower_bound_k[0]..=block.lower_bound_k[1])
        .map(|k| 0.5f64.powi(k as i32))
        .collect();
    let lower = certify_lower_bound(&sol, &spec, &times)?;
    let failure = certify_failure(&sol, &spec, &block.gammas, block.holder_k[0]..=block.holder_k[1])?;
    let (t1, ta) = spec.tail_constants()?;
    out.write_with("holder.csv", |buf| write_holder_csv(&failure, buf))?;
    out.write_with("partial.csv", |buf| write_partial_csv(&failure, buf))?;
    out.write_with("lower_bound.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["t", "margin", "tol", "ok"])?;
        for r in &lower.rows {
            w.write_record([
                format!("{:e}", r.t),
                format!("{:e}", r.margin),
                format!("{:e}", r.tol),
                r.ok.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.write_json(
        "summary.json",
        &json!({
            "seed": seed,
            "delta_star": spec.delta_star,
            "delta": spec.delta,
            "certificate_margin": spec.certificate_margin,
            "certified": spec.is_certified(),
            "lower_bound_pass": lower.pass,
            "tail_constant_one": t1,
            "tail_constant_annulus": ta,
            "sandwich": [failure.sandwich.0, failure.sandwich.1],
        }),
    )?;
    if !lower.pass {
        let worst = lower
            .rows
            .iter()
            .map(|r| r.margin + r.tol)
            .fold(f64::INFINITY, f64::min);
        return Err(LabError::Certificate(format!(
            "u(t, x) ≥ δ f(t) − tol fails, worst slack {worst:e}"
        )));
    }
    Ok(())
}

fn cmd_axes(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let family = cfg.axes_family()?;
    let rows = family.run()?;
    out.write_with("axes.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "far_radius",
            "sup",
            "inf",
            "tail_axes",
            "tail_free_constant",
            "tail_inclusive_constant",
        ])?;
        for r in &rows {
            let s = |k: &str| format!("{:e}", r.report.summands[k]);
            w.write_record([
                format!("{:e}", r.far_radius),
                s("sup"),
                s("inf"),
                s("tail_axes"),
                format!("{:e}", r.tail_free),
                format!("{:e}", r.with_tail),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.with_tail), hi.max(r.with_tail))
    });
    out.write_json(
        "summary.json",
        &json!({
            "tail_free_growth": last.tail_free / first.tail_free,
            "tail_inclusive_spread": hi / lo,
        }),
    )
}

/// Path of a config shipped in the repository's `configs/` directory.
pub fn shipped_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}
