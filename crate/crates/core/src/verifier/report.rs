use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Finite,
    /// Right side zero, left side positive.
    Infinite,
    /// Both sides zero.
    Degenerate,
}

/// Parameters a measurement was taken with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dim: usize,
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub h: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub t0: f64,
    pub x0: Point,
    pub seed: u64,
    /// Operation-specific parameters (γ, ε, …).
    pub extra: BTreeMap<String, f64>,
}

/// Both sides of one inequality and the measured constant `left / right`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub left: f64,
    pub right: f64,
    pub constant: f64,
    pub status: Status,
    pub summands: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(id: &str, left: f64, right: f64, summands: BTreeMap<String, f64>, provenance: Provenance) -> Self {
        let (constant, status) = if right > 0.0 {
            (left / right, Status::Finite)
        } else if left > 0.0 {
            (f64::INFINITY, Status::Infinite)
        } else {
            (f64::NAN, Status::Degenerate)
        };
        Report {
            id: id.to_string(),
            left,
            right,
            constant,
            status,
            summands,
            provenance,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.provenance.seed = seed;
        self
    }

    pub fn summand(&self, name: &str) -> Option<f64> {
        self.summands.get(name).copied()
    }
}

const FIXED: [&str; 15] = [
    "id", "status", "left", "right", "constant", "dim", "alpha", "lambda", "Lambda", "h", "R", "t0", "x0_1", "x0_2",
    "seed",
];

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// One row per report; fixed columns, then the sorted union of summand
/// names, then the sorted union of extra provenance keys. Missing cells are empty.
pub fn write_reports_csv<W: Write>(reports: &[Report], out: W) -> Result<()> {
    let summand_keys: BTreeSet<&String> = reports.iter().flat_map(|r| r.summands.keys()).collect();
    let extra_keys: BTreeSet<&String> = reports.iter().flat_map(|r| r.provenance.extra.keys()).collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    header.extend(summand_keys.iter().map(|k| k.to_string()));
    header.extend(extra_keys.iter().map(|k| format!("param_{k}")));
    w.write_record(&header)?;
    for r in reports {
        let p = &r.provenance;
        let status = match r.status {
            Status::Finite => "finite",
            Status::Infinite => "infinite",
            Status::Degenerate => "degenerate",
        };
        let mut row = vec![
            r.id.clone(),
            status.to_string(),
            fmt(r.left),
            fmt(r.right),
            fmt(r.constant),
            p.dim.to_string(),
            fmt(p.alpha),
            fmt(p.lambda),
            fmt(p.big_lambda),
            fmt(p.h),
            fmt(p.r),
            fmt(p.t0),
            fmt(p.x0[0]),
            fmt(p.x0[1]),
            p.seed.to_string(),
        ];
        row.extend(
            summand_keys
                .iter()
                .map(|k| r.summands.get(*k).map_or(String::new(), |v| fmt(*v))),
        );
        row.extend(
            extra_keys
                .iter()
                .map(|k| p.extra.get(*k).map_or(String::new(), |v| fmt(*v))),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
