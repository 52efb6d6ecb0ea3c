use serde::{Deserialize, Serialize};

use crate::discretization::SpaceTimeField;
use crate::{LabError, Point, Result};

/// The seven cylinder shapes. `IPlus`, `IMinus` and `I` pair the time
/// interval with `B_R(x0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CylinderKind {
    /// `(t0, t0 + R^α) × B_R`
    IPlus,
    /// `(t0 − R^α, t0) × B_R`
    IMinus,
    /// `(t0 − R^α, t0 + R^α) × B_R`
    I,
    /// `(t0 − 2R^α, t0) × B_{2R}`
    D,
    /// `(t0 − 2R^α, t0) × B_{3R}`
    DHat,
    /// `(t0 − 2R^α, t0 − 2R^α + (R/2)^α) × B_{R/2}`
    DMinus,
    /// `(t0 − (R/2)^α, t0) × B_{R/2}`
    DPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub kind: CylinderKind,
    pub t0: f64,
    pub x0: Point,
    pub r: f64,
    pub alpha: f64,
}

/// Slice and node indices of a cylinder on a space-time field.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub slices: Vec<usize>,
    pub nodes: Vec<usize>,
}

impl Cylinder {
    pub fn new(kind: CylinderKind, t0: f64, x0: Point, r: f64, alpha: f64) -> Self {
        Cylinder { kind, t0, x0, r, alpha }
    }

    /// The open time interval `(a, b)`.
    pub fn time_interval(&self) -> (f64, f64) {
        let ra = self.r.powf(self.alpha);
        let t0 = self.t0;
        match self.kind {
            CylinderKind::IPlus => (t0, t0 + ra),
            CylinderKind::IMinus => (t0 - ra, t0),
            CylinderKind::I => (t0 - ra, t0 + ra),
            CylinderKind::D | CylinderKind::DHat => (t0 - 2.0 * ra, t0),
            CylinderKind::DMinus => (t0 - 2.0 * ra, t0 - 2.0 * ra + (0.5 * self.r).powf(self.alpha)),
            CylinderKind::DPlus => (t0 - (0.5 * self.r).powf(self.alpha), t0),
        }
    }

    pub fn ball_radius(&self) -> f64 {
        match self.kind {
            CylinderKind::IPlus | CylinderKind::IMinus | CylinderKind::I => self.r,
            CylinderKind::D => 2.0 * self.r,
            CylinderKind::DHat => 3.0 * self.r,
            CylinderKind::DMinus | CylinderKind::DPlus => 0.5 * self.r,
        }
    }

    /// Slices strictly inside the time interval and nodes strictly inside the ball.
    pub fn resolve(&self, u: &SpaceTimeField) -> Result<Resolved> {
        let (a, b) = self.time_interval();
        let slices = u.indices_strictly_within(a, b);
        let nodes = u.grid().nodes_in_ball(&self.x0, self.ball_radius());
        if slices.is_empty() || nodes.is_empty() {
            return Err(LabError::EmptyResolution(format!(
                "{:?} cylinder at t0 = {}, R = {} resolves to {} slices and {} nodes",
                self.kind,
                self.t0,
                self.r,
                slices.len(),
                nodes.len()
            )));
        }
        Ok(Resolved { slices, nodes })
    }
}

/// Discrete statistics over a resolved cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylStats {
    pub sup: f64,
    pub inf: f64,
    pub mean: f64,
    /// Root mean square.
    pub l2_mean: f64,
}

/// Time weights of the slices: each slice owns half the gap to its neighbours,
/// clipped to `(a, b)`.
fn slice_weights(times: &[f64], slices: &[usize], a: f64, b: f64) -> Vec<f64> {
    slices
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let t = times[s];
            let lo = if k == 0 { a } else { 0.5 * (times[slices[k - 1]] + t) };
            let hi = if k + 1 == slices.len() {
                b
            } else {
                0.5 * (t + times[slices[k + 1]])
            };
            hi - lo
        })
        .collect()
}

/// Sup, inf, mean and RMS of `map(u)` over the cylinder; needs at least four
/// slices and four nodes.
pub fn cyl_stats_mapped(u: &SpaceTimeField, cyl: &Cylinder, map: impl Fn(f64) -> f64) -> Result<CylStats> {
    let res = cyl.resolve(u)?;
    if res.slices.len() < 4 || res.nodes.len() < 4 {
        return Err(LabError::EmptyResolution(format!(
            "{:?} cylinder needs at least 4 slices and 4 nodes, got {} and {}",
            cyl.kind,
            res.slices.len(),
            res.nodes.len()
        )));
    }
    let (a, b) = cyl.time_interval();
    let weights = slice_weights(u.times(), &res.slices, a, b);
    let total: f64 = weights.iter().sum();
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (&k, &w) in res.slices.iter().zip(&weights) {
        let f = &u.fields()[k];
        let (mut m1, mut m2) = (0.0, 0.0);
        for &i in &res.nodes {
            let v = map(f.value(i));
            sup = sup.max(v);
            inf = inf.min(v);
            m1 += v;
            m2 += v * v;
        }
        let n = res.nodes.len() as f64;
        s1 += w * m1 / n;
        s2 += w * m2 / n;
    }
    Ok(CylStats {
        sup,
        inf,
        mean: s1 / total,
        l2_mean: (s2 / total).sqrt(),
    })
}

pub fn cyl_stats(u: &SpaceTimeField, cyl: &Cylinder) -> Result<CylStats> {
    cyl_stats_mapped(u, cyl, |v| v)
}
