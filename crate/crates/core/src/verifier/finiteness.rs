use serde::{Deserialize, Serialize};

use crate::discretization::{norm_v_squared, tail, time_aggregate, DomainShape, SpaceTimeField, TimeNorm};
use crate::kernels::FracParams;
use crate::{LabError, Point, Result};

/// `∫_J tail(u(t); R, x0)² dt` against `∫_J ‖u(t)‖²_{V^{α/2}(B_{2R}(x0)|R^d)} dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitenessSample {
    pub tail_sq: f64,
    pub v_norm_sq: f64,
    /// `tail_sq / v_norm_sq`, infinite when the norm vanishes but the tail does not.
    pub ratio: f64,
    /// `B_{2R}(x0)` left `Ω` and the norm was taken over the largest ball inside.
    pub clipped: bool,
}

impl FinitenessSample {
    pub fn is_finite(&self) -> bool {
        self.tail_sq.is_finite() && self.v_norm_sq.is_finite() && self.ratio.is_finite()
    }
}

fn inner_radius(u: &SpaceTimeField, x0: &Point) -> f64 {
    let g = u.grid();
    let x = g.radius();
    match g.shape() {
        DomainShape::Ball => x - crate::norm(g.dim(), x0),
        DomainShape::Box => (0..g.dim()).map(|k| x - x0[k].abs()).fold(f64::INFINITY, f64::min),
    }
}

/// Both time integrals over `J = [a, b]` by the trapezoidal rule on the slices.
pub fn tail_finiteness(
    u: &SpaceTimeField,
    params: &FracParams,
    r: f64,
    x0: &Point,
    a: f64,
    b: f64,
) -> Result<FinitenessSample> {
    if u.grid().dim() != params.dim {
        return Err(LabError::Mismatch("grid and parameter dimensions differ".into()));
    }
    let inside = inner_radius(u, x0);
    let clipped = 2.0 * r > inside;
    let ball = if clipped { inside } else { 2.0 * r };
    let idx = u.indices_strictly_within(a, b);
    let mut times = Vec::with_capacity(idx.len() + 2);
    let mut tails = Vec::with_capacity(idx.len() + 2);
    let mut norms = Vec::with_capacity(idx.len() + 2);
    let ends = [u.index_at(a), u.index_at(b)];
    let all: Vec<usize> = ends[0].into_iter().chain(idx).chain(ends[1]).collect();
    for k in all {
        let f = &u.fields()[k];
        times.push(f.time());
        tails.push(tail(f, params.alpha, r, x0)?.powi(2));
        norms.push(norm_v_squared(f, params, u.grid(), x0, ball)?);
    }
    if times.len() < 2 {
        return Err(LabError::EmptyResolution(
            "tail finiteness needs two slices in J".into(),
        ));
    }
    let (a, b) = (times[0], times[times.len() - 1]);
    let tail_sq = time_aggregate(&times, &tails, a, b, TimeNorm::L1, false)?;
    let v_norm_sq = time_aggregate(&times, &norms, a, b, TimeNorm::L1, false)?;
    let ratio = if v_norm_sq > 0.0 {
        tail_sq / v_norm_sq
    } else if tail_sq == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(FinitenessSample {
        tail_sq,
        v_norm_sq,
        ratio,
        clipped,
    })
}
