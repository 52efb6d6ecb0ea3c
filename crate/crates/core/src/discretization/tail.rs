use rayon::prelude::*;

use super::field::{time_tol, Field, SpaceTimeField};
use super::grid::Grid;
use super::line::{LineData, ValueMap};
use super::operator::{PlaneData, RuleAt};
use crate::kernels::{CoefficientRule, FracParams, KernelSpec};
use crate::{quad, sphere_measure, LabError, Point, Result};

/// A tail value with the bound on what a zero-beyond-the-box rule may have cut off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    /// `sup|v|·(2−α)·ω·dist^{−α}/α` with `dist` the distance from `x0` to the
    /// far field, when the rule vanishes beyond the box; 0 otherwise.
    pub truncation_bound: f64,
}

/// `tail(v; R, x0) = (2−α)∫_{|y−x0|>R} |v(y)| |x0 − y|^{−d−α} dy`.
pub fn tail(v: &Field, alpha: f64, radius: f64, x0: &Point) -> Result<f64> {
    Ok(tail_estimate(v, alpha, radius, x0, ValueMap::Abs)?.value)
}

/// The tail with `|v|` replaced by `map(v)` (e.g. `v₊` or `v₋`), plus the truncation record.
pub fn tail_estimate(v: &Field, alpha: f64, radius: f64, x0: &Point, map: ValueMap) -> Result<TailEstimate> {
    let grid = v.grid();
    check_tail_args(grid, radius, x0)?;
    let value = (2.0 - alpha) * weighted_exterior(v, alpha, None, x0, x0, radius, map)?;
    let dim = grid.dim();
    let b = grid.outer_extent();
    let truncation_bound = match v.exterior().far_constant(dim, b, v.time()) {
        Some(c) if c == 0.0 => {
            let dist = b - (0..dim).map(|k| x0[k].abs()).fold(0.0, f64::max);
            v.sup_abs() * (2.0 - alpha) * sphere_measure(dim) * dist.powf(-alpha) / alpha
        }
        _ => 0.0,
    };
    Ok(TailEstimate {
        value,
        truncation_bound,
    })
}

fn check_tail_args(grid: &Grid, radius: f64, x0: &Point) -> Result<()> {
    if radius <= 2.0 * grid.h() {
        return Err(LabError::param("R", format!("must exceed 2h = {}", 2.0 * grid.h())));
    }
    if !grid.ball_inside_box(x0, radius) {
        return Err(LabError::param("R", "the ball B_R(x0) must lie inside the grid box"));
    }
    Ok(())
}

/// `∫_{|y−x0|>R} map(v(y)) a(t,x,y) |x − y|^{−d−α} dy` (no `(2−α)` factor);
/// `coef = None` means `a ≡ 1`. Requires `|x − x0| < R`.
fn weighted_exterior(
    v: &Field,
    alpha: f64,
    coef: Option<&CoefficientRule>,
    x: &Point,
    x0: &Point,
    radius: f64,
    map: ValueMap,
) -> Result<f64> {
    let grid = v.grid();
    let dim = grid.dim();
    let t = v.time();
    let h = grid.h();
    let a = |y: &Point| coef.map_or(1.0, |c| c.eval(dim, t, x, y));
    let interior = crate::ordered_sum(grid.interior_nodes().par_iter().map(|&j| {
        let val = map.apply(v.value(j));
        if val == 0.0 {
            return 0.0;
        }
        let c = grid.coord(j);
        let w = if dim == 1 {
            clipped_interval(x[0], x0[0], radius, c[0] - 0.5 * h, c[0] + 0.5 * h, alpha)
        } else {
            clipped_square(
                x,
                x0,
                radius,
                &c,
                0.5 * h,
                alpha,
                &CellValue::Const(1.0),
                ValueMap::Signed,
                5,
            )
        };
        a(&c) * val * w
    }));
    let rule = v.exterior();
    let exterior = if dim == 1 {
        let data = LineData::new(rule.restrict_to_line(1, t, &[0.0, 0.0], 0));
        let (lo, hi) = grid.interior_span_on_line(0, 0).unwrap();
        let ball = (x0[0] - radius, x0[0] + radius);
        let uniform = coef.is_none_or(|c| c.is_spatially_uniform());
        if uniform {
            let av = a(x);
            let mut acc = 0.0;
            for (l, r) in subtract(&[(f64::NEG_INFINITY, lo), (hi, f64::INFINITY)], ball) {
                acc += data.integrate(x[0], alpha, l, r, map);
            }
            av * acc
        } else {
            let m = grid.half_count() as i64;
            let b = grid.outer_extent();
            let mut acc = 0.0;
            for k in -m..=m {
                let j = grid.index_of([k, 0]).unwrap();
                if grid.is_interior(j) {
                    continue;
                }
                let c = k as f64 * h;
                let aj = a(&[c, 0.0]);
                for (l, r) in subtract(&[(c - 0.5 * h, c + 0.5 * h)], ball) {
                    acc += aj * data.integrate(x[0], alpha, l, r, map);
                }
            }
            let af = coef.map_or(1.0, |c| c.far_value(t));
            for (l, r) in subtract(&[(f64::NEG_INFINITY, -b), (b, f64::INFINITY)], ball) {
                acc += af * data.integrate(x[0], alpha, l, r, map);
            }
            acc
        }
    } else {
        let data = RuleAt { rule, t };
        let ring = crate::ordered_sum(
            (0..grid.n_nodes())
                .into_par_iter()
                .filter(|&j| !grid.is_interior(j))
                .map(|j| {
                    let c = grid.coord(j);
                    let w = clipped_square(x, x0, radius, &c, 0.5 * h, alpha, &CellValue::Data(&data), map, 4);
                    if w == 0.0 {
                        0.0
                    } else {
                        a(&c) * w
                    }
                }),
        );
        let b = grid.outer_extent();
        let c = rule.far_constant(2, b, t).ok_or_else(|| {
            LabError::Unsupported("two-dimensional tails need a rule that is constant beyond the box".into())
        })?;
        let af = coef.map_or(1.0, |c| c.far_value(t));
        let far = map.apply(c) * af * quad::square_exit_moment(*x, b, alpha) / alpha;
        ring + far
    };
    Ok(interior + exterior)
}

/// `(l, r) ∖ (a, b)` for a list of intervals.
fn subtract(intervals: &[(f64, f64)], ball: (f64, f64)) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(l, r) in intervals {
        if r <= ball.0 || l >= ball.1 {
            out.push((l, r));
            continue;
        }
        if l < ball.0 {
            out.push((l, ball.0));
        }
        if r > ball.1 {
            out.push((ball.1, r));
        }
    }
    out
}

/// `∫_{[l,r] ∖ B_R(x0)} |x − s|^{−1−α} ds`.
fn clipped_interval(x: f64, x0: f64, radius: f64, l: f64, r: f64, alpha: f64) -> f64 {
    subtract(&[(l, r)], (x0 - radius, x0 + radius))
        .into_iter()
        .map(|(p, q)| quad::power_interval(x, p, q, alpha))
        .sum()
}

enum CellValue<'a> {
    Const(f64),
    Data(&'a dyn PlaneData),
}

/// `∫_{square ∖ B_R(x0)} map(g(y)) |x − y|^{−2−α} dy` with bisection at the
/// ball boundary and at jumps of `g`.
#[allow(clippy::too_many_arguments)]
fn clipped_square(
    x: &Point,
    x0: &Point,
    radius: f64,
    center: &Point,
    half: f64,
    alpha: f64,
    value: &CellValue,
    map: ValueMap,
    depth: u32,
) -> f64 {
    let (near, far) = square_distance_range(x0, center, half);
    if far <= radius {
        return 0.0;
    }
    let straddle = near < radius;
    let uniform = match value {
        CellValue::Const(v) => Some(*v),
        CellValue::Data(d) => d.uniform_on_square(center, half),
    };
    let smooth = match value {
        CellValue::Const(_) => true,
        CellValue::Data(d) => !d.is_piecewise_constant(),
    };
    let eval = |y: &Point| -> f64 {
        match value {
            CellValue::Const(v) => *v,
            CellValue::Data(d) => d.eval(y),
        }
    };
    let dx = (x[0] - center[0]).hypot(x[1] - center[1]) / half;
    let kernel = |y: [f64; 2]| (x[0] - y[0]).hypot(x[1] - y[1]).powf(-2.0 - alpha);
    if let Some(v) = uniform {
        if map.apply(v) == 0.0 {
            return 0.0;
        }
    }
    let leaf = depth == 0;
    if !straddle {
        if let Some(v) = uniform {
            if leaf || dx > 6.0 {
                return map.apply(v) * quad::integrate_square(4, *center, half, kernel);
            }
        } else if leaf || (smooth && dx > 6.0) {
            return quad::integrate_square(4, *center, half, |y| map.apply(eval(&y)) * kernel(y));
        }
    } else if leaf {
        return quad::integrate_square(4, *center, half, |y| {
            if (y[0] - x0[0]).hypot(y[1] - x0[1]) >= radius {
                map.apply(eval(&y)) * kernel(y)
            } else {
                0.0
            }
        });
    }
    let q = 0.5 * half;
    [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
        .iter()
        .map(|s| {
            clipped_square(
                x,
                x0,
                radius,
                &[center[0] + s[0] * q, center[1] + s[1] * q],
                q,
                alpha,
                value,
                map,
                depth - 1,
            )
        })
        .sum()
}

fn square_distance_range(p: &Point, center: &Point, half: f64) -> (f64, f64) {
    let mut near = 0.0f64;
    let mut far = 0.0f64;
    for k in 0..2 {
        let lo = center[k] - half - p[k];
        let hi = center[k] + half - p[k];
        let n = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        };
        near += n * n;
        far += lo.abs().max(hi.abs()).powi(2);
    }
    (near.sqrt(), far.sqrt())
}

/// `tail_K(v; r, R, x0) = sup_{x ∈ B_r(x0)} ∫_{R^d∖B_R(x0)} |v(y)| K(t;x,y) dy`,
/// the sup taken over `x0` and the nodes of the closed ball `B̄_r(x0)`.
pub fn tail_k_fun(v: &Field, spec: &KernelSpec, r: f64, radius: f64, x0: &Point) -> Result<f64> {
    spec.require_density()?;
    if !(r < radius) {
        return Err(LabError::param("r", "must be smaller than R"));
    }
    let grid = v.grid();
    check_tail_args(grid, radius, x0)?;
    let mut points = vec![*x0];
    let tol = 1e-9 * grid.h();
    points.extend(grid.nodes_in_ball(x0, r + 2.0 * tol).into_iter().map(|j| grid.coord(j)));
    let norm = 2.0 - spec.alpha();
    let mut best = 0.0f64;
    for x in points {
        let val = norm * weighted_exterior(v, spec.alpha(), Some(&spec.coefficient), &x, x0, radius, ValueMap::Abs)?;
        best = best.max(val);
    }
    Ok(best)
}

/// `tail_axes(v; R, x0) = sup_{x ∈ B_R(x0)} R^α Σ_i ∫ |v(x + s e_i)| |(x0)_i − (x_i + s)|^{−1−α} ds`
/// over the `s` with `x + s e_i ∉ B_R(x0)`, the sup over nodes strictly inside the ball.
pub fn tail_axes_fun(v: &Field, params: &FracParams, radius: f64, x0: &Point) -> Result<f64> {
    tail_axes_mapped(v, params, radius, x0, ValueMap::Abs)
}

pub(crate) fn tail_axes_mapped(v: &Field, params: &FracParams, radius: f64, x0: &Point, map: ValueMap) -> Result<f64> {
    let grid = v.grid();
    if grid.dim() != 2 || grid.shape() != super::grid::DomainShape::Box {
        return Err(LabError::Structure("tail_axes needs a two-dimensional box grid".into()));
    }
    check_tail_args(grid, radius, x0)?;
    let alpha = params.alpha;
    let h = grid.h();
    let t = v.time();
    let nodes = grid.nodes_in_ball(x0, radius);
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&i| {
            let x = grid.coord(i);
            let k = grid.lattice(i);
            let mut total = 0.0;
            for axis in 0..2 {
                let perp = x[1 - axis] - x0[1 - axis];
                let c = (radius * radius - perp * perp).max(0.0).sqrt();
                let chord = (x0[axis] - c, x0[axis] + c);
                let p = x0[axis];
                let m = grid.half_count() as i64;
                for s in -m..=m {
                    let mut kj = k;
                    kj[axis] = s;
                    let j = grid.index_of(kj).unwrap();
                    if !grid.is_interior(j) {
                        continue;
                    }
                    let val = map.apply(v.value(j));
                    if val == 0.0 {
                        continue;
                    }
                    let cs = s as f64 * h;
                    for (l, r) in subtract(&[(cs - 0.5 * h, cs + 0.5 * h)], chord) {
                        total += val * quad::power_interval(p, l, r, alpha);
                    }
                }
                let data = LineData::new(v.exterior().restrict_to_line(2, t, &x, axis));
                let (lo, hi) = grid.interior_span_on_line(axis, k[1 - axis]).unwrap();
                for (l, r) in subtract(&[(f64::NEG_INFINITY, lo), (hi, f64::INFINITY)], chord) {
                    total += data.integrate(p, alpha, l, r, map);
                }
            }
            radius.powf(alpha) * total
        })
        .collect();
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Time window `[a, b]` and how tail values are aggregated over it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeNorm {
    L1,
    Lp(f64),
    LInf,
}

/// Aggregate a time series over `[a, b]`: piecewise-linear interpolation,
/// trapezoidal quadrature for `L¹` and `Lᵖ` (returning `(∫ f^p)^{1/p}`),
/// the max over nodes and interpolated endpoints for `L∞`. When `averaged`,
/// integrals are divided by `b − a` before the `1/p` root.
pub fn time_aggregate(times: &[f64], values: &[f64], a: f64, b: f64, norm: TimeNorm, averaged: bool) -> Result<f64> {
    if times.is_empty() || times.len() != values.len() {
        return Err(LabError::Mismatch("times and values".into()));
    }
    if !(a <= b) || a < times[0] - time_tol(a) || b > times[times.len() - 1] + time_tol(b) {
        return Err(LabError::param(
            "J",
            format!("[{a}, {b}] is not covered by the time grid"),
        ));
    }
    let interp = |s: f64| -> f64 {
        let s = s.clamp(times[0], times[times.len() - 1]);
        match times.iter().position(|&t| t >= s) {
            Some(0) => values[0],
            Some(k) => {
                let (t0, t1) = (times[k - 1], times[k]);
                let w = if t1 > t0 { (s - t0) / (t1 - t0) } else { 1.0 };
                values[k - 1] * (1.0 - w) + values[k] * w
            }
            None => values[values.len() - 1],
        }
    };
    let mut pts = vec![(a, interp(a))];
    for (k, &t) in times.iter().enumerate() {
        if t > a && t < b {
            pts.push((t, values[k]));
        }
    }
    if b > a {
        pts.push((b, interp(b)));
    }
    let width = b - a;
    match norm {
        TimeNorm::LInf => Ok(pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)),
        TimeNorm::L1 | TimeNorm::Lp(_) => {
            let p = match norm {
                TimeNorm::Lp(p) => p,
                _ => 1.0,
            };
            if !(p > 0.0) {
                return Err(LabError::param("p", "must be positive"));
            }
            let f = |v: f64| if p == 1.0 { v } else { v.abs().powf(p) };
            let mut integral = 0.0;
            for w in pts.windows(2) {
                integral += 0.5 * (w[1].0 - w[0].0) * (f(w[0].1) + f(w[1].1));
            }
            if averaged {
                if width <= 0.0 {
                    return Err(LabError::param("J", "averaging over an empty interval"));
                }
                integral /= width;
            }
            Ok(if p == 1.0 { integral } else { integral.powf(1.0 / p) })
        }
    }
}

/// Tail values `tail(map(u(t_k)); R, x0)` at the slices needed to cover `[a, b]`.
pub fn tail_series(
    u: &SpaceTimeField,
    alpha: f64,
    radius: f64,
    x0: &Point,
    a: f64,
    b: f64,
    map: ValueMap,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !u.covers(a, b) {
        return Err(LabError::param(
            "J",
            format!("[{a}, {b}] is not covered by the time grid"),
        ));
    }
    let times = u.times();
    let first = times.iter().rposition(|&t| t <= a + time_tol(a)).unwrap_or(0);
    let last = times
        .iter()
        .position(|&t| t >= b - time_tol(b))
        .unwrap_or(times.len() - 1);
    let idx: Vec<usize> = (first..=last).collect();
    let vals = idx
        .iter()
        .map(|&k| tail_estimate(&u.fields()[k], alpha, radius, x0, map).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    Ok((idx.iter().map(|&k| times[k]).collect(), vals))
}

/// `∫_J tail(u(t); R, x0) dt`.
pub fn tail_l1_in_time(u: &SpaceTimeField, alpha: f64, radius: f64, x0: &Point, a: f64, b: f64) -> Result<f64> {
    let (t, v) = tail_series(u, alpha, radius, x0, a, b, ValueMap::Abs)?;
    time_aggregate(&t, &v, a, b, TimeNorm::L1, false)
}

/// `sup_{t ∈ J} tail(u(t); R, x0)` over the time nodes.
pub fn tail_linf_in_time(u: &SpaceTimeField, alpha: f64, radius: f64, x0: &Point, a: f64, b: f64) -> Result<f64> {
    let (t, v) = tail_series(u, alpha, radius, x0, a, b, ValueMap::Abs)?;
    time_aggregate(&t, &v, a, b, TimeNorm::LInf, false)
}

/// `(∫_J tail(u(t); R, x0)^p dt)^{1/p}`.
pub fn tail_lp_in_time(u: &SpaceTimeField, alpha: f64, radius: f64, x0: &Point, a: f64, b: f64, p: f64) -> Result<f64> {
    let (t, v) = tail_series(u, alpha, radius, x0, a, b, ValueMap::Abs)?;
    time_aggregate(&t, &v, a, b, TimeNorm::Lp(p), false)
}

/// `⨍_J tail(u(t); R, x0) dt`.
pub fn tail_l1_averaged(u: &SpaceTimeField, alpha: f64, radius: f64, x0: &Point, a: f64, b: f64) -> Result<f64> {
    let (t, v) = tail_series(u, alpha, radius, x0, a, b, ValueMap::Abs)?;
    time_aggregate(&t, &v, a, b, TimeNorm::L1, true)
}

/// `(⨍_J tail(u(t); R, x0)^p dt)^{1/p}`.
pub fn tail_lp_averaged(
    u: &SpaceTimeField,
    alpha: f64,
    radius: f64,
    x0: &Point,
    a: f64,
    b: f64,
    p: f64,
) -> Result<f64> {
    let (t, v) = tail_series(u, alpha, radius, x0, a, b, ValueMap::Abs)?;
    time_aggregate(&t, &v, a, b, TimeNorm::Lp(p), true)
}
