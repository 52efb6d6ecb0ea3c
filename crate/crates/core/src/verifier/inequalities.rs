use std::collections::BTreeMap;

use rayon::prelude::*;

use super::cylinder::{cyl_stats, cyl_stats_mapped, Cylinder, CylinderKind};
use super::report::{Provenance, Report};
use crate::discretization::{tail_axes_fun, tail_series, time_aggregate, time_tol, SpaceTimeField, TimeNorm, ValueMap};
use crate::solver::Solution;
use crate::{LabError, Point, Result};

pub(crate) fn provenance(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Provenance {
    let p = &sol.kernel.params;
    Provenance {
        dim: p.dim,
        alpha: p.alpha,
        lambda: p.lambda,
        big_lambda: p.big_lambda,
        h: sol.grid().h(),
        r,
        t0,
        x0: *x0,
        seed: crate::kernels::DEFAULT_SEED,
        extra: BTreeMap::new(),
    }
}

/// Checks `(t0 − back, t0 + ahead) × B_{radius}(x0) ⊂ I × Ω`.
fn require_inside(u: &SpaceTimeField, t0: f64, back: f64, ahead: f64, x0: &Point, radius: f64) -> Result<()> {
    let (a, b) = (t0 - back, t0 + ahead);
    if a < u.first_time() - time_tol(a) || b > u.last_time() + time_tol(b) {
        return Err(LabError::Containment(format!(
            "time interval ({a}, {b}) leaves the solved interval [{}, {}]",
            u.first_time(),
            u.last_time()
        )));
    }
    if !u.grid().ball_inside_domain(x0, radius) {
        return Err(LabError::Containment(format!(
            "B_{radius}({x0:?}) is not contained in the domain"
        )));
    }
    Ok(())
}

/// `I_{4R}(t0) × B_{4R}(x0) ⊂ I × Ω`.
fn require_4r(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Result<()> {
    let s = (4.0 * r).powf(sol.kernel.alpha());
    require_inside(&sol.field, t0, s, s, x0, 4.0 * r)
}

fn require_nonnegative(sol: &Solution) -> Result<()> {
    let m = sol.min();
    if m < -1e-12 {
        return Err(LabError::param(
            "solution",
            format!("must be globally nonnegative, min = {m:e}"),
        ));
    }
    // the exterior beyond the box is checked through each slice's rule
    for f in sol.field.fields() {
        if let Some(c) = f
            .exterior()
            .far_constant(f.grid().dim(), f.grid().outer_extent(), f.time())
        {
            if c < 0.0 {
                return Err(LabError::param("solution", "exterior data is negative beyond the box"));
            }
        }
    }
    Ok(())
}

/// `⨍_{(a,b)} tail(map(u(t)); R, x0) dt`.
pub(crate) fn averaged_tail(
    u: &SpaceTimeField,
    alpha: f64,
    r: f64,
    x0: &Point,
    a: f64,
    b: f64,
    map: ValueMap,
) -> Result<f64> {
    let (t, v) = tail_series(u, alpha, r, x0, a, b, map)?;
    time_aggregate(&t, &v, a, b, TimeNorm::L1, true)
}

fn cyl(kind: CylinderKind, t0: f64, x0: &Point, r: f64, alpha: f64) -> Cylinder {
    Cylinder::new(kind, t0, *x0, r, alpha)
}

fn summands(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `sup_{I⊖_R(t0 − R^α) × B_R} u` against `inf_{I⊕_R(t0) × B_R} u` for a
/// globally nonnegative solution.
pub fn harnack_quotient(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Result<Report> {
    require_4r(sol, t0, x0, r)?;
    require_nonnegative(sol)?;
    let alpha = sol.kernel.alpha();
    let earlier = cyl_stats(&sol.field, &cyl(CylinderKind::IMinus, t0 - r.powf(alpha), x0, r, alpha))?;
    let later = cyl_stats(&sol.field, &cyl(CylinderKind::IPlus, t0, x0, r, alpha))?;
    Ok(Report::new(
        "harnack",
        earlier.sup,
        later.inf,
        summands(&[("sup", earlier.sup), ("inf", later.inf)]),
        provenance(sol, t0, x0, r),
    ))
}

/// Harnack inequality for solutions nonnegative in `I × Ω` only:
/// `⨍ tail(u₊; R) + sup u ≤ c inf u + c ⨍_{I_{4R}} tail(u₋; 4R)`.
pub fn harnack_with_tails(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Result<Report> {
    require_4r(sol, t0, x0, r)?;
    let alpha = sol.kernel.alpha();
    let ra = r.powf(alpha);
    let earlier = cyl_stats(&sol.field, &cyl(CylinderKind::IMinus, t0 - ra, x0, r, alpha))?;
    let later = cyl_stats(&sol.field, &cyl(CylinderKind::IPlus, t0, x0, r, alpha))?;
    let in_omega_min = sol
        .field
        .fields()
        .iter()
        .flat_map(|f| sol.grid().interior_nodes().iter().map(move |&i| f.value(i)))
        .fold(f64::INFINITY, f64::min);
    if in_omega_min < -1e-12 {
        return Err(LabError::param(
            "solution",
            format!("must be nonnegative in I × Ω, min = {in_omega_min:e}"),
        ));
    }
    let tail_plus = averaged_tail(&sol.field, alpha, r, x0, t0 - 2.0 * ra, t0 - ra, ValueMap::Pos)?;
    let s4 = (4.0 * r).powf(alpha);
    let tail_minus = averaged_tail(&sol.field, alpha, 4.0 * r, x0, t0 - s4, t0 + s4, ValueMap::Neg)?;
    Ok(Report::new(
        "harnack-tails",
        tail_plus + earlier.sup,
        later.inf + tail_minus,
        summands(&[
            ("tail_plus", tail_plus),
            ("sup", earlier.sup),
            ("inf", later.inf),
            ("tail_minus", tail_minus),
        ]),
        provenance(sol, t0, x0, r),
    ))
}

/// `⨍ u + ⨍ tail(u; R)` over `I⊖_R(t0 − R^α)` against `inf_{I⊕_R(t0) × B_R} u`.
pub fn weak_harnack_ratio(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Result<Report> {
    require_4r(sol, t0, x0, r)?;
    require_nonnegative(sol)?;
    let alpha = sol.kernel.alpha();
    let ra = r.powf(alpha);
    let earlier = cyl_stats(&sol.field, &cyl(CylinderKind::IMinus, t0 - ra, x0, r, alpha))?;
    let later = cyl_stats(&sol.field, &cyl(CylinderKind::IPlus, t0, x0, r, alpha))?;
    let tail = averaged_tail(&sol.field, alpha, r, x0, t0 - 2.0 * ra, t0 - ra, ValueMap::Abs)?;
    Ok(Report::new(
        "weak-harnack",
        earlier.mean + tail,
        later.inf,
        summands(&[("mean", earlier.mean), ("tail", tail), ("inf", later.inf)]),
        provenance(sol, t0, x0, r),
    ))
}

/// `sup_{I⊖_{R/2}(t0) × B_{R/2}} u₊` against the RMS of `u₊` over
/// `I⊖_R(t0) × B_R` plus `⨍_{I⊖_R(t0)} tail(u₊; R)`.
pub fn locbd_ratio(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Result<Report> {
    require_4r(sol, t0, x0, r)?;
    let alpha = sol.kernel.alpha();
    let pos = |v: f64| v.max(0.0);
    let inner = cyl_stats_mapped(&sol.field, &cyl(CylinderKind::IMinus, t0, x0, 0.5 * r, alpha), pos)?;
    let outer = cyl_stats_mapped(&sol.field, &cyl(CylinderKind::IMinus, t0, x0, r, alpha), pos)?;
    let tail = averaged_tail(&sol.field, alpha, r, x0, t0 - r.powf(alpha), t0, ValueMap::Pos)?;
    Ok(Report::new(
        "local-boundedness",
        inner.sup,
        outer.l2_mean + tail,
        summands(&[("sup", inner.sup), ("rms", outer.l2_mean), ("tail", tail)]),
        provenance(sol, t0, x0, r),
    ))
}

/// Minimum number of point pairs in the Hölder scan.
pub const HOLDER_MIN_PAIRS: usize = 10_000;
const HOLDER_MAX_POINTS: usize = 3000;

/// Parabolic Hölder quotients `R^γ|u(t,x) − u(s,y)| / (|t−s|^{1/α} + |x−y|)^γ`
/// maximized over all pairs of a decimated sub-lattice of `I⊖_R(t0) × B_R`,
/// against `(⨍_{I⊖_{2R} × B_{2R}} u²)^{1/2} + (⨍_{I⊖_{2R}} tail(u; R/2)^{1+ε})^{1/(1+ε)}`.
/// One report per `γ`.
pub fn holder_report(sol: &Solution, t0: f64, x0: &Point, r: f64, gammas: &[f64], eps: f64) -> Result<Vec<Report>> {
    if gammas.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return Err(LabError::param("gamma", "must lie in (0, 1)"));
    }
    if !(eps > 0.0) {
        return Err(LabError::param("eps", "must be positive"));
    }
    let alpha = sol.kernel.alpha();
    let s4 = (4.0 * r).powf(alpha);
    require_inside(&sol.field, t0, s4, 0.0, x0, 4.0 * r)?;
    let u = &sol.field;
    let window = cyl(CylinderKind::IMinus, t0, x0, r, alpha).resolve(u)?;
    let (mut st, mut sx) = (1usize, 1usize);
    let count = |st: usize, sx: usize| window.slices.len().div_ceil(st) * decimate_nodes(sol, &window.nodes, sx).len();
    while count(st, sx) > HOLDER_MAX_POINTS {
        if window.slices.len().div_ceil(st) >= decimate_nodes(sol, &window.nodes, sx).len() {
            st += 1;
        } else {
            sx += 1;
        }
    }
    let nodes = decimate_nodes(sol, &window.nodes, sx);
    let slices: Vec<usize> = window.slices.iter().step_by(st).copied().collect();
    let dim = sol.grid().dim();
    let points: Vec<(f64, Point, f64)> = slices
        .iter()
        .flat_map(|&k| {
            let f = &u.fields()[k];
            nodes.iter().map(move |&i| (f.time(), f.grid().coord(i), f.value(i)))
        })
        .collect();
    let n_pairs = points.len() * points.len().saturating_sub(1) / 2;
    if n_pairs < HOLDER_MIN_PAIRS {
        return Err(LabError::EmptyResolution(format!(
            "Hölder window resolves to {n_pairs} pairs, need {HOLDER_MIN_PAIRS}"
        )));
    }
    let maxima: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|a| {
            let mut best = vec![0.0f64; gammas.len()];
            let (ta, xa, ua) = points[a];
            for &(tb, xb, ub) in &points[a + 1..] {
                let du = (ua - ub).abs();
                if du == 0.0 {
                    continue;
                }
                let dist = (ta - tb).abs().powf(1.0 / alpha) + crate::distance(dim, &xa, &xb);
                for (g, b) in gammas.iter().zip(best.iter_mut()) {
                    *b = b.max(du / dist.powf(*g));
                }
            }
            best
        })
        .reduce(
            || vec![0.0; gammas.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        );
    let big = cyl_stats(u, &cyl(CylinderKind::IMinus, t0, x0, 2.0 * r, alpha))?;
    let (times, vals) = tail_series(u, alpha, 0.5 * r, x0, t0 - (2.0 * r).powf(alpha), t0, ValueMap::Abs)?;
    let tail = time_aggregate(
        &times,
        &vals,
        t0 - (2.0 * r).powf(alpha),
        t0,
        TimeNorm::Lp(1.0 + eps),
        true,
    )?;
    Ok(gammas
        .iter()
        .zip(maxima)
        .map(|(&g, m)| {
            let left = r.powf(g) * m;
            let mut rep = Report::new(
                "holder",
                left,
                big.l2_mean + tail,
                summands(&[("rms", big.l2_mean), ("tail", tail), ("pairs", n_pairs as f64)]),
                provenance(sol, t0, x0, r),
            );
            rep.provenance.extra.insert("gamma".into(), g);
            rep.provenance.extra.insert("eps".into(), eps);
            rep
        })
        .collect())
}

fn decimate_nodes(sol: &Solution, nodes: &[usize], stride: usize) -> Vec<usize> {
    if stride == 1 {
        return nodes.to_vec();
    }
    let g = sol.grid();
    nodes
        .iter()
        .copied()
        .filter(|&i| {
            let k = g.lattice(i);
            k[0].rem_euclid(stride as i64) == 0 && k[1].rem_euclid(stride as i64) == 0
        })
        .collect()
}

/// Harnack inequality for the axes measure:
/// `sup_{I⊖_R(t0 − R^α) × B_R} u ≤ c inf_{I⊕_R(t0) × B_R} u + c ⨍_{I⊖_R(t0)} tail_axes(u; R)`.
/// The tail-free constant `sup / inf` is reported alongside.
pub fn axes_harnack(sol: &Solution, t0: f64, x0: &Point, r: f64) -> Result<Report> {
    if !sol.kernel.is_axes() {
        return Err(LabError::Structure(
            "axes_harnack needs a solution of the axes operator".into(),
        ));
    }
    require_4r(sol, t0, x0, r)?;
    require_nonnegative(sol)?;
    let alpha = sol.kernel.alpha();
    let ra = r.powf(alpha);
    let earlier = cyl_stats(&sol.field, &cyl(CylinderKind::IMinus, t0 - ra, x0, r, alpha))?;
    let later = cyl_stats(&sol.field, &cyl(CylinderKind::IPlus, t0, x0, r, alpha))?;
    let tail = averaged_tail_axes(sol, r, x0, t0 - ra, t0)?;
    let tail_free = if later.inf > 0.0 {
        earlier.sup / later.inf
    } else {
        f64::INFINITY
    };
    Ok(Report::new(
        "axes-harnack",
        earlier.sup,
        later.inf + tail,
        summands(&[
            ("sup", earlier.sup),
            ("inf", later.inf),
            ("tail_axes", tail),
            ("tail_free_constant", tail_free),
        ]),
        provenance(sol, t0, x0, r),
    ))
}

fn averaged_tail_axes(sol: &Solution, r: f64, x0: &Point, a: f64, b: f64) -> Result<f64> {
    let u = &sol.field;
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
    let vals = (first..=last)
        .into_par_iter()
        .map(|k| tail_axes_fun(&u.fields()[k], &sol.kernel.params, r, x0))
        .collect::<Result<Vec<f64>>>()?;
    time_aggregate(&times[first..=last], &vals, a, b, TimeNorm::L1, true)
}

/// Measured constants of several reports: `(min, max)` over finite ones.
pub fn constant_range(reports: &[Report]) -> Option<(f64, f64)> {
    let finite: Vec<f64> = reports.iter().map(|r| r.constant).filter(|c| c.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    Some(finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
        (lo.min(c), hi.max(c))
    }))
}
