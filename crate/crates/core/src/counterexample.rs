//! Exterior data `g(t,x) = δ f(t) + f'(t) 1_{B₃∖B₂}(x)` with `f(t) = (ln t)^{−2}`
//! for `t ∈ (0, 1)`. Solutions stay above `δ f(t)` in `B₁`, so `u(t, 0)/t^γ`
//! is unbounded as `t → 0⁺` for every `γ > 0`, while the tail is in `L¹` but
//! not in `L^{1+γ}` near `t = 0`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{
    assemble_operator, tail, DomainShape, ExteriorRule, ExteriorShape, Field, Grid, TimeProfile,
};
use crate::kernels::{FracParams, KernelSpec};
use crate::solver::{Scenario, Schedule, Solution};
use crate::{quad, LabError, Result};

/// `f(t) = (ln t)^{−2}` on `(0, 1)`, 0 for `t ≤ 0`.
pub fn profile(t: f64) -> f64 {
    TimeProfile::LogInvSquare.eval(t)
}

/// `f'(t) = −2 (ln t)^{−3} / t`.
pub fn profile_derivative(t: f64) -> f64 {
    TimeProfile::LogInvSquareDerivative.eval(t)
}

/// Certified construction data.
#[derive(Clone, Debug)]
pub struct CounterexampleSpec {
    pub params: FracParams,
    pub grid: Arc<Grid>,
    /// `min_{x ∈ B₁} ∫_{B₃∖B₂} K(x, y) dy` over interior nodes.
    pub delta_star: f64,
    pub delta: f64,
    /// Dyadic times `2^{−k}`, `1 ≤ k ≤ k_max`, are inserted into the schedule.
    pub k_max: u32,
    /// Uniform step between dyadic nodes.
    pub dt: f64,
    /// `min_i [−(δ + (−L)1_{B₃∖B₂}(x_i))]`; at least `δ*/2` when certified.
    pub certificate_margin: f64,
}

fn annulus() -> ExteriorShape {
    ExteriorShape::Annulus {
        inner: 2.0,
        outer: 3.0,
        value: 1.0,
    }
}

fn check_grid(params: &FracParams, grid: &Grid) -> Result<()> {
    if grid.dim() != params.dim {
        return Err(LabError::Mismatch("grid and parameter dimensions differ".into()));
    }
    if grid.shape() != DomainShape::Ball || (grid.radius() - 1.0).abs() > 1e-12 {
        return Err(LabError::param("grid", "the construction lives on Ω = B₁"));
    }
    if 1.0 / grid.h() < 16.0 - 1e-9 {
        return Err(LabError::GridTooCoarse("need at least 16 nodes per unit length".into()));
    }
    if grid.r_trunc() < 3.0 {
        return Err(LabError::GridTooCoarse("the box must contain B₃".into()));
    }
    Ok(())
}

/// `(−L)[1_{B₃∖B₂}](x_i)` at every interior node, which equals `−∫_{B₃∖B₂} K(x_i, y) dy`.
pub fn annulus_action(params: &FracParams, grid: &Arc<Grid>) -> Result<Vec<f64>> {
    let spec = KernelSpec::new(*params, crate::kernels::CoefficientRule::constant(1.0))?;
    let op = assemble_operator(&spec, grid, 0.0)?;
    let indicator = Field::new(
        grid.clone(),
        0.0,
        ExteriorRule::single(TimeProfile::One, annulus()),
        |_| 0.0,
    );
    Ok(op.apply(&indicator)?.iter().map(|v| -v).collect())
}

/// `δ* = min_{x ∈ B₁} ∫_{B₃∖B₂} K(x, y) dy` over the interior nodes, with the
/// annulus integrated exactly per cell.
pub fn compute_delta(params: &FracParams, grid: &Arc<Grid>) -> Result<f64> {
    check_grid(params, grid)?;
    if params.lambda != 1.0 || params.big_lambda != 1.0 {
        return Err(LabError::param("params", "the construction uses a ≡ 1 (λ = Λ = 1)"));
    }
    let action = annulus_action(params, grid)?;
    let delta_star = action.iter().map(|v| -v).fold(f64::INFINITY, f64::min);
    assert!(delta_star > 0.0, "a positive kernel has positive mass on the annulus");
    Ok(delta_star)
}

impl CounterexampleSpec {
    /// Compute `δ*`, take `δ = δ*/2` and certify the subsolution inequality
    /// `δ + (−L)1_{B₃∖B₂}(x) ≤ −δ*/2` at every interior node.
    pub fn new(params: FracParams, grid: Arc<Grid>, k_max: u32) -> Result<Self> {
        let delta_star = compute_delta(&params, &grid)?;
        let delta = 0.5 * delta_star;
        let action = annulus_action(&params, &grid)?;
        let certificate_margin = action.iter().map(|a| -(delta + a)).fold(f64::INFINITY, f64::min);
        let spec = KernelSpec::new(params, crate::kernels::CoefficientRule::constant(1.0))?;
        let op = assemble_operator(&spec, &grid, 0.0)?;
        let dt = 0.9 / op.max_diagonal();
        Ok(CounterexampleSpec {
            params,
            grid,
            delta_star,
            delta,
            k_max,
            dt,
            certificate_margin,
        })
    }

    pub fn is_certified(&self) -> bool {
        self.certificate_margin >= 0.5 * self.delta_star * (1.0 - 1e-12)
    }

    /// `g = δ f(t) + f'(t) 1_{B₃∖B₂}`.
    pub fn exterior(&self) -> ExteriorRule {
        ExteriorRule::single(TimeProfile::LogInvSquare, ExteriorShape::Constant { value: self.delta })
            .with_term(TimeProfile::LogInvSquareDerivative, annulus())
    }

    /// `tail(g(t); 1, 0) = T₁ δ f(t) + T_A f'(t)` with `T₁ = tail(1; 1, 0)` and
    /// `T_A = tail(1_{B₃∖B₂}; 1, 0)`; returns `(T₁, T_A)`.
    pub fn tail_constants(&self) -> Result<(f64, f64)> {
        let one = Field::constant(self.grid.clone(), 0.0, 1.0);
        let ind = Field::new(
            self.grid.clone(),
            0.0,
            ExteriorRule::single(TimeProfile::One, annulus()),
            |_| 0.0,
        );
        Ok((
            tail(&one, self.params.alpha, 1.0, &[0.0; 2])?,
            tail(&ind, self.params.alpha, 1.0, &[0.0; 2])?,
        ))
    }
}

/// Scenario on `(−1, 1/2)` with zero initial data and exterior data `g`.
pub fn build_counterexample(spec: &CounterexampleSpec) -> Result<Scenario> {
    if !spec.is_certified() {
        return Err(LabError::Certificate(format!(
            "subsolution margin {} is below δ*/2 = {}",
            spec.certificate_margin,
            0.5 * spec.delta_star
        )));
    }
    let kernel = KernelSpec::new(spec.params, crate::kernels::CoefficientRule::constant(1.0))?;
    let exterior = spec.exterior();
    let initial = Field::new(spec.grid.clone(), -1.0, exterior.clone(), |_| 0.0);
    Ok(Scenario {
        kernel,
        grid: spec.grid.clone(),
        t_start: -1.0,
        t_end: 0.5,
        initial,
        exterior,
        source: ExteriorRule::zero(),
        schedule: Schedule::graded(-1.0, 0.5, spec.dt, 1, spec.k_max)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub t: f64,
    /// `min_{x ∈ B₁} u(t, x) − δ f(t)`.
    pub margin: f64,
    pub tol: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub rows: Vec<LowerBoundRow>,
    pub pass: bool,
}

/// Check `u(t, x) ≥ δ f(t) − tol` on the interior nodes at the sampled times,
/// `tol = 10 · dt · sup |∂ₜ(δ f)|` over the step into `t`.
pub fn certify_lower_bound(sol: &Solution, spec: &CounterexampleSpec, times: &[f64]) -> Result<LowerBoundReport> {
    let u = &sol.field;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let k = u
            .index_at(t)
            .ok_or_else(|| LabError::param("sample_times", format!("t = {t} is not a stored time")))?;
        let f = &u.fields()[k];
        let min = sol
            .grid()
            .interior_nodes()
            .iter()
            .map(|&i| f.value(i))
            .fold(f64::INFINITY, f64::min);
        let bound = spec.delta * profile(t);
        let tol = if k == 0 {
            0.0
        } else {
            let prev = u.times()[k - 1];
            let dt = t - prev;
            // sup |f'| over the step: f' is monotone near 0, so the endpoints
            // suffice; from t ≤ 0 the secant slope stands in for the singular f'
            let slope = if prev > 0.0 {
                profile_derivative(prev).abs().max(profile_derivative(t).abs())
            } else {
                (profile(t) - profile(prev)).abs() / dt
            };
            10.0 * dt * spec.delta * slope
        };
        let margin = min - bound;
        rows.push(LowerBoundRow {
            t,
            margin,
            tol,
            ok: margin >= -tol,
        });
    }
    Ok(LowerBoundReport {
        pass: rows.iter().all(|r| r.ok),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub k: u32,
    pub t: f64,
    /// `u(t_k, 0)` when the solution stores `t_k`.
    pub u0: Option<f64>,
    /// `δ f(t_k)`.
    pub lower: f64,
    /// `u(t_k, 0) / t_k^γ` per `γ`.
    pub quotient: Vec<Option<f64>>,
    /// `δ f(t_k) / t_k^γ` per `γ`.
    pub quotient_lower: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialRow {
    pub k: u32,
    /// `∫_{2^{−k}}^{1/2} tail dt`.
    pub l1: f64,
    /// `∫_{2^{−k}}^{1/2} tail^{1+γ} dt` per `γ`.
    pub lp: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub gammas: Vec<f64>,
    pub holder: Vec<HolderRow>,
    /// `(t, tail(u(t); 1, 0), f(t) + f'(t))`.
    pub tail_samples: Vec<(f64, f64, f64)>,
    /// `c₁ (f + f') ≤ tail ≤ c₂ (f + f')`.
    pub sandwich: (f64, f64),
    pub partial: Vec<PartialRow>,
}

/// Tail of the solution at time `t`: `u = g` outside `B₁`, so only the exterior
/// rule enters.
fn tail_at(spec: &CounterexampleSpec, t: f64) -> Result<f64> {
    let f = Field::new(spec.grid.clone(), t, spec.exterior(), |_| 0.0);
    tail(&f, spec.params.alpha, 1.0, &[0.0; 2])
}

/// Hölder quotients at `t_k = 2^{−k}`, tail samples with the sandwich constants
/// against `f + f'`, and partial time integrals of `tail` and `tail^{1+γ}`.
pub fn certify_failure(
    sol: &Solution,
    spec: &CounterexampleSpec,
    gammas: &[f64],
    k_range: std::ops::RangeInclusive<u32>,
) -> Result<FailureReport> {
    if k_range.clone().count() < 6 {
        return Err(LabError::param("k_range", "need at least 6 dyadic levels"));
    }
    if *k_range.start() < 1 {
        return Err(LabError::param("k_range", "levels start at k = 1 (t ≤ 1/2)"));
    }
    let origin = sol
        .grid()
        .index_of([0, 0])
        .ok_or_else(|| LabError::param("grid", "no node at the origin"))?;
    let holder = k_range
        .clone()
        .map(|k| {
            let t = 0.5f64.powi(k as i32);
            let u0 = sol.field.index_at(t).map(|i| sol.field.fields()[i].value(origin));
            let lower = spec.delta * profile(t);
            HolderRow {
                k,
                t,
                u0,
                lower,
                quotient: gammas.iter().map(|g| u0.map(|u| u / t.powf(*g))).collect(),
                quotient_lower: gammas.iter().map(|g| lower / t.powf(*g)).collect(),
            }
        })
        .collect();
    let (t1, ta) = spec.tail_constants()?;
    let sandwich = ((spec.delta * t1).min(ta), (spec.delta * t1).max(ta));
    let tail_samples = k_range
        .clone()
        .map(|k| {
            let t = 0.5f64.powi(k as i32);
            Ok((t, tail_at(spec, t)?, profile(t) + profile_derivative(t)))
        })
        .collect::<Result<Vec<_>>>()?;
    // dyadic pieces [2^{−j−1}, 2^{−j}] integrated by Gauss rules
    let k_max = *k_range.end();
    let mut pieces: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k_max as usize);
    for j in 1..k_max {
        let (a, b) = (0.5f64.powi(j as i32 + 1), 0.5f64.powi(j as i32));
        let nodes: Vec<(f64, f64)> = quad::gauss_legendre(16)
            .iter()
            .map(|&(x, w)| {
                let t = a + 0.5 * (b - a) * (x + 1.0);
                (t, 0.5 * (b - a) * w)
            })
            .collect();
        let vals = nodes
            .iter()
            .map(|&(t, _)| tail_at(spec, t))
            .collect::<Result<Vec<f64>>>()?;
        let l1: f64 = nodes.iter().zip(&vals).map(|(n, v)| n.1 * v).sum();
        let lp = gammas
            .iter()
            .map(|g| nodes.iter().zip(&vals).map(|(n, v)| n.1 * v.powf(1.0 + g)).sum())
            .collect();
        pieces.push((l1, lp));
    }
    let mut partial = Vec::new();
    let (mut l1, mut lp) = (0.0, vec![0.0; gammas.len()]);
    for (j, piece) in pieces.iter().enumerate() {
        l1 += piece.0;
        for (acc, v) in lp.iter_mut().zip(&piece.1) {
            *acc += v;
        }
        let k = j as u32 + 2;
        if k_range.contains(&k) {
            partial.push(PartialRow { k, l1, lp: lp.clone() });
        }
    }
    Ok(FailureReport {
        gammas: gammas.to_vec(),
        holder,
        tail_samples,
        sandwich,
        partial,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// CSV `k, t_k, u(t_k,0), δf(t_k), q_γ…, q_lower_γ…` (empty cells where `u` is not stored).
pub fn write_holder_csv<W: Write>(rep: &FailureReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string(), "t_k".into(), "u_t_k_0".into(), "delta_f".into()];
    header.extend(rep.gammas.iter().map(|g| format!("q_{g}")));
    header.extend(rep.gammas.iter().map(|g| format!("q_lower_{g}")));
    w.write_record(&header)?;
    for r in &rep.holder {
        let mut row = vec![r.k.to_string(), fmt(r.t), r.u0.map_or(String::new(), fmt), fmt(r.lower)];
        row.extend(r.quotient.iter().map(|q| q.map_or(String::new(), fmt)));
        row.extend(r.quotient_lower.iter().map(|&q| fmt(q)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV `k, l1_tail, lp_tail_γ…`.
pub fn write_partial_csv<W: Write>(rep: &FailureReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string(), "l1_tail".into()];
    header.extend(rep.gammas.iter().map(|g| format!("tail_pow_1+{g}")));
    w.write_record(&header)?;
    for r in &rep.partial {
        let mut row = vec![r.k.to_string(), fmt(r.l1)];
        row.extend(r.lp.iter().map(|&v| fmt(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
