//! Explicit and implicit Euler time stepping for `∂ₜu − Lₜu = f` on `I × Ω`
//! with exterior data `g`, plus weak-residual auditing and the discrete
//! comparison principle.

mod export;
mod residual;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::discretization::{
    assemble_axes_operator, assemble_operator, ExteriorRule, Field, Grid, Operator, SourceRule, SpaceTimeField,
    TimeProfile,
};
use crate::kernels::KernelSpec;
use crate::{LabError, Result};

pub use export::{write_solution_csv, write_solution_csv_to};
pub use residual::{residual_check, residual_of_fields, test_bumps, ResidualReport};

/// Time grid of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    /// Steps of `dt` from `t_start`; the last step is shortened to land on `t_end`.
    Uniform { dt: f64 },
    /// All time nodes, from `t_start` to `t_end` inclusive.
    Explicit { times: Vec<f64> },
}

impl Schedule {
    /// Uniform steps of at most `dt` with the dyadic times `2^{−k}`,
    /// `k_min ≤ k ≤ k_max`, inserted: refinement accumulates at 0⁺.
    pub fn graded(t_start: f64, t_end: f64, dt: f64, k_min: u32, k_max: u32) -> Result<Schedule> {
        if k_max > 45 {
            return Err(LabError::param("k_max", "dyadic refinement is capped at k = 45"));
        }
        let mut times = Schedule::Uniform { dt }.times(t_start, t_end)?;
        for k in k_min..=k_max {
            let t = 0.5f64.powi(k as i32);
            if t > t_start && t < t_end {
                times.push(t);
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<f64> = Vec::with_capacity(times.len());
        for t in times {
            match out.last() {
                Some(&last) if t - last <= 1e-12 * t.abs() + 1e-15 => {}
                _ => out.push(t),
            }
        }
        Ok(Schedule::Explicit { times: out })
    }

    pub fn times(&self, t_start: f64, t_end: f64) -> Result<Vec<f64>> {
        if !(t_start < t_end) {
            return Err(LabError::param("t_end", "must exceed t_start"));
        }
        match self {
            Schedule::Uniform { dt } => {
                if !(*dt > 0.0) {
                    return Err(LabError::param("schedule.dt", "must be positive"));
                }
                let span = t_end - t_start;
                let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
                let mut times: Vec<f64> = (0..n).map(|k| t_start + k as f64 * dt).collect();
                times.push(t_end);
                Ok(times)
            }
            Schedule::Explicit { times } => {
                let tol = 1e-12 * t_end.abs().max(1.0);
                if times.len() < 2 || (times[0] - t_start).abs() > tol || (times[times.len() - 1] - t_end).abs() > tol {
                    return Err(LabError::param("schedule.times", "must run from t_start to t_end"));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(LabError::param("schedule.times", "must be strictly increasing"));
                }
                Ok(times.clone())
            }
        }
    }
}

/// Everything that defines one evolution problem.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub kernel: KernelSpec,
    pub grid: Arc<Grid>,
    pub t_start: f64,
    pub t_end: f64,
    /// Interior values are the initial data; ring values must agree with `exterior` at `t_start`.
    pub initial: Field,
    pub exterior: ExteriorRule,
    pub source: SourceRule,
    pub schedule: Schedule,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.kernel.dim() != self.grid.dim() {
            return Err(LabError::Mismatch("kernel and grid dimensions differ".into()));
        }
        if !self.initial.grid().same_as(&self.grid) {
            return Err(LabError::Mismatch("initial data lives on another grid".into()));
        }
        self.exterior.validate_for(&self.grid)?;
        self.source.validate(self.grid.dim())?;
        self.schedule.times(self.t_start, self.t_end)?;
        let dim = self.grid.dim();
        for idx in 0..self.grid.n_nodes() {
            if self.grid.is_interior(idx) {
                continue;
            }
            let g = self.exterior.eval(dim, self.t_start, &self.grid.coord(idx));
            let u = self.initial.value(idx);
            if (g - u).abs() > 1e-12 * g.abs().max(1.0) {
                return Err(LabError::Mismatch(format!(
                    "initial data disagrees with the exterior rule at node {idx}: {u} vs {g}"
                )));
            }
        }
        Ok(())
    }

    /// Initial data from interior values, with ring values taken from the exterior rule.
    pub fn initial_from(grid: &Arc<Grid>, t: f64, exterior: &ExteriorRule, f: impl Fn(&crate::Point) -> f64) -> Field {
        Field::new(grid.clone(), t, exterior.clone(), f)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.schedule.times(self.t_start, self.t_end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    Implicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    pub scheme: Scheme,
    /// Explicit steps require `dt ≤ cfl / max_i |A_ii|`.
    pub cfl: f64,
    /// Relative residual tolerance of the implicit linear solves.
    pub tol: f64,
    /// Keep every `checkpoint_stride`-th slice (the first and last are always kept).
    pub checkpoint_stride: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            scheme: Scheme::Implicit,
            cfl: 0.9,
            tol: 1e-10,
            checkpoint_stride: 1,
        }
    }
}

impl SolveOptions {
    pub fn explicit() -> Self {
        SolveOptions {
            scheme: Scheme::Explicit,
            ..Default::default()
        }
    }

    pub fn implicit() -> Self {
        SolveOptions::default()
    }
}

/// Per-step record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostic {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub min: f64,
    pub max: f64,
    /// Relative residual of the linear solve (0 for explicit steps).
    pub residual: f64,
}

/// A documented source of truncation error with a bound per unit of data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationNote {
    pub source: String,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: SpaceTimeField,
    pub kernel: KernelSpec,
    pub diagnostics: Vec<StepDiagnostic>,
    pub truncation: Vec<TruncationNote>,
}

impl Solution {
    pub fn grid(&self) -> &Arc<Grid> {
        self.field.grid()
    }

    pub fn times(&self) -> &[f64] {
        self.field.times()
    }

    pub fn min(&self) -> f64 {
        self.field
            .fields()
            .iter()
            .flat_map(|f| f.values().iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.field
            .fields()
            .iter()
            .flat_map(|f| f.values().iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Operator at one time with the per-term exterior loads.
struct Frozen {
    op: Operator,
    ext_loads: Vec<(TimeProfile, Vec<f64>)>,
}

impl Frozen {
    fn new(spec: &KernelSpec, grid: &Arc<Grid>, t: f64, exterior: &ExteriorRule) -> Result<Self> {
        let op = if spec.is_axes() {
            assemble_axes_operator(&spec.params, grid, t)?
        } else {
            assemble_operator(spec, grid, t)?
        };
        let ext_loads = exterior
            .terms
            .iter()
            .map(|term| Ok((term.profile.clone(), op.shape_load(&term.shape)?)))
            .collect::<Result<_>>()?;
        Ok(Frozen { op, ext_loads })
    }

    /// Exterior load with each profile averaged over `[a, b]` (`a = b` samples at `b`).
    fn load(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.op.matrix().nrows();
        let mut out = vec![0.0; n];
        for (profile, l) in &self.ext_loads {
            let p = profile.average(a, b);
            if p != 0.0 {
                for (o, v) in out.iter_mut().zip(l) {
                    *o += p * v;
                }
            }
        }
        out
    }
}

fn source_values(grid: &Grid, source: &SourceRule, t: f64) -> Vec<f64> {
    let dim = grid.dim();
    grid.interior_nodes()
        .iter()
        .map(|&i| source.eval(dim, t, &grid.coord(i)))
        .collect()
}

fn truncation_notes(spec: &KernelSpec, op: &Operator) -> Vec<TruncationNote> {
    let mut notes = Vec::new();
    let far_max = op.far().iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if !spec.coefficient.is_spatially_uniform() {
        let (lo, hi) = spec.coefficient.range();
        let mid = 0.5 * (lo + hi);
        notes.push(TruncationNote {
            source: "coefficient frozen at its mid-range value beyond the truncation box".into(),
            bound: far_max * (hi - lo) / (2.0 * mid),
        });
    }
    notes
}

/// Solve the scenario. Explicit steps use `u^{n+1} = u^n + dt(Lu^n + f^n)` with
/// `g(t_n)`; implicit steps solve `(I − dt A)δ = dt(L[u^n, ḡ] + f^{n+1})`
/// for the increment `δ = u^{n+1} − u^n`, so constants are preserved bitwise.
/// `ḡ` averages each time profile over the step, which keeps steps across an
/// integrable singularity of `g` (as in the counterexample data) bounded.
pub fn solve(scenario: &Scenario, options: &SolveOptions) -> Result<Solution> {
    scenario.validate()?;
    if !(options.cfl > 0.0 && options.cfl <= 1.0) {
        return Err(LabError::param("cfl", "must lie in (0, 1]"));
    }
    if options.checkpoint_stride == 0 {
        return Err(LabError::param("checkpoint_stride", "must be at least 1"));
    }
    let grid = &scenario.grid;
    let spec = &scenario.kernel;
    let times = scenario.times()?;
    let time_dependent = spec.coefficient.is_time_dependent();
    // a(t) without spatial dependence: the operator at t is the one at times[0]
    // scaled by a(t)/a(times[0]), so one assembly serves every step
    let rescale = time_dependent && spec.coefficient.is_spatially_uniform() && !spec.is_axes();
    let origin = [0.0; 2];
    let a_ref = spec.coefficient_at(times[0], &origin, &origin);
    let scale_at = |t: f64| spec.coefficient_at(t, &origin, &origin) / a_ref;

    let mut frozen = Frozen::new(spec, grid, times[0], &scenario.exterior)?;
    let truncation = truncation_notes(spec, &frozen.op);
    let mut factor_cache: HashMap<u64, Cholesky<f64, Dyn>> = HashMap::new();

    let mut u = scenario.initial.interior_values();
    let mut fields = vec![Field::from_interior(
        grid.clone(),
        times[0],
        scenario.exterior.clone(),
        &u,
    )?];
    let mut diagnostics = Vec::with_capacity(times.len() - 1);
    let last = times.len() - 1;

    for step in 0..last {
        let (t0, t1) = (times[step], times[step + 1]);
        let dt = t1 - t0;
        let mut residual = 0.0;
        match options.scheme {
            Scheme::Explicit => {
                let s = if rescale {
                    scale_at(t0)
                } else {
                    if time_dependent && step > 0 {
                        frozen = Frozen::new(spec, grid, t0, &scenario.exterior)?;
                    }
                    1.0
                };
                let limit = options.cfl / (s * frozen.op.max_diagonal());
                if dt > limit * (1.0 + 1e-12) {
                    return Err(LabError::Cfl { step, dt, limit });
                }
                let lu = frozen.op.apply_with_load(&u, &frozen.load(t0, t0));
                let f = source_values(grid, &scenario.source, t0);
                for ((ui, l), fi) in u.iter_mut().zip(&lu).zip(&f) {
                    *ui += dt * (s * l + fi);
                }
            }
            Scheme::Implicit => {
                let s = if rescale {
                    scale_at(t1)
                } else {
                    if time_dependent {
                        frozen = Frozen::new(spec, grid, t1, &scenario.exterior)?;
                        factor_cache.clear();
                    }
                    1.0
                };
                let lu = frozen.op.apply_with_load(&u, &frozen.load(t0, t1));
                let f = source_values(grid, &scenario.source, t1);
                let rhs: Vec<f64> = lu.iter().zip(&f).map(|(l, fi)| dt * (s * l + fi)).collect();
                // the system is I − (s dt) A
                let dt = s * dt;
                if rhs.iter().any(|v| v != &0.0) {
                    let a = frozen.op.matrix();
                    let key = dt.to_bits();
                    if !factor_cache.contains_key(&key) {
                        let m = system_matrix(a, dt);
                        let chol = Cholesky::new(m).ok_or_else(|| LabError::LinearSolve {
                            step,
                            reason: "system matrix is not positive definite".into(),
                        })?;
                        factor_cache.insert(key, chol);
                    }
                    let chol = &factor_cache[&key];
                    let (delta, res) = refine(chol, a, dt, &rhs, options.tol, step)?;
                    residual = res;
                    for (ui, d) in u.iter_mut().zip(delta.iter()) {
                        *ui += d;
                    }
                }
            }
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite { step });
        }
        let (min, max) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        diagnostics.push(StepDiagnostic {
            step,
            t: t1,
            dt,
            min,
            max,
            residual,
        });
        if (step + 1) % options.checkpoint_stride == 0 || step + 1 == last {
            fields.push(Field::from_interior(grid.clone(), t1, scenario.exterior.clone(), &u)?);
        }
    }
    Ok(Solution {
        field: SpaceTimeField::new(fields)?,
        kernel: spec.clone(),
        diagnostics,
        truncation,
    })
}

fn system_matrix(a: &DMatrix<f64>, dt: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a * (-dt);
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    m
}

/// Cholesky solve with iterative refinement against the unfactored matrix.
fn refine(
    chol: &Cholesky<f64, Dyn>,
    a: &DMatrix<f64>,
    dt: f64,
    rhs: &[f64],
    tol: f64,
    step: usize,
) -> Result<(DVector<f64>, f64)> {
    let b = DVector::from_column_slice(rhs);
    let bnorm = b.amax().max(f64::MIN_POSITIVE);
    let mut x = chol.solve(&b);
    let mut rel = f64::INFINITY;
    for _ in 0..4 {
        let r = &b - (&x - a * &x * dt);
        rel = r.amax() / bnorm;
        if rel <= tol {
            return Ok((x, rel));
        }
        x += chol.solve(&r);
    }
    // one-ulp-level floors are acceptable when the tolerance is below rounding
    if rel <= tol.max(1e-13) {
        return Ok((x, rel));
    }
    Err(LabError::LinearSolve {
        step,
        reason: format!("relative residual {rel:e} above tolerance {tol:e}"),
    })
}

/// Whether `lower ≤ upper` at every node and stored time, within `tol`.
/// Returns the largest violation `max(lower − upper)` alongside.
pub fn solutions_ordered(lower: &Solution, upper: &Solution, tol: f64) -> Result<(bool, f64)> {
    if !lower.grid().same_as(upper.grid()) || lower.times() != upper.times() {
        return Err(LabError::Mismatch("solutions use different discretizations".into()));
    }
    let worst = lower
        .field
        .fields()
        .iter()
        .zip(upper.field.fields())
        .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| x - y))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((worst <= tol, worst))
}

/// Solve both scenarios and check `u¹ ≤ u²` at every node and step (tolerance `1e−12`).
/// The scenarios must share kernel, grid and schedule.
pub fn comparison_check(lower: &Scenario, upper: &Scenario, options: &SolveOptions) -> Result<bool> {
    if lower.kernel != upper.kernel
        || !lower.grid.same_as(&upper.grid)
        || lower.t_start != upper.t_start
        || lower.t_end != upper.t_end
        || lower.schedule != upper.schedule
    {
        return Err(LabError::Mismatch(
            "comparison requires a shared kernel, grid and schedule".into(),
        ));
    }
    let a = solve(lower, options)?;
    let b = solve(upper, options)?;
    Ok(solutions_ordered(&a, &b, 1e-12)?.0)
}
