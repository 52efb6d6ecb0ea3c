//! Sampled checks of the structural conditions on a kernel. Checkers report
//! measured constants and a verdict; a violated condition is not an error.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eval_kernel, CoefficientRule, KernelSpec};
use crate::discretization::{energy_form, EnergyRegion, ExteriorRule, Field, Grid};
use crate::{quad, sphere_measure, LabError, Point, Result};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Bounds,
    Symmetry,
    Cutoff,
    Ujs,
    Poincare,
    Sobolev,
}

/// Measured range of the checked quantity and the verdict against `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub min: f64,
    pub max: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
}

fn sample_time(rng: &mut ChaCha8Rng, coef: &CoefficientRule) -> f64 {
    let span = match coef {
        CoefficientRule::TimeOscillating { period, .. } => period.max(1.0),
        _ => 1.0,
    };
    rng.random_range(0.0..span)
}

fn sample_point(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Point {
    let mut p = [0.0; 2];
    for c in p.iter_mut().take(dim) {
        *c = rng.random_range(-half..half);
    }
    p
}

fn triples(spec: &KernelSpec, budget: usize, seed: u64) -> Vec<(f64, Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.dim();
    (0..budget)
        .map(|_| loop {
            let t = sample_time(&mut rng, &spec.coefficient);
            let x = sample_point(&mut rng, dim, 2.0);
            let y = sample_point(&mut rng, dim, 2.0);
            if crate::distance(dim, &x, &y) > 1e-6 {
                break (t, x, y);
            }
        })
        .collect()
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

/// Range of `K/((2−α)|x−y|^{−d−α})` over sampled `(t, x, y)`; passes iff it lies in `[λ, Λ]`.
pub fn check_bounds(spec: &KernelSpec, budget: usize, seed: u64) -> Result<ConditionReport> {
    spec.require_density()?;
    let p = spec.params;
    let ratios: Vec<f64> = triples(spec, budget, seed)
        .par_iter()
        .map(|(t, x, y)| {
            let k = eval_kernel(spec, *t, x, y).unwrap_or(f64::NAN);
            k / p.fractional_density(crate::distance(p.dim, x, y))
        })
        .collect();
    let (min, max) = min_max(&ratios);
    let tol = 1e-12;
    Ok(ConditionReport {
        condition: Condition::Bounds,
        min,
        max,
        threshold: p.big_lambda,
        pass: min >= p.lambda * (1.0 - tol) && max <= p.big_lambda * (1.0 + tol),
        samples: budget,
        seed,
    })
}

/// Max of `|K(t;x,y) − K(t;y,x)| / K(t;x,y)`; passes iff `≤ 1e−12`.
pub fn check_symmetry(spec: &KernelSpec, budget: usize, seed: u64) -> Result<ConditionReport> {
    spec.require_density()?;
    let devs: Vec<f64> = triples(spec, budget, seed)
        .par_iter()
        .map(|(t, x, y)| {
            let a = eval_kernel(spec, *t, x, y).unwrap_or(f64::NAN);
            let b = eval_kernel(spec, *t, y, x).unwrap_or(f64::NAN);
            (a - b).abs() / a
        })
        .collect();
    let (min, max) = min_max(&devs);
    Ok(ConditionReport {
        condition: Condition::Symmetry,
        min,
        max,
        threshold: 1e-12,
        pass: max <= 1e-12,
        samples: budget,
        seed,
    })
}

/// `∫_{R^d∖B_ρ(x)} K(t;x,y) dy`. Closed form for constant coefficients;
/// otherwise the radial variable is mapped to `u = (r/ρ)^{−α} ∈ (0, 1]` and
/// both `u` and the direction are integrated by composite Gauss rules.
pub fn cutoff_integral(spec: &KernelSpec, t: f64, x: &Point, rho: f64) -> Result<f64> {
    spec.require_density()?;
    let p = spec.params;
    let (d, alpha) = (p.dim, p.alpha);
    let norm = p.norm_factor();
    if let CoefficientRule::Constant { value } = spec.coefficient {
        return Ok(value * norm * sphere_measure(d) * rho.powf(-alpha) / alpha);
    }
    // ∫_ρ^∞ g(r) r^{−1−α} dr = ρ^{−α}/α ∫_0^1 g(ρ u^{−1/α}) du
    let radial = |dir: [f64; 2]| -> f64 {
        quad::integrate_composite(8, 64, 0.0, 1.0, |u| {
            let r = rho * u.max(1e-300).powf(-1.0 / alpha);
            let y = [x[0] + r * dir[0], x[1] + r * dir[1]];
            spec.coefficient_at(t, x, &y)
        }) * rho.powf(-alpha)
            / alpha
    };
    let total = if d == 1 {
        radial([1.0, 0.0]) + radial([-1.0, 0.0])
    } else {
        quad::integrate_composite(8, 32, 0.0, 2.0 * PI, |th| radial([th.cos(), th.sin()]))
    };
    Ok(norm * total)
}

/// `sup ρ^α ∫_{R^d∖B_ρ(x)} K` over the ρ-grid and sampled `(t, x)`. The threshold
/// is `Λ(2−α)ω/α`, the value for the coefficient frozen at `Λ`.
pub fn check_cutoff(spec: &KernelSpec, rho_grid: &[f64], budget: usize, seed: u64) -> Result<ConditionReport> {
    spec.require_density()?;
    if rho_grid.is_empty() {
        return Err(LabError::param("rho_grid", "must not be empty"));
    }
    if rho_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(LabError::param("rho_grid", "radii must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.dim();
    let points: Vec<(f64, Point, f64)> = (0..budget)
        .flat_map(|_| {
            let t = sample_time(&mut rng, &spec.coefficient);
            let x = sample_point(&mut rng, dim, 2.0);
            rho_grid.iter().map(move |&r| (t, x, r)).collect::<Vec<_>>()
        })
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|(t, x, r)| cutoff_integral(spec, *t, x, *r).map(|v| v * r.powf(spec.alpha())))
        .collect::<Result<_>>()?;
    let (min, max) = min_max(&values);
    let p = spec.params;
    let threshold = p.big_lambda * p.norm_factor() * sphere_measure(dim) / p.alpha;
    Ok(ConditionReport {
        condition: Condition::Cutoff,
        min,
        max,
        threshold,
        pass: max <= threshold * (1.0 + 1e-9),
        samples: points.len(),
        seed,
    })
}

/// `K(t;x,y) / ⨍_{B_r(x)} K(t;z,y) dz` with the ball average by quadrature.
pub fn ujs_ratio(spec: &KernelSpec, t: f64, x: &Point, y: &Point, r: f64) -> Result<f64> {
    let k = eval_kernel(spec, t, x, y)?;
    let dim = spec.dim();
    if r <= 0.0 || crate::distance(dim, x, y) <= r {
        return Err(LabError::param("r", "need 0 < r < |x − y|"));
    }
    let kz = |z: Point| eval_kernel(spec, t, &z, y).unwrap_or(0.0);
    let avg = if dim == 1 {
        quad::integrate_composite(8, 16, x[0] - r, x[0] + r, |z| kz([z, 0.0])) / (2.0 * r)
    } else {
        quad::integrate_composite(8, 8, 0.0, r, |rho| {
            rho * quad::integrate_composite(8, 16, 0.0, 2.0 * PI, |th| {
                kz([x[0] + rho * th.cos(), x[1] + rho * th.sin()])
            })
        }) / (PI * r * r)
    };
    Ok(k / avg)
}

/// UJS with the default ceiling `Λ/λ · 4^{d+α}`.
pub fn check_ujs(spec: &KernelSpec, budget: usize, seed: u64) -> Result<ConditionReport> {
    let p = spec.params;
    let ceiling = p.big_lambda / p.lambda * 4f64.powf(p.dim as f64 + p.alpha);
    check_ujs_with_ceiling(spec, budget, seed, ceiling)
}

/// Max over sampled `(t, x, y)` of the UJS ratio at `r = min(1/4, |x−y|/4)`;
/// passes iff finite and at most `ceiling`.
pub fn check_ujs_with_ceiling(spec: &KernelSpec, budget: usize, seed: u64, ceiling: f64) -> Result<ConditionReport> {
    spec.require_density()?;
    let samples = triples(spec, budget, seed);
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|(t, x, y)| {
            let r = (0.25f64).min(crate::distance(spec.dim(), x, y) / 4.0);
            ujs_ratio(spec, *t, x, y, r).unwrap_or(f64::INFINITY)
        })
        .collect();
    let (min, max) = min_max(&ratios);
    Ok(ConditionReport {
        condition: Condition::Ujs,
        min,
        max,
        threshold: ceiling,
        pass: max.is_finite() && max <= ceiling,
        samples: budget,
        seed,
    })
}

/// Poincaré and Sobolev constants measured on random discrete fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincSobReport {
    pub poincare: ConditionReport,
    pub sobolev: ConditionReport,
    /// Ball radius `r` and collar `ρ` of the test.
    pub r: f64,
    pub rho: f64,
    /// Exponent `d/(d−α)` of the Sobolev norm (infinite for `α ≥ d`).
    pub sobolev_exponent: f64,
}

/// Ratio `r^α E_{B_r}(v,v) / ∫_{B_r}(v − [v]_{B_r})²`; `None` for constant fields.
pub fn poincare_ratio(spec: &KernelSpec, grid: &Grid, t: f64, v: &Field, r: f64) -> Result<Option<f64>> {
    let nodes = grid.nodes_in_ball(&[0.0, 0.0], r);
    let mean = nodes.iter().map(|&i| v.value(i)).sum::<f64>() / nodes.len() as f64;
    let var = nodes.iter().map(|&i| (v.value(i) - mean).powi(2)).sum::<f64>() * grid.cell_volume();
    if var <= 1e-300 {
        return Ok(None);
    }
    let e = energy_form(
        spec,
        grid,
        t,
        v,
        v,
        EnergyRegion::Ball {
            center: [0.0, 0.0],
            radius: r,
        },
    )?;
    Ok(Some(r.powf(spec.alpha()) * e / var))
}

/// Ratio `(E_{B_{r+ρ}}(v,v) + ρ^{−α}‖v²‖_{L¹(B_{r+ρ})}) / ‖v²‖_{L^q(B_r)}`, `q = d/(d−α)`.
pub fn sobolev_ratio(spec: &KernelSpec, grid: &Grid, t: f64, v: &Field, r: f64, rho: f64) -> Result<Option<f64>> {
    let (d, alpha) = (spec.dim() as f64, spec.alpha());
    let inner = grid.nodes_in_ball(&[0.0, 0.0], r);
    let outer = grid.nodes_in_ball(&[0.0, 0.0], r + rho);
    let vol = grid.cell_volume();
    let lq = if alpha < d {
        let q = d / (d - alpha);
        (inner.iter().map(|&i| v.value(i).powi(2).powf(q)).sum::<f64>() * vol).powf(1.0 / q)
    } else {
        inner.iter().map(|&i| v.value(i).powi(2)).fold(0.0, f64::max)
    };
    if lq <= 1e-300 {
        return Ok(None);
    }
    let l1 = outer.iter().map(|&i| v.value(i).powi(2)).sum::<f64>() * vol;
    let e = energy_form(
        spec,
        grid,
        t,
        v,
        v,
        EnergyRegion::Ball {
            center: [0.0, 0.0],
            radius: r + rho,
        },
    )?;
    Ok(Some((e + rho.powf(-alpha) * l1) / lq))
}

/// Smallest admissible Poincaré and Sobolev constants over `n_fields` random
/// fields on `B_r`, `r = X_Ω/2`, `ρ = r/2`. Half of the fields are white
/// noise, half are random combinations of a few low modes.
pub fn check_poinc_sob(
    spec: &KernelSpec,
    grid: &std::sync::Arc<Grid>,
    n_fields: usize,
    seed: u64,
) -> Result<PoincSobReport> {
    spec.require_density()?;
    let r = 0.5 * grid.radius();
    let rho = 0.5 * r;
    if 2.0 * r / grid.h() < 8.0 {
        return Err(LabError::GridTooCoarse(format!(
            "B_r with r = {r} needs at least 8 nodes per dimension"
        )));
    }
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = Vec::with_capacity(n_fields);
    for k in 0..n_fields {
        let t = sample_time(&mut rng, &spec.coefficient);
        let field = if k % 2 == 0 {
            let vals: Vec<f64> = (0..grid.n_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
            Field::new(grid.clone(), t, ExteriorRule::zero(), |x| {
                let idx = node_at(grid, x);
                vals[idx]
            })
        } else {
            let modes: Vec<(f64, f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.5..4.0) * PI / r,
                        rng.random_range(0.0..2.0 * PI),
                        rng.random_range(0.0..PI),
                    )
                })
                .collect();
            Field::new(grid.clone(), t, ExteriorRule::zero(), move |x| {
                modes
                    .iter()
                    .map(|&(a, w, ph, dir)| {
                        let s = if dim == 1 {
                            x[0]
                        } else {
                            x[0] * dir.cos() + x[1] * dir.sin()
                        };
                        a * (w * s + ph).cos()
                    })
                    .sum()
            })
        };
        fields.push(field);
    }
    let pairs: Vec<(Option<f64>, Option<f64>)> = fields
        .par_iter()
        .map(|v| {
            Ok((
                poincare_ratio(spec, grid, v.time(), v, r)?,
                sobolev_ratio(spec, grid, v.time(), v, r, rho)?,
            ))
        })
        .collect::<Result<_>>()?;
    let p_vals: Vec<f64> = pairs.iter().filter_map(|p| p.0).collect();
    let s_vals: Vec<f64> = pairs.iter().filter_map(|p| p.1).collect();
    let report = |condition, vals: &[f64]| {
        let (min, max) = if vals.is_empty() {
            (f64::INFINITY, f64::INFINITY)
        } else {
            min_max(vals)
        };
        ConditionReport {
            condition,
            min,
            max,
            threshold: 0.0,
            pass: min > 0.0 && min.is_finite(),
            samples: vals.len(),
            seed,
        }
    };
    let d = dim as f64;
    Ok(PoincSobReport {
        poincare: report(Condition::Poincare, &p_vals),
        sobolev: report(Condition::Sobolev, &s_vals),
        r,
        rho,
        sobolev_exponent: if spec.alpha() < d {
            d / (d - spec.alpha())
        } else {
            f64::INFINITY
        },
    })
}

fn node_at(grid: &Grid, x: &Point) -> usize {
    let h = grid.h();
    let k = [(x[0] / h).round() as i64, (x[1] / h).round() as i64];
    grid.index_of(k).expect("node inside the box")
}
