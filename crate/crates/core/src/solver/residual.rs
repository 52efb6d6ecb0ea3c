use serde::{Deserialize, Serialize};

use super::{Scenario, Solution};
use crate::discretization::{
    energy_form, DomainShape, EnergyRegion, ExteriorRule, Field, Grid, SourceRule, SpaceTimeField,
};
use crate::kernels::KernelSpec;
use crate::{LabError, Point, Result};

/// Weak-form residuals `|(∂ₜu, φ) + ½E(u, φ) − (f, φ)|` between consecutive
/// slices, evaluated at the trapezoidal time level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    /// Max over test functions, one entry per time interval.
    pub per_step: Vec<f64>,
    pub test_functions: usize,
}

/// Tensor bumps `Π_k (1 − ((x_k − c_k)/w)²)₊²` at five interior centers and two widths.
pub fn test_bumps(grid: &std::sync::Arc<Grid>) -> Result<Vec<Field>> {
    let x = grid.radius();
    let centers: Vec<Point> = if grid.dim() == 1 {
        [-0.5, -0.25, 0.0, 0.25, 0.5].iter().map(|&c| [c * x, 0.0]).collect()
    } else {
        let s = x / 3.0;
        vec![[0.0, 0.0], [s, 0.0], [-s, 0.0], [0.0, s], [0.0, -s]]
    };
    let mut out = Vec::new();
    for w in [x / 4.0, x / 8.0] {
        if w < 2.0 * grid.h() {
            continue;
        }
        for c in &centers {
            let dim = grid.dim();
            let (c, w) = (*c, w);
            let bump = move |p: &Point| {
                (0..dim)
                    .map(|k| {
                        let s = (p[k] - c[k]) / w;
                        if s.abs() < 1.0 {
                            (1.0 - s * s).powi(2)
                        } else {
                            0.0
                        }
                    })
                    .product::<f64>()
            };
            let field = Field::new(grid.clone(), 0.0, ExteriorRule::zero(), bump);
            debug_assert!(
                grid.shape() == DomainShape::Box
                    || (0..grid.n_nodes()).all(|i| grid.is_interior(i) || field.value(i) == 0.0)
            );
            out.push(field);
        }
    }
    if out.is_empty() {
        return Err(LabError::GridTooCoarse(
            "test bumps need at least two cells per width".into(),
        ));
    }
    Ok(out)
}

fn pairing(grid: &Grid, phi: &Field, values: impl Fn(usize) -> f64) -> f64 {
    grid.interior_nodes()
        .iter()
        .map(|&i| phi.value(i) * values(i))
        .sum::<f64>()
        * grid.cell_volume()
}

/// Residuals of an arbitrary space-time field against the weak formulation.
pub fn residual_of_fields(
    kernel: &KernelSpec,
    u: &SpaceTimeField,
    source: &SourceRule,
    bumps: &[Field],
) -> Result<ResidualReport> {
    let grid = u.grid().clone();
    let dim = grid.dim();
    let fields = u.fields();
    let mut per_step = Vec::with_capacity(fields.len().saturating_sub(1));
    let mut energies: Vec<Vec<f64>> = Vec::with_capacity(fields.len());
    for f in fields {
        let e = bumps
            .iter()
            .map(|phi| energy_form(kernel, &grid, f.time(), f, phi, EnergyRegion::FullCross))
            .collect::<Result<Vec<f64>>>()?;
        energies.push(e);
    }
    for n in 0..fields.len().saturating_sub(1) {
        let (a, b) = (&fields[n], &fields[n + 1]);
        let dt = b.time() - a.time();
        let worst = bumps
            .iter()
            .enumerate()
            .map(|(k, phi)| {
                let dudt = pairing(&grid, phi, |i| (b.value(i) - a.value(i)) / dt);
                let f = pairing(&grid, phi, |i| {
                    let x = grid.coord(i);
                    0.5 * (source.eval(dim, a.time(), &x) + source.eval(dim, b.time(), &x))
                });
                let e = 0.25 * (energies[n][k] + energies[n + 1][k]);
                (dudt + e - f).abs()
            })
            .fold(0.0, f64::max);
        per_step.push(worst);
    }
    Ok(ResidualReport {
        max: per_step.iter().copied().fold(0.0, f64::max),
        per_step,
        test_functions: bumps.len(),
    })
}

/// Weak residual of a computed solution.
pub fn residual_check(solution: &Solution, scenario: &Scenario) -> Result<ResidualReport> {
    let bumps = test_bumps(solution.grid())?;
    residual_of_fields(&solution.kernel, &solution.field, &scenario.source, &bumps)
}
