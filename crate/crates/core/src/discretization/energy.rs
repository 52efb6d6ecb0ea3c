use std::sync::Arc;

use rayon::prelude::*;

use super::field::Field;
use super::grid::Grid;
use super::weights::{far_weight_1d, far_weight_2d, OffsetTable};
use crate::kernels::{CoefficientRule, FracParams, KernelSpec};
use crate::{quad, LabError, Point, Result};

/// Integration region of an energy form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyRegion {
    /// `(Ω × R^d) ∪ (R^d × Ω)`, truncated at the box plus the far field.
    FullCross,
    /// `B × B` for the ball `B_radius(center)`.
    Ball { center: Point, radius: f64 },
}

/// Pair weights `a(t,x_i,x_j)·w(x_j − x_i)` with `w` from the offset table.
struct Pairs<'a> {
    grid: &'a Grid,
    table: Arc<OffsetTable>,
    coef: Option<&'a CoefficientRule>,
    t: f64,
}

impl<'a> Pairs<'a> {
    fn new(grid: &'a Grid, alpha: f64, coef: Option<&'a CoefficientRule>, t: f64) -> Self {
        Pairs {
            grid,
            table: OffsetTable::get(grid.dim(), alpha, grid.h(), 2 * grid.half_count()),
            coef,
            t,
        }
    }

    #[inline]
    fn weight(&self, i: usize, j: usize) -> f64 {
        let ki = self.grid.lattice(i);
        let kj = self.grid.lattice(j);
        let w = self.table.weight([kj[0] - ki[0], kj[1] - ki[1]]);
        match self.coef {
            None => w,
            Some(c) => c.eval(self.grid.dim(), self.t, &self.grid.coord(i), &self.grid.coord(j)) * w,
        }
    }

    fn far(&self, x: &Point, alpha: f64) -> f64 {
        let b = self.grid.outer_extent();
        let a = self.coef.map_or(1.0, |c| c.far_value(self.t));
        a * if self.grid.dim() == 1 {
            far_weight_1d(x[0], b, alpha)
        } else {
            far_weight_2d(*x, b, alpha)
        }
    }
}

fn check_fields(grid: &Grid, u: &Field, v: &Field) -> Result<()> {
    if !u.grid().same_as(grid) || !v.grid().same_as(grid) {
        return Err(LabError::Mismatch("fields must live on the given grid".into()));
    }
    Ok(())
}

fn far_value(field: &Field, grid: &Grid) -> Result<f64> {
    field
        .exterior()
        .far_constant(grid.dim(), grid.outer_extent(), field.time())
        .ok_or_else(|| LabError::Unsupported("energy far field needs a rule that is constant beyond the box".into()))
}

/// `E_M(u, v) = h^d Σ_{(i,j) ∈ M} W_ij (u_i − u_j)(v_i − v_j)` over ordered
/// node pairs, with cell-exact weights `W_ij` (the central-cell stencil
/// included for axis neighbours). For the full cross region the pairs with
/// one node beyond the box use the far-field constant of each rule.
///
/// With zero exterior data, `h^d · uᵀ(−A)u = ½ E_full(u, u)`.
pub fn energy_form(spec: &KernelSpec, grid: &Grid, t: f64, u: &Field, v: &Field, region: EnergyRegion) -> Result<f64> {
    spec.require_density()?;
    check_fields(grid, u, v)?;
    let pairs = Pairs::new(grid, spec.alpha(), Some(&spec.coefficient), t);
    double_sum(&pairs, grid, spec.alpha(), u, v, region)
}

fn double_sum(pairs: &Pairs, grid: &Grid, alpha: f64, u: &Field, v: &Field, region: EnergyRegion) -> Result<f64> {
    let (uv, vv) = (u.values(), v.values());
    let sum = match region {
        EnergyRegion::FullCross => {
            let (cu, cv) = (far_value(u, grid)?, far_value(v, grid)?);
            crate::ordered_sum(grid.interior_nodes().par_iter().map(|&i| {
                let mut acc = 0.0;
                for j in 0..grid.n_nodes() {
                    if j == i {
                        continue;
                    }
                    let du = uv[i] - uv[j];
                    let dv = vv[i] - vv[j];
                    if du == 0.0 || dv == 0.0 {
                        continue;
                    }
                    let w = pairs.weight(i, j);
                    // ring pairs occur once in this loop but twice in M
                    let mult = if grid.is_interior(j) { 1.0 } else { 2.0 };
                    acc += mult * w * du * dv;
                }
                let x = grid.coord(i);
                acc + 2.0 * pairs.far(&x, alpha) * (uv[i] - cu) * (vv[i] - cv)
            }))
        }
        EnergyRegion::Ball { center, radius } => {
            let nodes = grid.nodes_in_ball(&center, radius);
            crate::ordered_sum(nodes.par_iter().map(|&i| {
                nodes
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| pairs.weight(i, j) * (uv[i] - uv[j]) * (vv[i] - vv[j]))
                    .sum::<f64>()
            }))
        }
    };
    Ok(grid.cell_volume() * sum)
}

/// `[v]_{V^{α/2}(B|R^d)}`: `(2−α)∫_B∫_{R^d} (v(x)−v(y))² |x−y|^{−d−α}`, with
/// `y` over all lattice nodes plus the far field of the rule.
pub fn seminorm_v(v: &Field, params: &FracParams, grid: &Grid, center: &Point, radius: f64) -> Result<f64> {
    let nodes = resolve_ball(grid, center, radius)?;
    let pairs = Pairs::new(grid, params.alpha, None, 0.0);
    let c = far_value(v, grid)?;
    let vals = v.values();
    let s = crate::ordered_sum(nodes.par_iter().map(|&i| {
        let mut acc = 0.0;
        for j in 0..grid.n_nodes() {
            if j != i {
                let d = vals[i] - vals[j];
                if d != 0.0 {
                    acc += pairs.weight(i, j) * d * d;
                }
            }
        }
        let d = vals[i] - c;
        acc + pairs.far(&grid.coord(i), params.alpha) * d * d
    }));
    Ok((grid.cell_volume() * s).sqrt())
}

/// `[v]_{H^{α/2}(B)}`: both variables restricted to the nodes of `B`.
pub fn seminorm_h(v: &Field, params: &FracParams, grid: &Grid, center: &Point, radius: f64) -> Result<f64> {
    resolve_ball(grid, center, radius)?;
    let pairs = Pairs::new(grid, params.alpha, None, 0.0);
    let e = double_sum(
        &pairs,
        grid,
        params.alpha,
        v,
        v,
        EnergyRegion::Ball {
            center: *center,
            radius,
        },
    )?;
    Ok(e.sqrt())
}

/// `‖v‖²_{V^{α/2}(B|R^d)} = ‖v‖²_{L²(B)} + [v]²_{V^{α/2}(B|R^d)}`.
pub fn norm_v_squared(v: &Field, params: &FracParams, grid: &Grid, center: &Point, radius: f64) -> Result<f64> {
    let nodes = resolve_ball(grid, center, radius)?;
    let l2: f64 = nodes.iter().map(|&i| v.value(i).powi(2)).sum::<f64>() * grid.cell_volume();
    Ok(l2 + seminorm_v(v, params, grid, center, radius)?.powi(2))
}

fn resolve_ball(grid: &Grid, center: &Point, radius: f64) -> Result<Vec<usize>> {
    let across = 2.0 * radius / grid.h();
    if across < 4.0 {
        return Err(LabError::GridTooCoarse(format!(
            "ball of radius {radius} spans {across:.1} < 4 cells"
        )));
    }
    Ok(grid.nodes_in_ball(center, radius))
}

/// `‖v‖_{L¹_α} = ∫ |v(x)| (1+|x|)^{−d−α} dx`: node values on their cells plus
/// the far-field constant of the rule.
pub fn norm_l1alpha(v: &Field, params: &FracParams, grid: &Grid) -> Result<f64> {
    let alpha = params.alpha;
    let h = grid.h();
    let dim = grid.dim();
    let c = far_value(v, grid)?.abs();
    let b = grid.outer_extent();
    let cells = crate::ordered_sum((0..grid.n_nodes()).into_par_iter().map(|j| {
        let val = v.value(j).abs();
        if val == 0.0 {
            return 0.0;
        }
        let x = grid.coord(j);
        let w = if dim == 1 {
            quad::weight_l1alpha_interval(x[0] - 0.5 * h, x[0] + 0.5 * h, alpha)
        } else {
            quad::integrate_square(4, x, 0.5 * h, |y| (1.0 + y[0].hypot(y[1])).powf(-2.0 - alpha))
        };
        val * w
    }));
    let far = if dim == 1 {
        2.0 * (1.0 + b).powf(-alpha) / alpha
    } else {
        // ∫_{r_S}^∞ (1+r)^{−2−α} r dr in closed form
        quad::square_exit_integral([0.0, 0.0], b, |r| {
            let s = 1.0 + r;
            s.powf(-alpha) / alpha - s.powf(-1.0 - alpha) / (1.0 + alpha)
        })
    };
    Ok(cells + c * far)
}
