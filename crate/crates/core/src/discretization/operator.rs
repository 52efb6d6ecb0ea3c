use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::exterior::{ExteriorRule, ExteriorShape};
use super::field::Field;
use super::grid::{DomainShape, Grid};
use super::line::{LineData, ValueMap};
use super::weights::{far_weight_1d, far_weight_2d, OffsetTable};
use crate::kernels::{FracParams, KernelSpec};
use crate::{quad, LabError, Point, Result};

/// Discrete `L_t` at one time: the interior matrix `A` plus the total
/// exterior coupling of every interior row.
///
/// For interior values `u` and exterior data `g`,
/// `(L u)_i = Σ_j A_ij (u_j − u_i) + load_i(g) − ext_i · u_i`
/// where `load_i(g) = ∫_{exterior} K(t; x_i, y) g(y) dy` is integrated
/// cell by cell (plus the far field beyond the box) and `ext_i = load_i(1)`.
/// The diagonal of `A` is `−(Σ_{j≠i} A_ij + ext_i)`.
#[derive(Clone, Debug)]
pub struct Operator {
    spec: KernelSpec,
    grid: Arc<Grid>,
    time: f64,
    table: Arc<OffsetTable>,
    matrix: DMatrix<f64>,
    ext_total: Vec<f64>,
    far: Vec<f64>,
    far_coef: f64,
}

/// Assemble the absolutely-continuous operator at time `t`.
pub fn assemble_operator(spec: &KernelSpec, grid: &Arc<Grid>, t: f64) -> Result<Operator> {
    spec.validate()?;
    if spec.is_axes() {
        return Err(LabError::Structure(
            "axes-singular kernels are assembled with assemble_axes_operator".into(),
        ));
    }
    check_dims(spec.dim(), grid)?;
    let dim = grid.dim();
    let alpha = spec.alpha();
    let m = grid.half_count() as i64;
    let table = OffsetTable::get(dim, alpha, grid.h(), 2 * grid.half_count());
    let interior = grid.interior_nodes();
    let n = interior.len();
    let coef = &spec.coefficient;
    let uniform = coef.is_spatially_uniform();
    let a_far = coef.far_value(t);
    let b = grid.outer_extent();

    let rows: Vec<(Vec<f64>, f64, f64)> = interior
        .par_iter()
        .map(|&i| {
            let xi = grid.coord(i);
            let ki = grid.lattice(i);
            let mut row = vec![0.0; n];
            let mut interior_sum = 0.0;
            for (q, &j) in interior.iter().enumerate() {
                if j == i {
                    continue;
                }
                let kj = grid.lattice(j);
                let o = [kj[0] - ki[0], kj[1] - ki[1]];
                let w = coef.eval(dim, t, &xi, &grid.coord(j)) * table.weight(o);
                row[q] = w;
                interior_sum += w;
            }
            let ring = if uniform {
                let a = coef.eval(dim, t, &xi, &xi);
                let all = if dim == 1 {
                    (-m..=m).map(|k| table.weight([k - ki[0], 0])).sum::<f64>()
                } else {
                    table.window_sum(-m - ki[0], m - ki[0], -m - ki[1], m - ki[1])
                };
                (a * all - interior_sum).max(0.0)
            } else {
                let mut acc = 0.0;
                for j in 0..grid.n_nodes() {
                    if grid.is_interior(j) {
                        continue;
                    }
                    let kj = grid.lattice(j);
                    let o = [kj[0] - ki[0], kj[1] - ki[1]];
                    acc += coef.eval(dim, t, &xi, &grid.coord(j)) * table.weight(o);
                }
                acc
            };
            let far = a_far
                * if dim == 1 {
                    far_weight_1d(xi[0], b, alpha)
                } else {
                    far_weight_2d(xi, b, alpha)
                };
            (row, ring + far, far)
        })
        .collect();

    finish(spec.clone(), grid.clone(), t, table, rows, a_far)
}

/// Assemble the axes operator: the sum over coordinate directions of the 1D
/// `(2−α)`-normalized fractional operator acting along each grid line.
pub fn assemble_axes_operator(params: &FracParams, grid: &Arc<Grid>, t: f64) -> Result<Operator> {
    let spec = KernelSpec::axes(*params)?;
    check_dims(params.dim, grid)?;
    if grid.dim() == 1 {
        // a single direction: the fractional kernel itself
        let mut op = assemble_operator(
            &KernelSpec::new(*params, crate::kernels::CoefficientRule::constant(1.0))?,
            grid,
            t,
        )?;
        op.spec = spec;
        return Ok(op);
    }
    if grid.shape() != DomainShape::Box {
        return Err(LabError::Structure(
            "the axes operator needs a box domain so grid lines are node-aligned".into(),
        ));
    }
    let alpha = params.alpha;
    let m = grid.half_count() as i64;
    let table = OffsetTable::get(1, alpha, grid.h(), 2 * grid.half_count());
    let interior = grid.interior_nodes();
    let n = interior.len();
    let b = grid.outer_extent();

    let rows: Vec<(Vec<f64>, f64, f64)> = interior
        .par_iter()
        .map(|&i| {
            let xi = grid.coord(i);
            let ki = grid.lattice(i);
            let mut row = vec![0.0; n];
            let mut ring = 0.0;
            let mut far = 0.0;
            for axis in 0..2 {
                for k in -m..=m {
                    if k == ki[axis] {
                        continue;
                    }
                    let mut kj = ki;
                    kj[axis] = k;
                    let j = grid.index_of(kj).unwrap();
                    let w = table.weight([k - ki[axis], 0]);
                    match grid.interior_index(j) {
                        Some(q) => row[q] = w,
                        None => ring += w,
                    }
                }
                far += far_weight_1d(xi[axis], b, alpha);
            }
            (row, ring + far, far)
        })
        .collect();
    finish(spec, grid.clone(), t, table, rows, 1.0)
}

fn check_dims(dim: usize, grid: &Grid) -> Result<()> {
    if dim != grid.dim() {
        return Err(LabError::Mismatch(format!(
            "kernel dimension {dim} vs grid dimension {}",
            grid.dim()
        )));
    }
    Ok(())
}

fn finish(
    spec: KernelSpec,
    grid: Arc<Grid>,
    t: f64,
    table: Arc<OffsetTable>,
    rows: Vec<(Vec<f64>, f64, f64)>,
    far_coef: f64,
) -> Result<Operator> {
    let n = rows.len();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let mut ext_total = Vec::with_capacity(n);
    let mut far = Vec::with_capacity(n);
    for (p, (row, ext, fr)) in rows.into_iter().enumerate() {
        let mut off = 0.0;
        for (q, w) in row.into_iter().enumerate() {
            if q != p {
                // column p of a symmetric matrix is row p
                matrix[(q, p)] = w;
                off += w;
            }
        }
        matrix[(p, p)] = -(off + ext);
        ext_total.push(ext);
        far.push(fr);
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { step: 0 });
    }
    Ok(Operator {
        spec,
        grid,
        time: t,
        table,
        matrix,
        ext_total,
        far,
        far_coef,
    })
}

impl Operator {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// The interior matrix `A` (symmetric, nonnegative off-diagonal, negative diagonal).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Total exterior coupling `ext_i` of each interior row, far field included.
    pub fn ext_total(&self) -> &[f64] {
        &self.ext_total
    }

    /// Far-field part of `ext_i`.
    pub fn far(&self) -> &[f64] {
        &self.far
    }

    /// `max_i |A_ii|`.
    pub fn max_diagonal(&self) -> f64 {
        (0..self.matrix.nrows())
            .map(|i| self.matrix[(i, i)].abs())
            .fold(0.0, f64::max)
    }

    pub fn is_axes(&self) -> bool {
        self.spec.is_axes()
    }

    /// Pair weight between two lattice nodes (any two distinct nodes of the box).
    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let grid = &self.grid;
        let ki = grid.lattice(i);
        let kj = grid.lattice(j);
        let o = [kj[0] - ki[0], kj[1] - ki[1]];
        if self.is_axes() && grid.dim() == 2 {
            if o[0] == 0 {
                self.table.weight([o[1], 0])
            } else if o[1] == 0 {
                self.table.weight([o[0], 0])
            } else {
                0.0
            }
        } else {
            let (xi, xj) = (grid.coord(i), grid.coord(j));
            self.spec.coefficient_at(self.time, &xi, &xj) * self.table.weight(o)
        }
    }

    /// Exterior coupling weights of interior row `p` to ring nodes: `(node, weight)`.
    pub fn ring_weights(&self, p: usize) -> Vec<(usize, f64)> {
        let i = self.grid.interior_nodes()[p];
        (0..self.grid.n_nodes())
            .filter(|&j| !self.grid.is_interior(j))
            .map(|j| (j, self.pair_weight(i, j)))
            .filter(|&(_, w)| w != 0.0)
            .collect()
    }

    /// `(L u)_i` for interior values `u` and a precomputed exterior load.
    pub fn apply_with_load(&self, u: &[f64], load: &[f64]) -> Vec<f64> {
        let n = self.matrix.nrows();
        assert_eq!(u.len(), n);
        assert_eq!(load.len(), n);
        (0..n)
            .into_par_iter()
            .map(|p| {
                let col = self.matrix.column(p);
                let up = u[p];
                let mut acc = 0.0;
                for (q, &w) in col.iter().enumerate() {
                    if q != p && w != 0.0 {
                        acc += w * (u[q] - up);
                    }
                }
                acc + load[p] - self.ext_total[p] * up
            })
            .collect()
    }

    /// `(L u)(x_i)` at every interior node, with the field's exterior rule
    /// integrated exactly at the field's time.
    pub fn apply(&self, field: &Field) -> Result<Vec<f64>> {
        if !field.grid().same_as(&self.grid) {
            return Err(LabError::Mismatch("field and operator grids differ".into()));
        }
        let load = self.exterior_load(field.exterior(), field.time())?;
        Ok(self.apply_with_load(&field.interior_values(), &load))
    }

    /// `load_i(g(t))` for a whole rule.
    pub fn exterior_load(&self, rule: &ExteriorRule, t: f64) -> Result<Vec<f64>> {
        let mut load = vec![0.0; self.matrix.nrows()];
        for term in &rule.terms {
            let p = term.profile.eval(t);
            if p == 0.0 {
                continue;
            }
            let s = self.shape_load(&term.shape)?;
            for (l, v) in load.iter_mut().zip(s) {
                *l += p * v;
            }
        }
        Ok(load)
    }

    /// `load_i` of one spatial shape at unit time factor.
    pub fn shape_load(&self, shape: &ExteriorShape) -> Result<Vec<f64>> {
        if let ExteriorShape::Constant { value } = shape {
            return Ok(self.ext_total.iter().map(|e| value * e).collect());
        }
        let grid = &self.grid;
        if self.is_axes() && grid.dim() == 2 {
            return Ok(self.axes_shape_load(shape));
        }
        if grid.dim() == 1 {
            Ok(self.line_shape_load(shape))
        } else {
            self.plane_shape_load(shape)
        }
    }

    fn line_shape_load(&self, shape: &ExteriorShape) -> Vec<f64> {
        let grid = &self.grid;
        let alpha = self.spec.alpha();
        let norm = 2.0 - alpha;
        let h = grid.h();
        let data = LineData::new(vec![(1.0, shape.restrict_to_line(1, &[0.0, 0.0], 0))]);
        let (lo, hi) = grid.interior_span_on_line(0, 0).unwrap();
        let b = grid.outer_extent();
        let coef = &self.spec.coefficient;
        let uniform = coef.is_spatially_uniform();
        let m = grid.half_count() as i64;
        grid.interior_nodes()
            .par_iter()
            .map(|&i| {
                let xi = grid.coord(i);
                let x = xi[0];
                let ki = grid.lattice(i)[0];
                let mut acc = 0.0;
                if uniform {
                    let a = coef.eval(1, self.time, &xi, &xi);
                    acc += a
                        * norm
                        * (data.integrate(x, alpha, f64::NEG_INFINITY, lo, ValueMap::Signed)
                            + data.integrate(x, alpha, hi, f64::INFINITY, ValueMap::Signed));
                } else {
                    for k in -m..=m {
                        let j = grid.index_of([k, 0]).unwrap();
                        if grid.is_interior(j) {
                            continue;
                        }
                        let c = k as f64 * h;
                        let a = coef.eval(1, self.time, &xi, &[c, 0.0]);
                        acc += a * norm * data.integrate(x, alpha, c - 0.5 * h, c + 0.5 * h, ValueMap::Signed);
                    }
                    acc += self.far_coef
                        * norm
                        * (data.integrate(x, alpha, f64::NEG_INFINITY, -b, ValueMap::Signed)
                            + data.integrate(x, alpha, b, f64::INFINITY, ValueMap::Signed));
                }
                for dk in [-1i64, 1] {
                    if let Some(j) = grid.index_of([ki + dk, 0]) {
                        if !grid.is_interior(j) {
                            let xj = grid.coord(j);
                            let a = coef.eval(1, self.time, &xi, &xj);
                            acc += a * self.table.stencil() * shape.eval(1, &xj);
                        }
                    }
                }
                acc
            })
            .collect()
    }

    fn axes_shape_load(&self, shape: &ExteriorShape) -> Vec<f64> {
        let grid = &self.grid;
        let alpha = self.spec.alpha();
        let norm = 2.0 - alpha;
        grid.interior_nodes()
            .par_iter()
            .map(|&i| {
                let xi = grid.coord(i);
                let ki = grid.lattice(i);
                let mut acc = 0.0;
                for axis in 0..2 {
                    let data = LineData::new(vec![(1.0, shape.restrict_to_line(2, &xi, axis))]);
                    if data.is_zero() {
                        continue;
                    }
                    let (lo, hi) = grid.interior_span_on_line(axis, ki[1 - axis]).unwrap();
                    let x = xi[axis];
                    acc += norm
                        * (data.integrate(x, alpha, f64::NEG_INFINITY, lo, ValueMap::Signed)
                            + data.integrate(x, alpha, hi, f64::INFINITY, ValueMap::Signed));
                    for dk in [-1i64, 1] {
                        let mut kj = ki;
                        kj[axis] += dk;
                        if let Some(j) = grid.index_of(kj) {
                            if !grid.is_interior(j) {
                                acc += self.table.stencil() * shape.eval(2, &grid.coord(j));
                            }
                        }
                    }
                }
                acc
            })
            .collect()
    }

    fn plane_shape_load(&self, shape: &ExteriorShape) -> Result<Vec<f64>> {
        let grid = &self.grid;
        let alpha = self.spec.alpha();
        let norm = 2.0 - alpha;
        let h = grid.h();
        let b = grid.outer_extent();
        let m = grid.half_count() as i64;
        let far_value = match shape {
            ExteriorShape::Cosine { .. } => {
                return Err(LabError::Unsupported(
                    "cosine exterior data in two dimensions has no far-field closed form".into(),
                ))
            }
            ExteriorShape::Gaussian { center, sigma, .. } => {
                let gap = (0..2).map(|k| b - center[k].abs()).fold(f64::INFINITY, f64::min);
                if gap / sigma < 37.3 {
                    return Err(LabError::Unsupported(
                        "Gaussian exterior data must be negligible beyond the box".into(),
                    ));
                }
                0.0
            }
            _ => 0.0,
        };
        debug_assert_eq!(far_value, 0.0);
        // lattice window that can meet the support
        let (wlo, whi) = match shape {
            ExteriorShape::Annulus { outer, .. } => ([-*outer, -*outer], [*outer, *outer]),
            ExteriorShape::Ball { center, radius, .. } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            ExteriorShape::Gaussian { center, sigma, .. } => (
                [center[0] - 40.0 * sigma, center[1] - 40.0 * sigma],
                [center[0] + 40.0 * sigma, center[1] + 40.0 * sigma],
            ),
            _ => ([-b, -b], [b, b]),
        };
        let klo = |v: f64| (((v / h) - 1.0).floor() as i64).clamp(-m, m);
        let khi = |v: f64| (((v / h) + 1.0).ceil() as i64).clamp(-m, m);
        let (kx0, kx1, ky0, ky1) = (klo(wlo[0]), khi(whi[0]), klo(wlo[1]), khi(whi[1]));
        let coef = &self.spec.coefficient;
        Ok(grid
            .interior_nodes()
            .par_iter()
            .map(|&i| {
                let xi = grid.coord(i);
                let ki = grid.lattice(i);
                let mut acc = 0.0;
                for ky in ky0..=ky1 {
                    for kx in kx0..=kx1 {
                        let j = grid.index_of([kx, ky]).unwrap();
                        if grid.is_interior(j) {
                            continue;
                        }
                        let c = grid.coord(j);
                        let o = [kx - ki[0], ky - ki[1]];
                        let cell = match shape.uniform_on_square(2, &c, 0.5 * h) {
                            Some(v) if v == 0.0 => 0.0,
                            Some(v) => v * self.table.cell(o),
                            None => norm * adaptive_cell(&xi, &c, 0.5 * h, alpha, shape, ValueMap::Signed, 4),
                        };
                        let stencil = if OffsetTable::is_axis_neighbor(o) {
                            self.table.stencil() * shape.eval(2, &c)
                        } else {
                            0.0
                        };
                        if cell != 0.0 || stencil != 0.0 {
                            acc += coef.eval(2, self.time, &xi, &c) * (cell + stencil);
                        }
                    }
                }
                acc
            })
            .collect())
    }
}

/// `∫_{square} g(y) |x − y|^{−2−α} dy`, bisecting cells that are close to
/// `x` or that a jump of an indicator `g` crosses.
pub(crate) fn adaptive_cell(
    x: &Point,
    center: &Point,
    half: f64,
    alpha: f64,
    shape: &dyn PlaneData,
    map: ValueMap,
    depth: u32,
) -> f64 {
    let dist = (x[0] - center[0]).hypot(x[1] - center[1]) / half;
    let near = dist <= 6.0;
    let kernel = |y: [f64; 2]| ((x[0] - y[0]).hypot(x[1] - y[1])).powf(-2.0 - alpha);
    let uniform = shape.uniform_on_square(center, half);
    if let Some(v) = uniform {
        let v = map.apply(v);
        if v == 0.0 {
            return 0.0;
        }
        if !near || depth == 0 {
            return v * quad::integrate_square(4, *center, half, kernel);
        }
    } else if depth == 0 || (!near && !shape.is_piecewise_constant()) {
        return quad::integrate_square(4, *center, half, |y| map.apply(shape.eval(&y)) * kernel(y));
    }
    let q = 0.5 * half;
    [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
        .iter()
        .map(|s| {
            adaptive_cell(
                x,
                &[center[0] + s[0] * q, center[1] + s[1] * q],
                q,
                alpha,
                shape,
                map,
                depth - 1,
            )
        })
        .sum()
}

/// Two-dimensional data that cell quadrature can query.
pub(crate) trait PlaneData: Sync {
    fn eval(&self, y: &Point) -> f64;
    /// The constant value on the square `center ± half`, if it is constant there.
    fn uniform_on_square(&self, center: &Point, half: f64) -> Option<f64>;
    fn is_piecewise_constant(&self) -> bool;
}

impl PlaneData for ExteriorShape {
    fn eval(&self, y: &Point) -> f64 {
        ExteriorShape::eval(self, 2, y)
    }

    fn uniform_on_square(&self, center: &Point, half: f64) -> Option<f64> {
        ExteriorShape::uniform_on_square(self, 2, center, half)
    }

    fn is_piecewise_constant(&self) -> bool {
        ExteriorShape::is_piecewise_constant(self)
    }
}

/// A whole rule frozen at one time.
pub(crate) struct RuleAt<'a> {
    pub rule: &'a ExteriorRule,
    pub t: f64,
}

impl PlaneData for RuleAt<'_> {
    fn eval(&self, y: &Point) -> f64 {
        self.rule.eval(2, self.t, y)
    }

    fn uniform_on_square(&self, center: &Point, half: f64) -> Option<f64> {
        let mut total = 0.0;
        for term in &self.rule.terms {
            let p = term.profile.eval(self.t);
            if p != 0.0 {
                total += p * term.shape.uniform_on_square(2, center, half)?;
            }
        }
        Some(total)
    }

    fn is_piecewise_constant(&self) -> bool {
        self.rule.terms.iter().all(|t| t.shape.is_piecewise_constant())
    }
}
