use serde::{Deserialize, Serialize};

use crate::{norm, LabError, Point, Result};

/// Shape of the interior domain Ω, centered at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainShape {
    Ball,
    Box,
}

/// Parameters of a [`Grid`]; the serialized form used by configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub shape: DomainShape,
    /// Radius (ball) or half-width (box) `X_Ω`.
    pub radius: f64,
    /// Half-width `R_trunc` of the computational box.
    pub r_trunc: f64,
    pub h: f64,
}

/// Uniform lattice `h·k`, `|k_i| ≤ m`, on the box `[−R_trunc, R_trunc]^d`.
///
/// Nodes strictly inside Ω are interior; all other lattice nodes form the
/// exterior ring. Each node owns the cell `x ± h/2`. In two dimensions the
/// node index is `k_y·side + k_x` with `k` shifted to `0..side`.
#[derive(Clone, Debug)]
pub struct Grid {
    spec: GridSpec,
    m: usize,
    side: usize,
    interior: Vec<usize>,
    interior_pos: Vec<usize>,
}

const NOT_INTERIOR: usize = usize::MAX;

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec {
            dim,
            radius,
            r_trunc,
            h,
            ..
        } = spec;
        if !(dim == 1 || dim == 2) {
            return Err(LabError::param("grid.dim", "must be 1 or 2"));
        }
        if !(radius > 0.0 && h > 0.0) {
            return Err(LabError::param("grid", "radius and h must be positive"));
        }
        if h >= radius {
            return Err(LabError::GridTooCoarse(format!(
                "h = {h} must be smaller than the domain radius {radius}"
            )));
        }
        if r_trunc < 3.0 * radius * (1.0 - 1e-12) {
            return Err(LabError::param(
                "grid.r_trunc",
                format!("must be at least 3·radius = {}", 3.0 * radius),
            ));
        }
        let mf = r_trunc / h;
        let m = mf.round();
        if (mf - m).abs() > 1e-8 * mf.max(1.0) {
            return Err(LabError::param(
                "grid.r_trunc",
                format!("must be an integer multiple of h (r_trunc/h = {mf})"),
            ));
        }
        let m = m as usize;
        let side = 2 * m + 1;
        let n = side.pow(dim as u32);
        let mut interior = Vec::new();
        let mut interior_pos = vec![NOT_INTERIOR; n];
        let mut grid = Grid {
            spec,
            m,
            side,
            interior: Vec::new(),
            interior_pos: Vec::new(),
        };
        for idx in 0..n {
            if grid.inside_domain(&grid.coord(idx)) {
                interior_pos[idx] = interior.len();
                interior.push(idx);
            }
        }
        if interior.is_empty() {
            return Err(LabError::GridTooCoarse("no interior nodes".into()));
        }
        grid.interior = interior;
        grid.interior_pos = interior_pos;
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn radius(&self) -> f64 {
        self.spec.radius
    }

    pub fn shape(&self) -> DomainShape {
        self.spec.shape
    }

    pub fn r_trunc(&self) -> f64 {
        self.spec.r_trunc
    }

    /// Half-width of the union of all cells, `R_trunc + h/2`; beyond it lies the far field.
    pub fn outer_extent(&self) -> f64 {
        self.m as f64 * self.spec.h + 0.5 * self.spec.h
    }

    /// Lattice half-count `m = R_trunc / h`.
    pub fn half_count(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn n_nodes(&self) -> usize {
        self.side.pow(self.spec.dim as u32)
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spec.h.powi(self.spec.dim as i32)
    }

    /// Whether `x` lies strictly inside Ω (with a tolerance far below `h`).
    pub fn inside_domain(&self, x: &Point) -> bool {
        let tol = 1e-9 * self.spec.h;
        match self.spec.shape {
            DomainShape::Ball => norm(self.spec.dim, x) < self.spec.radius - tol,
            DomainShape::Box => (0..self.spec.dim).all(|k| x[k].abs() < self.spec.radius - tol),
        }
    }

    /// Signed lattice coordinates of a node.
    #[inline]
    pub fn lattice(&self, idx: usize) -> [i64; 2] {
        let m = self.m as i64;
        if self.spec.dim == 1 {
            [idx as i64 - m, 0]
        } else {
            [(idx % self.side) as i64 - m, (idx / self.side) as i64 - m]
        }
    }

    /// Node index of signed lattice coordinates, if inside the box.
    #[inline]
    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        let m = self.m as i64;
        let in_range = |v: i64| v >= -m && v <= m;
        if self.spec.dim == 1 {
            in_range(k[0]).then(|| (k[0] + m) as usize)
        } else if in_range(k[0]) && in_range(k[1]) {
            Some((k[1] + m) as usize * self.side + (k[0] + m) as usize)
        } else {
            None
        }
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> Point {
        let k = self.lattice(idx);
        [k[0] as f64 * self.spec.h, k[1] as f64 * self.spec.h]
    }

    pub fn coords(&self) -> Vec<Point> {
        (0..self.n_nodes()).map(|i| self.coord(i)).collect()
    }

    /// Node indices of the interior nodes, in interior ordering.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        self.interior_pos[idx] != NOT_INTERIOR
    }

    /// Position of a node in the interior ordering.
    #[inline]
    pub fn interior_index(&self, idx: usize) -> Option<usize> {
        let p = self.interior_pos[idx];
        (p != NOT_INTERIOR).then_some(p)
    }

    /// Nodes whose centers lie strictly inside `B_r(center)`.
    pub fn nodes_in_ball(&self, center: &Point, r: f64) -> Vec<usize> {
        let tol = 1e-9 * self.spec.h;
        let h = self.spec.h;
        let m = self.m as i64;
        let lo = |c: f64| (((c - r) / h).floor() as i64).max(-m);
        let hi = |c: f64| (((c + r) / h).ceil() as i64).min(m);
        let mut out = Vec::new();
        if self.spec.dim == 1 {
            for k in lo(center[0])..=hi(center[0]) {
                let idx = self.index_of([k, 0]).unwrap();
                if (self.coord(idx)[0] - center[0]).abs() < r - tol {
                    out.push(idx);
                }
            }
        } else {
            for ky in lo(center[1])..=hi(center[1]) {
                for kx in lo(center[0])..=hi(center[0]) {
                    let idx = self.index_of([kx, ky]).unwrap();
                    let x = self.coord(idx);
                    if (x[0] - center[0]).hypot(x[1] - center[1]) < r - tol {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }

    /// Whether the closed ball `B_r(center)` lies inside the closure of Ω.
    pub fn ball_inside_domain(&self, center: &Point, r: f64) -> bool {
        let slack = 1e-9 * self.spec.h;
        match self.spec.shape {
            DomainShape::Ball => norm(self.spec.dim, center) + r <= self.spec.radius + slack,
            DomainShape::Box => (0..self.spec.dim).all(|k| center[k].abs() + r <= self.spec.radius + slack),
        }
    }

    /// Whether `B_r(center)` lies inside the lattice box `[−R_trunc, R_trunc]^d`.
    pub fn ball_inside_box(&self, center: &Point, r: f64) -> bool {
        (0..self.spec.dim).all(|k| center[k].abs() + r <= self.spec.r_trunc * (1.0 + 1e-12))
    }

    /// One-dimensional interior cell extent: the union of interior cells along
    /// the line through lattice row/column `k_perp` in direction `axis` is
    /// `[lo, hi]`; `None` if the line meets no interior node.
    pub(crate) fn interior_span_on_line(&self, axis: usize, k_perp: i64) -> Option<(f64, f64)> {
        let h = self.spec.h;
        let m = self.m as i64;
        let mut lo = None;
        let mut hi = None;
        for k in -m..=m {
            let lat = if self.spec.dim == 1 {
                [k, 0]
            } else if axis == 0 {
                [k, k_perp]
            } else {
                [k_perp, k]
            };
            let idx = self.index_of(lat)?;
            if self.is_interior(idx) {
                if lo.is_none() {
                    lo = Some(k);
                }
                hi = Some(k);
            }
        }
        match (lo, hi) {
            (Some(a), Some(b)) => Some((a as f64 * h - 0.5 * h, b as f64 * h + 0.5 * h)),
            _ => None,
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.spec == other.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dim: usize, shape: DomainShape) -> GridSpec {
        GridSpec {
            dim,
            shape,
            radius: 1.0,
            r_trunc: 3.0,
            h: 0.25,
        }
    }

    #[test]
    fn one_dimensional_classification() {
        let g = Grid::new(spec(1, DomainShape::Ball)).unwrap();
        assert_eq!(g.n_nodes(), 25);
        // nodes at ±1 are on the boundary, hence exterior
        assert_eq!(g.n_interior(), 7);
        assert_eq!(g.interior_span_on_line(0, 0), Some((-0.875, 0.875)));
    }

    #[test]
    fn two_dimensional_indexing_round_trips() {
        let g = Grid::new(spec(2, DomainShape::Box)).unwrap();
        for idx in [0, 7, 300, g.n_nodes() - 1] {
            assert_eq!(g.index_of(g.lattice(idx)), Some(idx));
        }
        assert_eq!(g.n_interior(), 49);
        let ball = Grid::new(spec(2, DomainShape::Ball)).unwrap();
        assert!(ball.n_interior() < 49);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut s = spec(1, DomainShape::Ball);
        s.r_trunc = 2.0;
        assert!(Grid::new(s).is_err());
        s.r_trunc = 3.1;
        assert!(Grid::new(s).is_err());
        let mut s = spec(1, DomainShape::Ball);
        s.h = 1.0;
        assert!(matches!(Grid::new(s), Err(LabError::GridTooCoarse(_))));
    }

    #[test]
    fn ball_query_is_strict() {
        let g = Grid::new(spec(1, DomainShape::Ball)).unwrap();
        assert_eq!(g.nodes_in_ball(&[0.0, 0.0], 0.5).len(), 3);
    }
}
