use std::sync::Arc;

use super::exterior::ExteriorRule;
use super::grid::Grid;
use crate::{LabError, Point, Result};

/// Node values of a function at one time, with the exterior rule that
/// extends it beyond the grid. Ring values are samples of the rule.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    time: f64,
    values: Vec<f64>,
    exterior: ExteriorRule,
}

impl Field {
    /// Interior values from `interior`, ring values from `exterior` at time `t`.
    pub fn new(grid: Arc<Grid>, t: f64, exterior: ExteriorRule, interior: impl Fn(&Point) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.n_nodes())
            .map(|idx| {
                let x = grid.coord(idx);
                if grid.is_interior(idx) {
                    interior(&x)
                } else {
                    exterior.eval(dim, t, &x)
                }
            })
            .collect();
        Field {
            grid,
            time: t,
            values,
            exterior,
        }
    }

    /// Interior values in interior ordering.
    pub fn from_interior(grid: Arc<Grid>, t: f64, exterior: ExteriorRule, interior: &[f64]) -> Result<Self> {
        if interior.len() != grid.n_interior() {
            return Err(LabError::Mismatch(format!(
                "{} interior values for {} interior nodes",
                interior.len(),
                grid.n_interior()
            )));
        }
        let mut field = Field::new(grid, t, exterior, |_| 0.0);
        for (pos, &idx) in field.grid.interior_nodes().iter().enumerate() {
            field.values[idx] = interior[pos];
        }
        Ok(field)
    }

    /// The constant `c` everywhere, with the constant exterior rule.
    pub fn constant(grid: Arc<Grid>, t: f64, c: f64) -> Self {
        Field::new(grid, t, ExteriorRule::constant(c), |_| c)
    }

    /// A field defined by one function on all of `R^d`; the exterior rule must agree with it.
    pub fn from_rule(grid: Arc<Grid>, t: f64, rule: ExteriorRule) -> Self {
        let dim = grid.dim();
        let r = rule.clone();
        Field::new(grid, t, rule, move |x| r.eval(dim, t, x))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Values over all lattice nodes (length = node count).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> &ExteriorRule {
        &self.exterior
    }

    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.grid.interior_nodes().iter().map(|&i| self.values[i]).collect()
    }

    pub fn set_interior(&mut self, interior: &[f64]) -> Result<()> {
        if interior.len() != self.grid.n_interior() {
            return Err(LabError::Mismatch("interior length".into()));
        }
        for (pos, &idx) in self.grid.interior_nodes().iter().enumerate() {
            self.values[idx] = interior[pos];
        }
        Ok(())
    }

    /// Maximum of `|v|` over all nodes.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

// relative, with an absolute floor far below the finest dyadic time the schedules insert
pub(crate) fn time_tol(t: f64) -> f64 {
    1e-10 * t.abs() + 1e-15
}

/// Fields on one grid at strictly increasing times.
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(fields: Vec<Field>) -> Result<Self> {
        if fields.is_empty() {
            return Err(LabError::EmptyResolution("space-time field without slices".into()));
        }
        let grid = fields[0].grid().clone();
        for w in fields.windows(2) {
            if !(w[1].time() > w[0].time()) {
                return Err(LabError::param("times", "must be strictly increasing"));
            }
        }
        if fields.iter().any(|f| !f.grid().same_as(&grid)) {
            return Err(LabError::Mismatch("all slices must share one grid".into()));
        }
        Ok(SpaceTimeField {
            times: fields.iter().map(Field::time).collect(),
            fields,
        })
    }

    /// Slices `f(t_k)` built from one closure.
    pub fn from_fn(times: &[f64], mut f: impl FnMut(f64) -> Field) -> Result<Self> {
        Self::new(times.iter().map(|&t| f(t)).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Indices of the slices with `a < t < b` (strict, with a relative tolerance).
    pub fn indices_strictly_within(&self, a: f64, b: f64) -> Vec<usize> {
        self.times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > a + time_tol(a) && t < b - time_tol(b))
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the slice at time `t`, if one exists within tolerance.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= time_tol(t))
    }

    /// Whether `[a, b]` is covered by the time grid.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        a >= self.first_time() - time_tol(a) && b <= self.last_time() + time_tol(b) && a <= b
    }
}
