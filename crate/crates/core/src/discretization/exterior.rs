use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::line::Shape1D;
use crate::{distance, norm, LabError, Point, Result};

/// Scalar time factor multiplying a spatial shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeProfile {
    #[default]
    One,
    Linear {
        slope: f64,
        intercept: f64,
    },
    /// 1 for `t ≥ onset`, 0 before.
    Step {
        onset: f64,
    },
    /// `(ln t)^{−2}` on `(0, 1)`, 0 for `t ≤ 0`.
    LogInvSquare,
    /// `−2 (ln t)^{−3} / t` on `(0, 1)`, 0 for `t ≤ 0`.
    LogInvSquareDerivative,
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::One => 1.0,
            TimeProfile::Linear { slope, intercept } => slope * t + intercept,
            TimeProfile::Step { onset } => {
                if t >= onset {
                    1.0
                } else {
                    0.0
                }
            }
            TimeProfile::LogInvSquare => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.ln().powi(-2)
                }
            }
            TimeProfile::LogInvSquareDerivative => {
                if t <= 0.0 {
                    0.0
                } else {
                    -2.0 * t.ln().powi(-3) / t
                }
            }
        }
    }

    /// Mean of the profile over `[a, b]`; `eval(b)` when `b ≤ a`.
    pub fn average(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return self.eval(b);
        }
        let len = b - a;
        match *self {
            TimeProfile::One => 1.0,
            TimeProfile::Linear { slope, intercept } => slope * 0.5 * (a + b) + intercept,
            TimeProfile::Step { onset } => ((b - onset.max(a)).max(0.0) / len).min(1.0),
            TimeProfile::LogInvSquareDerivative => {
                (TimeProfile::LogInvSquare.eval(b) - TimeProfile::LogInvSquare.eval(a)) / len
            }
            TimeProfile::LogInvSquare => {
                // dyadic panels toward the logarithmic cusp at 0
                let lo = a.max(0.0);
                let mut acc = 0.0;
                let mut right = b;
                while right > lo {
                    let left = if right * 0.5 > lo && right > 1e-300 {
                        right * 0.5
                    } else {
                        lo
                    };
                    acc += crate::quad::integrate(16, left, right, |t| self.eval(t));
                    right = left;
                }
                acc / len
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeProfile::One)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TimeProfile::Linear { slope, intercept } if !(slope.is_finite() && intercept.is_finite()) => {
                Err(LabError::param("profile", "linear coefficients must be finite"))
            }
            TimeProfile::Step { onset } if !onset.is_finite() => {
                Err(LabError::param("profile.onset", "must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Spatial factor of an exterior or source term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExteriorShape {
    Constant {
        value: f64,
    },
    /// `value` on `{inner ≤ |x| < outer}`.
    Annulus {
        inner: f64,
        outer: f64,
        value: f64,
    },
    /// `value` on `{|x − center| < radius}`.
    Ball {
        center: Point,
        radius: f64,
        value: f64,
    },
    /// `amplitude · cos(wavenumber · x_axis)`.
    Cosine {
        axis: usize,
        wavenumber: f64,
        amplitude: f64,
    },
    /// `amplitude · exp(−|x − center|² / (2σ²))`.
    Gaussian {
        center: Point,
        sigma: f64,
        amplitude: f64,
    },
}

impl ExteriorShape {
    pub fn eval(&self, dim: usize, x: &Point) -> f64 {
        match self {
            ExteriorShape::Constant { value } => *value,
            ExteriorShape::Annulus { inner, outer, value } => {
                let r = norm(dim, x);
                if r >= *inner && r < *outer {
                    *value
                } else {
                    0.0
                }
            }
            ExteriorShape::Ball { center, radius, value } => {
                if distance(dim, x, center) < *radius {
                    *value
                } else {
                    0.0
                }
            }
            ExteriorShape::Cosine {
                axis,
                wavenumber,
                amplitude,
            } => amplitude * (wavenumber * x[*axis]).cos(),
            ExteriorShape::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let r = distance(dim, x, center);
                amplitude * (-0.5 * r * r / (sigma * sigma)).exp()
            }
        }
    }

    /// Whether the shape is piecewise constant with polygonal/spherical jumps.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(
            self,
            ExteriorShape::Constant { .. } | ExteriorShape::Annulus { .. } | ExteriorShape::Ball { .. }
        )
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(LabError::param(name, "must be finite"))
            }
        };
        match self {
            ExteriorShape::Constant { value } => finite(*value, "shape.value"),
            ExteriorShape::Annulus { inner, outer, value } => {
                finite(*value, "shape.value")?;
                if !(*inner >= 0.0 && outer > inner && outer.is_finite()) {
                    return Err(LabError::param("shape", "annulus needs 0 <= inner < outer < inf"));
                }
                Ok(())
            }
            ExteriorShape::Ball { radius, value, .. } => {
                finite(*value, "shape.value")?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(LabError::param("shape.radius", "must be positive"));
                }
                Ok(())
            }
            ExteriorShape::Cosine {
                axis,
                wavenumber,
                amplitude,
            } => {
                if *axis >= dim {
                    return Err(LabError::param("shape.axis", "must be below the dimension"));
                }
                finite(*wavenumber, "shape.wavenumber")?;
                finite(*amplitude, "shape.amplitude")
            }
            ExteriorShape::Gaussian { sigma, amplitude, .. } => {
                if !(*sigma > 0.0) {
                    return Err(LabError::param("shape.sigma", "must be positive"));
                }
                finite(*amplitude, "shape.amplitude")
            }
        }
    }

    /// The shape restricted to the line `{x : x_j = base_j, j ≠ axis}`, as a
    /// function of the coordinate `s = x_axis`.
    pub(crate) fn restrict_to_line(&self, dim: usize, base: &Point, axis: usize) -> Shape1D {
        let perp = |c: &Point| -> f64 {
            if dim == 1 {
                0.0
            } else {
                base[1 - axis] - c[1 - axis]
            }
        };
        match self {
            ExteriorShape::Constant { value } => Shape1D::Constant(*value),
            ExteriorShape::Annulus { inner, outer, value } => {
                let p = perp(&[0.0, 0.0]);
                let chord = |r: f64| -> Option<f64> { (r * r > p * p).then(|| (r * r - p * p).sqrt()) };
                match chord(*outer) {
                    None => Shape1D::Constant(0.0),
                    Some(co) => match chord(*inner) {
                        // |p| ≥ inner: the whole chord of the outer circle
                        None => Shape1D::Intervals(vec![(-co, co, *value)]),
                        Some(ci) => Shape1D::Intervals(vec![(-co, -ci, *value), (ci, co, *value)]),
                    },
                }
            }
            ExteriorShape::Ball { center, radius, value } => {
                let p = perp(center);
                if radius * radius > p * p {
                    let c = (radius * radius - p * p).sqrt();
                    let s0 = center[axis];
                    Shape1D::Intervals(vec![(s0 - c, s0 + c, *value)])
                } else {
                    Shape1D::Constant(0.0)
                }
            }
            ExteriorShape::Cosine {
                axis: a,
                wavenumber,
                amplitude,
            } => {
                if *a == axis {
                    Shape1D::Cosine {
                        w: *wavenumber,
                        amp: *amplitude,
                        phase: 0.0,
                    }
                } else {
                    Shape1D::Constant(amplitude * (wavenumber * base[*a]).cos())
                }
            }
            ExteriorShape::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let p = perp(center);
                Shape1D::Gaussian {
                    c: center[axis],
                    sigma: *sigma,
                    amp: amplitude * (-0.5 * p * p / (sigma * sigma)).exp(),
                }
            }
        }
    }

    /// The constant value taken on the whole square `center ± half`, if any.
    pub(crate) fn uniform_on_square(&self, dim: usize, center: &Point, half: f64) -> Option<f64> {
        // distance range from a point to the square
        let range_to = |p: &Point| -> (f64, f64) {
            let mut near = 0.0f64;
            let mut far = 0.0f64;
            for k in 0..dim {
                let lo = center[k] - half - p[k];
                let hi = center[k] + half - p[k];
                let n = if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    0.0
                };
                let f = lo.abs().max(hi.abs());
                near += n * n;
                far += f * f;
            }
            (near.sqrt(), far.sqrt())
        };
        match self {
            ExteriorShape::Constant { value } => Some(*value),
            ExteriorShape::Annulus { inner, outer, value } => {
                let (near, far) = range_to(&[0.0, 0.0]);
                if near >= *inner && far < *outer {
                    Some(*value)
                } else if far < *inner || near >= *outer {
                    Some(0.0)
                } else {
                    None
                }
            }
            ExteriorShape::Ball {
                center: c,
                radius,
                value,
            } => {
                let (near, far) = range_to(c);
                if far < *radius {
                    Some(*value)
                } else if near >= *radius {
                    Some(0.0)
                } else {
                    None
                }
            }
            ExteriorShape::Cosine { .. } | ExteriorShape::Gaussian { .. } => None,
        }
    }

    /// The value beyond `|x_k| > b` for every `k`, when it is a known constant.
    /// Indicator shapes must be supported inside the box; Gaussians count as
    /// zero once they are below `1e-300` relative to their amplitude there.
    fn far_constant(&self, dim: usize, b: f64) -> Option<f64> {
        match self {
            ExteriorShape::Constant { value } => Some(*value),
            ExteriorShape::Annulus { .. } | ExteriorShape::Ball { .. } => Some(0.0),
            ExteriorShape::Gaussian { center, sigma, .. } => {
                let gap = (0..dim).map(|k| b - center[k].abs()).fold(f64::INFINITY, f64::min);
                (gap > 0.0 && gap / sigma > 37.3).then_some(0.0)
            }
            ExteriorShape::Cosine { .. } => None,
        }
    }

    /// Whether the support of an indicator shape lies inside `[−b, b]^d`.
    fn support_inside(&self, dim: usize, b: f64) -> bool {
        match self {
            ExteriorShape::Annulus { outer, .. } => *outer <= b,
            ExteriorShape::Ball { center, radius, .. } => (0..dim).all(|k| center[k].abs() + radius <= b),
            _ => true,
        }
    }
}

/// One summand `profile(t) · shape(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorTerm {
    #[serde(default)]
    pub profile: TimeProfile,
    pub shape: ExteriorShape,
}

/// Exterior data `g(t, x) = Σ_k profile_k(t) · shape_k(x)`, evaluable at every
/// point of `R^d`. The empty sum is the zero rule. The same type describes
/// source terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExteriorRule {
    #[serde(default)]
    pub terms: Vec<ExteriorTerm>,
}

/// Source terms share the representation of exterior data.
pub type SourceRule = ExteriorRule;

impl ExteriorRule {
    pub fn zero() -> Self {
        ExteriorRule { terms: Vec::new() }
    }

    pub fn constant(value: f64) -> Self {
        Self::single(TimeProfile::One, ExteriorShape::Constant { value })
    }

    pub fn single(profile: TimeProfile, shape: ExteriorShape) -> Self {
        ExteriorRule {
            terms: vec![ExteriorTerm { profile, shape }],
        }
    }

    pub fn annulus(inner: f64, outer: f64, value: f64) -> Self {
        Self::single(TimeProfile::One, ExteriorShape::Annulus { inner, outer, value })
    }

    pub fn ball(center: Point, radius: f64, value: f64) -> Self {
        Self::single(TimeProfile::One, ExteriorShape::Ball { center, radius, value })
    }

    pub fn cosine(axis: usize, wavenumber: f64, amplitude: f64) -> Self {
        Self::single(
            TimeProfile::One,
            ExteriorShape::Cosine {
                axis,
                wavenumber,
                amplitude,
            },
        )
    }

    pub fn with_term(mut self, profile: TimeProfile, shape: ExteriorShape) -> Self {
        self.terms.push(ExteriorTerm { profile, shape });
        self
    }

    /// Multiply every term by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for term in &mut out.terms {
            scale_shape(&mut term.shape, factor);
        }
        out
    }

    /// Sum of two rules.
    pub fn plus(&self, other: &ExteriorRule) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.terms.iter().any(|t| !t.profile.is_constant())
    }

    pub fn eval(&self, dim: usize, t: f64, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let p = term.profile.eval(t);
                if p == 0.0 {
                    0.0
                } else {
                    p * term.shape.eval(dim, x)
                }
            })
            .sum()
    }

    /// Constant value of the rule beyond the box `[−b, b]^d` at time `t`, if known.
    pub(crate) fn far_constant(&self, dim: usize, b: f64, t: f64) -> Option<f64> {
        let mut total = 0.0;
        for term in &self.terms {
            let p = term.profile.eval(t);
            let c = term.shape.far_constant(dim, b)?;
            total += p * c;
        }
        Some(total)
    }

    /// The rule at time `t` restricted to a grid line.
    pub(crate) fn restrict_to_line(&self, dim: usize, t: f64, base: &Point, axis: usize) -> Vec<(f64, Shape1D)> {
        self.terms
            .iter()
            .filter_map(|term| {
                let p = term.profile.eval(t);
                (p != 0.0).then(|| (p, term.shape.restrict_to_line(dim, base, axis)))
            })
            .collect()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for term in &self.terms {
            term.profile.validate()?;
            term.shape.validate(dim)?;
        }
        Ok(())
    }

    /// Validation against a grid: indicator supports must fit inside the box.
    pub fn validate_for(&self, grid: &Grid) -> Result<()> {
        self.validate(grid.dim())?;
        let b = grid.r_trunc();
        for term in &self.terms {
            if !term.shape.support_inside(grid.dim(), b) {
                return Err(LabError::param(
                    "exterior",
                    format!("indicator support must lie inside the box of half-width {b}"),
                ));
            }
        }
        Ok(())
    }
}

fn scale_shape(shape: &mut ExteriorShape, factor: f64) {
    match shape {
        ExteriorShape::Constant { value }
        | ExteriorShape::Annulus { value, .. }
        | ExteriorShape::Ball { value, .. } => *value *= factor,
        ExteriorShape::Cosine { amplitude, .. } | ExteriorShape::Gaussian { amplitude, .. } => *amplitude *= factor,
    }
}
