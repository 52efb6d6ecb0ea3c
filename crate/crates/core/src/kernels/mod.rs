//! Jump kernels `K(t;x,y) = a(t,x,y)·(2−α)·|x−y|^{−d−α}` and the singular
//! axes measure, with sampled checks of their structural conditions.

mod coefficient;
mod conditions;

use serde::{Deserialize, Serialize};

pub use coefficient::{CoefficientHook, CoefficientRule};
pub use conditions::{
    check_bounds, check_cutoff, check_poinc_sob, check_symmetry, check_ujs, check_ujs_with_ceiling, cutoff_integral,
    poincare_ratio, sobolev_ratio, ujs_ratio, Condition, ConditionReport, PoincSobReport, DEFAULT_SEED,
};

use crate::{distance, LabError, Point, Result};

/// Order, floor and ellipticity of a kernel family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracParams {
    pub dim: usize,
    pub alpha: f64,
    pub alpha0: f64,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
}

impl FracParams {
    pub fn new(dim: usize, alpha: f64, alpha0: f64, lambda: f64, big_lambda: f64) -> Result<Self> {
        let p = FracParams {
            dim,
            alpha,
            alpha0,
            lambda,
            big_lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// `λ = Λ = 1`, `α₀ = α`.
    pub fn fractional(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(dim, alpha, alpha, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(LabError::param("dim", format!("must be 1 or 2, got {}", self.dim)));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < 2.0) {
            return Err(LabError::param("alpha0", "must lie in (0, 2)"));
        }
        if !(self.alpha >= self.alpha0 && self.alpha < 2.0) {
            return Err(LabError::param("alpha", "must lie in [alpha0, 2)"));
        }
        if !(self.lambda > 0.0 && self.big_lambda >= self.lambda) {
            return Err(LabError::param("lambda", "need 0 < lambda <= Lambda"));
        }
        Ok(())
    }

    /// The `(2 − α)` normalization.
    #[inline]
    pub fn norm_factor(&self) -> f64 {
        2.0 - self.alpha
    }

    /// `(2−α)|x−y|^{−d−α}` for `r = |x−y|`.
    #[inline]
    pub fn fractional_density(&self, r: f64) -> f64 {
        self.norm_factor() * r.powf(-(self.dim as f64) - self.alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelStructure {
    AbsolutelyContinuous,
    /// `μ_axes(x, dy) = (2−α) Σ_i |x_i − y_i|^{−1−α} dy_i Π_{j≠i} δ_{x_j}(dy_j)`.
    AxesSingular,
}

/// A time-dependent symmetric jump kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub params: FracParams,
    pub coefficient: CoefficientRule,
    pub structure: KernelStructure,
}

impl KernelSpec {
    /// Absolutely-continuous kernel; the coefficient range must lie in `[λ, Λ]`.
    pub fn new(params: FracParams, coefficient: CoefficientRule) -> Result<Self> {
        let spec = Self::new_unchecked(params, coefficient)?;
        let (lo, hi) = spec.coefficient.range();
        if lo < params.lambda || hi > params.big_lambda {
            return Err(LabError::param(
                "coefficient",
                format!(
                    "range [{lo}, {hi}] not inside [lambda, Lambda] = [{}, {}]",
                    params.lambda, params.big_lambda
                ),
            ));
        }
        Ok(spec)
    }

    /// Absolutely-continuous kernel without the `[λ, Λ]` range check, for
    /// studying kernels that violate the two-sided bounds.
    pub fn new_unchecked(params: FracParams, coefficient: CoefficientRule) -> Result<Self> {
        params.validate()?;
        let (lo, hi) = coefficient.range();
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(LabError::param(
                "coefficient",
                "range must satisfy 0 < low <= high < inf",
            ));
        }
        if let CoefficientRule::Checkerboard { cell, .. } | CoefficientRule::RandomPiecewise { cell, .. } = &coefficient
        {
            if !(*cell > 0.0) {
                return Err(LabError::param("coefficient.cell", "must be positive"));
            }
        }
        if let CoefficientRule::TimeOscillating { period, .. } = &coefficient {
            if !(*period > 0.0) {
                return Err(LabError::param("coefficient.period", "must be positive"));
            }
        }
        Ok(KernelSpec {
            params,
            coefficient,
            structure: KernelStructure::AbsolutelyContinuous,
        })
    }

    /// The pure fractional kernel `(2−α)|x−y|^{−d−α}`.
    pub fn fractional(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(FracParams::fractional(dim, alpha)?, CoefficientRule::constant(1.0))
    }

    /// The axes measure. Only the constant coefficient 1 is allowed.
    pub fn axes(params: FracParams) -> Result<Self> {
        params.validate()?;
        Ok(KernelSpec {
            params,
            coefficient: CoefficientRule::constant(1.0),
            structure: KernelStructure::AxesSingular,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn is_axes(&self) -> bool {
        self.structure == KernelStructure::AxesSingular
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.is_axes() && self.coefficient != CoefficientRule::constant(1.0) {
            return Err(LabError::Structure(
                "the axes measure admits only the constant coefficient 1".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn require_density(&self) -> Result<()> {
        if self.is_axes() {
            Err(LabError::Structure("the axes measure has no pointwise density".into()))
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn coefficient_at(&self, t: f64, x: &Point, y: &Point) -> f64 {
        self.coefficient.eval(self.params.dim, t, x, y)
    }
}

/// Pointwise kernel value `a(t,x,y)(2−α)|x−y|^{−d−α}`.
pub fn eval_kernel(spec: &KernelSpec, t: f64, x: &Point, y: &Point) -> Result<f64> {
    spec.require_density()?;
    let r = distance(spec.params.dim, x, y);
    if r == 0.0 {
        return Err(LabError::Singular);
    }
    Ok(spec.coefficient_at(t, x, y) * spec.params.fractional_density(r))
}
