//! TOML experiment configs. Every block is checked before any computation and
//! unknown keys are rejected; [`ExperimentConfig::resolved`] writes the config
//! back with every default spelled out.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counterexample::CounterexampleSpec;
use crate::discretization::{ExteriorRule, ExteriorShape, Field, Grid, GridSpec, SourceRule};
use crate::experiments::{AxesFamily, SweepCoefficient};
use crate::kernels::{CoefficientRule, FracParams, KernelSpec, KernelStructure};
use crate::solver::{Scenario, Schedule, SolveOptions};
use crate::{LabError, Point, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measurement: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<AxesBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub dim: usize,
    pub alpha: f64,
    /// Defaults to `alpha`.
    #[serde(default)]
    pub alpha0: Option<f64>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(rename = "Lambda", default = "one")]
    pub big_lambda: f64,
    #[serde(default = "absolutely_continuous")]
    pub structure: KernelStructure,
    #[serde(default = "unit_coefficient")]
    pub coefficient: CoefficientRule,
}

fn one() -> f64 {
    1.0
}

fn absolutely_continuous() -> KernelStructure {
    KernelStructure::AbsolutelyContinuous
}

fn unit_coefficient() -> CoefficientRule {
    CoefficientRule::constant(1.0)
}

impl KernelBlock {
    pub fn spec(&self) -> Result<KernelSpec> {
        let params = FracParams::new(
            self.dim,
            self.alpha,
            self.alpha0.unwrap_or(self.alpha),
            self.lambda,
            self.big_lambda,
        )
        .map_err(|e| in_block("kernel", e))?;
        match self.structure {
            KernelStructure::AbsolutelyContinuous => {
                KernelSpec::new(params, self.coefficient.clone()).map_err(|e| in_block("kernel", e))
            }
            KernelStructure::AxesSingular => {
                if self.coefficient != CoefficientRule::constant(1.0) {
                    return Err(config_err("kernel.coefficient", "the axes measure only takes a ≡ 1"));
                }
                KernelSpec::axes(params).map_err(|e| in_block("kernel", e))
            }
        }
    }
}

/// Initial data on the interior nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `u₀ = g(t_start)`, so `u ≡ c` for constant exterior data `c`.
    Exterior,
    /// Sum of shapes.
    Shapes { terms: Vec<ExteriorShape> },
    /// `background + amplitude (1 − |x − center|²/width²)₊²`.
    Bump {
        center: Point,
        width: f64,
        amplitude: f64,
        background: f64,
    },
}

impl InitialData {
    pub fn eval(&self, dim: usize, exterior: &ExteriorRule, t: f64, x: &Point) -> f64 {
        match self {
            InitialData::Exterior => exterior.eval(dim, t, x),
            InitialData::Shapes { terms } => terms.iter().map(|s| s.eval(dim, x)).sum(),
            InitialData::Bump {
                center,
                width,
                amplitude,
                background,
            } => {
                let s2 = crate::distance(dim, x, center).powi(2) / (width * width);
                background + if s2 < 1.0 { amplitude * (1.0 - s2).powi(2) } else { 0.0 }
            }
        }
    }
}

/// Comparison against a closed-form solution, reported in the run diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Oracle {
    /// The local heat solution from `exp(−|x|²/(2σ²))`; relative `L∞` error on `B_radius` at `t_end`.
    HeatGaussian { sigma: f64, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub t_start: f64,
    pub t_end: f64,
    pub initial: InitialData,
    #[serde(default)]
    pub exterior: ExteriorRule,
    #[serde(default)]
    pub source: SourceRule,
    pub schedule: Schedule,
    #[serde(default = "SolveOptions::implicit")]
    pub solver: SolveOptions,
    /// Weak-formulation residual against test bumps in the run diagnostics.
    #[serde(default)]
    pub weak_residual: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Oracle>,
}

/// One verifier operation on the solved scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Measurement {
    Harnack {
        t0: f64,
        #[serde(default)]
        x0: Point,
        r: f64,
    },
    HarnackTails {
        t0: f64,
        #[serde(default)]
        x0: Point,
        r: f64,
    },
    WeakHarnack {
        t0: f64,
        #[serde(default)]
        x0: Point,
        r: f64,
    },
    LocalBoundedness {
        t0: f64,
        #[serde(default)]
        x0: Point,
        r: f64,
    },
    Holder {
        t0: f64,
        #[serde(default)]
        x0: Point,
        r: f64,
        gammas: Vec<f64>,
        eps: f64,
    },
    AxesHarnack {
        t0: f64,
        #[serde(default)]
        x0: Point,
        r: f64,
    },
}

/// Verifier operations available to sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOp {
    Harnack,
    HarnackTails,
    WeakHarnack,
    LocalBoundedness,
}

/// Cartesian sweep of bump data on `B₁` over `alphas × radii × coefficients`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub dim: usize,
    pub h: f64,
    pub alphas: Vec<f64>,
    pub radii: Vec<f64>,
    pub coefficients: Vec<SweepCoefficient>,
    /// Constant exterior data and the level the bump sits on.
    pub background: f64,
    pub ops: Vec<SweepOp>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleBlock {
    pub alpha: f64,
    pub h: f64,
    pub k_max: u32,
    /// Levels `k` at which `u(2^{−k}, ·) ≥ δ f(2^{−k}) − tol` is checked.
    pub lower_bound_k: [u32; 2],
    /// Levels of the Hölder quotients and partial tail integrals.
    pub holder_k: [u32; 2],
    pub gammas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesBlock {
    pub alpha: f64,
    pub n: usize,
    pub r: f64,
    pub center: Point,
    pub radii: Vec<f64>,
}

impl AxesBlock {
    pub fn family(&self) -> AxesFamily {
        AxesFamily {
            alpha: self.alpha,
            n: self.n,
            r: self.r,
            center: self.center,
            radii: self.radii.clone(),
        }
    }
}

fn config_err(key: impl Into<String>, reason: impl Into<String>) -> LabError {
    LabError::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

/// Re-key parameter errors under the config block they came from.
fn in_block(block: &str, e: LabError) -> LabError {
    match e {
        LabError::InvalidParameter { name, reason } => config_err(format!("{block}.{name}"), reason),
        LabError::Config { .. } => e,
        other => config_err(block, other.to_string()),
    }
}

fn require<'a, T>(block: &'a Option<T>, key: &str) -> Result<&'a T> {
    block
        .as_ref()
        .ok_or_else(|| config_err(key, "block is required by this command"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let key = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.lines().next().unwrap_or("").trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "<document>".into());
            config_err(key, e.message().trim())
        })?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(config_err(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", cfg.schema),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The config with `seed` and the output directory fixed and every default written out.
    pub fn resolved(&self, seed: u64, out: &Path) -> Result<String> {
        let mut cfg = self.clone();
        cfg.seed = seed;
        cfg.output = Some(OutputBlock {
            dir: out.display().to_string(),
        });
        if let Some(k) = cfg.kernel.as_mut() {
            k.alpha0 = Some(k.alpha0.unwrap_or(k.alpha));
        }
        toml::to_string_pretty(&cfg).map_err(|e| config_err("<document>", e.to_string()))
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        require(&self.kernel, "kernel")?.spec()
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let spec = *require(&self.grid, "grid")?;
        Ok(Arc::new(Grid::new(spec).map_err(|e| in_block("grid", e))?))
    }

    pub fn build_scenario(&self) -> Result<(Scenario, SolveOptions)> {
        let kernel = self.kernel_spec()?;
        let grid = self.build_grid()?;
        let block = require(&self.scenario, "scenario")?;
        let dim = grid.dim();
        let (exterior, t0) = (block.exterior.clone(), block.t_start);
        let data = block.initial.clone();
        if let InitialData::Shapes { terms } = &data {
            for (k, s) in terms.iter().enumerate() {
                ExteriorRule::single(Default::default(), s.clone())
                    .validate(dim)
                    .map_err(|e| in_block(&format!("scenario.initial.terms[{k}]"), e))?;
            }
        }
        let ext = exterior.clone();
        let initial = Field::new(grid.clone(), t0, exterior.clone(), move |x| data.eval(dim, &ext, t0, x));
        let scenario = Scenario {
            kernel,
            grid,
            t_start: block.t_start,
            t_end: block.t_end,
            initial,
            exterior,
            source: block.source.clone(),
            schedule: block.schedule.clone(),
        };
        scenario.validate().map_err(|e| in_block("scenario", e))?;
        if let Some(Oracle::HeatGaussian { sigma, radius }) = &block.oracle {
            if !(*sigma > 0.0 && *radius > 0.0) {
                return Err(config_err("scenario.oracle", "sigma and radius must be positive"));
            }
        }
        Ok((scenario, block.solver))
    }

    pub fn sweep_block(&self) -> Result<&SweepBlock> {
        let s = require(&self.sweep, "sweep")?;
        if s.alphas.is_empty() || s.radii.is_empty() || s.coefficients.is_empty() || s.ops.is_empty() {
            return Err(config_err(
                "sweep",
                "alphas, radii, coefficients and ops must be non-empty",
            ));
        }
        if !(s.h > 0.0) {
            return Err(config_err("sweep.h", "must be positive"));
        }
        for &a in &s.alphas {
            FracParams::new(s.dim, a, a.min(0.5), 1.0, 2.0).map_err(|e| in_block("sweep", e))?;
        }
        if s.radii.iter().any(|&r| !(r > 0.0 && r <= 0.25)) {
            return Err(config_err("sweep.radii", "must lie in (0, 1/4] so that B_{4R} ⊂ B₁"));
        }
        Ok(s)
    }

    pub fn counterexample_spec(&self) -> Result<(CounterexampleSpec, &CounterexampleBlock)> {
        let c = require(&self.counterexample, "counterexample")?;
        if c.lower_bound_k[0] > c.lower_bound_k[1] || c.holder_k[0] > c.holder_k[1] {
            return Err(config_err("counterexample", "level ranges must be ordered [low, high]"));
        }
        if c.lower_bound_k[1] > c.k_max {
            return Err(config_err("counterexample.lower_bound_k", "must not exceed k_max"));
        }
        if c.gammas.iter().any(|g| !(*g > 0.0)) {
            return Err(config_err("counterexample.gammas", "must be positive"));
        }
        let params = FracParams::fractional(1, c.alpha).map_err(|e| in_block("counterexample", e))?;
        let grid = crate::experiments::ball_grid(1, c.h).map_err(|e| in_block("counterexample", e))?;
        let spec = CounterexampleSpec::new(params, grid, c.k_max).map_err(|e| in_block("counterexample", e))?;
        Ok((spec, c))
    }

    pub fn axes_family(&self) -> Result<AxesFamily> {
        let a = require(&self.axes, "axes")?;
        if a.radii.is_empty() {
            return Err(config_err("axes.radii", "must be non-empty"));
        }
        FracParams::new(2, a.alpha, a.alpha.min(0.5), 1.0, 1.0).map_err(|e| in_block("axes", e))?;
        if a.n < 4 {
            return Err(config_err("axes.n", "need at least 4 nodes per unit length"));
        }
        Ok(a.family())
    }
}
