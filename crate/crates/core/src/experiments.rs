//! Ready-made scenarios behind the acceptance experiments and the runner:
//! the heat-limit comparison, bump data for the Harnack sweeps, and the
//! shrinking far-ball family for the axes measure.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{
    DomainShape, ExteriorRule, ExteriorShape, Field, Grid, GridSpec, SpaceTimeField, TimeProfile,
};
use crate::kernels::{CoefficientRule, FracParams, KernelSpec};
use crate::solver::{solve, Scenario, Schedule, SolveOptions};
use crate::verifier::{axes_harnack, Report};
use crate::{Point, Result};

pub fn ball_grid(dim: usize, h: f64) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::new(GridSpec {
        dim,
        shape: DomainShape::Ball,
        radius: 1.0,
        r_trunc: 3.0,
        h,
    })?))
}

/// Gaussian `exp(−|x|²/(2σ²))` evolved by the local heat equation `∂ₜu = Δu`.
pub fn heat_gaussian(dim: usize, sigma: f64, t: f64, x: &Point) -> f64 {
    let s2 = sigma * sigma + 2.0 * t;
    let r2 = (0..dim).map(|k| x[k] * x[k]).sum::<f64>();
    (sigma * sigma / s2).powf(0.5 * dim as f64) * (-r2 / (2.0 * s2)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatOutcome {
    pub alpha: f64,
    pub h: f64,
    pub dt: f64,
    pub t: f64,
    /// `max_{B_{1/2}} |u − u_heat| / max_{B_{1/2}} |u_heat|` at the final time.
    pub error: f64,
}

/// Solve from a Gaussian bump (`σ = 0.1`, zero exterior data, `a ≡ 1`) in one
/// dimension and compare with the local heat solution at `t_end`.
pub fn heat_limit(alpha: f64, h: f64, dt: f64, t_end: f64) -> Result<HeatOutcome> {
    let sigma = 0.1;
    let grid = ball_grid(1, h)?;
    let kernel = KernelSpec::fractional(1, alpha)?;
    let exterior = ExteriorRule::zero();
    let initial = Field::new(grid.clone(), 0.0, exterior.clone(), |x| heat_gaussian(1, sigma, 0.0, x));
    let scenario = Scenario {
        kernel,
        grid: grid.clone(),
        t_start: 0.0,
        t_end,
        initial,
        exterior,
        source: ExteriorRule::zero(),
        schedule: Schedule::Uniform { dt },
    };
    let sol = solve(&scenario, &SolveOptions::implicit())?;
    let last = sol.field.fields().last().unwrap();
    let nodes = grid.nodes_in_ball(&[0.0; 2], 0.5);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for i in nodes {
        let exact = heat_gaussian(1, sigma, t_end, &grid.coord(i));
        err = err.max((last.value(i) - exact).abs());
        scale = scale.max(exact.abs());
    }
    Ok(HeatOutcome {
        alpha,
        h,
        dt,
        t: t_end,
        error: err / scale,
    })
}

/// Coefficient families of the Harnack sweeps, all with range `[1, 2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCoefficient {
    Constant,
    Checkerboard,
    TimeOscillating,
    /// Seeded pair-cell values, for sweeps over coefficient seeds.
    RandomPiecewise,
}

impl SweepCoefficient {
    /// The three deterministic families.
    pub const ALL: [SweepCoefficient; 3] = [
        SweepCoefficient::Constant,
        SweepCoefficient::Checkerboard,
        SweepCoefficient::TimeOscillating,
    ];

    /// The rule at scale `r`: checkerboard and random cells of size `r/2`,
    /// oscillation period `r^α`. Only the random family reads `seed`.
    pub fn rule(self, alpha: f64, r: f64, seed: u64) -> CoefficientRule {
        match self {
            SweepCoefficient::Constant => CoefficientRule::constant(1.0),
            SweepCoefficient::Checkerboard => CoefficientRule::Checkerboard {
                cell: 0.5 * r,
                low: 1.0,
                high: 2.0,
            },
            SweepCoefficient::TimeOscillating => CoefficientRule::TimeOscillating {
                period: r.powf(alpha),
                low: 1.0,
                high: 2.0,
            },
            SweepCoefficient::RandomPiecewise => CoefficientRule::RandomPiecewise {
                seed,
                cell: 0.5 * r,
                low: 1.0,
                high: 2.0,
            },
        }
    }
}

/// Bump data for Harnack measurements at scale `r` around `x0 = 0`.
#[derive(Clone, Debug)]
pub struct BumpSetup {
    pub scenario: Scenario,
    /// Measurement time: one cylinder duration of burn-in after the earliest
    /// time the `I_{4R}(t0)` hypothesis needs.
    pub t0: f64,
    pub r: f64,
}

/// `u₀ = background + (1 − (x/(2r))²)₊²`, exterior data `background`, on `B₁`.
/// Time runs over `(0, t0 + (4r)^α)` with `t0 = (4r)^α + r^α` and `dt = r^α/32`.
pub fn bump_setup(
    dim: usize,
    alpha: f64,
    r: f64,
    coefficient: CoefficientRule,
    h: f64,
    background: f64,
) -> Result<BumpSetup> {
    let grid = ball_grid(dim, h)?;
    let kernel = KernelSpec::new(FracParams::new(dim, alpha, alpha.min(0.5), 1.0, 2.0)?, coefficient)?;
    let exterior = ExteriorRule::constant(background);
    let w = 2.0 * r;
    let initial = Field::new(grid.clone(), 0.0, exterior.clone(), move |x| {
        let s2 = (0..dim).map(|k| x[k] * x[k]).sum::<f64>() / (w * w);
        background + if s2 < 1.0 { (1.0 - s2).powi(2) } else { 0.0 }
    });
    let ra = r.powf(alpha);
    let span = (4.0 * r).powf(alpha);
    let t0 = span + ra;
    Ok(BumpSetup {
        scenario: Scenario {
            kernel,
            grid,
            t_start: 0.0,
            t_end: t0 + span,
            initial,
            exterior,
            source: ExteriorRule::zero(),
            schedule: Schedule::Uniform { dt: ra / 32.0 },
        },
        t0,
        r,
    })
}

/// One member of the shrinking far-ball family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxesRow {
    pub far_radius: f64,
    /// `sup / inf` without any tail term.
    pub tail_free: f64,
    /// `sup / (inf + tail_axes)`.
    pub with_tail: f64,
    pub report: Report,
}

/// Geometry of the far-ball family for the axes measure on the box `(−1, 1)²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxesFamily {
    pub alpha: f64,
    /// Nodes per unit length, so the box has `2n × 2n` cells.
    pub n: usize,
    pub r: f64,
    /// Far-ball center; its second coordinate sits between two lattice rows.
    pub center: Point,
    pub radii: Vec<f64>,
}

impl AxesFamily {
    /// `α = 1`, the 48 × 48 box, `R = 1/8` around the origin and the far ball
    /// centered at `(3/2, 1/16)` with radii `1/4, 1/8, 1/16`.
    pub fn standard() -> Self {
        AxesFamily {
            alpha: 1.0,
            n: 24,
            r: 0.125,
            center: [1.5, 0.0625],
            radii: vec![0.25, 0.125, 0.0625],
        }
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(GridSpec {
            dim: 2,
            shape: DomainShape::Box,
            radius: 1.0,
            r_trunc: 3.0,
            h: 1.0 / self.n as f64,
        })?))
    }

    /// Zero initial data and `g = 1` on the far ball of radius `rho`, switched on at `t = 0`.
    /// Time runs over `(0, 2(4R)^α)` and the measurement time is `t0 = (4R)^α`.
    pub fn scenario(&self, grid: &Arc<Grid>, rho: f64) -> Result<(Scenario, f64)> {
        let params = FracParams::new(2, self.alpha, self.alpha.min(0.5), 1.0, 1.0)?;
        let kernel = KernelSpec::axes(params)?;
        let exterior = ExteriorRule::single(
            TimeProfile::One,
            ExteriorShape::Ball {
                center: self.center,
                radius: rho,
                value: 1.0,
            },
        );
        let initial = Field::new(grid.clone(), 0.0, exterior.clone(), |_| 0.0);
        let span = (4.0 * self.r).powf(self.alpha);
        Ok((
            Scenario {
                kernel,
                grid: grid.clone(),
                t_start: 0.0,
                t_end: 2.0 * span,
                initial,
                exterior,
                source: ExteriorRule::zero(),
                schedule: Schedule::Uniform {
                    dt: self.r.powf(self.alpha) / 16.0,
                },
            },
            span,
        ))
    }

    /// Solve every member and measure both constants at `x0 = 0`.
    pub fn run(&self) -> Result<Vec<AxesRow>> {
        let grid = self.grid()?;
        self.radii
            .iter()
            .map(|&rho| {
                let (scenario, t0) = self.scenario(&grid, rho)?;
                let sol = solve(&scenario, &SolveOptions::implicit())?;
                let report = axes_harnack(&sol, t0, &[0.0; 2], self.r)?;
                let tail_free = report.summands["tail_free_constant"];
                Ok(AxesRow {
                    far_radius: rho,
                    tail_free,
                    with_tail: report.constant,
                    report,
                })
            })
            .collect()
    }
}

/// Sign-changing one-dimensional scenarios for local boundedness on `B₁`,
/// measured at `x0 = 0`, `R = 1/4`, `t0 = (4R)^α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignedScenario {
    /// `u₀ = sin(2πx) + 0.3`, zero exterior data, `α = 0.8`.
    Oscillating,
    /// Zero initial data, `g = ±1` on balls of radius 1/2 at `∓1.75`, `α = 1.2`.
    SignedExterior,
    /// Checkerboard coefficient, `u₀ = cos(3πx)(1 − x²) − 1/4`, `g ≡ 1/4`, `α = 1.6`.
    Checkerboard,
}

pub const LOCBD_R: f64 = 0.25;

impl SignedScenario {
    pub const ALL: [SignedScenario; 3] = [
        SignedScenario::Oscillating,
        SignedScenario::SignedExterior,
        SignedScenario::Checkerboard,
    ];

    pub fn alpha(self) -> f64 {
        match self {
            SignedScenario::Oscillating => 0.8,
            SignedScenario::SignedExterior => 1.2,
            SignedScenario::Checkerboard => 1.6,
        }
    }

    /// Scenario on the grid of spacing `h`; the step `2h(R/2)^α` refines with it.
    pub fn build(self, h: f64) -> Result<(Scenario, f64)> {
        let grid = ball_grid(1, h)?;
        let alpha = self.alpha();
        let coefficient = match self {
            SignedScenario::Checkerboard => CoefficientRule::Checkerboard {
                cell: 0.125,
                low: 1.0,
                high: 2.0,
            },
            _ => CoefficientRule::constant(1.0),
        };
        let kernel = KernelSpec::new(FracParams::new(1, alpha, alpha.min(0.5), 1.0, 2.0)?, coefficient)?;
        let exterior = match self {
            SignedScenario::Oscillating => ExteriorRule::zero(),
            SignedScenario::SignedExterior => ExteriorRule::ball([-1.75, 0.0], 0.5, 1.0).with_term(
                TimeProfile::One,
                ExteriorShape::Ball {
                    center: [1.75, 0.0],
                    radius: 0.5,
                    value: -1.0,
                },
            ),
            SignedScenario::Checkerboard => ExteriorRule::constant(0.25),
        };
        let initial = Field::new(grid.clone(), 0.0, exterior.clone(), move |x| match self {
            SignedScenario::Oscillating => (2.0 * std::f64::consts::PI * x[0]).sin() + 0.3,
            SignedScenario::SignedExterior => 0.0,
            SignedScenario::Checkerboard => (3.0 * std::f64::consts::PI * x[0]).cos() * (1.0 - x[0] * x[0]) - 0.25,
        });
        let t0 = (4.0 * LOCBD_R).powf(alpha);
        Ok((
            Scenario {
                kernel,
                grid,
                t_start: 0.0,
                t_end: 2.0 * t0,
                initial,
                exterior,
                source: ExteriorRule::zero(),
                schedule: Schedule::Uniform {
                    dt: 2.0 * h * (0.5 * LOCBD_R).powf(alpha),
                },
            },
            t0,
        ))
    }

    /// Local-boundedness report on the grid of spacing `h`.
    pub fn measure(self, h: f64) -> Result<Report> {
        let (scenario, t0) = self.build(h)?;
        let sol = solve(&scenario, &SolveOptions::implicit())?;
        crate::verifier::locbd_ratio(&sol, t0, &[0.0; 2], LOCBD_R)
    }
}

/// Random space-time field on `B₁ ⊂ R¹` (`h = 1/64`) over `t ∈ [0, 1]` with
/// 17 slices: three cosine modes with time-varying amplitudes plus, for odd
/// seeds, white noise; the exterior rule is a random linear-in-time constant
/// plus a random annulus bump.
pub fn random_space_time_field(seed: u64) -> Result<SpaceTimeField> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let grid = ball_grid(1, 1.0 / 64.0)?;
    let modes: Vec<[f64; 4]> = (0..3)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..12.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    let exterior = ExteriorRule::single(
        TimeProfile::Linear {
            slope: rng.random_range(-1.0..1.0),
            intercept: rng.random_range(-1.0..1.0),
        },
        ExteriorShape::Constant { value: 1.0 },
    )
    .with_term(
        TimeProfile::Linear {
            slope: rng.random_range(-2.0..2.0),
            intercept: rng.random_range(-2.0..2.0),
        },
        ExteriorShape::Annulus {
            inner: 1.25,
            outer: rng.random_range(1.5..2.5),
            value: 1.0,
        },
    );
    let noisy = seed % 2 == 1;
    let times: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
    let mut fields = Vec::with_capacity(times.len());
    for &t in &times {
        let noise: Vec<f64> = (0..grid.n_interior())
            .map(|_| if noisy { rng.random_range(-0.5..0.5) } else { 0.0 })
            .collect();
        let mut pos = 0;
        let mut f = Field::new(grid.clone(), t, exterior.clone(), |x| {
            modes
                .iter()
                .map(|m| (m[0] + m[1] * t) * (m[2] * x[0] + m[3]).cos())
                .sum::<f64>()
        });
        let vals: Vec<f64> = f
            .interior_values()
            .into_iter()
            .map(|v| {
                let out = v + noise[pos];
                pos += 1;
                out
            })
            .collect();
        f.set_interior(&vals)?;
        fields.push(f);
    }
    SpaceTimeField::new(fields)
}

/// Tail-finiteness ratios of `n` random fields (seeds `seed .. seed + n`)
/// at `α = 1`, `R = 1/4`, `x0 = 0`, `J = [0, 1]`.
pub fn tail_finiteness_family(n: u64, seed: u64) -> Result<Vec<crate::verifier::FinitenessSample>> {
    let params = FracParams::fractional(1, 1.0)?;
    (seed..seed + n)
        .map(|s| {
            let u = random_space_time_field(s)?;
            crate::verifier::tail_finiteness(&u, &params, 0.25, &[0.0; 2], 0.0, 1.0)
        })
        .collect()
}

/// A seeded pair of scenarios with ordered data: same kernel, grid and
/// schedule, `u₀¹ ≤ u₀²`, `g¹ ≤ g²` and `f¹ ≤ f²` everywhere.
#[derive(Clone, Debug)]
pub struct OrderedPair {
    pub lower: Scenario,
    pub upper: Scenario,
    pub options: SolveOptions,
}

fn random_bumps(rng: &mut impl rand::Rng, dim: usize, n: usize, signed: bool) -> Vec<ExteriorShape> {
    (0..n)
        .map(|_| {
            let mut center = [0.0; 2];
            for c in center.iter_mut().take(dim) {
                *c = rng.random_range(-1.5..1.5);
            }
            let amplitude = if signed {
                rng.random_range(-1.0..1.0)
            } else {
                rng.random_range(0.0..1.0)
            };
            let width = rng.random_range(0.1..0.6);
            // 2D far fields have closed forms only for piecewise constant data
            if dim == 2 {
                ExteriorShape::Ball {
                    center,
                    radius: width,
                    value: amplitude,
                }
            } else {
                ExteriorShape::Gaussian {
                    center,
                    sigma: width,
                    amplitude,
                }
            }
        })
        .collect()
}

fn shapes_rule(shapes: &[ExteriorShape], profile: TimeProfile) -> ExteriorRule {
    shapes
        .iter()
        .fold(ExteriorRule::zero(), |r, s| r.with_term(profile.clone(), s.clone()))
}

/// Random ordered pair: dimension 1 (`h = 1/32`) or 2 (`h = 1/4`), `α` in
/// `[0.3, 1.95]`, one of the four coefficient families, Gaussian (1D) or ball (2D) data with
/// nonnegative increments, implicit or explicit stepping on `(0, 0.2)`.
pub fn random_ordered_pair(seed: u64) -> Result<OrderedPair> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = if rng.random_bool(0.25) { 2 } else { 1 };
    let grid = ball_grid(dim, if dim == 1 { 1.0 / 32.0 } else { 0.25 })?;
    let alpha = rng.random_range(0.3..1.95);
    let coefficient = match rng.random_range(0..4) {
        0 => CoefficientRule::constant(rng.random_range(1.0..2.0)),
        1 => CoefficientRule::Checkerboard {
            cell: rng.random_range(0.1..0.5),
            low: 1.0,
            high: 2.0,
        },
        2 => CoefficientRule::TimeOscillating {
            period: rng.random_range(0.05..0.5),
            low: 1.0,
            high: 2.0,
        },
        _ => CoefficientRule::RandomPiecewise {
            seed: rng.random(),
            cell: rng.random_range(0.1..0.5),
            low: 1.0,
            high: 2.0,
        },
    };
    let kernel = KernelSpec::new(FracParams::new(dim, alpha, alpha.min(0.3), 1.0, 2.0)?, coefficient)?;

    let n = rng.random_range(1..4);
    let base_ext = shapes_rule(&random_bumps(&mut rng, dim, n, true), TimeProfile::One);
    let extra_ext = shapes_rule(
        &random_bumps(&mut rng, dim, 2, false),
        TimeProfile::Linear {
            slope: rng.random_range(0.0..2.0),
            intercept: rng.random_range(0.0..1.0),
        },
    );
    let base_src = shapes_rule(&random_bumps(&mut rng, dim, 1, true), TimeProfile::One);
    let extra_src = shapes_rule(&random_bumps(&mut rng, dim, 1, false), TimeProfile::One);
    let n = rng.random_range(1..4);
    let base_u0 = random_bumps(&mut rng, dim, n, true);
    let extra_u0 = random_bumps(&mut rng, dim, 2, false);

    let eval = move |shapes: &[ExteriorShape], x: &Point| shapes.iter().map(|s| s.eval(dim, x)).sum::<f64>();
    let lower_ext = base_ext.clone();
    let upper_ext = base_ext.plus(&extra_ext);
    let lower_init = Field::new(grid.clone(), 0.0, lower_ext.clone(), |x| eval(&base_u0, x));
    let upper_init = Field::new(grid.clone(), 0.0, upper_ext.clone(), |x| {
        eval(&base_u0, x) + eval(&extra_u0, x)
    });

    let explicit = rng.random_bool(0.3);
    let options = if explicit {
        SolveOptions::explicit()
    } else {
        SolveOptions::implicit()
    };
    let dt = if explicit {
        // coefficients vary within a factor 2, so this stays below the CFL limit
        let op = crate::discretization::assemble_operator(&kernel, &grid, 0.0)?;
        0.4 / op.max_diagonal()
    } else {
        rng.random_range(0.005..0.05)
    };
    let make = |initial: Field, exterior: ExteriorRule, source: ExteriorRule| Scenario {
        kernel: kernel.clone(),
        grid: grid.clone(),
        t_start: 0.0,
        t_end: 0.2,
        initial,
        exterior,
        source,
        schedule: Schedule::Uniform { dt },
    };
    Ok(OrderedPair {
        lower: make(lower_init, lower_ext, base_src.clone()),
        upper: make(upper_init, upper_ext, base_src.plus(&extra_src)),
        options,
    })
}
