use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::Point;

/// Bounded measurable coefficient `a(t, x, y)` multiplying the fractional
/// kernel. Every family is symmetric in `(x, y)` by construction.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientRule {
    Constant {
        value: f64,
    },
    /// `high` when `Σ_k ⌊x_k/cell⌋ + ⌊y_k/cell⌋` is even, `low` otherwise.
    Checkerboard {
        cell: f64,
        low: f64,
        high: f64,
    },
    /// Spatially constant, `low + (high − low)(1 + sin(2πt/period))/2`.
    TimeOscillating {
        period: f64,
        low: f64,
        high: f64,
    },
    /// Piecewise constant on pairs of cells; the value of the unordered pair
    /// `{cell(x), cell(y)}` is a hash of the seed, so the rule is exactly symmetric.
    RandomPiecewise {
        seed: u64,
        cell: f64,
        low: f64,
        high: f64,
    },
    /// Arbitrary callable, for tests that need rules outside the finite families
    /// (asymmetric or degenerate coefficients). Not serializable.
    #[doc(hidden)]
    #[serde(skip)]
    Hook(CoefficientHook),
}

/// A user-supplied coefficient with declared range and time dependence.
#[derive(Clone)]
pub struct CoefficientHook {
    pub func: Arc<dyn Fn(f64, &Point, &Point) -> f64 + Send + Sync>,
    pub low: f64,
    pub high: f64,
    pub time_dependent: bool,
}

impl fmt::Debug for CoefficientHook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientHook")
            .field("low", &self.low)
            .field("high", &self.high)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CoefficientHook {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.func, &other.func)
    }
}

impl CoefficientRule {
    pub fn constant(value: f64) -> Self {
        CoefficientRule::Constant { value }
    }

    pub fn hook(
        low: f64,
        high: f64,
        time_dependent: bool,
        func: impl Fn(f64, &Point, &Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CoefficientRule::Hook(CoefficientHook {
            func: Arc::new(func),
            low,
            high,
            time_dependent,
        })
    }

    /// Evaluate `a(t, x, y)`; `dim` selects how many coordinates take part.
    pub fn eval(&self, dim: usize, t: f64, x: &Point, y: &Point) -> f64 {
        match self {
            CoefficientRule::Constant { value } => *value,
            CoefficientRule::Checkerboard { cell, low, high } => {
                let mut parity: i64 = 0;
                for k in 0..dim {
                    parity += (x[k] / cell).floor() as i64 + (y[k] / cell).floor() as i64;
                }
                if parity.rem_euclid(2) == 0 {
                    *high
                } else {
                    *low
                }
            }
            CoefficientRule::TimeOscillating { period, low, high } => {
                let s = (2.0 * std::f64::consts::PI * t / period).sin();
                low + (high - low) * 0.5 * (1.0 + s)
            }
            CoefficientRule::RandomPiecewise { seed, cell, low, high } => {
                let kx = cell_key(dim, x, *cell);
                let ky = cell_key(dim, y, *cell);
                let (lo, hi) = if kx <= ky { (kx, ky) } else { (ky, kx) };
                let u = unit_hash(*seed, lo, hi);
                low + (high - low) * u
            }
            CoefficientRule::Hook(h) => (h.func)(t, x, y),
        }
    }

    /// Declared range `[low, high]` of the rule.
    pub fn range(&self) -> (f64, f64) {
        match self {
            CoefficientRule::Constant { value } => (*value, *value),
            CoefficientRule::Checkerboard { low, high, .. }
            | CoefficientRule::TimeOscillating { low, high, .. }
            | CoefficientRule::RandomPiecewise { low, high, .. } => (*low, *high),
            CoefficientRule::Hook(h) => (h.low, h.high),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        match self {
            CoefficientRule::TimeOscillating { .. } => true,
            CoefficientRule::Hook(h) => h.time_dependent,
            _ => false,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientRule::Constant { .. })
    }

    /// Whether `a(t, x, y)` depends on `t` only.
    pub fn is_spatially_uniform(&self) -> bool {
        matches!(
            self,
            CoefficientRule::Constant { .. } | CoefficientRule::TimeOscillating { .. }
        )
    }

    /// Coefficient used for interactions with points beyond the truncation box.
    /// Exact for constant and time-oscillating rules; the mid-range value for
    /// spatially varying ones.
    pub fn far_value(&self, t: f64) -> f64 {
        match self {
            CoefficientRule::Constant { value } => *value,
            CoefficientRule::TimeOscillating { .. } => self.eval(1, t, &[0.0; 2], &[1.0, 0.0]),
            other => {
                let (lo, hi) = other.range();
                0.5 * (lo + hi)
            }
        }
    }
}

fn cell_key(dim: usize, x: &Point, cell: f64) -> (i64, i64) {
    let a = (x[0] / cell).floor() as i64;
    let b = if dim > 1 { (x[1] / cell).floor() as i64 } else { 0 };
    (a, b)
}

// splitmix64 finalizer over the packed key
fn unit_hash(seed: u64, lo: (i64, i64), hi: (i64, i64)) -> f64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [lo.0, lo.1, hi.0, hi.1] {
        z = z.wrapping_add(v as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    (z >> 11) as f64 / (1u64 << 53) as f64
}
