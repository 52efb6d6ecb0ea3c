use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Hypothesis data: `f(r) ≤ A(s−r)^{−γ₁} + B(s−r)^{−γ₂} + C + θ f(s)` for `R/2 ≤ r < s ≤ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbInput {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbOutcome {
    /// Bound on `f(R/2)` from iterating the hypothesis along the chain.
    pub bound: f64,
    pub tau: f64,
    /// `r_i = R/2 + (R/2)(1 − τ^i)`, truncated once `θ^i` drops below `1e−16`.
    pub chain: Vec<f64>,
    /// Whether the hypothesis holds for every ordered pair of samples.
    pub hypothesis_holds: bool,
    /// `f(R/2)` from the samples, when `R/2` is sampled.
    pub direct: Option<f64>,
    /// `direct ≤ bound` (vacuously true without a direct value).
    pub holds: bool,
}

fn chain_sum(inp: &AbsorbInput, tau: f64) -> f64 {
    let step = (1.0 - tau) * inp.r / 2.0;
    let geo = |gamma: f64| {
        let q = inp.theta * tau.powf(-gamma);
        step.powf(-gamma) / (1.0 - q)
    };
    let mut total = inp.c / (1.0 - inp.theta);
    if inp.a != 0.0 {
        total += inp.a * geo(inp.gamma1);
    }
    if inp.b != 0.0 {
        total += inp.b * geo(inp.gamma2);
    }
    total
}

/// Iterate the hypothesis along `r_{i+1} − r_i = (1−τ)τ^i R/2`. Summing the
/// geometric series needs `θτ^{−max(γ₁,γ₂)} < 1`; `τ` is chosen on a fine
/// grid of admissible values to minimize the bound. `samples` are `(r, f(r))`
/// pairs on `[R/2, R]`.
pub fn iterate_absorb(inp: &AbsorbInput, samples: &[(f64, f64)]) -> Result<AbsorbOutcome> {
    if !(inp.theta > 0.0 && inp.theta < 1.0) {
        return Err(LabError::param("theta", "must lie in (0, 1)"));
    }
    if !(inp.r > 0.0) || inp.gamma1 < 0.0 || inp.gamma2 < 0.0 || inp.a < 0.0 || inp.b < 0.0 || inp.c < 0.0 {
        return Err(LabError::param("absorb", "need R > 0 and nonnegative A, B, C, γ₁, γ₂"));
    }
    if samples
        .iter()
        .any(|&(r, f)| !f.is_finite() || r < 0.5 * inp.r - 1e-12 || r > inp.r + 1e-12)
    {
        return Err(LabError::param("samples", "must be finite and lie in [R/2, R]"));
    }
    let active: Vec<f64> = [(inp.a, inp.gamma1), (inp.b, inp.gamma2)]
        .iter()
        .filter(|p| p.0 != 0.0)
        .map(|p| p.1)
        .collect();
    let gamma = active.iter().copied().fold(0.0, f64::max);
    // admissible τ ∈ (θ^{1/γ}, 1)
    let tau_min = if gamma > 0.0 { inp.theta.powf(1.0 / gamma) } else { 0.0 };
    if !(tau_min < 1.0) {
        return Err(LabError::param("theta", "no admissible τ for the given exponents"));
    }
    let (tau, bound) = if gamma == 0.0 && active.is_empty() {
        (0.5, chain_sum(inp, 0.5))
    } else {
        (1..400)
            .map(|k| tau_min + (1.0 - tau_min) * k as f64 / 400.0)
            .map(|t| (t, chain_sum(inp, t)))
            .filter(|p| p.1.is_finite())
            .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
    };
    if !bound.is_finite() {
        return Err(LabError::param("theta", "no admissible τ for the given exponents"));
    }
    let mut chain = Vec::new();
    let mut w = 1.0;
    let mut i = 0;
    while w > 1e-16 && i < 200 {
        chain.push(0.5 * inp.r + 0.5 * inp.r * (1.0 - tau.powi(i)));
        w *= inp.theta;
        i += 1;
    }
    let mut hypothesis_holds = true;
    for &(r, fr) in samples {
        for &(s, fs) in samples {
            if s > r {
                let d = s - r;
                let rhs = inp.a * d.powf(-inp.gamma1) + inp.b * d.powf(-inp.gamma2) + inp.c + inp.theta * fs;
                if fr > rhs * (1.0 + 1e-12) + 1e-300 {
                    hypothesis_holds = false;
                }
            }
        }
    }
    let direct = samples
        .iter()
        .find(|&&(r, _)| (r - 0.5 * inp.r).abs() <= 1e-12 * inp.r)
        .map(|&(_, f)| f);
    Ok(AbsorbOutcome {
        bound,
        tau,
        chain,
        hypothesis_holds,
        direct,
        holds: direct.is_none_or(|f| f <= bound),
    })
}
