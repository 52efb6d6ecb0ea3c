//! Gauss–Legendre rules on intervals and squares, plus a few closed-form
//! power-law integrals used throughout the discretization.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        (0..=64)
            .map(|k| match NonZeroUsize::new(k) {
                None => Vec::new(),
                Some(deg) => GaussLegendre::new(deg).as_node_weight_pairs().to_vec(),
            })
            .collect()
    });
    assert!(n >= 1 && n <= 64, "Gauss-Legendre order {n} out of range");
    &rules[n]
}

/// `∫_a^b f` with an `n`-point Gauss–Legendre rule.
pub fn integrate(n: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// `∫_a^b f` with `pieces` equal panels of an `n`-point rule each.
pub fn integrate_composite(n: usize, pieces: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let step = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + step * k as f64;
            integrate(n, lo, lo + step, &mut f)
        })
        .sum()
}

/// Tensor Gauss rule of order `n` on the square `center ± half` (side `2·half`).
pub fn integrate_square(n: usize, center: [f64; 2], half: f64, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
    let rule = gauss_legendre(n);
    let mut acc = 0.0;
    for &(xi, wi) in rule {
        for &(yj, wj) in rule {
            acc += wi * wj * f([center[0] + half * xi, center[1] + half * yj]);
        }
    }
    acc * half * half
}

/// `∫_l^r |s − x|^{−1−α} ds` for an interval `[l, r]` not containing `x` in its interior.
pub fn power_interval(x: f64, l: f64, r: f64, alpha: f64) -> f64 {
    debug_assert!(l <= r);
    if r <= l {
        return 0.0;
    }
    if l >= x {
        let (a, b) = (l - x, r - x);
        if a == 0.0 {
            return f64::INFINITY;
        }
        (a.powf(-alpha) - b.powf(-alpha)) / alpha
    } else if r <= x {
        let (a, b) = (x - r, x - l);
        if a == 0.0 {
            return f64::INFINITY;
        }
        (a.powf(-alpha) - b.powf(-alpha)) / alpha
    } else {
        f64::INFINITY
    }
}

/// `∫_l^∞ (s − x)^{−1−α} ds` for `l > x`.
pub fn power_half_line(x: f64, l: f64, alpha: f64) -> f64 {
    (l - x).powf(-alpha) / alpha
}

/// `∫_l^r (1 + |s|)^{−1−α} ds`.
pub fn weight_l1alpha_interval(l: f64, r: f64, alpha: f64) -> f64 {
    let prim = |s: f64| -> f64 {
        // antiderivative of (1+|s|)^{-1-α}, odd-symmetric about 0
        let v = (1.0 - (1.0 + s.abs()).powf(-alpha)) / alpha;
        v.copysign(s)
    };
    prim(r) - prim(l)
}

/// `∫_0^{2π} r(θ)^{−α} dθ` where `r(θ)` is the distance from `x` to the boundary
/// of the square `[−b, b]²` along direction θ. Requires `x` strictly inside.
///
/// Combined with polar coordinates this gives
/// `∫_{R²∖[−b,b]²} |x − y|^{−2−α} dy = (1/α) ∫_0^{2π} r(θ)^{−α} dθ`.
pub fn square_exit_moment(x: [f64; 2], b: f64, alpha: f64) -> f64 {
    square_exit_integral(x, b, |r| r.powf(-alpha))
}

/// `∫_0^{2π} g(r(θ)) dθ` for the exit radius `r(θ)` of the square `[−b, b]²`
/// seen from `x`; the four corner directions split the angle range into smooth pieces.
pub fn square_exit_integral(x: [f64; 2], b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let corners = [
        (b - x[1]).atan2(b - x[0]),
        (b - x[1]).atan2(-b - x[0]),
        (-b - x[1]).atan2(-b - x[0]),
        (-b - x[1]).atan2(b - x[0]),
    ];
    let mut angles: Vec<f64> = corners
        .iter()
        .map(|a| a.rem_euclid(2.0 * std::f64::consts::PI))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let exit = |theta: f64| -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        let tx = if c.abs() > 1e-300 {
            if c > 0.0 {
                (b - x[0]) / c
            } else {
                (-b - x[0]) / c
            }
        } else {
            f64::INFINITY
        };
        let ty = if s.abs() > 1e-300 {
            if s > 0.0 {
                (b - x[1]) / s
            } else {
                (-b - x[1]) / s
            }
        } else {
            f64::INFINITY
        };
        tx.min(ty)
    };
    let mut total = 0.0;
    for k in 0..4 {
        let lo = angles[k];
        let hi = if k == 3 {
            angles[0] + 2.0 * std::f64::consts::PI
        } else {
            angles[k + 1]
        };
        total += integrate_composite(24, 4, lo, hi, |th| g(exit(th)));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        let v = integrate(4, 0.0, 2.0, |x| x.powi(7));
        assert!((v - 32.0).abs() < 1e-12);
    }

    #[test]
    fn power_interval_both_sides() {
        // ∫_1^2 s^{-2} = 1/2, and the mirrored interval gives the same
        assert!((power_interval(0.0, 1.0, 2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((power_interval(0.0, -2.0, -1.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_exit_moment_matches_disc_limit() {
        // far from a huge square centered at x, r(θ) ≈ b / max(|cos|,|sin|)
        // at the center: ∫ r^{-α} = b^{-α} ∫ max(|cos|,|sin|)^α dθ = 8 b^{-α} ∫_0^{π/4} cos^α
        let alpha = 1.0;
        let m = square_exit_moment([0.0, 0.0], 2.0, alpha);
        let exact = 8.0 * 0.5 * (std::f64::consts::FRAC_PI_4).sin();
        assert!((m - exact).abs() < 1e-10, "{m} vs {exact}");
    }

    #[test]
    fn l1alpha_weight_whole_line() {
        let v = weight_l1alpha_interval(-1e12, 1e12, 1.0);
        assert!((v - 2.0).abs() < 1e-9);
    }
}
