use std::sync::Arc;

use approx::assert_relative_eq;
use nonlocal_lab::discretization::{DomainShape, ExteriorRule, Field, Grid, GridSpec};
use nonlocal_lab::kernels::{
    check_bounds, check_cutoff, check_poinc_sob, check_symmetry, check_ujs, check_ujs_with_ceiling, cutoff_integral,
    eval_kernel, poincare_ratio, ujs_ratio, CoefficientRule, FracParams, KernelSpec,
};
use proptest::prelude::*;

fn checkerboard(low: f64, high: f64, cell: f64) -> CoefficientRule {
    CoefficientRule::Checkerboard { cell, low, high }
}

#[test]
fn point_values() {
    let k = KernelSpec::fractional(1, 1.0).unwrap();
    assert_relative_eq!(eval_kernel(&k, 0.0, &[0.0, 0.0], &[2.0, 0.0]).unwrap(), 0.25);

    // cells of width 2 put 0 and 1 in the same cell: even parity, a = high = 2
    let spec = KernelSpec::new(
        FracParams::new(1, 1.5, 0.5, 0.5, 2.0).unwrap(),
        checkerboard(0.5, 2.0, 2.0),
    )
    .unwrap();
    assert_eq!(spec.coefficient_at(0.0, &[0.0, 0.0], &[1.0, 0.0]), 2.0);
    assert_relative_eq!(eval_kernel(&spec, 0.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
    // with unit cells the pair straddles a boundary and gets `low`
    let unit = KernelSpec::new(
        FracParams::new(1, 1.5, 0.5, 0.5, 2.0).unwrap(),
        checkerboard(0.5, 2.0, 1.0),
    )
    .unwrap();
    assert_relative_eq!(eval_kernel(&unit, 0.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.25);
}

#[test]
fn bounds_examples() {
    let one = KernelSpec::fractional(2, 1.0).unwrap();
    let r = check_bounds(&one, 200, 1).unwrap();
    assert!(r.pass);
    assert_eq!((r.min, r.max), (1.0, 1.0));

    let weak = KernelSpec::new_unchecked(
        FracParams::new(1, 1.0, 0.5, 1.0, 2.0).unwrap(),
        CoefficientRule::constant(0.5),
    )
    .unwrap();
    let r = check_bounds(&weak, 200, 1).unwrap();
    assert!(!r.pass);
    assert_relative_eq!(r.min, 0.5);

    let cb = KernelSpec::new(
        FracParams::new(2, 1.2, 0.5, 1.0, 2.0).unwrap(),
        checkerboard(1.0, 2.0, 0.25),
    )
    .unwrap();
    let r = check_bounds(&cb, 2000, 3).unwrap();
    assert!(r.pass);
    assert!(r.min >= 1.0 && r.max <= 2.0);
}

#[test]
fn checked_constructor_rejects_out_of_range_coefficients() {
    let p = FracParams::new(1, 1.0, 0.5, 1.0, 2.0).unwrap();
    assert!(KernelSpec::new(p, CoefficientRule::constant(0.5)).is_err());
    assert!(KernelSpec::new(p, CoefficientRule::constant(3.0)).is_err());
    assert!(FracParams::new(1, 2.0, 0.5, 1.0, 1.0).is_err());
    assert!(FracParams::new(1, 0.3, 0.5, 1.0, 1.0).is_err());
}

#[test]
fn symmetry_examples() {
    let r = check_symmetry(&KernelSpec::fractional(1, 0.7).unwrap(), 300, 2).unwrap();
    assert!(r.pass);
    assert_eq!(r.max, 0.0);

    let skew = CoefficientRule::hook(0.9, 1.1, false, |_, x, y| 1.0 + 0.1 * (x[0] - y[0]).signum());
    let spec = KernelSpec::new_unchecked(FracParams::new(1, 1.0, 0.5, 0.9, 1.1).unwrap(), skew).unwrap();
    assert!(!check_symmetry(&spec, 300, 2).unwrap().pass);

    let random = CoefficientRule::RandomPiecewise {
        seed: 11,
        cell: 0.2,
        low: 1.0,
        high: 2.0,
    };
    let spec = KernelSpec::new(FracParams::new(2, 1.0, 0.5, 1.0, 2.0).unwrap(), random).unwrap();
    let r = check_symmetry(&spec, 500, 4).unwrap();
    assert!(r.pass);
    assert_eq!(r.max, 0.0);
}

#[test]
fn cutoff_examples() {
    let x = [0.3, -0.2];
    let one_d = KernelSpec::fractional(1, 1.0).unwrap();
    assert_relative_eq!(
        cutoff_integral(&one_d, 0.0, &x, 1.0).unwrap(),
        2.0,
        max_relative = 1e-12
    );
    let two_d = KernelSpec::fractional(2, 1.0).unwrap();
    assert_relative_eq!(
        cutoff_integral(&two_d, 0.0, &x, 1.0).unwrap(),
        2.0 * std::f64::consts::PI,
        max_relative = 1e-10
    );
    // 0.5 ∫_{|h|>2} |h|^{−2.5} dh by adaptive quadrature on the substitution h = 2/s²
    let oracle = 2.0
        * quadrature::integrate(
            |s: f64| 0.5 * (2.0 / (s * s)).powf(-2.5) * 4.0 / s.powi(3),
            1e-9,
            1.0,
            1e-13,
        )
        .integral;
    let v = cutoff_integral(&KernelSpec::fractional(1, 1.5).unwrap(), 0.0, &x, 2.0).unwrap();
    assert_relative_eq!(v, oracle, max_relative = 1e-8);
    assert_relative_eq!(v, 0.5 * 2.0 * 2f64.powf(-1.5) / 1.5, max_relative = 1e-10);
}

#[test]
fn cutoff_with_varying_coefficients_stays_below_threshold() {
    let spec = KernelSpec::new(
        FracParams::new(2, 0.8, 0.5, 1.0, 2.0).unwrap(),
        checkerboard(1.0, 2.0, 0.3),
    )
    .unwrap();
    let r = check_cutoff(&spec, &[0.25, 0.5, 1.0], 6, 5).unwrap();
    assert!(r.pass, "{r:?}");
    // the threshold freezes a at Λ = 2; the measured value sits in between
    let frozen_low = 1.0 * 1.2 * 2.0 * std::f64::consts::PI / 0.8;
    assert!(r.min >= frozen_low * (1.0 - 1e-3), "{r:?}");
}

#[test]
fn ujs_examples() {
    let spec = KernelSpec::fractional(1, 1.0).unwrap();
    let q = ujs_ratio(&spec, 0.0, &[0.0, 0.0], &[1.0, 0.0], 0.25).unwrap();
    // ⨍_{|z|<1/4} |z − 1|^{−2} dz = (1/0.5)(1/0.75 − 1/1.25)
    let avg = 2.0 * (1.0 / 0.75 - 1.0 / 1.25);
    assert_relative_eq!(q, 1.0 / avg, max_relative = 1e-10);
    assert!(q > 0.0 && q <= 1.25f64.powi(2));

    let r = check_ujs(&KernelSpec::fractional(2, 1.3).unwrap(), 100, 9).unwrap();
    assert!(r.pass && r.min > 0.0 && r.max.is_finite());

    // a = λ on the line x₁ = y₁ + 1/2, Λ elsewhere
    let line = CoefficientRule::hook(1.0, 3.0, false, |_, x, y| {
        if ((x[0] - y[0]).abs() - 0.5).abs() < 1e-3 {
            1.0
        } else {
            3.0
        }
    });
    let spec = KernelSpec::new(FracParams::new(1, 1.0, 0.5, 1.0, 3.0).unwrap(), line).unwrap();
    let r = check_ujs_with_ceiling(&spec, 100, 3, 3.0 * 4f64.powi(2)).unwrap();
    assert!(r.pass);
    let q = ujs_ratio(&spec, 0.0, &[0.0, 0.0], &[0.5, 0.0], 0.1).unwrap();
    let free = ujs_ratio(
        &KernelSpec::fractional(1, 1.0).unwrap(),
        0.0,
        &[0.0, 0.0],
        &[0.5, 0.0],
        0.1,
    )
    .unwrap();
    assert!(q <= 3.0 * free, "{q} vs {free}");
}

fn ball_grid(dim: usize, h: f64) -> Arc<Grid> {
    Arc::new(
        Grid::new(GridSpec {
            dim,
            shape: DomainShape::Ball,
            radius: 1.0,
            r_trunc: 3.0,
            h,
        })
        .unwrap(),
    )
}

#[test]
fn poincare_sobolev_examples() {
    let grid = ball_grid(1, 1.0 / 16.0);
    let spec = KernelSpec::fractional(1, 1.0).unwrap();
    let c = Field::constant(grid.clone(), 0.0, 2.5);
    assert_eq!(poincare_ratio(&spec, &grid, 0.0, &c, 0.5).unwrap(), None);

    let spike = Field::new(grid.clone(), 0.0, ExteriorRule::zero(), |x| {
        if x[0] == 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let q = poincare_ratio(&spec, &grid, 0.0, &spike, 0.5).unwrap().unwrap();
    assert!(q > 0.0);

    let a = check_poinc_sob(&spec, &grid, 100, 1).unwrap();
    let b = check_poinc_sob(&spec, &grid, 100, 2).unwrap();
    assert!(a.poincare.min > 0.0 && a.sobolev.min > 0.0);
    let ratio = a.poincare.min / b.poincare.min;
    assert!((0.5..=2.0).contains(&ratio), "{a:?} {b:?}");
    assert!(a.sobolev_exponent.is_infinite());
}

proptest! {
    #[test]
    fn kernel_is_sandwiched_and_symmetric(
        alpha in 0.2f64..1.95,
        dim in 1usize..=2,
        x in prop::array::uniform2(-3.0f64..3.0),
        y in prop::array::uniform2(-3.0f64..3.0),
        seed in any::<u64>(),
        t in 0.0f64..4.0,
    ) {
        let p = FracParams::new(dim, alpha, alpha.min(0.2), 1.0, 2.0).unwrap();
        let rules = [
            CoefficientRule::constant(1.5),
            checkerboard(1.0, 2.0, 0.37),
            CoefficientRule::TimeOscillating { period: 0.7, low: 1.0, high: 2.0 },
            CoefficientRule::RandomPiecewise { seed, cell: 0.3, low: 1.0, high: 2.0 },
        ];
        let dist = nonlocal_lab::distance(dim, &x, &y);
        prop_assume!(dist > 1e-6);
        let base = p.fractional_density(dist);
        for rule in rules {
            let spec = KernelSpec::new(p, rule).unwrap();
            let k = eval_kernel(&spec, t, &x, &y).unwrap();
            prop_assert!(k >= base * (1.0 - 1e-12) && k <= 2.0 * base * (1.0 + 1e-12));
            prop_assert_eq!(k, eval_kernel(&spec, t, &y, &x).unwrap());
        }
    }
}
