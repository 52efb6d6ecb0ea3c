use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use nonlocal_lab::discretization::{
    energy_form, norm_l1alpha, seminorm_h, seminorm_v, tail, tail_axes_fun, tail_k_fun, tail_l1_in_time,
    tail_linf_in_time, DomainShape, EnergyRegion, ExteriorRule, ExteriorShape, Field, Grid, GridSpec, OffsetTable,
    SpaceTimeField, TimeProfile,
};
use nonlocal_lab::kernels::{FracParams, KernelSpec};
use proptest::prelude::*;

fn grid(dim: usize, shape: DomainShape, radius: f64, r_trunc: f64, h: f64) -> Arc<Grid> {
    Arc::new(
        Grid::new(GridSpec {
            dim,
            shape,
            radius,
            r_trunc,
            h,
        })
        .unwrap(),
    )
}

fn ball(dim: usize, h: f64) -> Arc<Grid> {
    grid(dim, DomainShape::Ball, 1.0, 3.0, h)
}

const ORIGIN: [f64; 2] = [0.0, 0.0];

#[test]
fn tail_of_constants() {
    let g = ball(1, 1.0 / 16.0);
    let one = Field::constant(g.clone(), 0.0, 1.0);
    assert_relative_eq!(tail(&one, 1.0, 1.0, &ORIGIN).unwrap(), 2.0, max_relative = 1e-12);
    // (2 − α) · 2 R^{−α} / α for other orders and radii
    for (alpha, r) in [(0.5, 0.5), (1.5, 0.25), (1.9, 0.75)] {
        let want = (2.0 - alpha) * 2.0 * f64::powf(r, -alpha) / alpha;
        assert_relative_eq!(tail(&one, alpha, r, &ORIGIN).unwrap(), want, max_relative = 1e-10);
    }
    let g2 = ball(2, 0.125);
    let one2 = Field::constant(g2, 0.0, 1.0);
    assert_relative_eq!(tail(&one2, 1.0, 1.0, &ORIGIN).unwrap(), 2.0 * PI, max_relative = 1e-4);
}

#[test]
fn tail_of_annulus_indicator() {
    let g = ball(1, 1.0 / 16.0);
    let v = Field::from_rule(g, 0.0, ExteriorRule::annulus(2.0, 3.0, 1.0));
    assert_relative_eq!(tail(&v, 1.0, 1.0, &ORIGIN).unwrap(), 1.0 / 3.0, max_relative = 1e-12);
}

#[test]
fn tail_of_interior_values_counts_only_outside_the_ball() {
    // v = 1 on interior nodes only; ∫_{1/2<|y|<1} |y|^{−2} dy = 2 at α = 1, up to the cell at the boundary
    let g = ball(1, 1.0 / 64.0);
    let v = Field::new(g, 0.0, ExteriorRule::zero(), |_| 1.0);
    let got = tail(&v, 1.0, 0.5, &ORIGIN).unwrap();
    assert!((got - 2.0).abs() < 0.05, "{got}");
}

fn times(a: f64, b: f64, n: usize) -> Vec<f64> {
    // log-spaced so a singular profile near 0 is resolved
    (0..=n).map(|k| a * (b / a).powf(k as f64 / n as f64)).collect()
}

#[test]
fn time_integrated_tails() {
    let g = ball(1, 1.0 / 16.0);
    let ts: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
    let one = SpaceTimeField::from_fn(&ts, |t| Field::constant(g.clone(), t, 1.0)).unwrap();
    assert_relative_eq!(
        tail_l1_in_time(&one, 1.0, 1.0, &ORIGIN, 0.0, 1.0).unwrap(),
        2.0,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        tail_linf_in_time(&one, 1.0, 1.0, &ORIGIN, 0.0, 1.0).unwrap(),
        2.0,
        max_relative = 1e-12
    );

    let rule = ExteriorRule::single(
        TimeProfile::Linear {
            slope: 1.0,
            intercept: 0.0,
        },
        ExteriorShape::Constant { value: 1.0 },
    );
    let lin = SpaceTimeField::from_fn(&ts, |t| Field::new(g.clone(), t, rule.clone(), move |_| t)).unwrap();
    assert_relative_eq!(
        tail_l1_in_time(&lin, 1.0, 1.0, &ORIGIN, 0.0, 1.0).unwrap(),
        1.0,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        tail_linf_in_time(&lin, 1.0, 1.0, &ORIGIN, 0.0, 1.0).unwrap(),
        2.0,
        max_relative = 1e-12
    );
}

#[test]
fn singular_profile_time_tail_matches_quadrature() {
    let g = ball(1, 1.0 / 16.0);
    let rule = ExteriorRule::single(
        TimeProfile::LogInvSquare,
        ExteriorShape::Annulus {
            inner: 2.0,
            outer: 3.0,
            value: 1.0,
        },
    );
    let (a, b) = (0.5f64.powi(12), 0.5);
    let ts = times(a, b, 400);
    let u = SpaceTimeField::from_fn(&ts, |t| Field::new(g.clone(), t, rule.clone(), |_| 0.0)).unwrap();
    let got = tail_l1_in_time(&u, 1.0, 1.0, &ORIGIN, a, b).unwrap();
    let oracle = quadrature::integrate(|t: f64| t.ln().powi(-2), a, b, 1e-12).integral / 3.0;
    assert!((got - oracle).abs() <= 0.005 * oracle, "{got} vs {oracle}");
}

#[test]
fn kernel_tail_examples() {
    let g = ball(1, 1.0 / 16.0);
    let spec = KernelSpec::fractional(1, 1.0).unwrap();
    let one = Field::constant(g.clone(), 0.0, 1.0);
    let v = tail_k_fun(&one, &spec, 0.5, 1.0, &ORIGIN).unwrap();
    assert_relative_eq!(v, 1.0 / 0.5 + 1.0 / 1.5, max_relative = 1e-10);

    let zero = Field::constant(g.clone(), 0.0, 0.0);
    assert_eq!(tail_k_fun(&zero, &spec, 0.5, 1.0, &ORIGIN).unwrap(), 0.0);

    // shrinking the inner ball to below one cell leaves only x0
    let small = tail_k_fun(&one, &spec, 1e-3, 1.0, &ORIGIN).unwrap();
    assert_relative_eq!(small, tail(&one, 1.0, 1.0, &ORIGIN).unwrap(), max_relative = 1e-12);
    assert!(tail_k_fun(&one, &spec, 1.0, 1.0, &ORIGIN).is_err());
}

#[test]
fn axes_tail_examples() {
    let g = grid(2, DomainShape::Box, 1.0, 3.0, 1.0 / 16.0);
    let p = FracParams::fractional(2, 1.0).unwrap();
    let zero = Field::constant(g.clone(), 0.0, 0.0);
    assert_eq!(tail_axes_fun(&zero, &p, 1.0, &ORIGIN).unwrap(), 0.0);

    let one = Field::constant(g.clone(), 0.0, 1.0);
    let v = tail_axes_fun(&one, &p, 1.0, &ORIGIN).unwrap();
    assert!(v >= 4.0 * (1.0 - 1e-9), "{v}");

    // a ball around (0.7, 0.7) misses every axis line through the nodes of B_{1/4}
    let off = Field::new(g.clone(), 0.0, ExteriorRule::zero(), |x| {
        if (x[0] - 0.7).hypot(x[1] - 0.7) < 0.15 {
            1.0
        } else {
            0.0
        }
    });
    assert!(off.values().iter().any(|&x| x > 0.0));
    assert_eq!(tail_axes_fun(&off, &p, 0.25, &ORIGIN).unwrap(), 0.0);
}

#[test]
fn energy_of_constants_and_symmetry() {
    let g = ball(1, 1.0 / 16.0);
    let spec = KernelSpec::fractional(1, 0.9).unwrap();
    let c = Field::constant(g.clone(), 0.0, 3.0);
    assert_eq!(
        energy_form(&spec, &g, 0.0, &c, &c, EnergyRegion::FullCross).unwrap(),
        0.0
    );
    assert_eq!(seminorm_v(&c, &spec.params, &g, &ORIGIN, 0.5).unwrap(), 0.0);
    assert_eq!(seminorm_h(&c, &spec.params, &g, &ORIGIN, 0.5).unwrap(), 0.0);
    // ∫_R 3 (1 + |x|)^{−1−α} dx = 6/α
    assert_relative_eq!(
        norm_l1alpha(&c, &spec.params, &g).unwrap(),
        6.0 / 0.9,
        max_relative = 1e-9
    );
}

#[test]
fn ball_energy_matches_brute_force_pairs() {
    // three interior nodes at −1/2, 0, 1/2 and a spike in the middle
    let g = ball(1, 0.5);
    assert_eq!(g.n_interior(), 3);
    let alpha = 0.7;
    let spec = KernelSpec::fractional(1, alpha).unwrap();
    let u = Field::new(g.clone(), 0.0, ExteriorRule::zero(), |x| {
        if x[0] == 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let table = OffsetTable::get(1, alpha, 0.5, 2 * g.half_count());
    let nodes = g.nodes_in_ball(&ORIGIN, 1.0);
    let mut brute = 0.0;
    for &i in &nodes {
        for &j in &nodes {
            if i != j {
                let o = g.lattice(j)[0] - g.lattice(i)[0];
                brute += table.weight([o, 0]) * (u.value(i) - u.value(j)).powi(2);
            }
        }
    }
    brute *= g.h();
    let region = EnergyRegion::Ball {
        center: ORIGIN,
        radius: 1.0,
    };
    let e = energy_form(&spec, &g, 0.0, &u, &u, region).unwrap();
    assert_relative_eq!(e, brute, max_relative = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_is_symmetric_and_h_below_v(
        u in prop::collection::vec(-2.0f64..2.0, 31),
        v in prop::collection::vec(-2.0f64..2.0, 31),
        alpha in 0.3f64..1.9,
    ) {
        let g = ball(1, 1.0 / 16.0);
        prop_assume!(g.n_interior() == 31);
        let spec = KernelSpec::fractional(1, alpha).unwrap();
        let fu = Field::from_interior(g.clone(), 0.0, ExteriorRule::zero(), &u).unwrap();
        let fv = Field::from_interior(g.clone(), 0.0, ExteriorRule::constant(0.5), &v).unwrap();
        let a = energy_form(&spec, &g, 0.0, &fu, &fv, EnergyRegion::FullCross).unwrap();
        let b = energy_form(&spec, &g, 0.0, &fv, &fu, EnergyRegion::FullCross).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        let h = seminorm_h(&fu, &spec.params, &g, &ORIGIN, 0.5).unwrap();
        let vv = seminorm_v(&fu, &spec.params, &g, &ORIGIN, 0.5).unwrap();
        prop_assert!(h <= vv * (1.0 + 1e-12));
    }

    #[test]
    fn tail_scales_linearly_and_is_monotone_in_radius(
        c in 0.1f64..5.0,
        alpha in 0.2f64..1.95,
        r in 0.15f64..0.9,
    ) {
        let g = ball(1, 1.0 / 16.0);
        let f = Field::from_rule(g.clone(), 0.0, ExteriorRule::annulus(1.5, 2.5, 1.0));
        let fc = Field::from_rule(g, 0.0, ExteriorRule::annulus(1.5, 2.5, c));
        let t1 = tail(&f, alpha, r, &ORIGIN).unwrap();
        let tc = tail(&fc, alpha, r, &ORIGIN).unwrap();
        prop_assert!((tc - c * t1).abs() <= 1e-12 * tc.abs());
        let wider = tail(&f, alpha, (r + 0.05).min(0.95), &ORIGIN).unwrap();
        prop_assert!(wider <= t1 * (1.0 + 1e-12));
    }
}
