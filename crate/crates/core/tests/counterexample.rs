use std::f64::consts::{E, LN_2};
use std::sync::Arc;

use approx::assert_relative_eq;
use nonlocal_lab::counterexample::{
    annulus_action, build_counterexample, certify_failure, certify_lower_bound, compute_delta, profile,
    profile_derivative, CounterexampleSpec,
};
use nonlocal_lab::discretization::{DomainShape, Grid, GridSpec};
use nonlocal_lab::kernels::FracParams;
use nonlocal_lab::solver::{solve, SolveOptions};
use nonlocal_lab::LabError;
use proptest::prelude::*;

fn grid(h: f64, r_trunc: f64, shape: DomainShape) -> Arc<Grid> {
    Arc::new(
        Grid::new(GridSpec {
            dim: 1,
            shape,
            radius: 1.0,
            r_trunc,
            h,
        })
        .unwrap(),
    )
}

fn unit_ball(h: f64) -> Arc<Grid> {
    grid(h, 3.0, DomainShape::Ball)
}

/// `∫_{2<|y|<3} |x − y|^{−2} dy` for |x| < 2.
fn annulus_integral(x: f64) -> f64 {
    (1.0 / (2.0 - x) - 1.0 / (3.0 - x)) + (1.0 / (2.0 + x) - 1.0 / (3.0 + x))
}

#[test]
fn profile_values() {
    assert_relative_eq!(profile(1.0 / E), 1.0, max_relative = 1e-15);
    assert_relative_eq!(profile(E.powi(-2)), 0.25, max_relative = 1e-15);
    assert_relative_eq!(profile_derivative(E.powi(-2)), E * E / 4.0, max_relative = 1e-14);
    assert_eq!(profile(-0.5), 0.0);
    // ∫₀^{1/2} f' dt = f(1/2) = (ln 2)^{−2}; substitute t = e^{−s} to tame the endpoint
    // plus the remainder f(e^{−400}) = 400^{−2}
    let oracle = quadrature::integrate(|s: f64| profile_derivative((-s).exp()) * (-s).exp(), LN_2, 400.0, 1e-12)
        .integral
        + 400f64.powi(-2);
    assert_relative_eq!(oracle, profile(0.5), max_relative = 1e-8);
    assert_relative_eq!(profile(0.5), LN_2.powi(-2), max_relative = 1e-15);
}

#[test]
fn delta_star_matches_the_exact_integral() {
    let p = FracParams::fractional(1, 1.0).unwrap();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let g = unit_ball(h);
        let d = compute_delta(&p, &g).unwrap();
        assert!((d - 1.0 / 3.0).abs() <= 0.01 / 3.0, "h = {h}: {d}");
        // convexity puts the minimum at the centre; scan the nodes as an oracle
        let scan = g
            .interior_nodes()
            .iter()
            .map(|&i| annulus_integral(g.coord(i)[0]))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(scan, 1.0 / 3.0, max_relative = 1e-12);
    }
    assert_relative_eq!(annulus_integral(1.0), 7.0 / 12.0, max_relative = 1e-15);

    // the node nearest x = 1 against the exact one-sided integrals
    let g = unit_ball(1.0 / 32.0);
    let action = annulus_action(&p, &g).unwrap();
    let (k, &i) = g
        .interior_nodes()
        .iter()
        .enumerate()
        .max_by(|a, b| g.coord(*a.1)[0].total_cmp(&g.coord(*b.1)[0]))
        .unwrap();
    let x = g.coord(i)[0];
    assert!((-action[k] - annulus_integral(x)).abs() <= 0.01 * annulus_integral(x));
}

#[test]
fn certificate_and_exterior_data() {
    let spec = CounterexampleSpec::new(FracParams::fractional(1, 1.0).unwrap(), unit_ball(1.0 / 16.0), 12).unwrap();
    assert!(spec.is_certified());
    assert_eq!(spec.delta, 0.5 * spec.delta_star);
    assert!(spec.certificate_margin >= 0.5 * spec.delta_star * (1.0 - 1e-12));
    // inside B₁ only the δ f(t) part of g survives
    let g = spec.exterior();
    for t in [0.01, 0.1, 0.4] {
        for x in [0.0, 0.5, -0.9] {
            assert_relative_eq!(g.eval(1, t, &[x, 0.0]), spec.delta * profile(t), max_relative = 1e-15);
        }
        assert_relative_eq!(
            g.eval(1, t, &[2.5, 0.0]),
            spec.delta * profile(t) + profile_derivative(t),
            max_relative = 1e-15
        );
    }
    let mut broken = spec.clone();
    broken.certificate_margin = 0.0;
    assert!(matches!(build_counterexample(&broken), Err(LabError::Certificate(_))));
}

#[test]
fn invalid_grids_are_rejected() {
    let p = FracParams::fractional(1, 1.0).unwrap();
    assert!(matches!(
        compute_delta(&p, &unit_ball(0.125)),
        Err(LabError::GridTooCoarse(_))
    ));
    assert!(compute_delta(&p, &grid(1.0 / 16.0, 3.0, DomainShape::Box)).is_err());
    let varying = FracParams::new(1, 1.0, 0.5, 1.0, 2.0).unwrap();
    assert!(compute_delta(&varying, &unit_ball(1.0 / 16.0)).is_err());
}

#[test]
fn solution_stays_above_the_lower_bound() {
    let spec = CounterexampleSpec::new(FracParams::fractional(1, 1.0).unwrap(), unit_ball(1.0 / 16.0), 14).unwrap();
    let sc = build_counterexample(&spec).unwrap();
    let sol = solve(&sc, &SolveOptions::implicit()).unwrap();
    let u = &sol.field;
    let interior = sol.grid().interior_nodes().to_vec();

    // nothing happens before t = 0
    for f in u.fields().iter().filter(|f| f.time() <= 0.0) {
        assert!(interior.iter().all(|&i| f.value(i) == 0.0));
    }
    // monotone onset on B₁
    let after: Vec<_> = u.fields().iter().filter(|f| f.time() >= 0.0).collect();
    for w in after.windows(2) {
        for &i in &interior {
            assert!(w[1].value(i) >= w[0].value(i) - 1e-14, "t = {}", w[1].time());
        }
    }

    let before = sol.times()[sol.times().len() / 4];
    assert!(before < 0.0);
    let samples: Vec<f64> = (4..=12).map(|k| 0.5f64.powi(k)).chain([before]).collect();
    let rep = certify_lower_bound(&sol, &spec, &samples).unwrap();
    assert!(rep.pass, "{rep:?}");
    // before the onset the bound holds with equality
    assert_eq!(rep.rows.last().unwrap().margin, 0.0);
    assert!(certify_lower_bound(&sol, &spec, &[0.3]).is_err());

    let gammas = [0.2, 0.5];
    let fail = certify_failure(&sol, &spec, &gammas, 1..=14).unwrap();
    for row in &fail.holder {
        let closed = spec.delta * (row.k as f64 * LN_2).powi(-2);
        assert_relative_eq!(row.lower, closed, max_relative = 1e-12);
        for (q, g) in row.quotient_lower.iter().zip(gammas) {
            assert_relative_eq!(*q, closed * 2f64.powf(g * row.k as f64), max_relative = 1e-12);
        }
        let u0 = row.u0.expect("dyadic times are stored");
        assert!(u0 >= row.lower * (1.0 - 1e-3));
    }
    for &(_, tail, ff) in &fail.tail_samples {
        assert!(tail >= fail.sandwich.0 * ff * (1.0 - 1e-12) && tail <= fail.sandwich.1 * ff * (1.0 + 1e-12));
    }
    // partial integrals grow with k
    assert!(fail
        .partial
        .windows(2)
        .all(|w| w[1].l1 > w[0].l1 && w[1].lp[1] > w[0].lp[1]));
    assert!(certify_failure(&sol, &spec, &gammas, 1..=5).is_err());
}

#[test]
fn holder_lower_bound_sequence_increases_from_k_20() {
    // δ = 1/6, γ = 0.2: (1/6)(k ln 2)^{−2} 2^{0.2k}
    let q = |k: f64| (1.0 / 6.0) * (k * LN_2).powi(-2) * 2f64.powf(0.2 * k);
    assert!((q(20.0) - 0.01387).abs() < 1e-5);
    assert!((q(40.0) - 0.05551).abs() < 1e-5);
    // d/dk log q = 0.2 ln 2 − 2/k > 0 once k > 10/ln 2 ≈ 14.4
    assert!((20..80).all(|k| q(k as f64 + 1.0) > q(k as f64)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn delta_star_is_positive_for_every_order(alpha in 0.1f64..1.95) {
        let p = FracParams::new(1, alpha, alpha.min(0.5), 1.0, 1.0).unwrap();
        let d = compute_delta(&p, &unit_ball(1.0 / 16.0)).unwrap();
        prop_assert!(d > 0.0);
    }
}
