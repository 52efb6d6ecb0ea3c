use std::sync::Arc;

use approx::assert_relative_eq;
use nonlocal_lab::discretization::{DomainShape, ExteriorRule, Field, Grid, GridSpec, SpaceTimeField};
use nonlocal_lab::experiments::ball_grid;
use nonlocal_lab::kernels::{FracParams, KernelSpec};
use nonlocal_lab::solver::{solve, Scenario, Schedule, Solution, SolveOptions};
use nonlocal_lab::verifier::{
    axes_harnack, cyl_stats, harnack_quotient, harnack_with_tails, holder_report, iterate_absorb, locbd_ratio,
    weak_harnack_ratio, AbsorbInput, Cylinder, CylinderKind, Status,
};
use nonlocal_lab::Point;
use proptest::prelude::*;

const ORIGIN: Point = [0.0, 0.0];

fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

/// A stored solution built from a closed-form field; the verifier only reads values.
fn synthetic(grid: &Arc<Grid>, alpha: f64, times: &[f64], f: impl Fn(f64) -> Field) -> Solution {
    Solution {
        field: SpaceTimeField::from_fn(times, f).unwrap(),
        kernel: KernelSpec::fractional(grid.dim(), alpha).unwrap(),
        diagnostics: Vec::new(),
        truncation: Vec::new(),
    }
}

fn constant(c: f64) -> Solution {
    let g = ball_grid(1, 1.0 / 64.0).unwrap();
    synthetic(&g, 1.0, &uniform_times(1.0, 128), |t| Field::constant(g.clone(), t, c))
}

#[test]
fn constant_one_gives_closed_form_constants() {
    let u = constant(1.0);
    let r = 0.125;
    assert_eq!(harnack_quotient(&u, 0.5, &ORIGIN, r).unwrap().constant, 1.0);
    // 1 + tail(1; R) = 1 + 2/R in d = 1, α = 1
    let w = weak_harnack_ratio(&u, 0.5, &ORIGIN, r).unwrap();
    assert_relative_eq!(w.constant, 17.0, max_relative = 1e-12);
    assert_relative_eq!(w.summand("tail").unwrap(), 16.0, max_relative = 1e-12);
    let l = locbd_ratio(&u, 0.5, &ORIGIN, r).unwrap();
    assert_eq!(l.left, 1.0);
    assert_relative_eq!(l.right, 17.0, max_relative = 1e-12);
    assert!(l.constant <= 1.0);
}

#[test]
fn zero_solution_gives_degenerate_reports() {
    let u = constant(0.0);
    let reports = [
        harnack_quotient(&u, 0.5, &ORIGIN, 0.125).unwrap(),
        harnack_with_tails(&u, 0.5, &ORIGIN, 0.125).unwrap(),
        weak_harnack_ratio(&u, 0.5, &ORIGIN, 0.125).unwrap(),
        locbd_ratio(&u, 0.5, &ORIGIN, 0.125).unwrap(),
    ];
    for r in &reports {
        assert_eq!(r.status, Status::Degenerate, "{}", r.id);
        assert!(r.constant.is_nan());
    }
}

#[test]
fn containment_is_enforced() {
    let u = constant(1.0);
    // I_{4R}(t0) leaves [0, 1]
    assert!(harnack_quotient(&u, 0.3, &ORIGIN, 0.125).is_err());
    // B_{4R} leaves the unit ball
    assert!(weak_harnack_ratio(&u, 0.5, &[0.6, 0.0], 0.125).is_err());
    // negative values are rejected where the theorem assumes u ≥ 0
    assert!(harnack_quotient(&constant(-1.0), 0.5, &ORIGIN, 0.125).is_err());
}

#[test]
fn negative_part_tail_on_an_annulus() {
    // u = 0 in Ω and −1 on 2 < |y| < 3: tail(u₋; 1/2) = 2(1/2 − 1/3) = 1/3
    let g = ball_grid(1, 1.0 / 64.0).unwrap();
    let u = synthetic(&g, 1.0, &uniform_times(1.0, 64), |t| {
        Field::new(g.clone(), t, ExteriorRule::annulus(2.0, 3.0, -1.0), |_| 0.0)
    });
    let r = harnack_with_tails(&u, 0.5, &ORIGIN, 0.125).unwrap();
    assert_relative_eq!(r.summand("tail_minus").unwrap(), 1.0 / 3.0, max_relative = 1e-12);
    assert_eq!(r.left, 0.0);
    assert_eq!(r.constant, 0.0);
    // the plain Harnack quotient refuses a sign-changing solution
    assert!(harnack_quotient(&u, 0.5, &ORIGIN, 0.125).is_err());
}

fn bump_solution() -> Solution {
    let grid = ball_grid(1, 1.0 / 64.0).unwrap();
    let ext = ExteriorRule::zero();
    let sc = Scenario {
        kernel: KernelSpec::fractional(1, 1.0).unwrap(),
        grid: grid.clone(),
        t_start: 0.0,
        t_end: 1.0,
        initial: Field::new(grid.clone(), 0.0, ext.clone(), |x| (1.0 - 4.0 * x[0] * x[0]).max(0.0)),
        exterior: ext,
        source: ExteriorRule::zero(),
        schedule: Schedule::Uniform { dt: 1.0 / 128.0 },
    };
    solve(&sc, &SolveOptions::implicit()).unwrap()
}

#[test]
fn nonnegative_solutions_are_consistent_across_inequalities() {
    let u = bump_solution();
    let (t0, r) = (0.5, 0.125);
    let h = harnack_quotient(&u, t0, &ORIGIN, r).unwrap();
    let ht = harnack_with_tails(&u, t0, &ORIGIN, r).unwrap();
    let w = weak_harnack_ratio(&u, t0, &ORIGIN, r).unwrap();
    assert_eq!(h.status, Status::Finite);
    assert!(h.constant >= 1.0 && h.constant.is_finite());
    assert_eq!(ht.summand("sup"), h.summand("sup"));
    assert_eq!(ht.summand("tail_minus"), Some(0.0));
    // means never exceed sups
    assert!(w.summand("mean").unwrap() <= h.summand("sup").unwrap());
    let l = locbd_ratio(&u, t0, &ORIGIN, r).unwrap();
    assert!(l.constant.is_finite() && l.constant > 0.0);
}

#[test]
fn holder_examples() {
    let grid = ball_grid(1, 1.0 / 64.0).unwrap();
    let times = uniform_times(1.0, 1024);
    let c = synthetic(&grid, 1.0, &times, |t| Field::constant(grid.clone(), t, 2.0));
    for rep in holder_report(&c, 0.9, &ORIGIN, 0.2, &[0.1, 0.5], 0.5).unwrap() {
        assert_eq!(rep.left, 0.0);
        assert_eq!(rep.status, Status::Finite);
    }

    // u = x₁: the quotient peaks at the widest spatial pair, about R^γ (2R)^{1−γ}
    let lin = synthetic(&grid, 1.0, &times, |t| {
        Field::new(grid.clone(), t, ExteriorRule::zero(), |x| x[0])
    });
    let gammas = [0.1, 0.5, 0.9];
    let mut prev = vec![f64::INFINITY; gammas.len()];
    for r in [0.2, 0.12, 0.07] {
        let reps = holder_report(&lin, 0.9, &ORIGIN, r, &gammas, 0.5).unwrap();
        for ((rep, &g), p) in reps.iter().zip(&gammas).zip(prev.iter_mut()) {
            let ceiling = r.powf(g) * (2.0 * r).powf(1.0 - g);
            assert!(rep.left <= ceiling * (1.0 + 1e-12), "{} > {ceiling}", rep.left);
            assert!(rep.left >= 0.5 * ceiling);
            assert!(rep.left < *p);
            *p = rep.left;
        }
    }

    assert!(holder_report(&lin, 0.9, &ORIGIN, 0.2, &[1.0], 0.5).is_err());
    assert!(holder_report(&lin, 0.9, &ORIGIN, 0.2, &[0.5], 0.0).is_err());
}

#[test]
fn cylinder_statistics_examples() {
    let grid = ball_grid(1, 1.0 / 32.0).unwrap();
    let times = uniform_times(2.0, 128);
    let three = synthetic(&grid, 1.0, &times, |t| Field::constant(grid.clone(), t, 3.0));
    let cyl = Cylinder::new(CylinderKind::IMinus, 1.0, ORIGIN, 0.5, 1.0);
    let s = cyl_stats(&three.field, &cyl).unwrap();
    assert_eq!((s.sup, s.inf, s.mean, s.l2_mean), (3.0, 3.0, 3.0, 3.0));

    // u = t on I⊖_1(1) with α = 1; open interval, so the extremes are one step in
    let dt = 2.0 / 128.0;
    let lin = synthetic(&grid, 1.0, &times, |t| {
        Field::new(grid.clone(), t, ExteriorRule::zero(), move |_| t)
    });
    let s = cyl_stats(&lin.field, &Cylinder::new(CylinderKind::IMinus, 1.0, ORIGIN, 1.0, 1.0)).unwrap();
    assert_relative_eq!(s.sup, 1.0 - dt, max_relative = 1e-12);
    assert_relative_eq!(s.inf, dt, max_relative = 1e-12);
    assert!((s.mean - 0.5).abs() <= dt);

    let tiny = Cylinder::new(CylinderKind::IMinus, 1.0, ORIGIN, 0.01, 1.0);
    assert!(cyl_stats(&lin.field, &tiny).is_err());
}

#[test]
fn cylinder_geometry() {
    let grid = ball_grid(1, 1.0 / 32.0).unwrap();
    let times = uniform_times(2.0, 128);
    let u = synthetic(&grid, 1.0, &times, |t| Field::constant(grid.clone(), t, 0.0));
    let (t0, r) = (1.0, 0.25);
    let res = |kind| Cylinder::new(kind, t0, ORIGIN, r, 1.0).resolve(&u.field).unwrap();
    let (minus, plus, full) = (
        res(CylinderKind::IMinus),
        res(CylinderKind::IPlus),
        res(CylinderKind::I),
    );
    assert!(minus.slices.iter().all(|s| !plus.slices.contains(s)));
    let k0 = u.field.index_at(t0).unwrap();
    let mut union: Vec<usize> = minus.slices.iter().chain(&plus.slices).copied().collect();
    union.sort();
    let expect: Vec<usize> = full.slices.iter().copied().filter(|&k| k != k0).collect();
    assert_eq!(union, expect);
    assert_eq!(minus.nodes, full.nodes);

    let c = |kind| Cylinder::new(kind, 1.0, ORIGIN, 0.4, 1.5);
    assert_eq!(c(CylinderKind::D).ball_radius(), 0.8);
    assert_relative_eq!(c(CylinderKind::DHat).ball_radius(), 1.2);
    let (a, b) = c(CylinderKind::DMinus).time_interval();
    assert_relative_eq!(a, 1.0 - 2.0 * 0.4f64.powf(1.5));
    assert_relative_eq!(b - a, 0.2f64.powf(1.5));
}

#[test]
fn iteration_lemma_examples() {
    let geometric = AbsorbInput {
        a: 0.0,
        b: 0.0,
        c: 1.0,
        gamma1: 1.0,
        gamma2: 1.0,
        theta: 0.5,
        r: 1.0,
    };
    assert_eq!(iterate_absorb(&geometric, &[]).unwrap().bound, 2.0);

    let zero = AbsorbInput {
        a: 1.0,
        c: 0.0,
        theta: 0.25,
        ..geometric
    };
    let samples: Vec<(f64, f64)> = (0..=16).map(|k| (0.5 + k as f64 / 32.0, 0.0)).collect();
    let out = iterate_absorb(&zero, &samples).unwrap();
    assert!(out.hypothesis_holds && out.holds && out.bound >= 0.0);
    assert_eq!(out.direct, Some(0.0));
    // τ must satisfy θ τ^{−γ} < 1
    assert!(out.tau > 0.25 && out.tau < 1.0);
    assert_eq!(out.chain[0], 0.5);
    assert!(out.chain.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));

    // f = ρ/(1 − r) satisfies the hypothesis with A = ρ, γ₁ = 1, since 1 − r ≥ s − r
    let rho = 0.3;
    let blowup = AbsorbInput {
        a: rho,
        theta: 0.5,
        ..zero
    };
    let samples: Vec<(f64, f64)> = (0..50)
        .map(|k| 0.5 + k as f64 / 100.0)
        .map(|r| (r, rho / (1.0 - r)))
        .collect();
    let out = iterate_absorb(&blowup, &samples).unwrap();
    assert!(out.hypothesis_holds);
    assert_eq!(out.direct, Some(2.0 * rho));
    assert!(out.holds && out.bound >= 2.0 * rho);

    assert!(iterate_absorb(&AbsorbInput { theta: 1.0, ..zero }, &[]).is_err());
    assert!(iterate_absorb(&zero, &[(0.2, 0.0)]).is_err());
}

#[test]
fn axes_constant_solution() {
    let grid = Arc::new(
        Grid::new(GridSpec {
            dim: 2,
            shape: DomainShape::Box,
            radius: 1.0,
            r_trunc: 3.0,
            h: 1.0 / 32.0,
        })
        .unwrap(),
    );
    let spec = KernelSpec::axes(FracParams::fractional(2, 1.0).unwrap()).unwrap();
    let u = Solution {
        field: SpaceTimeField::from_fn(&uniform_times(1.0, 64), |t| Field::constant(grid.clone(), t, 1.0)).unwrap(),
        kernel: spec,
        diagnostics: Vec::new(),
        truncation: Vec::new(),
    };
    let r = axes_harnack(&u, 0.5, &ORIGIN, 0.125).unwrap();
    assert_eq!(r.summand("tail_free_constant"), Some(1.0));
    assert!(r.constant < 1.0);
    // a non-axes solution is refused
    assert!(axes_harnack(&constant(1.0), 0.5, &ORIGIN, 0.125).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn enlarging_a_cylinder_widens_its_range(
        vals in prop::collection::vec(-1.0f64..1.0, 33 * 65),
        t0 in 0.8f64..1.0,
        r in 0.1f64..0.3,
    ) {
        let grid = ball_grid(1, 1.0 / 16.0).unwrap();
        let n = grid.n_interior();
        let times = uniform_times(1.0, 64);
        let u = SpaceTimeField::from_fn(&times, |t| {
            let k = (t * 64.0).round() as usize;
            Field::from_interior(grid.clone(), t, ExteriorRule::zero(), &vals[k * n..(k + 1) * n]).unwrap()
        })
        .unwrap();
        let small = cyl_stats(&u, &Cylinder::new(CylinderKind::IMinus, t0, ORIGIN, r, 1.0));
        let big = cyl_stats(&u, &Cylinder::new(CylinderKind::D, t0, ORIGIN, r, 1.0));
        if let (Ok(s), Ok(b)) = (small, big) {
            prop_assert!(b.sup >= s.sup && b.inf <= s.inf);
            // brute-force scan of the stored values
            let res = Cylinder::new(CylinderKind::IMinus, t0, ORIGIN, r, 1.0).resolve(&u).unwrap();
            let scan = res.slices.iter().flat_map(|&k| res.nodes.iter().map(move |&i| (k, i)))
                .map(|(k, i)| u.fields()[k].value(i))
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(scan, s.sup);
            prop_assert!(s.inf <= s.mean && s.mean <= s.sup && s.mean.abs() <= s.l2_mean + 1e-15);
        }
    }

    #[test]
    fn absorb_bound_grows_with_the_data(
        a in 0.0f64..2.0,
        c in 0.0f64..2.0,
        theta in 0.05f64..0.9,
        gamma in 0.1f64..3.0,
        extra in 0.01f64..1.0,
    ) {
        let inp = AbsorbInput { a, b: 0.0, c, gamma1: gamma, gamma2: gamma, theta, r: 1.0 };
        let lo = iterate_absorb(&inp, &[]).unwrap().bound;
        let hi = iterate_absorb(&AbsorbInput { c: c + extra, ..inp }, &[]).unwrap().bound;
        prop_assert!(hi > lo && lo >= c / (1.0 - theta) * (1.0 - 1e-12));

        // a constant f = c/(1 − θ) satisfies the hypothesis with equality at A = 0, so the bound reaches it
        let fc = c / (1.0 - theta);
        let samples: Vec<(f64, f64)> = (0..=10).map(|k| (0.5 + k as f64 / 20.0, fc)).collect();
        let out = iterate_absorb(&inp, &samples).unwrap();
        prop_assert!(out.hypothesis_holds && out.holds);
    }
}
