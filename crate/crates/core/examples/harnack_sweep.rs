//! Harnack quotients sup/inf for bump data over α and R, constant and
//! checkerboard coefficients. The spread of the measured constants across the
//! sweep is what the inequality predicts to stay bounded.
//!
//!     cargo run --release --example harnack_sweep

use nonlocal_lab::experiments::bump_setup;
use nonlocal_lab::kernels::CoefficientRule;
use nonlocal_lab::solver::{solve, SolveOptions};
use nonlocal_lab::verifier::harnack_quotient;

fn main() -> nonlocal_lab::Result<()> {
    let coefficients = [
        ("constant", CoefficientRule::constant(1.0)),
        (
            "checkerboard",
            CoefficientRule::Checkerboard {
                cell: 1.0 / 16.0,
                low: 1.0,
                high: 2.0,
            },
        ),
    ];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (name, rule) in &coefficients {
        for alpha in [0.5, 1.0, 1.5, 1.9] {
            for r in [0.125, 0.25] {
                let setup = bump_setup(1, alpha, r, rule.clone(), 1.0 / 64.0, 1.0)?;
                let sol = solve(&setup.scenario, &SolveOptions::implicit())?;
                let rep = harnack_quotient(&sol, setup.t0, &[0.0; 2], r)?;
                lo = lo.min(rep.constant);
                hi = hi.max(rep.constant);
                println!("{name:<13} α = {alpha:<4} R = {r:<6} sup/inf = {:.4}", rep.constant);
            }
        }
    }
    println!("range [{lo:.4}, {hi:.4}], max/min = {:.4}", hi / lo);
    Ok(())
}
