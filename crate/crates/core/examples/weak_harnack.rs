//! Weak Harnack (mean plus tail against inf), local boundedness and the
//! Harnack inequality with tails on one bump solution, with every summand.
//!
//!     cargo run --release --example weak_harnack

use nonlocal_lab::experiments::bump_setup;
use nonlocal_lab::kernels::CoefficientRule;
use nonlocal_lab::solver::{solve, SolveOptions};
use nonlocal_lab::verifier::{harnack_with_tails, locbd_ratio, weak_harnack_ratio};

fn main() -> nonlocal_lab::Result<()> {
    let r = 0.125;
    let setup = bump_setup(1, 1.0, r, CoefficientRule::constant(1.0), 1.0 / 64.0, 1.0)?;
    let sol = solve(&setup.scenario, &SolveOptions::implicit())?;
    let x0 = [0.0; 2];
    for rep in [
        weak_harnack_ratio(&sol, setup.t0, &x0, r)?,
        locbd_ratio(&sol, setup.t0, &x0, r)?,
        harnack_with_tails(&sol, setup.t0, &x0, r)?,
    ] {
        println!(
            "{:<18} {:.4} / {:.4} = {:.4}",
            rep.id, rep.left, rep.right, rep.constant
        );
        for (k, v) in &rep.summands {
            println!("    {k:<10} {v:.6}");
        }
    }
    Ok(())
}
