//! Parabolic Hölder quotients of a bump solution on shrinking windows; for
//! smooth data the left side decreases with R for every γ < 1.
//!
//!     cargo run --release --example holder

use nonlocal_lab::discretization::ExteriorRule;
use nonlocal_lab::discretization::Field;
use nonlocal_lab::experiments::ball_grid;
use nonlocal_lab::kernels::KernelSpec;
use nonlocal_lab::solver::{solve, Scenario, Schedule, SolveOptions};
use nonlocal_lab::verifier::holder_report;

fn main() -> nonlocal_lab::Result<()> {
    let grid = ball_grid(1, 1.0 / 128.0)?;
    let ext = ExteriorRule::constant(0.5);
    let scenario = Scenario {
        kernel: KernelSpec::fractional(1, 1.0)?,
        grid: grid.clone(),
        t_start: 0.0,
        t_end: 1.0,
        initial: Field::new(grid.clone(), 0.0, ext.clone(), |x| 0.5 + (1.0 - x[0] * x[0]).powi(2)),
        exterior: ext,
        source: ExteriorRule::zero(),
        schedule: Schedule::Uniform { dt: 1.0 / 512.0 },
    };
    let sol = solve(&scenario, &SolveOptions::implicit())?;
    let gammas = [0.1, 0.25, 0.5];
    for r in [0.2, 0.1, 0.05] {
        let reps = holder_report(&sol, 0.9, &[0.0; 2], r, &gammas, 0.5)?;
        let cols: Vec<String> = reps
            .iter()
            .map(|rep| {
                format!(
                    "γ={}: {:.4e} (c = {:.3e})",
                    rep.provenance.extra["gamma"], rep.left, rep.constant
                )
            })
            .collect();
        println!("R = {r:<5} {}", cols.join("  "));
    }
    Ok(())
}
