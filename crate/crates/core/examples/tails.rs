//! Tail functionals of exterior data with closed forms, and the L² tail
//! bound ∫ tail² ≤ C ∫ ‖u‖²_V on random space-time fields.
//!
//!     cargo run --release --example tails

use nonlocal_lab::discretization::{tail, tail_k_fun, ExteriorRule, Field};
use nonlocal_lab::experiments::{ball_grid, tail_finiteness_family};
use nonlocal_lab::kernels::KernelSpec;

fn main() -> nonlocal_lab::Result<()> {
    let grid = ball_grid(1, 1.0 / 32.0)?;
    let x0 = [0.0; 2];
    let one = Field::constant(grid.clone(), 0.0, 1.0);
    let annulus = Field::new(grid.clone(), 0.0, ExteriorRule::annulus(2.0, 3.0, 1.0), |_| 0.0);
    for alpha in [0.5, 1.0, 1.5] {
        println!(
            "α = {alpha}: tail(1; 1) = {:.6} (exact {:.6}), tail(1_A; 1) = {:.6}",
            tail(&one, alpha, 1.0, &x0)?,
            (2.0 - alpha) * 2.0 / alpha,
            tail(&annulus, alpha, 1.0, &x0)?
        );
    }
    let spec = KernelSpec::fractional(1, 1.0)?;
    println!(
        "tail_K(1; 1/2, 1) = {:.6} (exact {:.6})",
        tail_k_fun(&one, &spec, 0.5, 1.0, &x0)?,
        2.0 + 2.0 / 3.0
    );

    let samples = tail_finiteness_family(20, 0)?;
    let worst = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    println!("∫tail² / ∫‖u‖²_V over 20 random fields: max {worst:.4}");
    Ok(())
}
