//! As α → 2 the (2−α)-normalized operator approaches a multiple of the
//! Laplacian; compare a Gaussian bump against the local heat solution.
//!
//!     cargo run --release --example heat_limit

use nonlocal_lab::experiments::heat_limit;

fn main() -> nonlocal_lab::Result<()> {
    for alpha in [1.9, 1.99, 1.999] {
        let out = heat_limit(alpha, 1.0 / 128.0, 1e-4, 0.01)?;
        println!(
            "α = {alpha:<6} relative error on B_1/2 at t = {}: {:.4}",
            out.t, out.error
        );
    }
    Ok(())
}
