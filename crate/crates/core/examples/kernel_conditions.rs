//! Check the structural kernel conditions on a checkerboard coefficient:
//! two-sided bounds, symmetry, the cutoff integral, the UJS ratio and the
//! Poincaré and Sobolev ratios.
//!
//!     cargo run --release --example kernel_conditions

use nonlocal_lab::experiments::ball_grid;
use nonlocal_lab::kernels::{
    check_bounds, check_cutoff, check_poinc_sob, check_symmetry, check_ujs, CoefficientRule, FracParams, KernelSpec,
};

fn main() -> nonlocal_lab::Result<()> {
    let params = FracParams::new(2, 1.2, 0.5, 1.0, 2.0)?;
    let spec = KernelSpec::new(
        params,
        CoefficientRule::Checkerboard {
            cell: 0.25,
            low: 1.0,
            high: 2.0,
        },
    )?;
    let bounds = check_bounds(&spec, 2000, 1)?;
    println!(
        "bounds     pass={} a ∈ [{:.3}, {:.3}]",
        bounds.pass, bounds.min, bounds.max
    );
    let sym = check_symmetry(&spec, 2000, 2)?;
    println!("symmetry   pass={} max |K(x,y) − K(y,x)| = {:e}", sym.pass, sym.max);
    let cut = check_cutoff(&spec, &[0.25, 0.5, 1.0], 8, 3)?;
    println!(
        "cutoff     pass={} ρ^α ∫_{{|h|>ρ}} K ∈ [{:.4}, {:.4}]",
        cut.pass, cut.min, cut.max
    );
    let ujs = check_ujs(&spec, 200, 4)?;
    println!("ujs        pass={} ratio ∈ [{:.4}, {:.4}]", ujs.pass, ujs.min, ujs.max);

    // the Poincaré check is cheaper in one dimension
    let one_d = KernelSpec::fractional(1, 1.2)?;
    let ps = check_poinc_sob(&one_d, &ball_grid(1, 1.0 / 32.0)?, 50, 5)?;
    println!(
        "poincaré   min ratio {:.4}; sobolev min ratio {:.4} (exponent {})",
        ps.poincare.min, ps.sobolev.min, ps.sobolev_exponent
    );
    Ok(())
}
