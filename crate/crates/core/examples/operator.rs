//! Assemble the discrete operator on B₁ ⊂ R and apply it to data with known
//! answers: constants are annihilated, and the exterior indicator of the
//! annulus 2 < |y| < 3 gives L[1_A](x) = ∫_A K(x, y) dy, which is
//! 1/(2−x) − 1/(3−x) + 1/(2+x) − 1/(3+x) at α = 1.
//!
//!     cargo run --release --example operator

use nonlocal_lab::discretization::{assemble_operator, ExteriorRule, Field};
use nonlocal_lab::experiments::ball_grid;
use nonlocal_lab::kernels::KernelSpec;

fn main() -> nonlocal_lab::Result<()> {
    let spec = KernelSpec::fractional(1, 1.0)?;
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let grid = ball_grid(1, h)?;
        let op = assemble_operator(&spec, &grid, 0.0)?;
        let m = op.matrix();
        let asym = (m - m.transpose()).amax();

        let one = Field::constant(grid.clone(), 0.0, 1.0);
        let l_one = op.apply(&one)?.iter().fold(0.0f64, |a, v| a.max(v.abs()));

        let ind = Field::new(grid.clone(), 0.0, ExteriorRule::annulus(2.0, 3.0, 1.0), |_| 0.0);
        let l_ind = op.apply(&ind)?;
        let exact = |x: f64| 1.0 / (2.0 - x) - 1.0 / (3.0 - x) + 1.0 / (2.0 + x) - 1.0 / (3.0 + x);
        let err = grid
            .interior_nodes()
            .iter()
            .zip(&l_ind)
            .map(|(&i, v)| (v - exact(grid.coord(i)[0])).abs())
            .fold(0.0, f64::max);
        println!(
            "h = 1/{:<3} n = {:>3}  |A − Aᵀ| = {asym:.1e}  max|L1| = {l_one:.1e}  max|L1_A − exact| = {err:.2e}  max diag {:.1}",
            (1.0 / h).round(),
            grid.n_interior(),
            op.max_diagonal()
        );
    }
    Ok(())
}
