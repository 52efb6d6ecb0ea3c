//! The axes measure (jumps only along coordinate axes) on (−1, 1)²: a far
//! ball off both axis lines through B_R feeds B_R unevenly, so sup/inf grows
//! as the ball shrinks while the tail-inclusive constant stays controlled.
//!
//!     cargo run --release --example axes

use nonlocal_lab::experiments::AxesFamily;

fn main() -> nonlocal_lab::Result<()> {
    let family = AxesFamily::standard();
    println!(
        "α = {}, {} nodes per unit, R = {}, far ball at {:?}",
        family.alpha, family.n, family.r, family.center
    );
    for row in family.run()? {
        println!(
            "far radius {:<7} sup {:.4e}  inf {:.4e}  tail_axes {:.4e}  sup/inf {:.4}  with tail {:.4}",
            row.far_radius,
            row.report.summands["sup"],
            row.report.summands["inf"],
            row.report.summands["tail_axes"],
            row.tail_free,
            row.with_tail
        );
    }
    Ok(())
}
