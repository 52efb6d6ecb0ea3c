//! Seeded ordered-data pairs: solve both members and report the largest
//! violation of `u¹ ≤ u²` over every node and stored step.
//!
//!     cargo run --release --example comparison -- 50

use nonlocal_lab::experiments::random_ordered_pair;
use nonlocal_lab::solver::{solutions_ordered, solve};

fn main() -> nonlocal_lab::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..n {
        let pair = random_ordered_pair(seed)?;
        let a = solve(&pair.lower, &pair.options)?;
        let b = solve(&pair.upper, &pair.options)?;
        let (ordered, w) = solutions_ordered(&a, &b, 1e-12)?;
        worst = worst.max(w);
        println!(
            "seed {seed:>3}  d={} α={:.3} {:?} steps={:>4}  max(u1-u2)={w:+.3e}  {}",
            pair.lower.grid.dim(),
            pair.lower.kernel.alpha(),
            pair.options.scheme,
            a.times().len(),
            if ordered { "ordered" } else { "VIOLATED" }
        );
    }
    println!("largest violation over {n} pairs: {worst:+.3e}");
    Ok(())
}
