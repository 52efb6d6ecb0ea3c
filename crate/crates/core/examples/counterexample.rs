//! The non-Hölder solution: exterior data δ f(t) + f'(t) 1_{2<|x|<3} with
//! f = (ln t)^{−2}. u(t, 0) stays above δ f(t), so u(t, 0)/t^γ blows up as
//! t → 0⁺, while ∫ tail dt converges and ∫ tail^{1+γ} dt keeps growing.
//!
//!     cargo run --release --example counterexample -- 30

use nonlocal_lab::counterexample::{build_counterexample, certify_failure, certify_lower_bound, CounterexampleSpec};
use nonlocal_lab::experiments::ball_grid;
use nonlocal_lab::kernels::FracParams;
use nonlocal_lab::solver::{solve, SolveOptions};

fn main() -> nonlocal_lab::Result<()> {
    let k_max: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let spec = CounterexampleSpec::new(FracParams::fractional(1, 1.0)?, ball_grid(1, 1.0 / 16.0)?, k_max)?;
    println!(
        "δ* = {:.6}  δ = {:.6}  certificate margin {:.6} (need ≥ {:.6})",
        spec.delta_star,
        spec.delta,
        spec.certificate_margin,
        spec.delta_star / 2.0
    );
    let sol = solve(&build_counterexample(&spec)?, &SolveOptions::implicit())?;
    let times: Vec<f64> = (4..=12).map(|k| 0.5f64.powi(k)).collect();
    let lower = certify_lower_bound(&sol, &spec, &times)?;
    println!("u ≥ δ f − tol at 2^-4 … 2^-12: {}", lower.pass);

    let gammas = [0.2, 0.5];
    let rep = certify_failure(&sol, &spec, &gammas, 1..=k_max)?;
    println!("  k   u(t_k,0)     δf(t_k)      u/t^0.2      ∫tail        ∫tail^1.5");
    for (h, p) in rep
        .holder
        .iter()
        .zip(std::iter::once(None).chain(rep.partial.iter().map(Some)))
    {
        if h.k % 5 != 0 {
            continue;
        }
        let (l1, lp) = p.map_or((f64::NAN, f64::NAN), |p| (p.l1, p.lp[1]));
        println!(
            "{:>3}   {:.4e}   {:.4e}   {:.4e}   {:.6}   {:.6}",
            h.k,
            h.u0.unwrap_or(f64::NAN),
            h.lower,
            h.quotient[0].unwrap_or(f64::NAN),
            l1,
            lp
        );
    }
    Ok(())
}
