//! The absorption lemma: from f(r) ≤ A(s−r)^{−γ} + C + θ f(s) on [R/2, R],
//! iterate along a geometric chain of radii to bound f(R/2).
//!
//!     cargo run --release --example iteration_lemma

use nonlocal_lab::verifier::{iterate_absorb, AbsorbInput};

fn main() -> nonlocal_lab::Result<()> {
    let geometric = AbsorbInput {
        a: 0.0,
        b: 0.0,
        c: 1.0,
        gamma1: 1.0,
        gamma2: 1.0,
        theta: 0.5,
        r: 1.0,
    };
    println!(
        "A = B = 0, C = 1, θ = 1/2: bound {}",
        iterate_absorb(&geometric, &[])?.bound
    );

    // f(r) = ρ/(1 − r) satisfies the hypothesis with A = ρ, γ = 1, any θ
    let rho = 0.3;
    let samples: Vec<(f64, f64)> = (0..50)
        .map(|k| 0.5 + k as f64 / 100.0)
        .map(|r| (r, rho / (1.0 - r)))
        .collect();
    for theta in [0.1, 0.5, 0.9] {
        let inp = AbsorbInput {
            a: rho,
            c: 0.0,
            theta,
            ..geometric
        };
        let out = iterate_absorb(&inp, &samples)?;
        println!(
            "θ = {theta}: τ = {:.4}, {} radii, bound {:.4} ≥ f(1/2) = {:.4}: {} (hypothesis on samples: {})",
            out.tau,
            out.chain.len(),
            out.bound,
            out.direct.unwrap(),
            out.holds,
            out.hypothesis_holds
        );
    }
    Ok(())
}
