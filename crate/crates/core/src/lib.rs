//! Numerical laboratory for nonlocal parabolic equations
//! `∂ₜu − Lₜu = f` driven by symmetric, time-dependent jump kernels.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernels`]: jump kernels `K(t;x,y) = a(t,x,y)(2−α)|x−y|^{−d−α}`, the
//!   singular axes measure, and sampled checks of the structural conditions
//!   (two-sided bounds, symmetry, cutoff, UJS, Poincaré/Sobolev).
//! - [`discretization`]: uniform grids with a truncated exterior ring,
//!   exterior data rules with analytic far-field completion, principal-value
//!   operator assembly, energy forms, seminorms and every tail functional.
//! - [`solver`]: explicit and implicit Euler time stepping with CFL guard,
//!   weak-residual auditing and the discrete comparison principle.
//! - [`verifier`]: parabolic cylinders and two-sided measurements of the
//!   Harnack, weak Harnack, local boundedness and Hölder inequalities,
//!   plus the axes-Harnack experiment and the absorption iteration.
//! - [`counterexample`]: the exterior-data construction whose solutions have
//!   an L¹-in-time tail but fail to be Hölder continuous at `t = 0`.
//! - [`config`] and [`runner`]: the file-driven experiment runner behind the
//!   `nonlocal-lab` binary.
//!
//! All randomness is seeded (default seed 0).

pub mod config;
pub mod counterexample;
pub mod discretization;
mod error;
pub mod experiments;
pub mod kernels;
pub mod quad;
pub mod runner;
pub mod solver;
pub mod verifier;

pub use error::{LabError, Result};

/// A point of `R^d`, `d ∈ {1, 2}`. In one dimension the second coordinate is zero.
pub type Point = [f64; 2];

/// Euclidean distance in the first `dim` coordinates.
#[inline]
pub fn distance(dim: usize, x: &Point, y: &Point) -> f64 {
    if dim == 1 {
        (x[0] - y[0]).abs()
    } else {
        (x[0] - y[0]).hypot(x[1] - y[1])
    }
}

/// Euclidean norm in the first `dim` coordinates.
#[inline]
pub fn norm(dim: usize, x: &Point) -> f64 {
    distance(dim, x, &[0.0, 0.0])
}

/// Surface measure of the unit sphere: 2 in one dimension, 2π in two.
#[inline]
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * std::f64::consts::PI
    }
}

/// Sum of a parallel iterator in iteration order. Rayon's own `sum` associates
/// by work-stealing splits, which changes the last bits from run to run.
pub(crate) fn ordered_sum(it: impl rayon::iter::ParallelIterator<Item = f64>) -> f64 {
    it.collect::<Vec<f64>>().iter().sum()
}
