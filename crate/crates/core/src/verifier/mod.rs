//! Parabolic cylinders and two-sided measurements of the Harnack, weak
//! Harnack, local boundedness and Hölder inequalities, the axes Harnack
//! experiment, the L²-tail finiteness ratio and the absorption lemma. Constants are measured, never asserted.

mod cylinder;
mod finiteness;
mod inequalities;
mod iteration;
mod report;

pub use cylinder::{cyl_stats, cyl_stats_mapped, CylStats, Cylinder, CylinderKind, Resolved};
pub use finiteness::{tail_finiteness, FinitenessSample};
pub use inequalities::{
    axes_harnack, constant_range, harnack_quotient, harnack_with_tails, holder_report, locbd_ratio, weak_harnack_ratio,
    HOLDER_MIN_PAIRS,
};
pub use iteration::{iterate_absorb, AbsorbInput, AbsorbOutcome};
pub use report::{write_reports_csv, Provenance, Report, Status};
