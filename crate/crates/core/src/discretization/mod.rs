//! Grids, fields with exterior rules, operator assembly, energy forms,
//! seminorms and tail functionals.

mod energy;
mod exterior;
mod field;
mod grid;
mod line;
mod operator;
mod tail;
mod weights;

pub use energy::{energy_form, norm_l1alpha, norm_v_squared, seminorm_h, seminorm_v, EnergyRegion};
pub use exterior::{ExteriorRule, ExteriorShape, ExteriorTerm, SourceRule, TimeProfile};
pub(crate) use field::time_tol;
pub use field::{Field, SpaceTimeField};
pub use grid::{DomainShape, Grid, GridSpec};
pub use line::ValueMap;
pub use operator::{assemble_axes_operator, assemble_operator, Operator};
pub use tail::{
    tail, tail_axes_fun, tail_estimate, tail_k_fun, tail_l1_averaged, tail_l1_in_time, tail_linf_in_time,
    tail_lp_averaged, tail_lp_in_time, tail_series, time_aggregate, TailEstimate, TimeNorm,
};
pub use weights::{central_moment, far_weight_1d, far_weight_2d, OffsetTable};
