//! Brascamp–Lieb data on finite, possibly non-abelian, groups given by
//! multiplication tables.
//!
//! Functions are weighted by `s_j ∈ [0, 1]`; the exponent form uses
//! `s_j = 1/p_j`. A factor with `s_j = 0` sees only the support of its input.

mod datum;
mod iterate;
mod table;

pub use datum::{
    ball_inequality_check, bl_constant_finite, bl_functional, bl_functional_exact, convolve, indicator_family,
    BallCheck, FiniteBLDatum, FiniteConfig, FiniteConstant,
};
pub use iterate::{convolution_limit, extremiser_iteration, ConvolutionLimit, ExtremiserIteration, IterationConfig};
pub use table::{enumerate_subgroups_nonabelian, FiniteGroupTable, LawViolation, TableSubgroup, DEFAULT_FINITE_ORDER_CAP};
