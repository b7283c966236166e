// NaN-rejecting `!(x > 0.0)` checks are deliberate; the training entry points take
// their inputs flat rather than through a builder.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod clustering;
pub mod mesh;
pub mod nn;
pub mod presets;
pub mod rl;
pub mod sparams;
pub mod surrogate;
