// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fuzzy;
pub mod harness;
pub mod linalg;
pub mod mpc;
pub mod optimizer;
pub mod plant;
pub mod reference;
