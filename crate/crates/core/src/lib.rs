// Range checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compensator;
pub mod error;
pub mod feasibility;
pub mod harness;
pub mod kinematics;
pub mod pathmodel;
pub mod planner;

pub use error::{Error, Result};
