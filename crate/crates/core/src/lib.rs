// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod fidelity;
pub mod filtering;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod report;
pub mod states;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
