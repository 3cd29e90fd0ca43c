#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod bounds;
pub mod dual;
pub mod error;
pub mod expr;
pub mod interval;
pub mod jet;
pub mod map;
pub mod quad;
pub mod scalar;
pub mod solver;
pub mod transfer;
pub mod validated;

pub use error::{Error, Result};
