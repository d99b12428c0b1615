// NaN-rejecting guards are written as `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod monomials;
pub mod operator;
pub mod report;
pub mod seminorm;
pub mod symbols;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
