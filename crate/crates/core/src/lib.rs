// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonians;
pub mod scenarios;

pub use error::{Error, Result};
