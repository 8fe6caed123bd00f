#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod csf;
pub mod error;
pub mod lattice;
pub mod flow;
pub mod lozenge;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
