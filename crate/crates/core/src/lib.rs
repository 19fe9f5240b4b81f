#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these guards
pub mod data;
pub mod dist;
pub mod error;
pub mod inference;
pub mod order_stats;
pub mod quadrature;
pub mod series;
pub mod specfun;

pub use dist::{Bge, BgeParams, OriginDensity, Sample};
pub use error::{Error, Result};
