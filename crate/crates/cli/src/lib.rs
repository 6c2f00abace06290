//! Command-line front end for training, evaluating and studying magic point
//! integration models.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod family;
pub mod model_file;

pub use cli::run;
