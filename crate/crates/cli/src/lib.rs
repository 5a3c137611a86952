//! Command-line front end: configuration, orchestration and export.

// NaN must fail the range checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
