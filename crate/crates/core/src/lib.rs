//! Curve diffusion flow of an open planar curve with contact angle, solved as a
//! fourth-order height-function PDE over a reference curve.

// NaN must fail range checks, so `!(x > 0.0)` is deliberate; numeric kernels index by position.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod discrete;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod jet;
pub mod norms;
pub mod oracle;
pub mod pde;
pub mod quad;
pub mod refcurve;
pub mod refit;
pub mod solver;

pub use error::{FlowError, Result};
