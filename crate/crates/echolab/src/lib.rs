//! Echoes, purity decay and phase-space diagnostics for kicked quantum maps.
//!
//! Three Floquet engines are provided: the kicked rotator on the torus, the
//! kicked top, and a pair of rotators coupled through a long-range kick.
//! Everything else is built on top of them.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod echoes;
pub mod entanglement;
mod error;
mod linalg;
pub mod phasespace;
pub mod qstate;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
