//! Block decomposition of the pinning-control stability problem on
//! undirected networks, with per-block Lyapunov exponents and direct
//! simulation checks.

pub mod control;
pub mod equitable;
pub mod error;
pub mod hatdecomp;
pub mod netmodel;
pub mod numkernel;
pub mod report;
pub mod sbd;
pub mod stability;

pub use error::{Error, ErrorClass, Result};
pub use numkernel::{Matrix, Tolerance, Vector};
