//! Numerics for the largest eigenvalue of complex white Wishart matrices:
//! exact finite-size distributions via Fredholm determinants, the
//! Tracy-Widom limit computed two independent ways, refined centering and
//! scaling sequences, and the sweep drivers that measure how fast the
//! finite-size law approaches its limit.

pub mod error;
pub mod lg;
pub mod finite_n;
pub mod mc;
pub mod operators;
pub mod linalg;
pub mod quad;
pub mod rates;
pub mod sequences;
pub mod tw;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::WishartPair;
