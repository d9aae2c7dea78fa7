//! Scalar special functions: Airy, log-gamma, regularized incomplete gamma,
//! orthonormal weighted Laguerre functions, and the kernel profiles built
//! from them. Everything here is a pure function of its arguments.

mod airy;
mod gamma;
mod laguerre;

pub use airy::{airy_ai, airy_ai_prime};
pub use gamma::{log_gamma, regularized_gamma_p};
pub use laguerre::{
    kernel_phi, kernel_psi, laguerre_phi, laguerre_phi_sequence, scaled_laguerre, LaguerreParams,
    WishartPair,
};
