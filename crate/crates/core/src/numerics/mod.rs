//! Special functions and quadrature kernels shared by the physics modules.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! many threads at once; the only shared state is an immutable coefficient
//! table initialized on first use.

mod erf;
mod quadrature;
mod summation;

pub use erf::{erf, erfc, erfc_checked, erfcx, faddeeva};
pub use quadrature::{integrate_adaptive, Integrator, QuadratureResult};
pub use summation::{compensated_sum, compensated_sum_complex, NeumaierSum};
