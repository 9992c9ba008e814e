use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("complex error function saturated at z = {z}")]
    Saturated { z: Complex64, value: Complex64 },

    #[error(
        "quadrature did not converge after {evaluations} evaluations \
         (best estimate {value}, error estimate {error_estimate:e})"
    )]
    QuadratureNonConvergence {
        value: Complex64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("zero incident momentum")]
    ZeroMomentum,

    #[error("no classical traversal: the clock tunnels through the barrier (q^2 = {q_squared:e})")]
    NoClassicalTraversal { q_squared: f64 },

    #[error("alpha = 0: the pointer is the free Gaussian, use the quadrature route")]
    ZeroAlpha,

    #[error("pointer grid too narrow: {reason}")]
    GridTooNarrow { reason: String },

    #[error("post-selection has zero probability")]
    EmptyBranch,

    #[error("clock at ground state: E_C = {e_c} <= E0 = {e0}")]
    ClockAtGroundState { e_c: f64, e0: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("time step violates stability heuristic: dt*max|V| = {potential:.3e}, dt*k_max^2/2M = {kinetic:.3e} (both must be <= 0.1)")]
    UnstableStep { potential: f64, kinetic: f64 },

    #[error("wavepacket reached the grid boundary: relative amplitude {magnitude:e} >= 1e-8")]
    BoundaryLeak { magnitude: f64 },

    #[error("scattering not complete: {probability:e} of the probability is still inside the interaction region")]
    ScatteringIncomplete { probability: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
