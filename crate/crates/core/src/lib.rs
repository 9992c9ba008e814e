//! Numerical toolkit for the back-reaction of a physical clock on a quantum
//! measurement.
//!
//! A free-particle clock of mass `M` triggers a von Neumann measurement
//! `g(X)·Q·J` as it passes the interaction region. Units are `ħ = 1`
//! throughout. The crate is organized bottom-up:
//!
//! * [`numerics`] complex error function, adaptive Gauss–Kronrod quadrature
//!   and compensated summation.
//! * [`clock`] quality metrics of the free-particle clock.
//! * [`scattering`] transmission/reflection of the clock off the
//!   measurement potential (rectangular barrier and its impulsive limit).
//! * [`pointer`] final pointer wavefunction of the measuring device.
//! * [`entanglement`] post-selected clock states and the reduced system
//!   density matrix in the strong back-reaction limit.
//! * [`bounds`] accuracy bounds and the regime classifier.
//! * [`propagator`] split-step Fourier wavepacket evolution, used as an
//!   independent oracle for the stationary results.

pub mod bounds;
pub mod clock;
pub mod entanglement;
mod error;
pub mod numerics;
pub mod pointer;
pub mod propagator;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64;
