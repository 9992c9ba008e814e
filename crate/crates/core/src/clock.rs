//! Free-particle clock `H_C = P²/2M` read through the approximate time
//! operator `τ = X / (⟨P⟩/M)`.
//!
//! Clock states are minimal-uncertainty Gaussians, so the momentum spread is
//! fixed by the position spread: `ΔP = 1/(2ΔX)`.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Clock quality below which the clock is not considered usable.
pub const GOOD_CLOCK_RATIO: f64 = 10.0;
/// Largest tolerated relative deviation of `[τ, H_C]` from `i`.
pub const GOOD_CLOCK_COMMUTATOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockSpec {
    mass: f64,
    mean_momentum: f64,
    position_spread: f64,
}

impl ClockSpec {
    pub fn new(mass: f64, mean_momentum: f64, position_spread: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass),
            ("mean_momentum", mean_momentum),
            ("position_spread", position_spread),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        Ok(Self {
            mass,
            mean_momentum,
            position_spread,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mean_momentum(&self) -> f64 {
        self.mean_momentum
    }

    /// ΔX(0).
    pub fn position_spread(&self) -> f64 {
        self.position_spread
    }

    pub fn momentum_spread(&self) -> f64 {
        0.5 / self.position_spread
    }

    /// Mean kinetic energy of the mean momentum, `⟨P⟩²/2M`.
    pub fn kinetic_energy(&self) -> f64 {
        self.mean_momentum * self.mean_momentum / (2.0 * self.mass)
    }

    /// `Ē = (⟨P⟩² + ΔP²)/2M`.
    pub fn mean_energy(&self) -> f64 {
        let dp = self.momentum_spread();
        (self.mean_momentum * self.mean_momentum + dp * dp) / (2.0 * self.mass)
    }

    /// Leading-order energy spread `⟨P⟩ΔP/M`.
    pub fn energy_spread(&self) -> f64 {
        self.mean_momentum * self.momentum_spread() / self.mass
    }

    /// Exact energy spread of the Gaussian state:
    /// `Var(P²) = 4⟨P⟩²ΔP² + 2ΔP⁴`.
    pub fn energy_spread_exact(&self) -> f64 {
        let p = self.mean_momentum;
        let dp = self.momentum_spread();
        (4.0 * p * p * dp * dp + 2.0 * dp.powi(4)).sqrt() / (2.0 * self.mass)
    }

    /// Clock velocity `⟨P⟩/M`, the conversion factor between `X` and `τ`.
    pub fn velocity(&self) -> f64 {
        self.mean_momentum / self.mass
    }
}

/// Time uncertainty of the clock after an elapsed time `tau`:
/// `Δτ(τ) = (ΔX(0)·M/⟨P⟩)·√(1 + τ²/(M²ΔX(0)⁴))`.
///
/// This is the customary estimate quoted for the free-particle clock. For the
/// standard deviation of a minimal-uncertainty packet the exact spreading law
/// is [`position_spread_at`], whose time scale is `2MΔX²` rather than `MΔX²`.
pub fn time_uncertainty(clock: &ClockSpec, tau: f64) -> f64 {
    let dx = clock.position_spread;
    let m = clock.mass;
    let ratio = tau / (m * dx * dx);
    dx / clock.velocity() * ratio.hypot(1.0)
}

/// Exact standard deviation of a freely evolving minimal-uncertainty Gaussian:
/// `ΔX(t) = ΔX(0)·√(1 + t²/(4M²ΔX(0)⁴))`.
///
/// Written in terms of the Gaussian width parameter `a = √2·ΔX` (for
/// `ψ ∝ exp(-x²/2a²)`) this is `a(t) = a·√(1 + t²/(M²a⁴))`, the form of the
/// estimate used by [`time_uncertainty`].
pub fn position_spread_at(clock: &ClockSpec, t: f64) -> f64 {
    let dx = clock.position_spread;
    let ratio = t / (2.0 * clock.mass * dx * dx);
    dx * ratio.hypot(1.0)
}

/// `τ_usable ≈ M·ΔX(0)²`.
pub fn usable_time(clock: &ClockSpec) -> f64 {
    clock.mass * clock.position_spread * clock.position_spread
}

/// `τ_usable / Δτ(0)`; reduces to `⟨P⟩·ΔX(0)`.
pub fn quality_ratio(clock: &ClockSpec) -> f64 {
    usable_time(clock) / time_uncertainty(clock, 0.0)
}

/// `Ē/ΔE` with the leading-order energy spread, the comparison value for
/// [`quality_ratio`].
pub fn energy_ratio(clock: &ClockSpec) -> f64 {
    clock.mean_energy() / clock.energy_spread()
}

/// Relative deviation of `[τ, H_C] = i·P/⟨P⟩` from `i` on the clock state,
/// `ΔP/⟨P⟩`.
pub fn commutator_deviation(clock: &ClockSpec) -> f64 {
    clock.momentum_spread() / clock.mean_momentum
}

/// Expectation of `[τ, H_C]/i = P/⟨P⟩` on the clock state.
pub fn commutator_expectation(clock: &ClockSpec) -> f64 {
    clock.mean_momentum / clock.mean_momentum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockQuality {
    pub dtau0: f64,
    pub usable_time: f64,
    pub quality_ratio: f64,
    pub energy_ratio: f64,
    pub commutator_deviation: f64,
    pub good_clock: bool,
}

pub fn assess(clock: &ClockSpec) -> ClockQuality {
    let quality_ratio = quality_ratio(clock);
    let commutator_deviation = commutator_deviation(clock);
    ClockQuality {
        dtau0: time_uncertainty(clock, 0.0),
        usable_time: usable_time(clock),
        quality_ratio,
        energy_ratio: energy_ratio(clock),
        commutator_deviation,
        good_clock: quality_ratio >= GOOD_CLOCK_RATIO && commutator_deviation <= GOOD_CLOCK_COMMUTATOR,
    }
}
