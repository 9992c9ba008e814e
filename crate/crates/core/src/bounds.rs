//! Accuracy-bound algebra and the regime classifier.
//!
//! The asymptotic inequalities `a ≫ b` are read as `a ≥ 10·b`, and `a ≪ b`
//! as `a ≤ b/10`.

use serde::Serialize;

use crate::clock::ClockSpec;
use crate::error::{invalid, Error, Result};
use crate::pointer::{self, PointerSpec};
use crate::scattering::{self, BarrierSpec};

/// Factor standing in for "much greater than".
pub const MUCH_GREATER: f64 = 10.0;
/// Largest `α²⟨Q²⟩ = (α/Δ)²` for which transmission loss is negligible.
pub const WEAK_TRANSMISSION_LOSS: f64 = 1.0 / MUCH_GREATER;
/// Largest relative deviation of the pointer mean from `α` that still counts
/// as a faithful record.
pub const SHIFT_DISTORTION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementScenario {
    pub clock: ClockSpec,
    pub barrier: BarrierSpec,
    pub pointer: PointerSpec,
    /// J̄.
    pub mean_j: f64,
    /// ΔJ̄.
    pub delta_j: f64,
    /// Typical frequency of the measured observable.
    pub omega: f64,
    /// Lower bound E₀ of the clock energy.
    pub ground_energy: f64,
}

impl MeasurementScenario {
    pub fn new(
        clock: ClockSpec,
        barrier: BarrierSpec,
        pointer: PointerSpec,
        mean_j: f64,
        delta_j: f64,
        omega: f64,
        ground_energy: f64,
    ) -> Result<Self> {
        if !mean_j.is_finite() {
            return Err(invalid("mean_j", format!("must be finite, got {mean_j}")));
        }
        if !(delta_j.is_finite() && delta_j > 0.0) {
            return Err(invalid("delta_j", format!("must be finite and positive, got {delta_j}")));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(invalid("omega", format!("must be finite and non-negative, got {omega}")));
        }
        if !ground_energy.is_finite() {
            return Err(invalid("ground_energy", format!("must be finite, got {ground_energy}")));
        }
        let e_c = clock.kinetic_energy();
        if e_c <= ground_energy {
            return Err(Error::ClockAtGroundState { e_c, e0: ground_energy });
        }
        Ok(Self {
            clock,
            barrier,
            pointer,
            mean_j,
            delta_j,
            omega,
            ground_energy,
        })
    }

    /// `E_C = ⟨P⟩²/2M`.
    pub fn clock_energy(&self) -> f64 {
        self.clock.kinetic_energy()
    }
}

/// Minimal relative accuracy `ΔJ/J ≥ 1/((E_C − E₀)·δT)`.
pub fn accuracy_bound(e_c: f64, e0: f64, delta_t: f64) -> Result<f64> {
    if !(e_c.is_finite() && e0.is_finite()) {
        return Err(invalid("e_c", "energies must be finite"));
    }
    if e_c <= e0 {
        return Err(Error::ClockAtGroundState { e_c, e0 });
    }
    if !(delta_t > 0.0) {
        return Err(invalid("delta_t", format!("must be positive, got {delta_t}")));
    }
    Ok(1.0 / ((e_c - e0) * delta_t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerSpread {
    /// `ΔP_MD`.
    pub total: f64,
    /// Ideal-clock part `g₀X₀(M/⟨P⟩)ΔJ`.
    pub intrinsic: f64,
    /// Contribution of the clock's time uncertainty,
    /// `intrinsic·(J̄/ΔJ̄)(ΔP/⟨P⟩)`.
    pub clock_uncertainty: f64,
}

/// `ΔP_MD ≃ g₀X₀(M/⟨P⟩)ΔJ·(1 + (J̄/ΔJ̄)(ΔP/⟨P⟩))`.
pub fn pointer_spread_estimate(scenario: &MeasurementScenario) -> PointerSpread {
    let clock = &scenario.clock;
    let intrinsic = scenario.barrier.lambda() * clock.mass() / clock.mean_momentum() * scenario.delta_j;
    let clock_uncertainty =
        intrinsic * (scenario.mean_j / scenario.delta_j) * (clock.momentum_spread() / clock.mean_momentum());
    PointerSpread {
        total: intrinsic + clock_uncertainty,
        intrinsic,
        clock_uncertainty,
    }
}

/// Smallest pointer spread `ΔQ ≥ ⟨P⟩/(g₀X₀·M·ΔJ̄)` (with `⟨Q⟩ = 0`).
pub fn min_coupling_spread(scenario: &MeasurementScenario) -> f64 {
    let clock = &scenario.clock;
    clock.mean_momentum() / (scenario.barrier.lambda() * clock.mass() * scenario.delta_j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Weak,
    ValidMeasurement,
    StrongBackreaction,
    Impulsive,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Weak => "WEAK",
            Regime::ValidMeasurement => "VALID_MEASUREMENT",
            Regime::StrongBackreaction => "STRONG_BACKREACTION",
            Regime::Impulsive => "IMPULSIVE",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiguresOfMerit {
    /// `|q|·X₀`; zero for an impulsive coupling.
    pub q_x0: f64,
    /// `α/Δ` with `α = λJ̄M/k`.
    pub alpha_over_delta: f64,
    /// `E_C·δT`.
    pub ec_delta_t: f64,
    /// `ω·δT`.
    pub omega_delta_t: f64,
    /// Transmission loss `α²⟨Q²⟩ = (α/Δ)²`.
    pub transmission_loss: f64,
    /// `|⟨P⟩ − α|/|α|` of the pointer distribution (zero when `α = 0`).
    pub shift_distortion: f64,
    /// `(ΔJ̄/|J̄|)·(E_C − E₀)·δT`.
    pub bound_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub figures_of_merit: FiguresOfMerit,
    /// Whether `ΔJ̄/|J̄| ≥ 1/((E_C − E₀)δT)` holds.
    pub bound_satisfied: bool,
}

/// Pointer-mean distortion at `α/Δ = r`; the distribution shape depends on
/// `α` and `Δ` only through their ratio.
fn shift_distortion(ratio: f64) -> f64 {
    if ratio == 0.0 {
        return 0.0;
    }
    pointer::mean_shift_error(ratio, 1.0).unwrap_or(f64::MAX)
}

/// Classifies a scenario for clock momentum `k`. Checked in order:
///
/// 1. `IMPULSIVE` when `|q|X₀ < 1` (always for a zero-width coupling);
/// 2. `WEAK` when the transmission loss `(α/Δ)²` is at most 1/10;
/// 3. `STRONG_BACKREACTION` when the pointer mean misses `α` by more than
///    10%;
/// 4. `VALID_MEASUREMENT` when `(ΔJ̄/|J̄|)(E_C − E₀)δT ≥ 10` and `ωδT ≤ 0.1`;
/// 5. `STRONG_BACKREACTION` otherwise.
pub fn regime_classify(scenario: &MeasurementScenario, k: f64) -> Result<RegimeReport> {
    if k == 0.0 {
        return Err(Error::ZeroMomentum);
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("k", format!("must be finite and positive, got {k}")));
    }
    let barrier = &scenario.barrier;
    let mass = barrier.mass();
    let (q_x0, delta_t) = if barrier.is_delta() {
        (0.0, 0.0)
    } else {
        let q = (k * k - 2.0 * mass * barrier.height()).abs().sqrt();
        (q * barrier.width(), mass * barrier.width() / q)
    };
    let alpha = scattering::alpha(k, barrier.lambda(), scenario.mean_j, mass);
    let alpha_over_delta = (alpha / scenario.pointer.resolution()).abs();
    let transmission_loss = alpha_over_delta * alpha_over_delta;
    let shift_distortion = shift_distortion(alpha_over_delta);
    let e_c = scenario.clock_energy();
    let energy_window = e_c - scenario.ground_energy;
    let precision = scenario.delta_j / scenario.mean_j.abs();
    let bound_margin = precision * energy_window * delta_t;
    let omega_delta_t = scenario.omega * delta_t;
    let figures_of_merit = FiguresOfMerit {
        q_x0,
        alpha_over_delta,
        ec_delta_t: e_c * delta_t,
        omega_delta_t,
        transmission_loss,
        shift_distortion,
        bound_margin: bound_margin.min(f64::MAX),
    };
    let regime = if q_x0 < 1.0 {
        Regime::Impulsive
    } else if transmission_loss <= WEAK_TRANSMISSION_LOSS {
        Regime::Weak
    } else if shift_distortion > SHIFT_DISTORTION_LIMIT {
        Regime::StrongBackreaction
    } else if bound_margin >= MUCH_GREATER && omega_delta_t <= 1.0 / MUCH_GREATER {
        Regime::ValidMeasurement
    } else {
        Regime::StrongBackreaction
    };
    Ok(RegimeReport {
        regime,
        figures_of_merit,
        bound_satisfied: bound_margin >= 1.0,
    })
}
