//! Stationary scattering of the clock particle off the measurement coupling.
//!
//! The coupling acts on the clock as a rectangular potential of height
//! `V = λQj/X₀` on `(-X₀/2, X₀/2)`, or as `λQj·δ(X)` in the impulsive limit.
//! Transmission amplitudes carry the free phase `exp(ikX₀)` divided out, so an
//! absent barrier gives `T = 1` exactly.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Above this `|q²|X₀²` the trigonometric/hyperbolic forms are used; below it
/// a power series keeps `E ≈ V` free of cancellation.
const SERIES_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierSpec {
    lambda: f64,
    width: f64,
    pointer_coordinate: f64,
    eigenvalue: f64,
    mass: f64,
}

impl BarrierSpec {
    /// Finite-width barrier; `width` must be positive.
    pub fn rectangular(lambda: f64, width: f64, pointer_coordinate: f64, eigenvalue: f64, mass: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("must be finite and positive, got {width}")));
        }
        Self::build(lambda, width, pointer_coordinate, eigenvalue, mass)
    }

    /// Impulsive (zero-width) coupling.
    pub fn delta(lambda: f64, pointer_coordinate: f64, eigenvalue: f64, mass: f64) -> Result<Self> {
        Self::build(lambda, 0.0, pointer_coordinate, eigenvalue, mass)
    }

    /// Rectangular barrier of the given height, with the coupling folded into
    /// `λ` (`Q = j = 1`).
    pub fn with_height(height: f64, width: f64, mass: f64) -> Result<Self> {
        Self::rectangular(height * width, width, 1.0, 1.0, mass)
    }

    fn build(lambda: f64, width: f64, pointer_coordinate: f64, eigenvalue: f64, mass: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda", lambda),
            ("pointer_coordinate", pointer_coordinate),
            ("eigenvalue", eigenvalue),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("must be finite and positive, got {mass}")));
        }
        let spec = Self {
            lambda,
            width,
            pointer_coordinate,
            eigenvalue,
            mass,
        };
        if width > 0.0 && !spec.height().is_finite() {
            return Err(invalid("width", "barrier height overflows"));
        }
        Ok(spec)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn pointer_coordinate(&self) -> f64 {
        self.pointer_coordinate
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_delta(&self) -> bool {
        self.width == 0.0
    }

    /// `λQj`, the integrated strength of the potential.
    pub fn delta_strength(&self) -> f64 {
        self.lambda * self.pointer_coordinate * self.eigenvalue
    }

    /// `V = λQj/X₀`; infinite in delta mode.
    pub fn height(&self) -> f64 {
        self.delta_strength() / self.width
    }

    /// Coupling height `g₀ = λ/X₀`.
    pub fn coupling_height(&self) -> f64 {
        self.lambda / self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringAmplitudes {
    pub k: f64,
    pub transmission: Complex64,
    pub reflection: Complex64,
    /// Momentum inside the barrier, `q = √(k² − 2MV)`, on the positive real or
    /// positive imaginary axis.
    pub inside_momentum: Complex64,
}

impl ScatteringAmplitudes {
    pub fn transmission_probability(&self) -> f64 {
        self.transmission.norm_sqr()
    }

    pub fn reflection_probability(&self) -> f64 {
        self.reflection.norm_sqr()
    }
}

fn check_momentum(k: f64) -> Result<()> {
    if k == 0.0 {
        return Err(Error::ZeroMomentum);
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("k", format!("must be finite and positive, got {k}")));
    }
    Ok(())
}

/// `λjM/k`.
///
/// `k` must be positive; the result is odd in `j` and in `λ`.
pub fn alpha(k: f64, lambda: f64, j: f64, mass: f64) -> f64 {
    lambda * j * mass / k
}

/// `cos(√u)` and `sin(√u)/√u` as entire functions of `u` (negative `u` gives
/// the hyperbolic forms).
fn cos_sinc_series(u: f64) -> (f64, f64) {
    let mut c = 1.0;
    let mut s = 1.0;
    let mut term_c = 1.0;
    let mut term_s = 1.0;
    for n in 1..30 {
        let n = n as f64;
        term_c *= -u / ((2.0 * n - 1.0) * (2.0 * n));
        term_s *= -u / ((2.0 * n) * (2.0 * n + 1.0));
        c += term_c;
        s += term_s;
        if term_c.abs() < 1e-18 && term_s.abs() < 1e-18 {
            break;
        }
    }
    (c, s)
}

/// Exact transmission and reflection through the rectangular barrier, by
/// plane-wave matching at `X = ±X₀/2`.
///
/// With `s = q²`, `C = cos(qX₀)` and `S = sin(qX₀)/(qX₀)` (both real for real
/// `s`) the amplitudes are
/// `T = 1/D`, `R = i(s − k²)X₀S/(2kD)` with `D = C − i(k² + s)X₀S/(2k)`,
/// up to the common free phase `exp(-ikX₀)` on `D`.
pub fn rect_barrier_amplitudes(k: f64, barrier: &BarrierSpec) -> Result<ScatteringAmplitudes> {
    check_momentum(k)?;
    if barrier.is_delta() {
        return Err(invalid("width", "rectangular amplitudes need a positive width"));
    }
    let v = barrier.height();
    if v == 0.0 {
        return Ok(ScatteringAmplitudes {
            k,
            transmission: Complex64::new(1.0, 0.0),
            reflection: Complex64::new(0.0, 0.0),
            inside_momentum: Complex64::new(k, 0.0),
        });
    }
    let l = barrier.width;
    let m = barrier.mass;
    let s = k * k - 2.0 * m * v;
    let inside_momentum = if s >= 0.0 {
        Complex64::new(s.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-s).sqrt())
    };
    let free_phase = Complex64::from_polar(1.0, -k * l);
    let u = s * l * l;
    let sum_coeff = (k * k + s) / (2.0 * k) * l;
    let diff_coeff = (s - k * k) / (2.0 * k) * l;

    let (transmission, reflection) = if u < -4.0 {
        // Deep tunnelling: scale D by 2·exp(-κX₀) so nothing overflows.
        let kl = (-u).sqrt();
        let decay = (-2.0 * kl).exp();
        let c = 1.0 + decay;
        let sc = -(-2.0 * kl).exp_m1() / kl;
        let d = Complex64::new(c, -sum_coeff * sc);
        let scale = 2.0 * (-kl).exp();
        let t = free_phase * scale / d;
        let r = Complex64::new(0.0, diff_coeff * sc) / d * free_phase;
        (t, r)
    } else {
        let (c, sc) = if u.abs() <= SERIES_LIMIT {
            cos_sinc_series(u)
        } else if u > 0.0 {
            let ql = u.sqrt();
            (ql.cos(), ql.sin() / ql)
        } else {
            let kl = (-u).sqrt();
            (kl.cosh(), kl.sinh() / kl)
        };
        let d = Complex64::new(c, -sum_coeff * sc);
        let t = free_phase / d;
        let r = Complex64::new(0.0, diff_coeff * sc) / d * free_phase;
        (t, r)
    };
    Ok(ScatteringAmplitudes {
        k,
        transmission,
        reflection,
        inside_momentum,
    })
}

/// Impulsive-limit amplitudes `T = 1/(1 + iαQ)`, `R = T − 1`.
pub fn delta_barrier_transmission(k: f64, barrier: &BarrierSpec) -> Result<ScatteringAmplitudes> {
    check_momentum(k)?;
    if !barrier.is_delta() {
        return Err(invalid("width", "delta amplitudes need a zero-width barrier"));
    }
    let beta = alpha(k, barrier.lambda, barrier.eigenvalue, barrier.mass) * barrier.pointer_coordinate;
    let t = Complex64::new(1.0, 0.0) / Complex64::new(1.0, beta);
    Ok(ScatteringAmplitudes {
        k,
        transmission: t,
        reflection: t - 1.0,
        inside_momentum: Complex64::new(k, 0.0),
    })
}

/// Dispatches on the barrier mode.
pub fn amplitudes(k: f64, barrier: &BarrierSpec) -> Result<ScatteringAmplitudes> {
    if barrier.is_delta() {
        delta_barrier_transmission(k, barrier)
    } else {
        rect_barrier_amplitudes(k, barrier)
    }
}

/// Amplitudes over a momentum grid, evaluated in parallel; output order
/// follows `ks`.
pub fn transmission_sweep(ks: &[f64], barrier: &BarrierSpec) -> Result<Vec<ScatteringAmplitudes>> {
    ks.par_iter().map(|&k| amplitudes(k, barrier)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionDuration {
    /// `δT = M·X₀/q`.
    pub duration: f64,
    /// Impulsiveness figure `q·X₀`.
    pub q_x0: f64,
    /// `(q²/2M)·δT = qX₀/2`, the energy inside the barrier times the duration.
    pub energy_duration_product: f64,
}

/// Classical traversal time of the barrier region.
pub fn interaction_duration(barrier: &BarrierSpec, k: f64) -> Result<InteractionDuration> {
    check_momentum(k)?;
    if barrier.is_delta() {
        return Err(invalid("width", "duration needs a positive width"));
    }
    let q_squared = k * k - 2.0 * barrier.mass * barrier.height();
    if q_squared <= 0.0 {
        return Err(Error::NoClassicalTraversal { q_squared });
    }
    let q = q_squared.sqrt();
    let q_x0 = q * barrier.width;
    Ok(InteractionDuration {
        duration: barrier.mass * barrier.width / q,
        q_x0,
        energy_duration_product: 0.5 * q_x0,
    })
}
