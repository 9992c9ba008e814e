//! Complex error functions built on the Faddeeva function
//! `w(z) = exp(-z²)·erfc(-iz)`.
//!
//! `w` is evaluated in the closed upper half-plane only:
//!
//! * `|z| >= 6`: Laplace continued fraction, 60 levels, evaluated bottom-up.
//! * `|z| < 6`: Weideman's rational expansion
//!   `w(z) ≈ 2·p(Z)/(L - iz)² + 1/(√π·(L - iz))`, `Z = (L + iz)/(L - iz)`,
//!   with a degree-39 polynomial `p` whose coefficients are the discrete
//!   Fourier coefficients of `exp(-t²)(L² + t²)` on `t = L·tan(θ/2)`.
//!
//! Both branches reach a relative accuracy of about 1e-14 on their region.
//! `erfc` maps every argument onto the upper half-plane with the reflection
//! `erfc(z) = 2 - erfc(-z)`, so the lower-half-plane identity for `w` (and its
//! overflow-prone `exp(-z²)` term) is never needed.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;

const WEIDEMAN_TERMS: usize = 40;
const CONTINUED_FRACTION_RADIUS: f64 = 6.0;
const CONTINUED_FRACTION_DEPTH: usize = 60;

/// Largest argument of `exp` that stays finite.
const LN_MAX: f64 = 709.782_712_893_384;

struct Weideman {
    l: f64,
    /// `coeffs[n]` multiplies `Z^n`.
    coeffs: [f64; WEIDEMAN_TERMS],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let period = 2 * m;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // Samples in FFT order: index j stands for the angle index j (j < m)
        // or j - period (j >= m); the sample at the pole θ = -π is zero.
        let samples: Vec<f64> = (0..period)
            .map(|j| {
                let idx = if j < m { j as i64 } else { j as i64 - period as i64 };
                if idx == -(m as i64) {
                    return 0.0;
                }
                let theta = idx as f64 * PI / m as f64;
                let t = l * (theta / 2.0).tan();
                (-t * t).exp() * (l * l + t * t)
            })
            .collect();
        let mut coeffs = [0.0; WEIDEMAN_TERMS];
        for (c, freq) in coeffs.iter_mut().zip(1..=n) {
            let sum: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, s)| s * (2.0 * PI * (j * freq % period) as f64 / period as f64).cos())
                .sum();
            *c = sum / period as f64;
        }
        Weideman { l, coeffs }
    })
}

fn faddeeva_rational(z: Complex64) -> Complex64 {
    let table = weideman();
    let iz = Complex64::i() * z;
    let denom = table.l - iz;
    let big_z = (table.l + iz) / denom;
    let p = table
        .coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * big_z + c);
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn faddeeva_continued_fraction(z: Complex64) -> Complex64 {
    let mut r = z;
    for level in (1..=CONTINUED_FRACTION_DEPTH).rev() {
        r = z - 0.5 * level as f64 / r;
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / r
}

/// Faddeeva function `w(z) = exp(-z²)·erfc(-iz)` for `Im z >= 0`.
///
/// Arguments in the lower half-plane are rejected: there `w` grows like
/// `exp(-z²)` and callers should reflect instead.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid("z", format!("non-finite argument {z}")));
    }
    if z.im < 0.0 {
        return Err(invalid("z", "faddeeva is evaluated in the upper half-plane only"));
    }
    Ok(if z.norm() >= CONTINUED_FRACTION_RADIUS {
        faddeeva_continued_fraction(z)
    } else {
        faddeeva_rational(z)
    })
}

/// Scaled complementary error function `erfcx(z) = exp(z²)·erfc(z)` for
/// `Re z >= 0`, where it is bounded and free of overflow.
pub fn erfcx(z: Complex64) -> Result<Complex64> {
    if z.re < 0.0 {
        return Err(invalid("z", "erfcx is evaluated for Re z >= 0 only"));
    }
    faddeeva(Complex64::i() * z)
}

/// `exp(-z²)·w` evaluated without forming `exp(-z²)` separately when it
/// would overflow; `None` signals that the product itself overflows.
fn scaled_by_gaussian(z: Complex64, w: Complex64) -> Option<Complex64> {
    // -z² = (y - x)(y + x) - 2ixy
    let log_mag = (z.im - z.re) * (z.im + z.re);
    let phase = -2.0 * z.re * z.im;
    let total = log_mag + w.norm().ln();
    if total > LN_MAX {
        return None;
    }
    if w == Complex64::new(0.0, 0.0) {
        return Some(w);
    }
    Some(Complex64::from_polar(total.exp(), phase + w.arg()))
}

/// Complementary error function of a complex argument.
///
/// Returns [`Error::Saturated`] when `|erfc(z)|` exceeds the `f64` range
/// (large `|Im z|` with `|Im z| > |Re z|`); the error carries a saturation
/// value of magnitude `f64::MAX` along the true phase.
pub fn erfc_checked(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid("z", format!("non-finite argument {z}")));
    }
    if z.re >= 0.0 {
        let w = faddeeva(Complex64::i() * z)?;
        match scaled_by_gaussian(z, w) {
            Some(v) => Ok(v),
            None => {
                let phase = -2.0 * z.re * z.im + w.arg();
                Err(Error::Saturated {
                    z,
                    value: Complex64::from_polar(f64::MAX, phase),
                })
            }
        }
    } else {
        match erfc_checked(-z) {
            Ok(v) => Ok(2.0 - v),
            Err(Error::Saturated { value, .. }) => Err(Error::Saturated { z, value: -value }),
            Err(e) => Err(e),
        }
    }
}

/// Complementary error function; saturated values are returned as-is.
///
/// # Panics
/// On non-finite input.
pub fn erfc(z: Complex64) -> Complex64 {
    match erfc_checked(z) {
        Ok(v) => v,
        Err(Error::Saturated { value, .. }) => value,
        Err(e) => panic!("erfc: {e}"),
    }
}

/// Error function. Small arguments use the Maclaurin series so that the
/// relative accuracy survives near the origin; elsewhere `erf = 1 - erfc`.
pub fn erf(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        for n in 1..40 {
            term *= -z2 / n as f64;
            let contrib = term / (2 * n + 1) as f64;
            sum += contrib;
            if contrib.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        FRAC_2_SQRT_PI * sum
    } else {
        1.0 - erfc(z)
    }
}
