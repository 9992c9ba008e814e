//! Final pointer wavefunction of the measuring device in the impulsive limit.
//!
//! For a pointer prepared as `χ_MD(Q) = exp(-Q²Δ²/4)` and a clock transmitted
//! with `T = 1/(1 + iαQ)`, the pointer amplitude in the `P` representation is
//!
//! ```text
//! χ(P) = ∫ dQ exp(iQP) exp(-Q²Δ²/4) / (1 + iαQ)
//!      = (π/α)·erfc((Δ² − 2αP)/(2αΔ))·exp(-P/α + Δ²/(4α²)),   α > 0.
//! ```
//!
//! `χ` is real for real `P`. The closed form is evaluated through `erfcx` on
//! the side where the exponential would overflow, and negative `α` uses the
//! mirror relation `χ_α(P) = χ_{-α}(-P)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{compensated_sum, erfc, erfcx, Integrator};

/// Integration cut-off in units of `1/Δ`; the Gaussian weight there is e⁻³⁶.
const Q_CUTOFF: f64 = 12.0;
/// Largest probability mass tolerated beyond the ends of a grid.
pub const EDGE_MASS_LIMIT: f64 = 1e-3;
/// Minimum grid span in standard deviations of the distribution.
pub const MIN_SPAN_SIGMAS: f64 = 8.0;
pub const DEFAULT_GRID_POINTS: usize = 4096;
const DEFAULT_SPAN_SIGMAS: f64 = 10.0;
const PILOT_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerSpec {
    resolution: f64,
}

impl PointerSpec {
    pub fn new(resolution: f64) -> Result<Self> {
        check_delta(resolution)?;
        Ok(Self { resolution })
    }

    /// Δ.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Initial pointer amplitude `exp(-Q²Δ²/4)`.
    pub fn initial_amplitude(&self, q: f64) -> f64 {
        (-0.25 * q * q * self.resolution * self.resolution).exp()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(invalid("delta", format!("must be finite and positive, got {delta}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(invalid("alpha", format!("must be finite, got {alpha}")));
    }
    Ok(())
}

/// Pointer amplitude without back-reaction (`α = 0`):
/// `(2√π/Δ)·exp(-P²/Δ²)`.
pub fn free_pointer(p: f64, delta: f64) -> f64 {
    2.0 * PI.sqrt() / delta * (-(p * p) / (delta * delta)).exp()
}

/// Closed-form pointer amplitude.
///
/// Fails with [`Error::ZeroAlpha`] for `α = 0`; use [`free_pointer`] there.
pub fn final_pointer_closedform(p: f64, alpha: f64, delta: f64) -> Result<Complex64> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    if !p.is_finite() {
        return Err(invalid("p", format!("must be finite, got {p}")));
    }
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    if alpha < 0.0 {
        return final_pointer_closedform(-p, -alpha, delta);
    }
    let x = delta / (2.0 * alpha) - p / delta;
    let prefactor = PI / alpha;
    let value = if x >= 0.0 {
        let scaled = erfcx(Complex64::new(x, 0.0))?;
        prefactor * scaled.re * (-(p * p) / (delta * delta)).exp()
    } else {
        let e = erfc(Complex64::new(x, 0.0));
        prefactor * e.re * (-p / alpha + delta * delta / (4.0 * alpha * alpha)).exp()
    };
    Ok(Complex64::new(value, 0.0))
}

fn quadrature_integrator(delta: f64, tol: f64) -> Result<Integrator> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tol", format!("must be finite and positive, got {tol}")));
    }
    let scale = 2.0 * PI.sqrt() / delta;
    Ok(Integrator::with_tolerances(tol * 1e-8 * scale, tol).max_subdivisions(4000))
}

/// Fourier integral for the pointer amplitude by adaptive quadrature over
/// `|Q| ≤ 12/Δ`. Defined for every `α`, including zero.
pub fn final_pointer_quadrature(p: f64, alpha: f64, delta: f64, tol: f64) -> Result<Complex64> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    let integrator = quadrature_integrator(delta, tol)?;
    let cut = Q_CUTOFF / delta;
    let r = integrator.integrate(
        |q| {
            let gauss = (-0.25 * q * q * delta * delta).exp();
            Complex64::from_polar(gauss, q * p) / Complex64::new(1.0, alpha * q)
        },
        -cut,
        cut,
    )?;
    Ok(r.value)
}

/// Closed form where defined, quadrature otherwise.
pub fn pointer_amplitude(p: f64, alpha: f64, delta: f64) -> Result<Complex64> {
    if alpha == 0.0 {
        check_delta(delta)?;
        return Ok(Complex64::new(free_pointer(p, delta), 0.0));
    }
    match final_pointer_closedform(p, alpha, delta) {
        Ok(v) => Ok(v),
        Err(Error::InvalidParameter { name, reason }) => Err(Error::InvalidParameter { name, reason }),
        Err(_) => final_pointer_quadrature(p, alpha, delta, 1e-10),
    }
}

/// Least-squares constant `c` minimizing `Σ|c·s(P) − χ_quad(P)|²`, where `s`
/// is the closed form with its prefactor removed. The analytic value is `π/α`.
pub fn fit_prefactor(alpha: f64, delta: f64, grid: &[f64], tol: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    if grid.is_empty() {
        return Err(invalid("grid", "empty"));
    }
    let unit = PI / alpha.abs();
    let pairs: Vec<(f64, Complex64)> = grid
        .par_iter()
        .map(|&p| -> Result<(f64, Complex64)> {
            let shape = final_pointer_closedform(p, alpha, delta)?.re / unit;
            Ok((shape, final_pointer_quadrature(p, alpha, delta, tol)?))
        })
        .collect::<Result<_>>()?;
    let num = compensated_sum(pairs.iter().map(|(s, q)| s * q.re));
    let den = compensated_sum(pairs.iter().map(|(s, _)| s * s));
    if den == 0.0 {
        return Err(invalid("grid", "closed form vanishes on every grid point"));
    }
    Ok(num / den)
}

/// Total probability of the transmitted sector,
/// `2π·∫ |T(Q)|²·|χ_MD(Q)|² dQ = 2π·∫ exp(-Q²Δ²/2)/(1 + α²Q²) dQ`,
/// which by Parseval equals `∫ |χ(P)|² dP`.
pub fn transmitted_weight(alpha: f64, delta: f64, tol: f64) -> Result<f64> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    let r = Integrator::new(tol).integrate_real(
        |q| (-0.5 * q * q * delta * delta).exp() / (1.0 + alpha * alpha * q * q),
        f64::NEG_INFINITY,
        f64::INFINITY,
    )?;
    Ok(2.0 * PI * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointerWavefunction {
    pub alpha: f64,
    pub delta: f64,
    pub grid: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// `∫|χ|² dP` over the grid (trapezoidal).
    pub norm: f64,
    pub moments: Moments,
    /// Fraction of the probability lying beyond the grid ends.
    pub edge_mass: f64,
}

impl PointerWavefunction {
    /// `|χ(P)|²/norm` on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr() / self.norm).collect()
    }
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn grid_moments(grid: &[f64], weights: &[f64], density: &[f64]) -> (f64, Moments) {
    let mass: Vec<f64> = weights.iter().zip(density).map(|(w, d)| w * d).collect();
    let norm = compensated_sum(mass.iter().copied());
    let mean = compensated_sum(grid.iter().zip(&mass).map(|(p, m)| p * m)) / norm;
    let var = compensated_sum(grid.iter().zip(&mass).map(|(p, m)| (p - mean).powi(2) * m)) / norm;
    let third = compensated_sum(grid.iter().zip(&mass).map(|(p, m)| (p - mean).powi(3) * m)) / norm;
    let std = var.sqrt();
    let skewness = if std > 0.0 { third / (var * std) } else { 0.0 };
    (norm, Moments { mean, std, skewness })
}

fn tail_mass(alpha: f64, delta: f64, lo: f64, hi: f64) -> Result<f64> {
    let integrator = Integrator::with_tolerances(1e-14, 1e-8);
    let density = |p: f64| pointer_amplitude(p, alpha, delta).map(|a| a.norm_sqr()).unwrap_or(f64::NAN);
    let left = integrator.integrate_real(density, f64::NEG_INFINITY, lo)?;
    let right = integrator.integrate_real(density, hi, f64::INFINITY)?;
    Ok(left + right)
}

/// Normalized pointer distribution and its moments on a caller-supplied grid.
///
/// Fails with [`Error::GridTooNarrow`] if more than [`EDGE_MASS_LIMIT`] of the
/// probability lies outside the grid or the grid spans fewer than
/// [`MIN_SPAN_SIGMAS`] standard deviations.
pub fn pointer_distribution(alpha: f64, delta: f64, grid: &[f64]) -> Result<PointerWavefunction> {
    pointer_distribution_with(alpha, delta, grid, AmplitudeMethod::ClosedForm)
}

/// How the pointer amplitude is evaluated on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AmplitudeMethod {
    /// [`pointer_amplitude`].
    ClosedForm,
    /// [`final_pointer_quadrature`] at the given relative tolerance.
    Quadrature { tol: f64 },
}

/// [`pointer_distribution`] with an explicit amplitude evaluator.
pub fn pointer_distribution_with(
    alpha: f64,
    delta: f64,
    grid: &[f64],
    method: AmplitudeMethod,
) -> Result<PointerWavefunction> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    if grid.len() < 3 {
        return Err(invalid("grid", "needs at least three points"));
    }
    if grid.iter().any(|p| !p.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "must be finite and strictly increasing"));
    }
    let amplitudes: Vec<Complex64> = grid
        .par_iter()
        .map(|&p| match method {
            AmplitudeMethod::ClosedForm => pointer_amplitude(p, alpha, delta),
            AmplitudeMethod::Quadrature { tol } => final_pointer_quadrature(p, alpha, delta, tol),
        })
        .collect::<Result<_>>()?;
    let weights = trapezoid_weights(grid);
    let density: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let (norm, moments) = grid_moments(grid, &weights, &density);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(invalid("grid", "distribution has no weight on the grid"));
    }
    let first = grid[0];
    let last = grid[grid.len() - 1];
    let tails = tail_mass(alpha, delta, first, last)?;
    let edge_mass = tails / (norm + tails);
    if edge_mass > EDGE_MASS_LIMIT {
        return Err(Error::GridTooNarrow {
            reason: format!("{edge_mass:.3e} of the probability lies beyond the grid"),
        });
    }
    if last - first < MIN_SPAN_SIGMAS * moments.std {
        return Err(Error::GridTooNarrow {
            reason: format!("grid spans {:.2} standard deviations", (last - first) / moments.std),
        });
    }
    Ok(PointerWavefunction {
        alpha,
        delta,
        grid: grid.to_vec(),
        amplitudes,
        norm,
        moments,
        edge_mass,
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Default grid: [`DEFAULT_GRID_POINTS`] points on `mean ± 10σ`, with the
/// mean and σ taken from a coarse pilot pass.
pub fn default_grid(alpha: f64, delta: f64) -> Result<Vec<f64>> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    // Gaussian core of std Δ/2 plus an exponential tail of std |α|/2.
    let sigma_est = 0.5 * delta.hypot(alpha);
    let lo = alpha.min(0.0) - 14.0 * sigma_est;
    let hi = alpha.max(0.0) + 14.0 * sigma_est;
    let pilot = linspace(lo, hi, PILOT_POINTS);
    let density: Vec<f64> = pilot
        .par_iter()
        .map(|&p| pointer_amplitude(p, alpha, delta).map(|a| a.norm_sqr()))
        .collect::<Result<_>>()?;
    let (_, m) = grid_moments(&pilot, &trapezoid_weights(&pilot), &density);
    Ok(linspace(
        m.mean - DEFAULT_SPAN_SIGMAS * m.std,
        m.mean + DEFAULT_SPAN_SIGMAS * m.std,
        DEFAULT_GRID_POINTS,
    ))
}

/// [`pointer_distribution`] on the [`default_grid`].
pub fn pointer_distribution_default(alpha: f64, delta: f64) -> Result<PointerWavefunction> {
    pointer_distribution(alpha, delta, &default_grid(alpha, delta)?)
}

/// Relative deviation of the pointer mean from the weak-limit shift,
/// `|mean − α|/|α|`.
pub fn mean_shift_error(alpha: f64, delta: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let dist = pointer_distribution_default(alpha, delta)?;
    Ok((dist.moments.mean - alpha).abs() / alpha.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakShift {
    /// `δP = α = λ(M/k)j`.
    pub shift: f64,
    /// `α/Δ`; the shift is resolvable only where this is small.
    pub alpha_over_delta: f64,
}

/// Weak-limit pointer shift. Weakness is reported, not enforced.
pub fn weak_limit_shift(k: f64, lambda: f64, j: f64, mass: f64, delta: f64) -> Result<WeakShift> {
    check_delta(delta)?;
    if k == 0.0 {
        return Err(Error::ZeroMomentum);
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("k", format!("must be finite and positive, got {k}")));
    }
    let shift = crate::scattering::alpha(k, lambda, j, mass);
    Ok(WeakShift {
        shift,
        alpha_over_delta: shift / delta,
    })
}
