//! Split-step Fourier propagation of a clock wavepacket in one dimension,
//! used as a brute-force check on the stationary scattering results.
//!
//! One step is `exp(-iVdt/2)·exp(-iTdt)·exp(-iVdt/2)` with the kinetic factor
//! applied in momentum space. Adjacent half-kicks of consecutive steps are
//! merged, so `steps` steps cost `steps` forward/inverse transform pairs.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::compensated_sum;
use crate::entanglement::ClockMomentumState;
use crate::numerics::Integrator;
use crate::scattering::{self, BarrierSpec};

/// Stability heuristics: `dt·max|V|` and `dt·k_max²/2M` must not exceed this.
pub const STABILITY_LIMIT: f64 = 0.1;
/// Largest tolerated `|ψ|` in the outer cells, relative to `max|ψ|`.
pub const BOUNDARY_LEAK_LIMIT: f64 = 1e-8;
/// Fraction of the grid at each end watched for leakage.
const BOUNDARY_FRACTION: f64 = 0.01;
/// Probability left in the interaction region below which scattering counts
/// as complete.
pub const SCATTERING_COMPLETE: f64 = 1e-6;
const NORM_TOLERANCE: f64 = 1e-10;
const LEAK_CHECK_INTERVAL: usize = 256;
/// Roll-off of the spectral barrier, `exp(-strength·(k/k_N)^order)`.
const FILTER_STRENGTH: f64 = 36.0;
const FILTER_ORDER: i32 = 16;

pub const DEFAULT_GRID_POINTS: usize = 8192;

/// Uniform periodic grid `x_i = -L + i·dx`, `dx = 2L/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(invalid("n", format!("must be a power of two ≥ 16, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("half_width", format!("must be finite and positive, got {half_width}")));
        }
        Ok(Self { n, half_width })
    }

    /// `n = 8192` on `[-L, L]` with `L = 20·(ΔX(0) + v·t_total)`.
    pub fn default_for(position_spread: f64, velocity: f64, t_total: f64) -> Result<Self> {
        Self::new(DEFAULT_GRID_POINTS, 20.0 * (position_spread + velocity.abs() * t_total))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + self.dx() * i as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in transform order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = PI / self.half_width;
        let n = self.n as i64;
        (0..n).map(|m| dk * if m < n / 2 { m } else { m - n } as f64).collect()
    }

    /// `π/dx`.
    pub fn k_nyquist(&self) -> f64 {
        PI / self.dx()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wavepacket {
    grid: Grid,
    psi: Vec<Complex64>,
    mass: f64,
}

impl Wavepacket {
    /// Wraps samples that are normalized (`Σ|ψ|²dx = 1`) to 1e-10.
    pub fn new(grid: Grid, psi: Vec<Complex64>, mass: f64) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(invalid("psi", format!("{} samples for a grid of {}", psi.len(), grid.len())));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("must be finite and positive, got {mass}")));
        }
        let packet = Self { grid, psi, mass };
        let norm = packet.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid("psi", format!("norm {norm}, expected 1")));
        }
        Ok(packet)
    }

    /// Normalized Gaussian `exp(-(x − x0)²/(4σ²) + ik0x)` with position
    /// standard deviation `sigma_x`.
    pub fn gaussian(grid: Grid, mass: f64, x0: f64, sigma_x: f64, k0: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0) {
            return Err(invalid("sigma_x", format!("must be finite and positive, got {sigma_x}")));
        }
        let raw: Vec<Complex64> = grid
            .positions()
            .into_iter()
            .map(|x| {
                let d = (x - x0) / sigma_x;
                Complex64::from_polar((-0.25 * d * d).exp(), k0 * x)
            })
            .collect();
        let dx = grid.dx();
        let norm = compensated_sum(raw.iter().map(|z| z.norm_sqr() * dx));
        let scale = 1.0 / norm.sqrt();
        Self::new(grid, raw.into_iter().map(|z| z * scale).collect(), mass)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `Σ|ψ|²dx`.
    pub fn norm(&self) -> f64 {
        let dx = self.grid.dx();
        compensated_sum(self.psi.iter().map(|z| z.norm_sqr() * dx))
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        compensated_sum(self.psi.iter().enumerate().map(|(i, z)| self.grid.x(i) * z.norm_sqr() * dx)) / self.norm()
    }

    pub fn position_spread(&self) -> f64 {
        let dx = self.grid.dx();
        let mean = self.mean_position();
        let var = compensated_sum(
            self.psi
                .iter()
                .enumerate()
                .map(|(i, z)| (self.grid.x(i) - mean).powi(2) * z.norm_sqr() * dx),
        ) / self.norm();
        var.sqrt()
    }

    fn momentum_weights(&self) -> Vec<f64> {
        let mut buf = self.psi.clone();
        FftPlanner::new().plan_fft_forward(self.grid.len()).process(&mut buf);
        buf.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn mean_momentum(&self) -> f64 {
        let w = self.momentum_weights();
        let ks = self.grid.wavenumbers();
        compensated_sum(ks.iter().zip(&w).map(|(k, p)| k * p)) / compensated_sum(w.iter().copied())
    }

    /// `⟨P²⟩/2M`, evaluated spectrally.
    pub fn kinetic_energy(&self) -> f64 {
        let w = self.momentum_weights();
        let ks = self.grid.wavenumbers();
        compensated_sum(ks.iter().zip(&w).map(|(k, p)| k * k * p)) / compensated_sum(w.iter().copied())
            / (2.0 * self.mass)
    }

    pub fn potential_energy(&self, potential: &PotentialProfile) -> f64 {
        let dx = self.grid.dx();
        compensated_sum(self.psi.iter().zip(&potential.values).map(|(z, v)| v * z.norm_sqr() * dx)) / self.norm()
    }

    pub fn energy(&self, potential: &PotentialProfile) -> f64 {
        self.kinetic_energy() + self.potential_energy(potential)
    }

    /// Largest `|ψ|` in the outer 1% of the grid at either end, relative to
    /// `max|ψ|`.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.psi.len();
        let edge = ((n as f64 * BOUNDARY_FRACTION).ceil() as usize).max(1);
        let peak = self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let outer = self.psi[..edge]
            .iter()
            .chain(&self.psi[n - edge..])
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        outer / peak
    }

    /// Probability on `(lo, hi)`.
    pub fn probability_between(&self, lo: f64, hi: f64) -> f64 {
        let dx = self.grid.dx();
        compensated_sum(self.psi.iter().enumerate().filter_map(|(i, z)| {
            let x = self.grid.x(i);
            (x > lo && x < hi).then(|| z.norm_sqr() * dx)
        }))
    }

    /// Complex conjugate, i.e. the time-reversed state.
    pub fn conjugate(&self) -> Self {
        Self {
            grid: self.grid,
            psi: self.psi.iter().map(|z| z.conj()).collect(),
            mass: self.mass,
        }
    }

    /// `max_i |ψ_i − φ_i|`.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// How a discontinuous barrier is put on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum BarrierSampling {
    /// Band-limited projection: the exact Fourier transform of the rectangle
    /// on the grid wavenumbers, rolled off near the Nyquist wavenumber by the
    /// filter `exp(-36·(k/k_N)¹⁶)`. Without the roll-off the sinc ripple
    /// reaches across the whole grid and sheds fast waves into the boundary.
    #[default]
    Spectral,
    /// Each cell takes the barrier height times its fractional overlap with
    /// the barrier.
    CellAverage,
}

/// Real potential sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialProfile {
    values: Vec<f64>,
}

impl PotentialProfile {
    pub fn zero(grid: &Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("values", format!("{} samples for a grid of {}", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "potential must be finite"));
        }
        Ok(Self { values })
    }

    /// Height `height` on `(centre − width/2, centre + width/2)`.
    pub fn rectangular(grid: &Grid, height: f64, centre: f64, width: f64, sampling: BarrierSampling) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("must be finite and positive, got {width}")));
        }
        if !height.is_finite() {
            return Err(invalid("height", format!("must be finite, got {height}")));
        }
        let lo = centre - 0.5 * width;
        let hi = centre + 0.5 * width;
        let values = match sampling {
            BarrierSampling::CellAverage => {
                let dx = grid.dx();
                grid.positions()
                    .into_iter()
                    .map(|x| {
                        let overlap = ((x + 0.5 * dx).min(hi) - (x - 0.5 * dx).max(lo)).max(0.0);
                        height * overlap / dx
                    })
                    .collect()
            }
            BarrierSampling::Spectral => spectral_rectangle(grid, height, lo, hi),
        };
        Self::from_values(grid, values)
    }

    /// The barrier seen by the clock, centred on the origin.
    pub fn from_barrier(grid: &Grid, barrier: &BarrierSpec, sampling: BarrierSampling) -> Result<Self> {
        if barrier.is_delta() {
            return Err(invalid("width", "a zero-width coupling cannot be put on a grid"));
        }
        Self::rectangular(grid, barrier.height(), 0.0, barrier.width(), sampling)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn spectral_rectangle(grid: &Grid, height: f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = grid.len();
    let period = 2.0 * grid.half_width();
    let ks = grid.wavenumbers();
    let k_n = grid.k_nyquist();
    // Continuous transform h·∫_lo^hi exp(-ikx) dx, shifted to the grid origin.
    let transform = |k: f64| -> Complex64 {
        let raw = if k == 0.0 {
            Complex64::new(height * (hi - lo), 0.0)
        } else {
            (Complex64::from_polar(1.0, -k * lo) - Complex64::from_polar(1.0, -k * hi)) * (height / k)
                * Complex64::new(0.0, -1.0)
        };
        let filter = (-FILTER_STRENGTH * (k / k_n).abs().powi(FILTER_ORDER)).exp();
        raw * Complex64::from_polar(filter / period, -k * grid.x(0))
    };
    let mut coeffs: Vec<Complex64> = ks.iter().map(|&k| transform(k)).collect();
    // The Nyquist mode stands for ±k_N together (and is filtered to ~e⁻³⁶).
    coeffs[n / 2] = Complex64::new(coeffs[n / 2].re, 0.0);
    FftPlanner::new().plan_fft_inverse(n).process(&mut coeffs);
    coeffs.into_iter().map(|z| z.re).collect()
}

/// Prepared split-step operator for a fixed grid, mass, potential and step.
pub struct Propagator {
    grid: Grid,
    mass: f64,
    dt: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-ik²dt/2M)/n`; the inverse transform is unnormalized.
    kinetic: Vec<Complex64>,
    half_kick: Vec<Complex64>,
    full_kick: Vec<Complex64>,
    check_leak: bool,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", &self.grid)
            .field("mass", &self.mass)
            .field("dt", &self.dt)
            .finish_non_exhaustive()
    }
}

impl Propagator {
    /// Fails with [`Error::UnstableStep`] if either stability heuristic is
    /// violated.
    pub fn new(grid: Grid, mass: f64, potential: &PotentialProfile, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", format!("must be finite and positive, got {dt}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("must be finite and positive, got {mass}")));
        }
        if potential.values.len() != grid.len() {
            return Err(invalid("potential", "sampled on a different grid"));
        }
        let potential_figure = dt * potential.max_abs();
        let kinetic_figure = dt * grid.k_nyquist().powi(2) / (2.0 * mass);
        if potential_figure > STABILITY_LIMIT || kinetic_figure > STABILITY_LIMIT {
            return Err(Error::UnstableStep {
                potential: potential_figure,
                kinetic: kinetic_figure,
            });
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.len());
        let inverse = planner.plan_fft_inverse(grid.len());
        let scale = 1.0 / grid.len() as f64;
        let kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| Complex64::from_polar(scale, -k * k * dt / (2.0 * mass)))
            .collect();
        let kick = |f: f64| -> Vec<Complex64> {
            potential.values.iter().map(|v| Complex64::from_polar(1.0, -f * v * dt)).collect()
        };
        Ok(Self {
            grid,
            mass,
            dt,
            forward,
            inverse,
            kinetic,
            half_kick: kick(0.5),
            full_kick: kick(1.0),
            check_leak: true,
        })
    }

    /// Disables the boundary-leak check (for deliberately periodic runs).
    pub fn without_leak_check(mut self) -> Self {
        self.check_leak = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn leak_check(&self, psi: &[Complex64]) -> Result<()> {
        if !self.check_leak {
            return Ok(());
        }
        let packet = Wavepacket {
            grid: self.grid,
            psi: psi.to_vec(),
            mass: self.mass,
        };
        let magnitude = packet.boundary_amplitude();
        if magnitude >= BOUNDARY_LEAK_LIMIT {
            return Err(Error::BoundaryLeak { magnitude });
        }
        Ok(())
    }

    /// Advances `packet` by `steps` steps in place.
    ///
    /// The boundary is checked every 256 steps and at the end; on a leak the
    /// packet is left at the state where the leak was found.
    pub fn evolve_in_place(&self, packet: &mut Wavepacket, steps: usize) -> Result<()> {
        if packet.grid != self.grid || packet.mass != self.mass {
            return Err(invalid("packet", "grid or mass differs from the propagator's"));
        }
        if steps == 0 {
            return Ok(());
        }
        let psi = &mut packet.psi;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        mul_assign(psi, &self.half_kick);
        for step in 1..=steps {
            self.forward.process_with_scratch(psi, &mut scratch);
            mul_assign(psi, &self.kinetic);
            self.inverse.process_with_scratch(psi, &mut scratch);
            if step == steps {
                mul_assign(psi, &self.half_kick);
            } else {
                mul_assign(psi, &self.full_kick);
                // Kicks are pure phases, so |ψ| is valid mid-step.
                if step % LEAK_CHECK_INTERVAL == 0 {
                    if let Err(e) = self.leak_check(psi) {
                        mul_assign_conj(psi, &self.half_kick);
                        return Err(e);
                    }
                }
            }
        }
        self.leak_check(psi)
    }

    pub fn evolve(&self, packet: &Wavepacket, steps: usize) -> Result<Wavepacket> {
        let mut out = packet.clone();
        self.evolve_in_place(&mut out, steps)?;
        Ok(out)
    }

    /// Evolves for `steps` steps and records the state every `every` steps
    /// (including the initial one).
    pub fn evolve_recording(&self, packet: &Wavepacket, steps: usize, every: usize) -> Result<Vec<Snapshot>> {
        if every == 0 {
            return Err(invalid("every", "must be positive"));
        }
        let mut current = packet.clone();
        let mut done = 0;
        let mut out = vec![Snapshot {
            time: 0.0,
            packet: current.clone(),
        }];
        while done < steps {
            let chunk = every.min(steps - done);
            self.evolve_in_place(&mut current, chunk)?;
            done += chunk;
            out.push(Snapshot {
                time: done as f64 * self.dt,
                packet: current.clone(),
            });
        }
        Ok(out)
    }
}

fn mul_assign(a: &mut [Complex64], b: &[Complex64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x *= y);
}

fn mul_assign_conj(a: &mut [Complex64], b: &[Complex64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x *= y.conj());
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub packet: Wavepacket,
}

/// One-shot evolution.
pub fn evolve(packet: &Wavepacket, potential: &PotentialProfile, dt: f64, steps: usize) -> Result<Wavepacket> {
    Propagator::new(packet.grid, packet.mass, potential, dt)?.evolve(packet, steps)
}

/// Probability beyond `right_edge` for a barrier centred on the origin.
///
/// Fails with [`Error::ScatteringIncomplete`] while `SCATTERING_COMPLETE` or
/// more of the probability is still in `(-right_edge, right_edge)`.
pub fn transmitted_fraction(packet: &Wavepacket, right_edge: f64) -> Result<f64> {
    if !(right_edge.is_finite() && right_edge >= 0.0) {
        return Err(invalid("right_edge", format!("must be finite and non-negative, got {right_edge}")));
    }
    let inside = packet.probability_between(-right_edge, right_edge);
    if inside >= SCATTERING_COMPLETE {
        return Err(Error::ScatteringIncomplete { probability: inside });
    }
    let dx = packet.grid.dx();
    let beyond = compensated_sum(
        packet
            .psi
            .iter()
            .enumerate()
            .filter_map(|(i, z)| (packet.grid.x(i) >= right_edge).then(|| z.norm_sqr() * dx)),
    );
    Ok(beyond.clamp(0.0, 1.0))
}

/// Largest step satisfying both stability heuristics, shrunk so that an
/// integer number of steps covers `t_total` exactly.
pub fn stable_step(grid: &Grid, mass: f64, potential: &PotentialProfile, t_total: f64) -> Result<(f64, usize)> {
    if !(t_total.is_finite() && t_total > 0.0) {
        return Err(invalid("t_total", format!("must be finite and positive, got {t_total}")));
    }
    let kinetic_limit = STABILITY_LIMIT * 2.0 * mass / grid.k_nyquist().powi(2);
    let potential_limit = if potential.max_abs() > 0.0 {
        STABILITY_LIMIT / potential.max_abs()
    } else {
        f64::INFINITY
    };
    let dt_max = kinetic_limit.min(potential_limit);
    let steps = (t_total / dt_max).ceil() as usize;
    Ok((t_total / steps as f64, steps))
}

/// `∫|φ_C(k)|²·|T(k)|² dk`: the transmission probability of a packet with
/// momentum distribution `clock`, from the stationary amplitudes.
pub fn stationary_transmission(clock: &ClockMomentumState, barrier: &BarrierSpec) -> Result<f64> {
    let lo = (clock.mean_k() - 14.0 * clock.sigma_k()).max(0.0);
    let hi = clock.mean_k() + 14.0 * clock.sigma_k();
    Integrator::with_tolerances(1e-14, 1e-12).integrate_real(
        |k| {
            if k <= 0.0 {
                return 0.0;
            }
            let t = scattering::amplitudes(k, barrier).map(|a| a.transmission_probability());
            clock.density(k) * t.unwrap_or(f64::NAN)
        },
        lo,
        hi,
    )
}

/// A Gaussian packet sent from `x0` towards a barrier centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringRun {
    pub grid: Grid,
    pub mass: f64,
    pub mean_k: f64,
    pub sigma_k: f64,
    pub x0: f64,
    pub barrier_height: f64,
    pub barrier_width: f64,
    pub t_total: f64,
    pub sampling: BarrierSampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringOutcome {
    pub transmitted: f64,
    pub dt: f64,
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub final_norm: f64,
}

impl ScatteringRun {
    pub fn potential(&self) -> Result<PotentialProfile> {
        PotentialProfile::rectangular(&self.grid, self.barrier_height, 0.0, self.barrier_width, self.sampling)
    }

    pub fn initial_packet(&self) -> Result<Wavepacket> {
        if !(self.sigma_k.is_finite() && self.sigma_k > 0.0) {
            return Err(invalid("sigma_k", format!("must be finite and positive, got {}", self.sigma_k)));
        }
        Wavepacket::gaussian(self.grid, self.mass, self.x0, 0.5 / self.sigma_k, self.mean_k)
    }

    /// Runs to `t_total` with the largest stable step and measures the
    /// probability beyond the barrier's right edge.
    pub fn run(&self) -> Result<ScatteringOutcome> {
        let potential = self.potential()?;
        let packet = self.initial_packet()?;
        let (dt, steps) = stable_step(&self.grid, self.mass, &potential, self.t_total)?;
        let propagator = Propagator::new(self.grid, self.mass, &potential, dt)?;
        let out = propagator.evolve(&packet, steps)?;
        Ok(ScatteringOutcome {
            transmitted: transmitted_fraction(&out, 0.5 * self.barrier_width)?,
            dt,
            steps,
            initial_energy: packet.energy(&potential),
            final_energy: out.energy(&potential),
            final_norm: out.norm(),
        })
    }
}
