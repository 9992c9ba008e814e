//! Strong back-reaction limit: after the pointer is found at `P₀`, the system
//! stays correlated with the clock through the post-selected clock states
//!
//! ```text
//! |φ_j⟩ = θ(P₀j) ∫ dk exp(-(k/M)|P₀/j|) φ_C(k) |k⟩,
//! ```
//!
//! which are not orthogonal. Tracing out the clock leaves a mixed system state.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{compensated_sum, compensated_sum_complex, erfc, erfcx, Integrator};

/// Quadrature window half-width in units of `σ_k`.
const WINDOW_SIGMAS: f64 = 14.0;
pub const OVERLAP_TOLERANCE: f64 = 1e-10;
const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSpec {
    eigenvalues: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl SystemSpec {
    pub fn new(eigenvalues: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("eigenvalues", "empty"));
        }
        if eigenvalues.len() != amplitudes.len() {
            return Err(invalid(
                "amplitudes",
                format!("{} amplitudes for {} eigenvalues", amplitudes.len(), eigenvalues.len()),
            ));
        }
        for (i, &j) in eigenvalues.iter().enumerate() {
            if !(j.is_finite() && j != 0.0) {
                return Err(invalid("eigenvalues", format!("must be finite and nonzero, got {j}")));
            }
            if eigenvalues[..i].contains(&j) {
                return Err(invalid("eigenvalues", format!("repeated eigenvalue {j}")));
            }
        }
        let norm = compensated_sum(amplitudes.iter().map(|c| c.norm_sqr()));
        if !((norm - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
            return Err(invalid("amplitudes", format!("Σ|C|² = {norm}, expected 1")));
        }
        Ok(Self {
            eigenvalues,
            amplitudes,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Gaussian clock momentum amplitude `φ_C(k) ∝ exp(-(k − k̄)²/(4σ²))` on
/// `k > 0`, normalized there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockMomentumState {
    mean_k: f64,
    sigma_k: f64,
}

impl ClockMomentumState {
    /// Requires `mean_k ≥ 5·sigma_k`.
    pub fn new(mean_k: f64, sigma_k: f64) -> Result<Self> {
        if !(sigma_k.is_finite() && sigma_k > 0.0) {
            return Err(invalid("sigma_k", format!("must be finite and positive, got {sigma_k}")));
        }
        if !(mean_k.is_finite() && mean_k >= 5.0 * sigma_k) {
            return Err(invalid("mean_k", format!("must be at least 5·sigma_k, got {mean_k}")));
        }
        Ok(Self { mean_k, sigma_k })
    }

    pub fn mean_k(&self) -> f64 {
        self.mean_k
    }

    pub fn sigma_k(&self) -> f64 {
        self.sigma_k
    }

    fn normalization(&self) -> f64 {
        let s = self.sigma_k;
        s * (PI / 2.0).sqrt() * erfc(Complex64::new(-self.mean_k / s * FRAC_1_SQRT_2, 0.0)).re
    }

    /// `|φ_C(k)|²`, zero for `k ≤ 0`.
    pub fn density(&self, k: f64) -> f64 {
        if k <= 0.0 {
            return 0.0;
        }
        let d = (k - self.mean_k) / self.sigma_k;
        (-0.5 * d * d).exp() / self.normalization()
    }

    /// `φ_C(k)`, real and non-negative.
    pub fn amplitude(&self, k: f64) -> f64 {
        self.density(k).sqrt()
    }

    /// `∫_0^∞ exp(-c·k)|φ_C(k)|² dk` in closed form.
    pub fn damped_norm(&self, c: f64) -> f64 {
        let (m, s) = (self.mean_k, self.sigma_k);
        let y = (c * s * s - m) / s * FRAC_1_SQRT_2;
        let z0 = -m / s * FRAC_1_SQRT_2;
        let num = if y <= 0.0 {
            (-c * m + 0.5 * c * c * s * s).exp() * erfc(Complex64::new(y, 0.0)).re
        } else {
            // Exponents combine to -k̄²/(2σ²).
            erfcx(Complex64::new(y, 0.0)).map(|v| v.re).unwrap_or(0.0) * (-0.5 * m * m / (s * s)).exp()
        };
        num / erfc(Complex64::new(z0, 0.0)).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockOverlap {
    pub value: Complex64,
    /// At least one state is removed by the `θ(P₀j)` selection.
    pub branch_excluded: bool,
}

fn check_postselection(p0: f64, mass: f64) -> Result<()> {
    if !(p0.is_finite() && p0 != 0.0) {
        return Err(invalid("p0", format!("must be finite and nonzero, got {p0}")));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be finite and positive, got {mass}")));
    }
    Ok(())
}

fn on_branch(j: f64, p0: f64) -> bool {
    j * p0 > 0.0
}

/// Damping rate of `|φ_j⟩` in `k`: `|P₀/j|/M`.
fn damping(j: f64, p0: f64, mass: f64) -> f64 {
    (p0 / j).abs() / mass
}

/// `⟨φ_j|φ_{j2}⟩ = ∫ dk exp(-(k/M)(|P₀/j| + |P₀/j2|))|φ_C(k)|²`, by adaptive
/// quadrature at relative tolerance [`OVERLAP_TOLERANCE`].
pub fn postselected_clock_overlap(
    j: f64,
    j2: f64,
    p0: f64,
    clock: &ClockMomentumState,
    mass: f64,
) -> Result<ClockOverlap> {
    check_postselection(p0, mass)?;
    for v in [j, j2] {
        if !(v.is_finite() && v != 0.0) {
            return Err(invalid("j", format!("must be finite and nonzero, got {v}")));
        }
    }
    if !(on_branch(j, p0) && on_branch(j2, p0)) {
        return Ok(ClockOverlap {
            value: Complex64::new(0.0, 0.0),
            branch_excluded: true,
        });
    }
    let c = damping(j, p0, mass) + damping(j2, p0, mass);
    let s = clock.sigma_k;
    // Peak of the damped Gaussian.
    let centre = clock.mean_k - c * s * s;
    let lo = (centre - WINDOW_SIGMAS * s).max(0.0);
    let hi = centre.max(0.0) + WINDOW_SIGMAS * s;
    let integrator = Integrator::with_tolerances(0.0, OVERLAP_TOLERANCE);
    let value = integrator.integrate_real(|k| (-c * k).exp() * clock.density(k), lo, hi)?;
    Ok(ClockOverlap {
        value: Complex64::new(value, 0.0),
        branch_excluded: false,
    })
}

/// `⟨ξ|φ_j⟩` for a clock state given by its momentum amplitude `ξ(k)`.
pub fn clock_projection<F>(xi: F, j: f64, p0: f64, clock: &ClockMomentumState, mass: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    check_postselection(p0, mass)?;
    if !on_branch(j, p0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c = damping(j, p0, mass);
    let s = clock.sigma_k;
    let lo = (clock.mean_k - WINDOW_SIGMAS * s).max(0.0);
    let hi = clock.mean_k + WINDOW_SIGMAS * s;
    let integrator = Integrator::with_tolerances(1e-14, OVERLAP_TOLERANCE);
    let r = integrator.integrate(|k| xi(k).conj() * ((-c * k).exp() * clock.amplitude(k)), lo, hi)?;
    Ok(r.value)
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    const HERMITIAN_TOLERANCE: f64 = 1e-12;
    const TRACE_TOLERANCE: f64 = 1e-12;
    const PSD_TOLERANCE: f64 = 1e-10;

    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("not square: {}×{}", n, entries.ncols()),
            });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for r in 0..n {
            for c in 0..n {
                let defect = (entries[(r, c)] - entries[(c, r)].conj()).norm();
                if defect > Self::HERMITIAN_TOLERANCE * scale.max(1.0) {
                    return Err(Error::InvalidDensityMatrix {
                        reason: format!("not Hermitian at ({r}, {c}): defect {defect:e}"),
                    });
                }
            }
        }
        let trace = compensated_sum((0..n).map(|i| entries[(i, i)].re));
        if (trace - 1.0).abs() > Self::TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("trace {trace}"),
            });
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -Self::PSD_TOLERANCE {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("negative eigenvalue {min_eig:e}"),
            });
        }
        Ok(Self { entries })
    }

    /// Maximally mixed state of dimension `n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let v = Complex64::new(1.0 / n as f64, 0.0);
        Self::new(DMatrix::from_diagonal_element(n, n, v))
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[(r, c)]
    }

    /// Row-major nested rows, for serialization.
    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dimension())
            .map(|r| (0..self.dimension()).map(|c| self.entries[(r, c)]).collect())
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `Tr(ρ²)`, computed as `Σ|ρ_ij|²` for Hermitian `ρ`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    compensated_sum(rho.entries.iter().map(|z| z.norm_sqr()))
}

/// Result of post-selecting the pointer at `P₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    /// Indices into the system's eigenvalue list that survive `θ(P₀j)`.
    pub branch: Vec<usize>,
    /// `gram[a][b] = ⟨φ_{j_a}|φ_{j_b}⟩` over the branch.
    pub gram: DMatrix<Complex64>,
    pub rho: DensityMatrix,
    pub purity: f64,
    /// `Σ_branch |C_i|²⟨φ_i|φ_i⟩`, the unnormalized weight of the branch.
    pub branch_probability: f64,
}

fn branch_indices(system: &SystemSpec, sign: f64) -> Vec<usize> {
    (0..system.len()).filter(|&i| on_branch(system.eigenvalues[i], sign)).collect()
}

/// Gram matrix of the post-selected clock states for the given eigenvalues.
pub fn gram_matrix(eigenvalues: &[f64], p0: f64, clock: &ClockMomentumState, mass: f64) -> Result<DMatrix<Complex64>> {
    let n = eigenvalues.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let values: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(a, b)| postselected_clock_overlap(eigenvalues[a], eigenvalues[b], p0, clock, mass).map(|o| o.value))
        .collect::<Result<_>>()?;
    let mut gram = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (&(a, b), v) in pairs.iter().zip(values) {
        gram[(a, b)] = v;
        gram[(b, a)] = v.conj();
    }
    Ok(gram)
}

/// Post-selects the pointer at `P₀` and traces out the clock.
///
/// Fails with [`Error::EmptyBranch`] when no eigenvalue has the sign of `P₀`
/// with nonzero amplitude.
pub fn post_select(system: &SystemSpec, p0: f64, clock: &ClockMomentumState, mass: f64) -> Result<PostSelection> {
    check_postselection(p0, mass)?;
    let branch = branch_indices(system, p0);
    let js: Vec<f64> = branch.iter().map(|&i| system.eigenvalues[i]).collect();
    let cs: Vec<Complex64> = branch.iter().map(|&i| system.amplitudes[i]).collect();
    let gram = gram_matrix(&js, p0, clock, mass)?;
    let n = branch.len();
    // ρ_{ab} = C_a C_b* ⟨φ_b|φ_a⟩
    let mut rho = DMatrix::from_fn(n, n, |a, b| cs[a] * cs[b].conj() * gram[(b, a)]);
    let weight = compensated_sum((0..n).map(|i| rho[(i, i)].re));
    if !(weight > 0.0) {
        return Err(Error::EmptyBranch);
    }
    rho /= Complex64::new(weight, 0.0);
    for i in 0..n {
        rho[(i, i)].im = 0.0;
    }
    let rho = DensityMatrix::new(rho)?;
    let purity = purity(&rho);
    Ok(PostSelection {
        branch,
        gram,
        rho,
        purity,
        branch_probability: weight,
    })
}

pub fn reduced_density_matrix(system: &SystemSpec, p0: f64, clock: &ClockMomentumState, mass: f64) -> Result<DensityMatrix> {
    post_select(system, p0, clock, mass).map(|s| s.rho)
}

/// Unnormalized weight of the pointer branch with the sign of `p0_sign`,
/// post-selected at `|P₀| = |p0|`.
pub fn branch_probability(system: &SystemSpec, p0_sign: f64, clock: &ClockMomentumState, mass: f64, p0: f64) -> Result<f64> {
    if !(p0_sign == 1.0 || p0_sign == -1.0) {
        return Err(invalid("p0_sign", format!("must be ±1, got {p0_sign}")));
    }
    let p0 = p0_sign * p0.abs();
    check_postselection(p0, mass)?;
    let terms: Vec<f64> = branch_indices(system, p0)
        .into_iter()
        .map(|i| {
            let j = system.eigenvalues[i];
            postselected_clock_overlap(j, j, p0, clock, mass).map(|o| system.amplitudes[i].norm_sqr() * o.value.re)
        })
        .collect::<Result<_>>()?;
    Ok(compensated_sum(terms))
}

/// Unnormalized system state `Σ_i C_i⟨ξ|φ_{j_i}⟩|j_i⟩` left after also
/// projecting the clock on `|ξ⟩`.
pub fn conditional_system_state<F>(
    system: &SystemSpec,
    xi: F,
    p0: f64,
    clock: &ClockMomentumState,
    mass: f64,
) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    system
        .eigenvalues
        .iter()
        .zip(&system.amplitudes)
        .map(|(&j, &c)| clock_projection(&xi, j, p0, clock, mass).map(|v| c * v))
        .collect()
}

/// `Σ_i |ψ_i|²`, for convenience with [`conditional_system_state`].
pub fn state_norm_sqr(psi: &[Complex64]) -> f64 {
    compensated_sum_complex(psi.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0))).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn clock() -> ClockMomentumState {
        ClockMomentumState::new(10.0, 1.0).unwrap()
    }

    fn half() -> Complex64 {
        Complex64::new(FRAC_1_SQRT_2, 0.0)
    }

    #[test]
    fn clock_state_validation() {
        assert!(ClockMomentumState::new(4.0, 1.0).is_err());
        assert!(ClockMomentumState::new(10.0, 0.0).is_err());
        let c = clock();
        let total = Integrator::new(1e-12).integrate_real(|k| c.density(k), 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(total, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn system_validation() {
        assert!(SystemSpec::new(vec![1.0], vec![Complex64::new(0.9, 0.0)]).is_err());
        assert!(SystemSpec::new(vec![1.0, 1.0], vec![half(), half()]).is_err());
        assert!(SystemSpec::new(vec![0.0, 1.0], vec![half(), half()]).is_err());
        assert!(SystemSpec::new(vec![1.0, 2.0], vec![half()]).is_err());
        assert!(SystemSpec::new(vec![1.0, 2.0], vec![half(), half()]).is_ok());
    }

    #[test]
    fn self_overlap_is_positive_real() {
        let o = postselected_clock_overlap(1.5, 1.5, 0.7, &clock(), 1.0).unwrap();
        assert!(o.value.re > 0.0);
        assert_eq!(o.value.im, 0.0);
        assert!(!o.branch_excluded);
    }

    #[test]
    fn overlap_matches_closed_form() {
        let c = clock();
        for (j, j2, p0, m) in [(1.0, 2.0, 1.0, 1.0), (1.0, 1.0, 1.0, 1.0), (-0.5, -3.0, -0.2, 2.0), (1.0, 1.0, 40.0, 1.0)] {
            let rate = ((p0 / j) as f64).abs() / m + ((p0 / j2) as f64).abs() / m;
            let o = postselected_clock_overlap(j, j2, p0, &c, m).unwrap();
            assert_relative_eq!(o.value.re, c.damped_norm(rate), max_relative = 1e-9);
        }
    }

    #[test]
    fn weak_postselection_leaves_clock_untouched() {
        let o = postselected_clock_overlap(1.0, 3.0, 1e-12, &clock(), 1.0).unwrap();
        assert_relative_eq!(o.value.re, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn sign_mismatch_excludes_branch() {
        let o = postselected_clock_overlap(1.0, -2.0, 1.0, &clock(), 1.0).unwrap();
        assert_eq!(o.value, Complex64::new(0.0, 0.0));
        assert!(o.branch_excluded);
    }

    #[test]
    fn distinct_eigenvalues_overlap_without_orthogonality() {
        let c = clock();
        let g12 = postselected_clock_overlap(1.0, 2.0, 1.0, &c, 1.0).unwrap().value.re;
        let g11 = postselected_clock_overlap(1.0, 1.0, 1.0, &c, 1.0).unwrap().value.re;
        let g22 = postselected_clock_overlap(2.0, 2.0, 1.0, &c, 1.0).unwrap().value.re;
        assert!(g12 > 0.0 && g12 < 1.0);
        // Normalized overlap strictly between 0 and 1.
        let cos = g12 / (g11 * g22).sqrt();
        assert!(cos > 0.0 && cos < 1.0);
    }

    #[test]
    fn two_eigenvalue_scenario_is_mixed() {
        let system = SystemSpec::new(vec![1.0, 2.0], vec![half(), half()]).unwrap();
        let s = post_select(&system, 1.0, &clock(), 1.0).unwrap();
        let off = s.rho.get(0, 1).norm();
        assert!(off > 0.0 && off < 0.5);
        assert!(s.purity > 0.5 && s.purity < 1.0);
    }

    #[test]
    fn single_branch_eigenvalue_is_pure() {
        let system = SystemSpec::new(vec![1.0, -1.0], vec![half(), half()]).unwrap();
        let s = post_select(&system, 2.0, &clock(), 1.0).unwrap();
        assert_eq!(s.branch, vec![0]);
        assert_eq!(s.rho.dimension(), 1);
        assert_relative_eq!(s.rho.get(0, 0).re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(s.purity, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn empty_branch_is_an_error() {
        let system = SystemSpec::new(vec![-1.0, -2.0], vec![half(), half()]).unwrap();
        assert_eq!(post_select(&system, 1.0, &clock(), 1.0).unwrap_err(), Error::EmptyBranch);
        let zero = SystemSpec::new(vec![1.0, -2.0], vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(post_select(&zero, 1.0, &clock(), 1.0).unwrap_err(), Error::EmptyBranch);
    }

    #[test]
    fn purity_of_reference_states() {
        let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        assert_relative_eq!(purity(&DensityMatrix::pure(&psi).unwrap()), 1.0, max_relative = 1e-15);
        assert_relative_eq!(purity(&DensityMatrix::maximally_mixed(2).unwrap()), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = DMatrix::from_diagonal_element(2, 2, Complex64::new(0.6, 0.0));
        assert!(DensityMatrix::new(bad_trace).is_err());
        let not_psd = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.5, 0.0), Complex64::new(0.9, 0.0),
            Complex64::new(0.9, 0.0), Complex64::new(0.5, 0.0),
        ]);
        assert!(DensityMatrix::new(not_psd).is_err());
        let not_hermitian = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.1),
            Complex64::new(0.1, 0.1), Complex64::new(0.5, 0.0),
        ]);
        assert!(DensityMatrix::new(not_hermitian).is_err());
    }

    #[test]
    fn branch_probabilities() {
        let c = clock();
        let sym = SystemSpec::new(vec![1.0, -1.0], vec![half(), half()]).unwrap();
        let plus = branch_probability(&sym, 1.0, &c, 1.0, 0.5).unwrap();
        let minus = branch_probability(&sym, -1.0, &c, 1.0, 0.5).unwrap();
        assert_relative_eq!(plus, minus, max_relative = 1e-14);
        let pos = SystemSpec::new(vec![1.0, 2.0], vec![half(), half()]).unwrap();
        assert_relative_eq!(branch_probability(&pos, 1.0, &c, 1.0, 1e-12).unwrap(), 1.0, max_relative = 1e-9);
        assert_eq!(branch_probability(&pos, -1.0, &c, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn later_clock_readout_cannot_pick_an_eigenvalue() {
        let system = SystemSpec::new(vec![1.0, 2.0, 3.0], vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.48),
            Complex64::new(0.64, 0.0),
        ])
        .unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let k0 = rng.random_range(6.0..14.0);
            let w = rng.random_range(0.3..3.0);
            let phase = rng.random_range(0.0..3.0);
            let xi = move |k: f64| Complex64::from_polar((-((k - k0) / w).powi(2)).exp(), phase * k);
            let psi = conditional_system_state(&system, xi, 1.0, &clock(), 1.0).unwrap();
            let scale = state_norm_sqr(&psi).sqrt();
            let nonzero = psi.iter().filter(|z| z.norm() > 1e-12 * scale).count();
            assert!(nonzero >= 2);
        }
    }

    fn eigenvalue_set() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.2f64..5.0, 2..5).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 48, rng_seed: proptest::test_runner::RngSeed::Fixed(19), ..ProptestConfig::default() })]

        #[test]
        fn gram_is_hermitian_psd(js in eigenvalue_set(), p0 in 0.05f64..3.0, mean in 5.0f64..20.0) {
            let c = ClockMomentumState::new(mean, 1.0).unwrap();
            let g = gram_matrix(&js, p0, &c, 1.0).unwrap();
            prop_assert!(min_eigenvalue(&g) >= -1e-10);
            prop_assert_eq!(g.clone(), g.adjoint());
        }

        #[test]
        fn overlap_decreases_with_postselection_strength(p0 in 0.05f64..3.0, dp in 0.01f64..1.0) {
            let c = clock();
            let a = postselected_clock_overlap(1.0, 2.0, p0, &c, 1.0).unwrap().value.re;
            let b = postselected_clock_overlap(1.0, 2.0, p0 + dp, &c, 1.0).unwrap().value.re;
            prop_assert!(b < a);
        }

        #[test]
        fn purity_bounds(js in eigenvalue_set(), p0 in 0.05f64..2.0, raw in prop::collection::vec(0.1f64..1.0, 4)) {
            prop_assume!(js.len() >= 2);
            let n = js.len();
            let norm = raw[..n].iter().map(|x| x * x).sum::<f64>().sqrt();
            let amps: Vec<Complex64> = raw[..n].iter().map(|x| Complex64::new(x / norm, 0.0)).collect();
            let system = SystemSpec::new(js, amps).unwrap();
            let s = post_select(&system, p0, &ClockMomentumState::new(8.0, 1.0).unwrap(), 1.0).unwrap();
            prop_assert!(s.purity >= 1.0 / n as f64 - 1e-12);
            prop_assert!(s.purity < 1.0);
        }
    }
}
