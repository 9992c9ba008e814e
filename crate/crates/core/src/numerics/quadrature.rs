//! Globally adaptive 21-point Gauss–Kronrod quadrature for complex-valued
//! integrands of one real variable.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol·|I|)`. Per-interval error
//! estimates use the QUADPACK rescaling of `|K21 - G10|`. Floating-point
//! roundoff is not included in the estimate.
//!
//! Infinite limits are handled by a change of variable onto a finite
//! parameter interval whose endpoints the rule never samples:
//!
//! * `[a, ∞)`:   `x = a + t/(1 - t)`,   `t ∈ [0, 1)`
//! * `(-∞, b]`:  `x = b - t/(1 - t)`,   `t ∈ [0, 1)`
//! * `(-∞, ∞)`:  `x = t/(1 - t²)`,      `t ∈ (-1, 1)`

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;

use super::summation::NeumaierSum;
use crate::error::{invalid, Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_423_226,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Weights of the embedded 10-point Gauss rule, on `XGK[1], XGK[3], ..`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_asc: f64) -> f64 {
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        }
    } else {
        err
    }
}

fn kronrod21<F>(f: &F, a: f64, b: f64) -> Segment
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = Complex64::new(0.0, 0.0);
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let scale = half.abs();
    let err = ((res_k - res_g) * half).norm();
    Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error(err, res_asc * scale),
    }
}

/// Adaptive integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl Integrator {
    /// Same value for the absolute and relative tolerance.
    pub fn new(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(invalid("tol", "tolerances must be non-negative and not both zero"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be positive"));
        }
        Ok(())
    }

    /// Integrates `f` over `[a, b]`; either limit may be infinite.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> Complex64,
    {
        self.validate()?;
        if a.is_nan() || b.is_nan() {
            return Err(invalid("limits", "NaN integration limit"));
        }
        if a == b {
            return Ok(QuadratureResult {
                value: Complex64::new(0.0, 0.0),
                error_estimate: 0.0,
                evaluations: 0,
            });
        }
        if a > b {
            let r = self.integrate(f, b, a)?;
            return Ok(QuadratureResult { value: -r.value, ..r });
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.integrate_finite(&f, a, b),
            (true, false) => self.integrate_finite(
                &|t: f64| {
                    let s = 1.0 - t;
                    f(a + t / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.integrate_finite(
                &|t: f64| {
                    let s = 1.0 - t;
                    f(b - t / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, false) => self.integrate_finite(
                &|t: f64| {
                    let s = 1.0 - t * t;
                    f(t / s) * ((1.0 + t * t) / (s * s))
                },
                -1.0,
                1.0,
            ),
        }
    }

    /// Convenience wrapper for real integrands.
    pub fn integrate_real<F>(&self, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate(|x| Complex64::new(f(x), 0.0), a, b).map(|r| r.value.re)
    }

    fn integrate_finite<F>(&self, f: &F, a: f64, b: f64) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> Complex64,
    {
        let first = kronrod21(f, a, b);
        let mut evaluations = 21;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        let mut value = first.value;
        let mut error = first.error;
        loop {
            if error <= self.abs_tol.max(self.rel_tol * value.norm()) {
                break;
            }
            if heap.len() >= self.max_subdivisions {
                return Err(self.non_convergence(&heap, evaluations));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                heap.push(worst);
                return Err(self.non_convergence(&heap, evaluations));
            }
            let left = kronrod21(f, worst.a, mid);
            let right = kronrod21(f, mid, worst.b);
            evaluations += 42;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            // Running totals drift; resynchronize from the segments now and then.
            if heap.len() % 64 == 0 {
                (value, error) = totals(&heap);
            }
        }
        let (value, error_estimate) = totals(&heap);
        Ok(QuadratureResult {
            value,
            error_estimate,
            evaluations,
        })
    }

    fn non_convergence(&self, heap: &BinaryHeap<Segment>, evaluations: usize) -> Error {
        let (value, error_estimate) = totals(heap);
        Error::QuadratureNonConvergence {
            value,
            error_estimate,
            evaluations,
        }
    }
}

/// Sums segment values in left-to-right order so that the result does not
/// depend on heap layout.
fn totals(heap: &BinaryHeap<Segment>) -> (Complex64, f64) {
    let mut segments: Vec<&Segment> = heap.iter().collect();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    let mut err = NeumaierSum::default();
    for s in segments {
        re.add(s.value.re);
        im.add(s.value.im);
        err.add(s.error);
    }
    (Complex64::new(re.total(), im.total()), err.total())
}

/// Integrates `f` over `[a, b]` (limits may be infinite) and accepts the
/// result once the error estimate is below `max(tol·|I|, tol)`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    Integrator::new(tol).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_on_unit_interval() {
        let r = integrate_adaptive(|_| re(1.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-15);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn full_period_oscillation_vanishes() {
        let r = integrate_adaptive(|x| Complex64::new(0.0, x).exp(), 0.0, 2.0 * PI, 1e-12).unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn gaussian_over_real_line() {
        let r = integrate_adaptive(|x| re((-x * x).exp()), f64::NEG_INFINITY, f64::INFINITY, 1e-10).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() <= 1e-10 * PI.sqrt());
        assert!(r.error_estimate <= 1e-10 * PI.sqrt());
    }

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        // A single 21-point Kronrod panel integrates x^30 exactly.
        let seg = kronrod21(&|x: f64| re(x.powi(30)), -1.0, 1.0);
        assert!((seg.value.re - 2.0 / 31.0).abs() < 1e-15);
        let seg = kronrod21(&|x: f64| re(31.0 * x.powi(30) + x.powi(29)), 0.0, 1.0);
        assert!((seg.value.re - (1.0 + 1.0 / 30.0)).abs() < 1e-14);
    }

    #[test]
    fn gauss_weights_sum_to_interval_length() {
        let s: f64 = WG.iter().sum::<f64>() * 2.0;
        assert!((s - 2.0).abs() < 1e-15);
        let s: f64 = WGK[..10].iter().sum::<f64>() * 2.0 + WGK[10];
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn semi_infinite_limits() {
        let r = integrate_adaptive(|x| re((-x).exp()), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
        let r = integrate_adaptive(|x| re(x.exp()), f64::NEG_INFINITY, 0.0, 1e-12).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_adaptive(|x| re(x), 1.0, 0.0, 1e-12).unwrap();
        assert!((r.value.re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_convergence_carries_best_estimate() {
        let err = Integrator::new(1e-14)
            .max_subdivisions(3)
            .integrate(|x| re((1.0 / (x + 1e-3)).sin()), 0.0, 1.0)
            .unwrap_err();
        match err {
            Error::QuadratureNonConvergence { error_estimate, evaluations, .. } => {
                assert!(error_estimate > 0.0);
                assert!(evaluations > 21);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate_adaptive(|_| re(1.0), 0.0, 1.0, 0.0).is_err());
        assert!(integrate_adaptive(|_| re(1.0), 0.0, 1.0, f64::NAN).is_err());
    }
}
