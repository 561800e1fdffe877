//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Used for CDFs without closed forms, for normalization checks and for the
//! small-N eigenvalue integrals in [`crate::oracles`]. Infinite endpoints are
//! mapped onto finite intervals; Kronrod nodes never touch the endpoints, so
//! the maps are never evaluated at their singular points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_038,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    pub fn require(self, requested: f64) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                requested,
                achieved: self.error,
            })
        }
    }
}

/// Tolerances and subdivision budget.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Segment {
    fn new(a: f64, b: f64, (value, error): (f64, f64)) -> Self {
        Segment { a, b, value, error }
    }

    /// Error estimate is already at the rounding floor of the rule.
    fn exhausted(&self) -> bool {
        self.error <= ROUNDOFF * self.value.abs()
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

const ROUNDOFF: f64 = 50.0 * f64::EPSILON;

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut fv = [0.0f64; 21];
    fv[10] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[20 - j] = f2;
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    // QUADPACK-style error scaling
    let mean = 0.5 * kron;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[20 - j] - mean).abs());
    }
    let asc = asc * half.abs();
    let mut err = ((kron - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let value = kron * half;
    let floor = ROUNDOFF * value.abs();
    (value, err.max(floor))
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    /// Integrates `f` over `[a, b]`; either endpoint may be infinite.
    pub fn estimate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Estimate {
        if a == b {
            return Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
                converged: true,
            };
        }
        if a > b {
            let e = self.estimate(f, b, a);
            return Estimate { value: -e.value, ..e };
        }
        match (a.is_infinite(), b.is_infinite()) {
            (false, false) => self.adapt(&mut f, a, b),
            (false, true) => self.adapt(
                &mut |t: f64| {
                    let s = 1.0 - t;
                    if s <= 0.0 {
                        return 0.0;
                    }
                    f(a + t / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (true, false) => self.adapt(
                &mut |t: f64| {
                    let s = 1.0 - t;
                    if s <= 0.0 {
                        return 0.0;
                    }
                    f(b - t / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (true, true) => self.adapt(
                &mut |t: f64| {
                    let s = 1.0 - t * t;
                    if s <= 0.0 {
                        return 0.0;
                    }
                    f(t / s) * (1.0 + t * t) / (s * s)
                },
                -1.0,
                1.0,
            ),
        }
    }

    /// Like [`Quadrature::estimate`] but fails when the tolerance is missed.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        let e = self.estimate(f, a, b);
        e.require(self.abs_tol.max(self.rel_tol * e.value.abs()))
    }

    /// Integrates over `[points[0], points[last]]`, splitting at every
    /// interior point (kinks, integrable singularities).
    pub fn estimate_with_breaks<F: FnMut(f64) -> f64>(&self, mut f: F, points: &[f64]) -> Estimate {
        let mut total = Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
        let pieces = points.len().saturating_sub(1).max(1) as f64;
        let per_piece = Quadrature {
            abs_tol: self.abs_tol / pieces,
            ..*self
        };
        for w in points.windows(2) {
            let e = per_piece.estimate(&mut f, w[0], w[1]);
            total.value += e.value;
            total.error += e.error;
            total.evaluations += e.evaluations;
            total.converged &= e.converged;
        }
        total
    }

    fn adapt<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> Estimate {
        let first = Segment::new(a, b, kronrod(f, a, b));
        let mut value = first.value;
        let mut error = first.error;
        let mut heap = BinaryHeap::from([first]);
        let mut evaluations = 21;
        let target = |value: f64| self.abs_tol.max(self.rel_tol * value.abs());
        while error > target(value) && heap.len() < self.max_intervals {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if worst.exhausted() || mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                break;
            }
            let left = Segment::new(worst.a, mid, kronrod(f, worst.a, mid));
            let right = Segment::new(mid, worst.b, kronrod(f, mid, worst.b));
            evaluations += 42;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        // re-sum to shed accumulated update rounding
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        let at_floor = heap.peek().is_some_and(Segment::exhausted);
        Estimate {
            value,
            error,
            evaluations,
            converged: error <= target(value) || at_floor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_exact_for_polynomials() {
        // K21 integrates degree <= 31 exactly on [-1, 1]; G10 degree <= 19.
        for deg in 0..=31u32 {
            let (k, _) = kronrod(&mut |x: f64| x.powi(deg as i32), -1.0, 1.0);
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((k - exact).abs() < 1e-14, "degree {deg}: {k} vs {exact}");
        }
        let wsum: f64 = WG.iter().sum::<f64>() * 2.0;
        assert_relative_eq!(wsum, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_weights_are_consistent() {
        for deg in (0..=19u32).step_by(2) {
            let g: f64 = (0..5)
                .map(|j| 2.0 * WG[j] * XGK[2 * j + 1].powi(deg as i32))
                .sum();
            assert_relative_eq!(g, 2.0 / (deg as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn smooth_and_infinite_ranges() {
        let q = Quadrature::default();
        assert_relative_eq!(
            q.integrate(f64::sin, 0.0, std::f64::consts::PI).unwrap(),
            2.0,
            epsilon = 1e-13
        );
        let gauss = q
            .integrate(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert_relative_eq!(gauss, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        let tail = q.integrate(|x| (-x).exp(), 2.0, f64::INFINITY).unwrap();
        assert_relative_eq!(tail, (-2.0f64).exp(), epsilon = 1e-13);
        let left = q.integrate(|x| x.exp(), f64::NEG_INFINITY, 0.0).unwrap();
        assert_relative_eq!(left, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn endpoint_singularity_and_reversed_limits() {
        let q = Quadrature::new(1e-10, 1e-10);
        let v = q.integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-9);
        let r = q.integrate(|x| x * x, 1.0, 0.0).unwrap();
        assert_relative_eq!(r, -1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let q = Quadrature::new(1e-13, 1e-13);
        let e = q.estimate_with_breaks(|x: f64| (x - 0.3).abs(), &[-1.0, 0.3, 1.0]);
        assert!(e.converged);
        assert_relative_eq!(e.value, 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7, epsilon = 1e-14);
    }

    #[test]
    fn reports_failure_when_budget_is_exhausted() {
        let q = Quadrature::new(1e-15, 0.0).with_max_intervals(3);
        let e = q.estimate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0);
        assert!(!e.converged);
        assert!(q.integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0).is_err());
    }
}
