//! Special functions needed by the closed-form distributions.
//!
//! Error functions and log-gamma come from `statrs`. Modified Bessel
//! functions of the second kind K₀ and K₁ (and their exponentially scaled
//! forms `e^x K_ν(x)`) are evaluated here: power series for `x <= 2`,
//! Steed's continued fraction (Temme's method) above.

pub use statrs::function::erf::{erf, erfc};
pub use statrs::function::gamma::{gamma, ln_gamma};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const SERIES_MAX: f64 = 2.0;
const MAX_ITER: usize = 100_000;
const ERFCX_CF_MIN: f64 = 4.0;

/// K₀ and K₁ at `x <= 2` from their ascending series.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // I0, I1 and the harmonic-weighted sums share the term recurrences
    let mut i0 = 1.0;
    let mut i1 = 1.0; // I1 = (x/2) * sum
    let mut k0_sum = 0.0;
    let mut k1_sum = 0.0;

    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut psi_sum = 1.0 - 2.0 * EULER_GAMMA; // psi(k+1) + psi(k+2) at k = 0
    k1_sum += psi_sum * t1;
    for k in 1..200 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_sum = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0);
        i0 += t0;
        i1 += t1;
        k0_sum += t0 * harmonic;
        k1_sum += t1 * psi_sum;
        if t0 < 1e-18 * i0 && t1 * psi_sum.abs() < 1e-18 * k1_sum.abs() {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

/// Scaled `(e^x K₀(x), e^x K₁(x))` for `x > 2` by Steed's algorithm.
fn k01_scaled_cf(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Modified Bessel function of the second kind, order 0. `x > 0`.
pub fn bessel_k0(x: f64) -> f64 {
    bessel_k01(x).0
}

/// Modified Bessel function of the second kind, order 1. `x > 0`.
pub fn bessel_k1(x: f64) -> f64 {
    bessel_k01(x).1
}

/// Scaled complementary error function `e^{x²} erfc(x)` for `x >= 0`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x < ERFCX_CF_MIN {
        return (x * x).exp() * erfc(x);
    }
    if x.is_infinite() {
        return 0.0;
    }
    // Laplace continued fraction x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), Lentz
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..MAX_ITER {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    std::f64::consts::FRAC_2_SQRT_PI * 0.5 / f
}

/// `(K₀(x), K₁(x))`; NaN for `x <= 0`.
pub fn bessel_k01(x: f64) -> (f64, f64) {
    if x.is_nan() || x <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    if x <= SERIES_MAX {
        k01_series(x)
    } else {
        let (a, b) = k01_scaled_cf(x);
        let e = (-x).exp();
        (a * e, b * e)
    }
}

/// `(e^x K₀(x), e^x K₁(x))`, finite for arbitrarily large `x`.
pub fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    if x.is_nan() || x <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    if x <= SERIES_MAX {
        let (a, b) = k01_series(x);
        let e = x.exp();
        (a * e, b * e)
    } else if x.is_infinite() {
        (0.0, 0.0)
    } else {
        k01_scaled_cf(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Quadrature;

    // Independent route: K_ν(x) e^x = ∫₀^∞ exp(-x (cosh t - 1)) cosh(ν t) dt.
    fn scaled_by_quadrature(nu: f64, x: f64) -> f64 {
        Quadrature::new(0.0, 1e-14)
            .integrate(
                |t: f64| {
                    let base = -x * (t.cosh() - 1.0);
                    0.5 * ((base + nu * t).exp() + (base - nu * t).exp())
                },
                0.0,
                f64::INFINITY,
            )
            .unwrap()
    }

    #[test]
    fn matches_integral_representation() {
        for &x in &[1e-3, 0.05, 0.3, 1.0, 1.9, 2.0, 2.1, 3.5, 10.0, 31.0, 80.0, 500.0] {
            let (k0e, k1e) = bessel_k01_scaled(x);
            let q0 = scaled_by_quadrature(0.0, x);
            let q1 = scaled_by_quadrature(1.0, x);
            assert!(((k0e - q0) / q0).abs() < 1e-12, "K0e({x}) {k0e} vs {q0}");
            assert!(((k1e - q1) / q1).abs() < 1e-12, "K1e({x}) {k1e} vs {q1}");
        }
    }

    #[test]
    fn tabulated_values() {
        // reference values to 16 digits
        let cases = [
            (1.0, 0.421_024_438_240_708_3, 0.601_907_230_197_234_6),
            (2.0, 0.113_893_872_749_533_4, 0.139_865_881_816_522_4),
        ];
        for (x, k0, k1) in cases {
            let (a, b) = bessel_k01(x);
            assert!(((a - k0) / k0).abs() < 1e-13, "{a} vs {k0}");
            assert!(((b - k1) / k1).abs() < 1e-13, "{b} vs {k1}");
        }
    }

    #[test]
    fn continuous_across_branch_switch() {
        let below = k01_series(2.0);
        let above = k01_scaled_cf(2.0);
        let e = (-2.0f64).exp();
        assert!(((below.0 - above.0 * e) / below.0).abs() < 1e-13);
        assert!(((below.1 - above.1 * e) / below.1).abs() < 1e-13);
    }

    #[test]
    fn small_argument_asymptotics() {
        let x = 1e-8;
        assert!((bessel_k1(x) * x - 1.0).abs() < 1e-12);
        let k0 = bessel_k0(x);
        assert!((k0 + (0.5 * x).ln() + EULER_GAMMA).abs() < 1e-12);
    }

    #[test]
    fn k1_is_minus_derivative_of_k0() {
        for &x in &[0.5, 1.5, 2.5, 7.0] {
            let h = 1e-5 * x;
            let d = (bessel_k0(x + h) - bessel_k0(x - h)) / (2.0 * h);
            assert!(((d + bessel_k1(x)) / bessel_k1(x)).abs() < 1e-8);
        }
    }

    // Divergent series Σ (−1)^k (2k−1)!! / (2x²)^k / (x √π), summed to its
    // smallest term.
    fn erfcx_asymptotic(x: f64) -> f64 {
        let mut term = 1.0f64;
        let mut sum = 1.0;
        for k in 1..200 {
            let next = -term * (2 * k - 1) as f64 / (2.0 * x * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (x * std::f64::consts::PI.sqrt())
    }

    #[test]
    fn erfcx_matches_direct_product_and_asymptote() {
        // statrs erfc loses relative accuracy in the far tail, so the product
        // is only a reference below the branch point
        for x in [0.0f64, 0.3, 1.0, 2.5, 3.9] {
            let direct = (x * x).exp() * erfc(x);
            assert!(((erfcx(x) - direct) / direct).abs() < 1e-12, "erfcx({x})");
        }
        for x in [6.0f64, 20.0, 1e4] {
            let asym = erfcx_asymptotic(x);
            assert!(((erfcx(x) - asym) / asym).abs() < 1e-14, "erfcx({x})");
        }
        // 30-digit reference
        assert!((erfcx(4.0) / 0.136_999_457_625_061_39 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_is_nan() {
        assert!(bessel_k0(0.0).is_nan());
        assert!(bessel_k01_scaled(-1.0).1.is_nan());
    }
}
