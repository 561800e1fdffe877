//! Closed-form overlap distributions.
//!
//! Each family is available as a density `p₀(c)` on `[0, 1]`, as the
//! density `Q(u)` of `u = 1/c²` on `(1, ∞)`, and as a CDF in `c`. The two
//! densities are related by `p₀(c) = 2 Q(1/c²) / c³`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::Beta;
use crate::quad::Quadrature;
use crate::special::{bessel_k01_scaled, erf, erfc, erfcx};
use crate::{Error, Result};

/// Above this `c` every density is reported as 0.
pub const UPPER_CUTOFF: f64 = 1.0 - 1e-12;
/// Below this `c` the GOE density is reported by its limit value.
pub const LOWER_CUTOFF: f64 = 1e-12;

/// Distribution family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RegularBeta1,
    RegularBeta2,
    Goe,
    Gue,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::RegularBeta1,
        Family::RegularBeta2,
        Family::Goe,
        Family::Gue,
    ];

    pub fn is_regular(self) -> bool {
        matches!(self, Family::RegularBeta1 | Family::RegularBeta2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::RegularBeta1 => "regular_beta1",
            Family::RegularBeta2 => "regular_beta2",
            Family::Goe => "goe",
            Family::Gue => "gue",
        }
    }

    /// The regular family with coupling index `beta`.
    pub fn regular(beta: Beta) -> Family {
        match beta {
            Beta::Real => Family::RegularBeta1,
            Beta::Complex => Family::RegularBeta2,
        }
    }
}

fn check_c(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain(format!("c = {c} outside [0, 1]")))
    }
}

fn check_u(u: f64) -> Result<()> {
    if u > 1.0 && !u.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("u = {u} must exceed 1")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("lambda = {lambda} must be positive")))
    }
}

/// `1 - c²` without cancellation near `c = 1`.
fn one_minus_sq(c: f64) -> f64 {
    (1.0 - c) * (1.0 + c)
}

/// Regular background: `2aλ (1−c²)^{−3/2} exp(−(aλ)² π c² / (1−c²))`.
pub fn p0_regular(c: f64, lambda: f64, a_beta: f64) -> Result<f64> {
    check_c(c)?;
    if c > UPPER_CUTOFF {
        return Ok(0.0);
    }
    let al = a_beta * lambda;
    let r = one_minus_sq(c);
    Ok(2.0 * al * r.powf(-1.5) * (-al * al * PI * c * c / r).exp())
}

/// `erf(√π aλ c/√(1−c²))`.
pub fn cdf_regular(c: f64, lambda: f64, a_beta: f64) -> Result<f64> {
    check_c(c)?;
    if c >= 1.0 {
        return Ok(1.0);
    }
    let s = c / one_minus_sq(c).sqrt();
    Ok(erf(PI.sqrt() * a_beta * lambda * s))
}

/// `aλ (u−1)^{−3/2} exp(−(aλ)² π / (u−1))`.
pub fn q_regular(u: f64, lambda: f64, a_beta: f64) -> Result<f64> {
    check_u(u)?;
    let x = u - 1.0;
    let al = a_beta * lambda;
    Ok(al * x.powf(-1.5) * (-al * al * PI / x).exp())
}

/// GUE background.
pub fn p0_gue(c: f64, lambda: f64) -> Result<f64> {
    check_c(c)?;
    if c > UPPER_CUTOFF {
        return Ok(0.0);
    }
    let r = one_minus_sq(c);
    let t = PI * PI * lambda * lambda * c * c / r;
    Ok((PI * lambda * lambda / (r * r * r)).sqrt() * (-t).exp() * (1.0 + 2.0 * t))
}

/// `erf(πλS) − √π λ S exp(−π²λ²S²)` with `S = c/√(1−c²)`.
pub fn cdf_gue(c: f64, lambda: f64) -> Result<f64> {
    check_c(c)?;
    if c >= 1.0 {
        return Ok(1.0);
    }
    let s = c / one_minus_sq(c).sqrt();
    let z = PI * lambda * s;
    Ok(erf(z) - PI.sqrt() * lambda * s * (-z * z).exp())
}

pub fn q_gue(u: f64, lambda: f64) -> Result<f64> {
    check_u(u)?;
    let x = u - 1.0;
    let t = PI * PI * lambda * lambda / x;
    Ok((PI * lambda * lambda / (4.0 * x * x * x)).sqrt() * (-t).exp() * (1.0 + 2.0 * t))
}

/// Value of [`p0_goe`] at `c = 0`: `4λ/√(2π)`.
pub fn p0_goe_at_zero(lambda: f64) -> f64 {
    4.0 * lambda / (2.0 * PI).sqrt()
}

/// GOE background; Bessel factors are evaluated in scaled form.
pub fn p0_goe(c: f64, lambda: f64) -> Result<f64> {
    check_c(c)?;
    if c > UPPER_CUTOFF {
        return Ok(0.0);
    }
    if c < LOWER_CUTOFF {
        return Ok(p0_goe_at_zero(lambda));
    }
    let r = one_minus_sq(c);
    let y = PI * PI * lambda * lambda * c * c / (4.0 * r);
    let (k0e, k1e) = bessel_k01_scaled(y);
    let log_pref = 0.5 * (PI.powi(3) * lambda.powi(6) * c.powi(4) / 2.0).ln() - 2.5 * r.ln();
    Ok((log_pref - 2.0 * y).exp() * (k0e + k1e))
}

pub fn q_goe(u: f64, lambda: f64) -> Result<f64> {
    check_u(u)?;
    let x = u - 1.0;
    let y = PI * PI * lambda * lambda / (4.0 * x);
    let (k0e, k1e) = bessel_k01_scaled(y);
    let log_pref = 0.5 * (PI.powi(3) * lambda.powi(6) / (2.0 * x.powi(5))).ln() - 2.0 * y;
    Ok(0.5 * log_pref.exp() * (k0e + k1e))
}

/// Past this point the GOE CDF integrand is below `e^{-90}`.
const GOE_T_MAX: f64 = 7.0;
const GOE_TABLE_STEP: f64 = 1.0 / 64.0;
const GOE_CDF_TOL: f64 = 1e-9;

/// Integrand of the GOE CDF in `t = √(π²λ²c²/(4(1−c²)))`.
fn goe_cdf_integrand(t: f64) -> f64 {
    if t == 0.0 {
        return 2.0 * (8.0 / PI.powi(3)).sqrt();
    }
    let y = t * t;
    let (k0e, k1e) = bessel_k01_scaled(y);
    2.0 * (8.0 / PI.powi(3)).sqrt() * y * (-2.0 * y).exp() * (k0e + k1e)
}

fn goe_t(c: f64, lambda: f64) -> f64 {
    0.5 * PI * lambda * c / one_minus_sq(c).sqrt()
}

fn goe_quadrature() -> Quadrature {
    Quadrature::new(GOE_CDF_TOL * 1e-3, 1e-13)
}

/// GOE CDF by direct adaptive quadrature (no table).
pub fn cdf_goe(c: f64, lambda: f64) -> Result<f64> {
    check_c(c)?;
    check_lambda(lambda)?;
    if c >= 1.0 {
        return Ok(1.0);
    }
    let t = goe_t(c, lambda).min(GOE_T_MAX);
    goe_quadrature()
        .estimate(goe_cdf_integrand, 0.0, t)
        .require(GOE_CDF_TOL)
        .map(|v| v.min(1.0))
}

/// Cumulative GOE integrand on a uniform grid in `t`.
///
/// The CDF depends on `λ` and `c` only through `t`, so one table serves
/// every coupling strength.
#[derive(Debug)]
pub struct GoeCdfTable {
    cumulative: Vec<f64>,
}

impl GoeCdfTable {
    fn build() -> Result<Self> {
        let q = goe_quadrature();
        let n = (GOE_T_MAX / GOE_TABLE_STEP).round() as usize;
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            let a = k as f64 * GOE_TABLE_STEP;
            acc += q
                .estimate(goe_cdf_integrand, a, a + GOE_TABLE_STEP)
                .require(GOE_CDF_TOL / n as f64)?;
            cumulative.push(acc);
        }
        Ok(GoeCdfTable { cumulative })
    }

    /// Shared instance, built on first use.
    pub fn global() -> &'static GoeCdfTable {
        static TABLE: OnceLock<GoeCdfTable> = OnceLock::new();
        TABLE.get_or_init(|| GoeCdfTable::build().expect("GOE CDF table quadrature"))
    }

    /// Integral of the CDF integrand over `[0, t]`.
    pub fn integral_to(&self, t: f64) -> Result<f64> {
        let t = t.clamp(0.0, GOE_T_MAX);
        let k = ((t / GOE_TABLE_STEP) as usize).min(self.cumulative.len() - 1);
        let a = k as f64 * GOE_TABLE_STEP;
        let rest = goe_quadrature()
            .estimate(goe_cdf_integrand, a, t)
            .require(GOE_CDF_TOL)?;
        Ok((self.cumulative[k] + rest).min(1.0))
    }

    pub fn cdf(&self, c: f64, lambda: f64) -> Result<f64> {
        check_c(c)?;
        if c >= 1.0 {
            return Ok(1.0);
        }
        self.integral_to(goe_t(c, lambda))
    }
}

/// Characteristic function of `u − 1` for a regular background,
/// `exp(−2aλ√(iπk))` on the principal branch.
pub fn characteristic_regular(k: f64, lambda: f64, a_beta: f64) -> Complex64 {
    let root = (PI * k.abs()).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let sqrt_ipk = Complex64::new(root, root.copysign(k));
    (-2.0 * a_beta * lambda * sqrt_ipk).exp()
}

fn chaotic_spacing(n: usize, beta: Beta, w: f64) -> f64 {
    (beta.value() * PI * PI * w * w / (2.0 * n as f64)).sqrt()
}

fn ln_f_tilde_large_n(g: f64, n: usize, beta: Beta, w: f64) -> f64 {
    let b = beta.value();
    let nb = b * n as f64;
    let d = chaotic_spacing(n, beta, w);
    let bracket = 1.0 + 0.5 * b * (PI * g / nb).sqrt() * erfcx((nb / g).sqrt());
    0.5 * (2.0 * PI * w * w / (g * d * d)).ln() + 0.5 * nb * (2.0 / (1.0 + g)).ln() + bracket.ln()
}

/// Large-`N` auxiliary function `F̃_{N+1}(g)` of a chaotic background,
/// evaluated in log space.
pub fn f_tilde_large_n(g: f64, n: usize, beta: Beta, w: f64) -> Result<f64> {
    if !(g >= 1.0) || n == 0 || !(w > 0.0) {
        return Err(Error::Domain(format!(
            "need g >= 1, n >= 1, w > 0 (g = {g}, n = {n}, w = {w})"
        )));
    }
    Ok(ln_f_tilde_large_n(g, n, beta, w).exp())
}

/// `(βxw²/2v²)^{βN/2} F̃_{N+1}(1 + βxw²/v²)` at `v = λD`, the quantity
/// whose large-`N` limit is [`f_tilde_scaled_limit`].
pub fn f_tilde_rescaled(x: f64, lambda: f64, n: usize, beta: Beta, w: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    check_lambda(lambda)?;
    let b = beta.value();
    let v = lambda * chaotic_spacing(n, beta, w);
    let t = b * x * w * w / (v * v);
    let g = 1.0 + t;
    Ok((0.5 * b * n as f64 * (0.5 * t).ln() + ln_f_tilde_large_n(g, n, beta, w)).exp())
}

/// `√(2πλ²/βx) exp(−β(πλ)²/2x) + erfc(√(β(πλ)²/2x))`.
pub fn f_tilde_scaled_limit(x: f64, lambda: f64, beta: Beta) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    check_lambda(lambda)?;
    let b = beta.value();
    let z = b * (PI * lambda).powi(2) / (2.0 * x);
    Ok((2.0 * PI * lambda * lambda / (b * x)).sqrt() * (-z).exp() + erfc(z.sqrt()))
}

/// A closed-form overlap distribution at fixed coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticDistribution {
    pub family: Family,
    pub lambda: f64,
    /// First-moment factor; only regular families use it.
    pub a_beta: Option<f64>,
}

impl AnalyticDistribution {
    pub fn new(family: Family, lambda: f64, a_beta: Option<f64>) -> Result<Self> {
        check_lambda(lambda)?;
        match (family.is_regular(), a_beta) {
            (true, Some(a)) if a > 0.0 && a <= 1.0 => {}
            (true, _) => {
                return Err(Error::Domain(format!(
                    "regular family needs a_beta in (0, 1], got {a_beta:?}"
                )))
            }
            (false, _) => {}
        }
        Ok(AnalyticDistribution {
            family,
            lambda,
            a_beta: if family.is_regular() { a_beta } else { None },
        })
    }

    fn a(&self) -> f64 {
        self.a_beta.unwrap_or(f64::NAN)
    }

    pub fn pdf(&self, c: f64) -> Result<f64> {
        match self.family {
            Family::RegularBeta1 | Family::RegularBeta2 => p0_regular(c, self.lambda, self.a()),
            Family::Gue => p0_gue(c, self.lambda),
            Family::Goe => p0_goe(c, self.lambda),
        }
    }

    /// CDF in `c`; the GOE family reads the shared table.
    pub fn cdf(&self, c: f64) -> Result<f64> {
        match self.family {
            Family::RegularBeta1 | Family::RegularBeta2 => cdf_regular(c, self.lambda, self.a()),
            Family::Gue => cdf_gue(c, self.lambda),
            Family::Goe => GoeCdfTable::global().cdf(c, self.lambda),
        }
    }

    /// Density of `u = 1/c²`.
    pub fn q(&self, u: f64) -> Result<f64> {
        match self.family {
            Family::RegularBeta1 | Family::RegularBeta2 => q_regular(u, self.lambda, self.a()),
            Family::Gue => q_gue(u, self.lambda),
            Family::Goe => q_goe(u, self.lambda),
        }
    }

    /// Inverse CDF by bisection, accurate to about 1e-14 in `c`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
