//! Self-checks of the closed forms against independent numerical oracles.
//!
//! Every check runs even when an earlier one fails; the report lists all
//! of them.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{cdf_goe, q_gue, AnalyticDistribution, Family, GoeCdfTable};
use crate::doorway::sample_fidelity;
use crate::ensembles::{a_factor, BackgroundKind, Beta, ChaoticSampler, EnsembleSpec, InteractionKind};
use crate::oracles::{
    calibrate_closed_form, cdf_exact_finite_n_sorted, determinant_identity_check, f_tilde_equation_rhs,
    f_tilde_finite_n, kernel_at_zero, kernel_at_zero_by_sum, p_exact_finite_n, q_exact_finite_n,
    CnConvention, FiniteNContext,
};
use crate::quad::Quadrature;
use crate::stats::{ks_distance, EmpiricalDistribution};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub level: Level,
    /// Multiplies the GOE density inside the normalization check. Values
    /// other than 1 exist to confirm that the check can fail.
    pub goe_scale: f64,
}

impl VerifyOptions {
    pub fn new(level: Level) -> Self {
        VerifyOptions {
            level,
            goe_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {}: {}", c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

type Outcome = Result<(bool, String)>;

fn record(checks: &mut Vec<Check>, name: &str, outcome: Outcome) {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    log::info!("{name}: {}", if passed { "pass" } else { "FAIL" });
    checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
    });
}

const LAMBDAS: [f64; 4] = [0.05, 0.1, 0.5, 2.0];

fn kernel_sum() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=50 {
        let closed = kernel_at_zero(n)?;
        worst = worst.max(((closed - kernel_at_zero_by_sum(n)) / closed).abs());
    }
    Ok((
        worst < 1e-10,
        format!("max relative error {worst:.2e} for N <= 50 (tol 1e-10)"),
    ))
}

/// Rounded values quoted alongside the model definition.
pub const QUOTED_A_FACTORS: [(InteractionKind, Beta, f64); 6] = [
    (InteractionKind::Gaussian, Beta::Real, 0.80),
    (InteractionKind::Gaussian, Beta::Complex, 0.89),
    (InteractionKind::Semicircle, Beta::Real, 0.85),
    (InteractionKind::Semicircle, Beta::Complex, 0.93),
    (InteractionKind::Uniform, Beta::Real, 0.87),
    (InteractionKind::Uniform, Beta::Complex, 0.94),
];

fn a_factors() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (kind, beta, quoted) in QUOTED_A_FACTORS {
        let a = a_factor(kind, beta);
        ok &= ((a * 100.0).round() - quoted * 100.0).abs() < 0.5;
        detail.push(format!("{kind:?}/{}={a:.4}", u8::from(beta)));
    }
    Ok((ok, detail.join(" ")))
}

fn distribution(family: Family, lambda: f64) -> Result<AnalyticDistribution> {
    let a = match family {
        Family::RegularBeta1 => Some(a_factor(InteractionKind::Gaussian, Beta::Real)),
        Family::RegularBeta2 => Some(a_factor(InteractionKind::Gaussian, Beta::Complex)),
        _ => None,
    };
    AnalyticDistribution::new(family, lambda, a)
}

/// `∫₀¹ p₀`, with breaks that resolve both the narrow weak-coupling peak
/// and the approach to `c = 1`.
pub fn density_mass(pdf: impl Fn(f64) -> f64) -> f64 {
    Quadrature::new(1e-13, 1e-12)
        .with_max_intervals(20_000)
        .estimate_with_breaks(pdf, &[0.0, 0.5, 0.9, 0.99, 1.0])
        .value
}

fn normalization(goe_scale: f64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut where_ = String::new();
    for family in Family::ALL {
        let scale = if family == Family::Goe { goe_scale } else { 1.0 };
        for lambda in LAMBDAS {
            let d = distribution(family, lambda)?;
            let mass = scale * density_mass(|c| d.pdf(c).unwrap_or(f64::NAN));
            let err = (mass - 1.0).abs();
            if !(err <= worst) {
                worst = err;
                where_ = format!("{} at lambda {lambda}", family.name());
            }
        }
    }
    Ok((
        worst < 1e-6,
        format!("max |mass - 1| = {worst:.2e} ({where_}; tol 1e-6)"),
    ))
}

fn goe_table() -> Outcome {
    let table = GoeCdfTable::global();
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 0.5, 2.0] {
        for c in [0.05, 0.3, 0.7, 0.95] {
            worst = worst.max((table.cdf(c, lambda)? - cdf_goe(c, lambda)?).abs());
        }
    }
    Ok((worst < 1e-8, format!("max table error {worst:.2e} (tol 1e-8)")))
}

fn first_order_equation() -> Outcome {
    let n = 5;
    let mut worst: f64 = 0.0;
    for g in [2.0, 5.0] {
        let h = 1e-4 * g;
        let d = (f_tilde_finite_n(g + h, n)? - f_tilde_finite_n(g - h, n)?) / (2.0 * h);
        let lhs = n as f64 * f_tilde_finite_n(g, n)? + (g - 1.0) * d;
        let rhs = f_tilde_equation_rhs(g, n)?;
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok((
        worst < 1e-6,
        format!("N=5, g' in {{2, 5}}: max relative residual {worst:.2e} (tol 1e-6)"),
    ))
}

fn finite_n_mass() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [3usize, 5, 9] {
        let ctx = FiniteNContext::from_lambda(n, 1.0, 0.5);
        let mass = Quadrature::new(1e-12, 1e-12)
            .with_max_intervals(10_000)
            .integrate(|c| p_exact_finite_n(c, &ctx).unwrap_or(f64::NAN), 0.0, 1.0)?;
        worst = worst.max((mass - 1.0).abs());
    }
    Ok((
        worst < 1e-4,
        format!("N in {{3, 5, 9}}: max |mass - 1| = {worst:.2e} (tol 1e-4)"),
    ))
}

fn calibration() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [1usize, 2] {
        for conv in [CnConvention::EvenOdd, CnConvention::Unity] {
            let r = calibrate_closed_form(n, 1.0, conv)?;
            parts.push(format!(
                "N={n} {conv:?}: factor {:.6} constant={}",
                r.factor, r.constant
            ));
            if conv == CnConvention::EvenOdd {
                ok &= r.constant;
            }
        }
    }
    Ok((ok, parts.join("; ")))
}

fn identity(n: usize, beta: Beta, zs: &[f64], tol: f64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &z in zs {
        let r = determinant_identity_check(n, beta, Complex64::new(z, 0.0))?;
        worst = worst.max(r.rel_err);
        parts.push(format!(
            "z={z}: lhs {:.10} rhs {:.10} rel_err {:.2e}",
            r.lhs[0], r.rhs[0], r.rel_err
        ));
    }
    Ok((worst < tol, format!("{} (tol {tol:.0e})", parts.join("; "))))
}

/// Fidelity samples of a five-level GUE background against the exact
/// finite-N distribution.
pub fn finite_n_monte_carlo(n_samples: usize, seed: u64) -> Result<f64> {
    let n = 5;
    let lambda = 0.5;
    let spec = EnsembleSpec {
        background_kind: BackgroundKind::Gue,
        n_levels: n,
        w: 1.0,
        interaction_kind: InteractionKind::Gaussian,
        beta: Beta::Complex,
        v: 0.0,
        seed,
        chaotic_sampler: ChaoticSampler::Tridiagonal,
    }
    .with_lambda(lambda);
    let emp = EmpiricalDistribution::new(sample_fidelity(&spec, n_samples)?.values())?;
    let ctx = FiniteNContext::from_lambda(n, 1.0, lambda);
    let cdf = cdf_exact_finite_n_sorted(emp.samples(), &ctx)?;
    let s = emp.samples();
    ks_distance(&emp, |x| cdf[s.partition_point(|&y| y < x)])
}

/// Largest `|Q_N/Q_∞ − 1|` over a log grid of `u − 1` in `[lo, hi]`.
pub fn large_n_deviation(n: usize, lambda: f64, lo: f64, hi: f64, points: usize) -> Result<(f64, f64)> {
    let ctx = FiniteNContext::from_lambda(n, 1.0, lambda);
    let mut worst = (0.0, lo);
    for i in 0..points {
        let x = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
        let dev = (q_exact_finite_n(1.0 + x, &ctx)? / q_gue(1.0 + x, lambda)? - 1.0).abs();
        if dev > worst.0 {
            worst = (dev, x);
        }
    }
    Ok(worst)
}

/// Runs the checks of `options.level`.
pub fn verify(options: VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    record(&mut checks, "kernel closed form vs oscillator sum", kernel_sum());
    record(&mut checks, "a-factors vs quoted values", a_factors());
    record(
        &mut checks,
        "density normalization",
        normalization(options.goe_scale),
    );
    record(&mut checks, "GOE CDF table vs direct quadrature", goe_table());
    record(
        &mut checks,
        "finite-N first-order equation",
        first_order_equation(),
    );
    record(&mut checks, "finite-N exact density mass", finite_n_mass());
    record(&mut checks, "finite-N closed-form calibration", calibration());
    record(
        &mut checks,
        "determinant identity N=1 beta=2",
        identity(1, Beta::Complex, &[1.0], 1e-6),
    );
    if options.level == Level::Full {
        record(
            &mut checks,
            "finite-N Monte Carlo N=5",
            finite_n_monte_carlo(100_000, 7)
                .map(|d| (d < 0.02, format!("KS {d:.5} at 1e5 samples (tol 0.02)"))),
        );
        record(
            &mut checks,
            "large-N convergence N=400",
            large_n_deviation(400, 0.5, 0.05, 10.0, 60).map(|(d, x)| {
                (
                    d < 0.02,
                    format!("max |ratio - 1| = {d:.4} at u-1 = {x:.3} over [0.05, 10] (tol 0.02)"),
                )
            }),
        );
        record(
            &mut checks,
            "determinant identity N=2 beta=1",
            identity(2, Beta::Real, &[0.5, 1.0, 2.0], 1e-4),
        );
        record(
            &mut checks,
            "determinant identity N=2 beta=2",
            identity(2, Beta::Complex, &[1.0], 1e-4),
        );
    }
    VerifyReport {
        level: options.level,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_level_passes() {
        let r = verify(VerifyOptions::new(Level::Fast));
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn perturbed_goe_density_fails_normalization() {
        let r = verify(VerifyOptions {
            level: Level::Fast,
            goe_scale: 1.01,
        });
        assert!(!r.passed());
        let failed: Vec<_> = r.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec!["density normalization"]);
    }
}
