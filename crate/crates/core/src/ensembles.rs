//! Background spectra and interaction vectors.
//!
//! Chaotic backgrounds carry the Gaussian weight `exp(-tr H² / 2w²)`:
//! diagonal entries have variance `w²`, off-diagonal entries `w²/2`
//! (split evenly between real and imaginary parts for the unitary case).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{Error, Result};

/// Statistics of the background Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackgroundKind {
    /// Uncorrelated levels, uniform on `[-√N/2, √N/2]`.
    Regular,
    Goe,
    Gue,
}

/// Law of the individual interaction matrix elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Gaussian,
    Uniform,
    Semicircle,
}

/// Dyson index of the coupling: real (1) or complex (2) entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = String;

    fn try_from(b: u8) -> std::result::Result<Self, String> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            other => Err(format!("beta must be 1 or 2, got {other}")),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        match b {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }
}

/// How chaotic spectra are drawn.
///
/// Both routes produce the same eigenvalue law. `Tridiagonal` samples the
/// Householder-reduced form of the matrix directly and costs O(N²) per
/// draw; `Dense` samples every matrix element and diagonalizes in O(N³).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaoticSampler {
    #[default]
    Tridiagonal,
    Dense,
}

/// Full description of one random doorway ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub background_kind: BackgroundKind,
    pub n_levels: usize,
    pub w: f64,
    pub interaction_kind: InteractionKind,
    pub beta: Beta,
    pub v: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_default_sampler")]
    pub chaotic_sampler: ChaoticSampler,
}

fn is_default_sampler(s: &ChaoticSampler) -> bool {
    *s == ChaoticSampler::default()
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_levels == 0 {
            return Err(Error::InvalidSpec("n_levels must be at least 1".into()));
        }
        if !(self.w.is_finite() && self.w > 0.0) {
            return Err(Error::InvalidSpec(format!("w must be positive, got {}", self.w)));
        }
        if !(self.v.is_finite() && self.v >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "v must be nonnegative, got {}",
                self.v
            )));
        }
        match (self.background_kind, self.beta) {
            (BackgroundKind::Goe, Beta::Complex) => {
                Err(Error::InvalidSpec("a GOE background pairs with beta = 1".into()))
            }
            (BackgroundKind::Gue, Beta::Real) => {
                Err(Error::InvalidSpec("a GUE background pairs with beta = 2".into()))
            }
            _ => Ok(()),
        }
    }

    /// Mean level spacing of the background at the band center.
    pub fn mean_spacing(&self) -> f64 {
        let n = self.n_levels as f64;
        match self.background_kind {
            BackgroundKind::Regular => 1.0 / n.sqrt(),
            BackgroundKind::Goe | BackgroundKind::Gue => {
                (self.beta.value() * PI * PI * self.w * self.w / (2.0 * n)).sqrt()
            }
        }
    }

    /// Dimensionless coupling strength `v / D`.
    pub fn lambda(&self) -> f64 {
        self.v / self.mean_spacing()
    }

    /// Copy with `v` chosen so that `v / D = lambda`.
    pub fn with_lambda(&self, lambda: f64) -> EnsembleSpec {
        EnsembleSpec {
            v: lambda * self.mean_spacing(),
            ..self.clone()
        }
    }
}

/// One sampled background spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundDraw {
    /// Sorted ascending.
    pub energies: Vec<f64>,
    pub mean_spacing: f64,
}

/// One sampled interaction vector.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingDraw {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl CouplingDraw {
    pub fn len(&self) -> usize {
        match self {
            CouplingDraw::Real(v) => v.len(),
            CouplingDraw::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|V_ν|²` per entry.
    pub fn moduli_squared(&self) -> Vec<f64> {
        match self {
            CouplingDraw::Real(v) => v.iter().map(|x| x * x).collect(),
            CouplingDraw::Complex(v) => v.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    /// `V†V`.
    pub fn norm_squared(&self) -> f64 {
        self.moduli_squared().iter().sum()
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

/// Dense GOE matrix, exactly symmetric.
pub fn sample_goe_matrix<R: Rng + ?Sized>(n: usize, w: f64, rng: &mut R) -> DMatrix<f64> {
    let off_sd = w / 2f64.sqrt();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = normal(rng, w);
        for j in 0..i {
            let x = normal(rng, off_sd);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Dense GUE matrix, exactly self-adjoint.
pub fn sample_gue_matrix<R: Rng + ?Sized>(n: usize, w: f64, rng: &mut R) -> DMatrix<Complex64> {
    let off_sd = w / 2f64.sqrt();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(normal(rng, w), 0.0);
        for j in 0..i {
            let z = Complex64::new(normal(rng, off_sd), normal(rng, off_sd));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Diagonal and off-diagonal of a tridiagonal matrix whose eigenvalues
/// follow the GOE (`beta = 1`) or GUE (`beta = 2`) law of scale `w`.
pub fn sample_tridiagonal<R: Rng + ?Sized>(
    n: usize,
    w: f64,
    beta: Beta,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let diag: Vec<f64> = (0..n).map(|_| normal(rng, w)).collect();
    let scale = w / 2f64.sqrt();
    let off = (1..n)
        .map(|i| {
            let dof = beta.value() * (n - i) as f64;
            let chi2: f64 = ChiSquared::new(dof)
                .expect("positive degrees of freedom")
                .sample(rng);
            scale * chi2.sqrt()
        })
        .collect();
    (diag, off)
}

fn eigen_error(detail: linalg::NoConvergence) -> Error {
    Error::Numeric(detail.0)
}

/// Draws a background spectrum for `spec`.
pub fn sample_background<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<BackgroundDraw> {
    spec.validate()?;
    let n = spec.n_levels;
    let mut energies = match spec.background_kind {
        BackgroundKind::Regular => {
            let half = 0.5 * (n as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-half..=half)).collect()
        }
        BackgroundKind::Goe | BackgroundKind::Gue => match spec.chaotic_sampler {
            ChaoticSampler::Tridiagonal => {
                let (d, e) = sample_tridiagonal(n, spec.w, spec.beta, rng);
                linalg::tridiagonal_eigenvalues(&d, &e).map_err(eigen_error)?
            }
            ChaoticSampler::Dense => match spec.background_kind {
                BackgroundKind::Goe => {
                    linalg::symmetric_eigenvalues(sample_goe_matrix(n, spec.w, rng)).map_err(eigen_error)?
                }
                _ => linalg::hermitian_eigenvalues(sample_gue_matrix(n, spec.w, rng)).map_err(eigen_error)?,
            },
        },
    };
    energies.sort_unstable_by(f64::total_cmp);
    Ok(BackgroundDraw {
        energies,
        mean_spacing: spec.mean_spacing(),
    })
}

fn sample_real_entry<R: Rng + ?Sized>(kind: InteractionKind, v: f64, rng: &mut R) -> f64 {
    match kind {
        InteractionKind::Gaussian => normal(rng, v),
        InteractionKind::Uniform => {
            let h = 3f64.sqrt() * v;
            rng.gen_range(-h..=h)
        }
        InteractionKind::Semicircle => {
            // abscissa of a uniform point in the disk of radius 2v
            let r = 2.0 * v * rng.gen::<f64>().sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            r * phi.cos()
        }
    }
}

fn sample_complex_entry<R: Rng + ?Sized>(kind: InteractionKind, v: f64, rng: &mut R) -> Complex64 {
    match kind {
        InteractionKind::Gaussian => {
            let sd = v / 2f64.sqrt();
            Complex64::new(normal(rng, sd), normal(rng, sd))
        }
        InteractionKind::Uniform => {
            let r = 2f64.sqrt() * v * rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
        }
        InteractionKind::Semicircle => {
            // planar projection of a uniform point in the 3-ball of radius R
            let radius = v * 2.5f64.sqrt() * rng.gen::<f64>().cbrt();
            let g: [f64; 3] = [normal(rng, 1.0), normal(rng, 1.0), normal(rng, 1.0)];
            let len = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            Complex64::new(radius * g[0] / len, radius * g[1] / len)
        }
    }
}

/// Draws `N` i.i.d. interaction elements, calibrated to `E|V_ν|² = v²`.
pub fn sample_coupling<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<CouplingDraw> {
    spec.validate()?;
    let n = spec.n_levels;
    if spec.v == 0.0 {
        return Ok(match spec.beta {
            Beta::Real => CouplingDraw::Real(vec![0.0; n]),
            Beta::Complex => CouplingDraw::Complex(vec![Complex64::new(0.0, 0.0); n]),
        });
    }
    Ok(match spec.beta {
        Beta::Real => CouplingDraw::Real(
            (0..n)
                .map(|_| sample_real_entry(spec.interaction_kind, spec.v, rng))
                .collect(),
        ),
        Beta::Complex => CouplingDraw::Complex(
            (0..n)
                .map(|_| sample_complex_entry(spec.interaction_kind, spec.v, rng))
                .collect(),
        ),
    })
}

/// First absolute moment `E|V| / v` of the calibrated interaction law.
pub fn a_factor(kind: InteractionKind, beta: Beta) -> f64 {
    match (kind, beta) {
        (InteractionKind::Gaussian, Beta::Real) => (2.0 / PI).sqrt(),
        (InteractionKind::Gaussian, Beta::Complex) => PI.sqrt() / 2.0,
        (InteractionKind::Uniform, Beta::Real) => 3f64.sqrt() / 2.0,
        (InteractionKind::Uniform, Beta::Complex) => 8f64.sqrt() / 3.0,
        (InteractionKind::Semicircle, Beta::Real) => 8.0 / (3.0 * PI),
        (InteractionKind::Semicircle, Beta::Complex) => 3.0 * PI * 2.5f64.sqrt() / 16.0,
    }
}

/// Background spectrum plus the coupling expressed in its eigenbasis.
///
/// For chaotic backgrounds the interaction vector is drawn in the basis
/// where `H_b` is sampled and then rotated into the eigenbasis. On the
/// tridiagonal route the eigenvectors are Haar distributed and independent
/// of the eigenvalues, so the rotated vector is `‖V‖` times an isotropic
/// unit vector.
pub fn sample_in_eigenbasis<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    rng: &mut R,
) -> Result<(BackgroundDraw, CouplingDraw)> {
    spec.validate()?;
    let n = spec.n_levels;
    match (spec.background_kind, spec.chaotic_sampler) {
        (BackgroundKind::Regular, _) => {
            let background = sample_background(spec, rng)?;
            let coupling = sample_coupling(spec, rng)?;
            Ok((background, coupling))
        }
        (_, ChaoticSampler::Tridiagonal) => {
            let background = sample_background(spec, rng)?;
            let raw = sample_coupling(spec, rng)?;
            let norm = raw.norm_squared().sqrt();
            let coupling = match spec.beta {
                Beta::Real => {
                    let g: Vec<f64> = (0..n).map(|_| normal(rng, 1.0)).collect();
                    let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    CouplingDraw::Real(g.iter().map(|x| norm * x / len).collect())
                }
                Beta::Complex => {
                    let g: Vec<Complex64> = (0..n)
                        .map(|_| Complex64::new(normal(rng, 1.0), normal(rng, 1.0)))
                        .collect();
                    let len = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    CouplingDraw::Complex(g.iter().map(|z| z * (norm / len)).collect())
                }
            };
            Ok((background, coupling))
        }
        (BackgroundKind::Goe, ChaoticSampler::Dense) => {
            let m = sample_goe_matrix(n, spec.w, rng);
            let (energies, u) = linalg::symmetric_eigen(m).map_err(eigen_error)?;
            let raw = match sample_coupling(spec, rng)? {
                CouplingDraw::Real(v) => v,
                CouplingDraw::Complex(_) => unreachable!("GOE pairs with real coupling"),
            };
            let rotated = (0..n).map(|k| (0..n).map(|j| u[(j, k)] * raw[j]).sum()).collect();
            Ok((
                BackgroundDraw {
                    energies,
                    mean_spacing: spec.mean_spacing(),
                },
                CouplingDraw::Real(rotated),
            ))
        }
        (BackgroundKind::Gue, ChaoticSampler::Dense) => {
            let m = sample_gue_matrix(n, spec.w, rng);
            let (energies, u) = linalg::hermitian_eigen(m).map_err(eigen_error)?;
            let raw = match sample_coupling(spec, rng)? {
                CouplingDraw::Complex(v) => v,
                CouplingDraw::Real(_) => unreachable!("GUE pairs with complex coupling"),
            };
            let rotated = (0..n)
                .map(|k| (0..n).map(|j| u[(j, k)].conj() * raw[j]).sum())
                .collect();
            Ok((
                BackgroundDraw {
                    energies,
                    mean_spacing: spec.mean_spacing(),
                },
                CouplingDraw::Complex(rotated),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Quadrature;
    use crate::stats::{ks_two_sample, EmpiricalDistribution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(kind: BackgroundKind, beta: Beta, n: usize) -> EnsembleSpec {
        EnsembleSpec {
            background_kind: kind,
            n_levels: n,
            w: 1.0,
            interaction_kind: InteractionKind::Gaussian,
            beta,
            v: 1.0,
            seed: 0,
            chaotic_sampler: ChaoticSampler::Tridiagonal,
        }
    }

    fn empirical(x: Vec<f64>) -> EmpiricalDistribution {
        EmpiricalDistribution::from_unbounded(x).unwrap()
    }

    #[test]
    fn regular_support_and_spacing() {
        let s = spec(BackgroundKind::Regular, Beta::Real, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let b = sample_background(&s, &mut rng).unwrap();
            assert!(b.energies.iter().all(|e| e.abs() <= 1.0));
            assert!(b.energies.windows(2).all(|p| p[0] <= p[1]));
            assert_eq!(b.mean_spacing, 0.5);
        }
    }

    #[test]
    fn gue_mean_spacing_at_band_center() {
        let s = spec(BackgroundKind::Gue, Beta::Complex, 100);
        assert!((s.mean_spacing() - PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec(BackgroundKind::Regular, Beta::Real, 0);
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        s.n_levels = 3;
        s.background_kind = BackgroundKind::Goe;
        s.beta = Beta::Complex;
        assert!(s.validate().is_err());
        s.beta = Beta::Real;
        s.w = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn beta_serializes_as_integer() {
        let s = spec(BackgroundKind::Gue, Beta::Complex, 3);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"beta\":2"));
        assert!(json.contains("\"background_kind\":\"gue\""));
        let back: EnsembleSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bad = json.replace("\"beta\":2", "\"beta\":3");
        assert!(serde_json::from_str::<EnsembleSpec>(&bad).is_err());
    }

    #[test]
    fn goe_two_level_spacing_matches_brute_force() {
        // brute force: eigenvalue gap of [[a, b], [b, d]] is sqrt((a-d)² + 4b²)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let brute: Vec<f64> = (0..100_000)
            .map(|_| {
                let a = normal(&mut rng, 1.0);
                let d = normal(&mut rng, 1.0);
                let b = normal(&mut rng, 1.0 / 2f64.sqrt());
                ((a - d).powi(2) + 4.0 * b * b).sqrt()
            })
            .collect();
        let brute = empirical(brute);
        for sampler in [ChaoticSampler::Tridiagonal, ChaoticSampler::Dense] {
            let s = EnsembleSpec {
                chaotic_sampler: sampler,
                ..spec(BackgroundKind::Goe, Beta::Real, 2)
            };
            let gaps: Vec<f64> = (0..100_000)
                .map(|_| {
                    let e = sample_background(&s, &mut rng).unwrap().energies;
                    e[1] - e[0]
                })
                .collect();
            let ks = ks_two_sample(&empirical(gaps), &brute).unwrap();
            assert!(ks < 0.02, "{sampler:?}: KS {ks}");
        }
    }

    #[test]
    fn tridiagonal_and_dense_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (kind, beta) in [
            (BackgroundKind::Goe, Beta::Real),
            (BackgroundKind::Gue, Beta::Complex),
        ] {
            let draws = |sampler, rng: &mut ChaCha8Rng| {
                let s = EnsembleSpec {
                    chaotic_sampler: sampler,
                    ..spec(kind, beta, 8)
                };
                let mut min_gap = Vec::new();
                let mut top = Vec::new();
                for _ in 0..20_000 {
                    let e = sample_background(&s, rng).unwrap().energies;
                    top.push(e[7]);
                    min_gap.push(e[4] - e[3]);
                }
                (empirical(top), empirical(min_gap))
            };
            let (t1, g1) = draws(ChaoticSampler::Tridiagonal, &mut rng);
            let (t2, g2) = draws(ChaoticSampler::Dense, &mut rng);
            // two-sample 99% null quantile at n = m = 2e4 is about 0.016
            assert!(ks_two_sample(&t1, &t2).unwrap() < 0.0163);
            assert!(ks_two_sample(&g1, &g2).unwrap() < 0.0163);
        }
    }

    #[test]
    fn matrix_entries_have_stated_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10;
        let reps = 20_000;
        let (mut diag, mut off, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for _ in 0..reps / 2 {
            let m = sample_goe_matrix(n, 1.5, &mut rng);
            for i in 0..n {
                diag.push(m[(i, i)]);
                for j in 0..i {
                    off.push(m[(i, j)]);
                    assert_eq!(m[(i, j)].to_bits(), m[(j, i)].to_bits());
                }
            }
            let h = sample_gue_matrix(n, 1.5, &mut rng);
            for i in 0..n {
                assert_eq!(h[(i, i)].im, 0.0);
                for j in 0..i {
                    re.push(h[(i, j)].re);
                    im.push(h[(i, j)].im);
                    assert_eq!(h[(i, j)], h[(j, i)].conj());
                }
            }
        }
        // variance estimate has standard error σ² √(2/n) for Gaussian data
        let check = |x: &[f64], var: f64| {
            let m = x.len() as f64;
            let est = x.iter().map(|a| a * a).sum::<f64>() / m;
            assert!((est - var).abs() < 5.0 * var * (2.0 / m).sqrt(), "{est} vs {var}");
        };
        check(&diag, 2.25);
        check(&off, 1.125);
        check(&re, 1.125);
        check(&im, 1.125);
        assert!(off.len() >= 400_000);
    }

    #[test]
    fn chaotic_spectra_symmetric_about_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = spec(BackgroundKind::Goe, Beta::Real, 6);
        // one level per draw keeps samples independent
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for _ in 0..40_000 {
            let e = sample_background(&s, &mut rng).unwrap().energies;
            pos.push(e[1]);
            neg.push(-sample_background(&s, &mut rng).unwrap().energies[4]);
        }
        let ks = ks_two_sample(&empirical(pos), &empirical(neg)).unwrap();
        assert!(ks < 1.63 * (2.0f64 / 40_000.0).sqrt(), "KS {ks}");
    }

    #[test]
    fn zero_strength_gives_zero_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for beta in [Beta::Real, Beta::Complex] {
            for kind in [
                InteractionKind::Gaussian,
                InteractionKind::Uniform,
                InteractionKind::Semicircle,
            ] {
                let s = EnsembleSpec {
                    v: 0.0,
                    interaction_kind: kind,
                    ..spec(BackgroundKind::Regular, beta, 5)
                };
                assert_eq!(sample_coupling(&s, &mut rng).unwrap().norm_squared(), 0.0);
            }
        }
    }

    fn moments(kind: InteractionKind, beta: Beta, n: usize, seed: u64) -> (f64, f64, f64) {
        let s = EnsembleSpec {
            interaction_kind: kind,
            v: 0.7,
            ..spec(BackgroundKind::Regular, beta, n)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sq = sample_coupling(&s, &mut rng).unwrap().moduli_squared();
        let m = n as f64;
        let m1 = sq.iter().map(|x| x.sqrt()).sum::<f64>() / m / 0.7;
        let m2 = sq.iter().sum::<f64>() / m / 0.49;
        let var2 = sq.iter().map(|x| (x / 0.49 - m2).powi(2)).sum::<f64>() / m;
        (m1, m2, (var2 / m).sqrt())
    }

    #[test]
    fn first_absolute_moments() {
        let (m1, _, _) = moments(InteractionKind::Gaussian, Beta::Real, 1_000_000, 7);
        assert!((m1 - (2.0 / PI).sqrt()).abs() < 0.01);
        let (m1, _, _) = moments(InteractionKind::Uniform, Beta::Complex, 1_000_000, 8);
        assert!((m1 - 8f64.sqrt() / 3.0).abs() < 0.01);
    }

    #[test]
    fn second_moment_calibrated_for_every_law() {
        let mut seed = 10;
        for beta in [Beta::Real, Beta::Complex] {
            for kind in [
                InteractionKind::Gaussian,
                InteractionKind::Uniform,
                InteractionKind::Semicircle,
            ] {
                seed += 1;
                let (m1, m2, se) = moments(kind, beta, 400_000, seed);
                assert!((m2 - 1.0).abs() < 5.0 * se, "{kind:?} {beta:?}: {m2} ± {se}");
                assert!(
                    (m1 - a_factor(kind, beta)).abs() < 0.005,
                    "{kind:?} {beta:?}: {m1}"
                );
            }
        }
    }

    // Calibrated densities at v = 1, unnormalized; radial profile for complex entries.
    fn law_density(kind: InteractionKind, beta: Beta) -> (Box<dyn Fn(f64) -> f64>, f64) {
        match (kind, beta) {
            (InteractionKind::Gaussian, Beta::Real) => {
                (Box::new(|x: f64| (-0.5 * x * x).exp()), f64::INFINITY)
            }
            (InteractionKind::Gaussian, Beta::Complex) => (Box::new(|r: f64| (-r * r).exp()), f64::INFINITY),
            (InteractionKind::Uniform, Beta::Real) => (Box::new(|_| 1.0), 3f64.sqrt()),
            (InteractionKind::Uniform, Beta::Complex) => (Box::new(|_| 1.0), 2f64.sqrt()),
            (InteractionKind::Semicircle, Beta::Real) => {
                (Box::new(|x: f64| (4.0 - x * x).max(0.0).sqrt()), 2.0)
            }
            (InteractionKind::Semicircle, Beta::Complex) => {
                (Box::new(|r: f64| (2.5 - r * r).max(0.0).sqrt()), 2.5f64.sqrt())
            }
        }
    }

    #[test]
    fn a_factor_matches_quadrature_of_density() {
        let q = Quadrature::new(0.0, 1e-13);
        for beta in [Beta::Real, Beta::Complex] {
            for kind in [
                InteractionKind::Gaussian,
                InteractionKind::Uniform,
                InteractionKind::Semicircle,
            ] {
                let (f, top) = law_density(kind, beta);
                let jac = |r: f64| if beta == Beta::Complex { r } else { 1.0 };
                let m0 = q.integrate(|r| jac(r) * f(r), 0.0, top).unwrap();
                let m1 = q.integrate(|r| jac(r) * r * f(r), 0.0, top).unwrap() / m0;
                let m2 = q.integrate(|r| jac(r) * r * r * f(r), 0.0, top).unwrap() / m0;
                assert!((m2 - 1.0).abs() < 1e-10, "{kind:?} {beta:?} calibration");
                assert!(
                    (m1 - a_factor(kind, beta)).abs() < 1e-10,
                    "{kind:?} {beta:?}: {m1}"
                );
            }
        }
    }

    #[test]
    fn eigenbasis_routes_preserve_coupling_norm_law() {
        // ‖V‖² is basis independent: compare its law across routes
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for (kind, beta) in [
            (BackgroundKind::Goe, Beta::Real),
            (BackgroundKind::Gue, Beta::Complex),
        ] {
            let collect = |sampler, rng: &mut ChaCha8Rng| {
                let s = EnsembleSpec {
                    chaotic_sampler: sampler,
                    interaction_kind: InteractionKind::Uniform,
                    ..spec(kind, beta, 6)
                };
                let mut first = Vec::new();
                for _ in 0..20_000 {
                    let (_, c) = sample_in_eigenbasis(&s, rng).unwrap();
                    first.push(c.moduli_squared()[2]);
                }
                empirical(first)
            };
            let a = collect(ChaoticSampler::Tridiagonal, &mut rng);
            let b = collect(ChaoticSampler::Dense, &mut rng);
            assert!(ks_two_sample(&a, &b).unwrap() < 0.0163);
        }
    }
}
