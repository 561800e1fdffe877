//! The doorway Hamiltonian and Monte Carlo samplers for its overlaps.
//!
//! A single doorway state at energy 0 couples through `V` to `N`
//! background states. In the basis `{|s⟩, |b_ν⟩}` the Hamiltonian is the
//! bordered matrix `[[0, V†], [V, diag(E_ν)]]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_in_eigenbasis, BackgroundDraw, CouplingDraw, EnsembleSpec};
use crate::linalg;
use crate::rng::{substream, StreamId, MAX_ATTEMPTS};
use crate::{Error, Result};

/// Largest background for which the dense max-overlap route is allowed.
pub const MAX_DENSE_LEVELS: usize = 5000;

/// Relative gap below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Background draw together with its coupling to the doorway state.
#[derive(Clone, Debug, PartialEq)]
pub struct DoorwayModel {
    pub background: BackgroundDraw,
    /// Expressed in the eigenbasis of the background.
    pub coupling: CouplingDraw,
    pub doorway_energy: f64,
}

impl DoorwayModel {
    pub fn new(background: BackgroundDraw, coupling: CouplingDraw) -> Result<Self> {
        if background.energies.len() != coupling.len() {
            return Err(Error::InvalidSpec(format!(
                "{} background levels but {} coupling entries",
                background.energies.len(),
                coupling.len()
            )));
        }
        if background.energies.is_empty() {
            return Err(Error::InvalidSpec("empty background".into()));
        }
        Ok(DoorwayModel {
            background,
            coupling,
            doorway_energy: 0.0,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.background.energies.len()
    }
}

/// Which overlap a sample records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `|c₀ₛ|` from `u = 1 + Σ |V_ν|² / E_ν²`.
    Fidelity,
    /// Largest `|c_ns|` over all eigenstates of the full Hamiltonian.
    MaxOverlap,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapSample {
    pub c: f64,
    pub route: Route,
    pub lambda: f64,
}

/// Eigenvalues of the full Hamiltonian, ascending, with the doorway
/// overlap `|⟨s|n⟩|` of each eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub overlaps: Vec<f64>,
}

/// Diagonalizes the bordered Hamiltonian of `model`.
///
/// The diagonal gauge transform `|b_ν⟩ → e^{iφ_ν}|b_ν⟩` maps each `V_ν` to
/// `|V_ν|` without touching eigenvalues or `|⟨s|n⟩|`, so a real symmetric
/// matrix is diagonalized for both couplings.
pub fn full_spectrum(model: &DoorwayModel) -> Result<Spectrum> {
    let n = model.n_levels();
    let moduli: Vec<f64> = model.coupling.moduli_squared().iter().map(|x| x.sqrt()).collect();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n + 1, n + 1);
    m[(0, 0)] = model.doorway_energy;
    for (k, (&e, &v)) in model.background.energies.iter().zip(&moduli).enumerate() {
        m[(k + 1, k + 1)] = e;
        m[(0, k + 1)] = v;
        m[(k + 1, 0)] = v;
    }
    let fr = linalg::symmetric_first_row(m).map_err(|e| Error::Numeric(e.0))?;
    Ok(Spectrum {
        eigenvalues: fr.eigenvalues,
        overlaps: fr.first_components.iter().map(|c| c.abs()).collect(),
    })
}

/// `|c_ns|² = (1 + Σ_ν |V_ν|² / (E_n − E_ν)²)⁻¹`, exact when `e_n` is an
/// eigenvalue of the full Hamiltonian.
pub fn overlap_formula(e_n: f64, background: &BackgroundDraw, coupling: &CouplingDraw) -> Result<f64> {
    if background.energies.len() != coupling.len() {
        return Err(Error::InvalidSpec(
            "background and coupling lengths differ".into(),
        ));
    }
    let mut u = 1.0;
    for (&e, v2) in background.energies.iter().zip(coupling.moduli_squared()) {
        let d = e_n - e;
        if d == 0.0 {
            return Err(Error::Domain(format!(
                "energy {e_n} coincides with a background level"
            )));
        }
        u += v2 / (d * d);
    }
    Ok(1.0 / u)
}

/// Monte Carlo output for one (spec, route).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    /// Indexed by sample number.
    pub samples: Vec<OverlapSample>,
    /// Draws discarded as degenerate and redrawn.
    pub n_resampled: u64,
    /// Max-overlap draws whose largest two overlaps agreed within tolerance.
    pub n_ties: u64,
}

impl SampleBatch {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.c).collect()
    }
}

fn is_degenerate(energies: &[f64]) -> bool {
    energies.contains(&0.0)
        || energies
            .windows(2)
            .any(|p| p[1] - p[0] <= DEGENERACY_TOL * p[0].abs().max(p[1].abs()).max(1.0))
}

/// Draws the model for sample `index`, redrawing degenerate spectra on
/// fresh substreams. Returns the model and the number of redraws.
pub fn draw_model(spec: &EnsembleSpec, index: u64) -> Result<(DoorwayModel, u32)> {
    let mut id = StreamId::new(index);
    loop {
        let mut rng = substream(spec.seed, id);
        let (background, coupling) = sample_in_eigenbasis(spec, &mut rng).map_err(|e| match e {
            Error::Numeric(detail) => Error::EigenFailure {
                sample: index,
                attempt: id.attempt,
                detail,
            },
            other => other,
        })?;
        if !is_degenerate(&background.energies) {
            return Ok((DoorwayModel::new(background, coupling)?, id.attempt));
        }
        log::debug!("sample {index}: degenerate background on attempt {}", id.attempt);
        if id.attempt + 1 >= MAX_ATTEMPTS {
            return Err(Error::Numeric(format!(
                "sample {index}: {MAX_ATTEMPTS} consecutive degenerate draws"
            )));
        }
        id = id.next_attempt();
    }
}

fn fidelity_of(model: &DoorwayModel) -> f64 {
    let u: f64 = 1.0
        + model
            .background
            .energies
            .iter()
            .zip(model.coupling.moduli_squared())
            .map(|(e, v2)| v2 / (e * e))
            .sum::<f64>();
    1.0 / u.sqrt()
}

/// Largest overlap with the lowest index among (near) ties, and whether a
/// tie within [`DEGENERACY_TOL`] occurred.
fn max_overlap_of(model: &DoorwayModel, index: u64, attempt: u32) -> Result<(f64, bool)> {
    let spectrum = full_spectrum(model).map_err(|e| match e {
        Error::Numeric(detail) => Error::EigenFailure {
            sample: index,
            attempt,
            detail,
        },
        other => other,
    })?;
    let mut best = 0;
    for (k, &c) in spectrum.overlaps.iter().enumerate() {
        if c > spectrum.overlaps[best] {
            best = k;
        }
    }
    let top = spectrum.overlaps[best];
    let tied = spectrum
        .overlaps
        .iter()
        .enumerate()
        .any(|(k, &c)| k != best && (top - c).abs() <= DEGENERACY_TOL);
    if tied {
        log::debug!("sample {index}: tie for the largest overlap at {top}");
    }
    Ok((top.min(1.0), tied))
}

/// Samples `|c₀ₛ|` for `n_samples` independent draws of `spec`.
///
/// Runs on the current rayon pool; results depend only on `spec` and the
/// sample indices.
pub fn sample_fidelity(spec: &EnsembleSpec, n_samples: usize) -> Result<SampleBatch> {
    sample(spec, n_samples, Route::Fidelity)
}

/// Samples `max_n |c_ns|` for `n_samples` independent draws of `spec`.
pub fn sample_max_overlap(spec: &EnsembleSpec, n_samples: usize) -> Result<SampleBatch> {
    sample(spec, n_samples, Route::MaxOverlap)
}

/// Samples the observable selected by `route`.
pub fn sample(spec: &EnsembleSpec, n_samples: usize, route: Route) -> Result<SampleBatch> {
    spec.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidSpec("n_samples must be at least 1".into()));
    }
    if route == Route::MaxOverlap && spec.n_levels > MAX_DENSE_LEVELS {
        return Err(Error::InvalidSpec(format!(
            "max-overlap route needs n_levels <= {MAX_DENSE_LEVELS}"
        )));
    }
    let lambda = spec.lambda();
    let per_sample: Vec<(f64, u32, bool)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let (model, redraws) = draw_model(spec, i)?;
            let (c, tied) = match route {
                Route::Fidelity => (fidelity_of(&model), false),
                Route::MaxOverlap => max_overlap_of(&model, i, redraws)?,
            };
            Ok((c, redraws, tied))
        })
        .collect::<Result<_>>()?;
    Ok(SampleBatch {
        n_resampled: per_sample.iter().map(|s| u64::from(s.1)).sum(),
        n_ties: per_sample.iter().filter(|s| s.2).count() as u64,
        samples: per_sample
            .into_iter()
            .map(|(c, _, _)| OverlapSample { c, route, lambda })
            .collect(),
    })
}
