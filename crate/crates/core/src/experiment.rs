//! Configuration-driven Monte Carlo runs and CSV output.
//!
//! All files are written by the calling thread after sampling finishes;
//! their bytes depend only on the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{AnalyticDistribution, Family};
use crate::doorway::{sample, Route};
use crate::ensembles::{a_factor, BackgroundKind, Beta, EnsembleSpec, InteractionKind};
use crate::stats::{histogram, ks_distance, EmpiricalDistribution};
use crate::{Error, Result, VERSION};

/// Default coupling grid.
pub const DEFAULT_LAMBDAS: [f64; 4] = [0.05, 0.1, 0.5, 2.0];
pub const DEFAULT_BINS: usize = 100;
pub const DEFAULT_SEED: u64 = 20_240_917;
/// Largest `c` on tabulated curves.
pub const CURVE_C_MAX: f64 = 1.0 - 1e-6;

/// Which samplers a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteSelection {
    Fidelity,
    MaxOverlap,
    Both,
}

impl RouteSelection {
    pub fn routes(self) -> &'static [Route] {
        match self {
            RouteSelection::Fidelity => &[Route::Fidelity],
            RouteSelection::MaxOverlap => &[Route::MaxOverlap],
            RouteSelection::Both => &[Route::Fidelity, Route::MaxOverlap],
        }
    }
}

/// One simulation campaign. `spec.v` is ignored: each entry of `lambdas`
/// fixes it through `v = λ D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: EnsembleSpec,
    pub lambdas: Vec<f64>,
    pub n_samples: usize,
    pub route: RouteSelection,
    pub output_path: PathBuf,
    pub n_bins: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    #[serde(default)]
    pub emit_samples: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.lambdas.is_empty() {
            return Err(Error::InvalidConfig("lambdas must not be empty".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidConfig(format!("lambda {l} must be positive")));
        }
        if self.n_samples < 100 {
            return Err(Error::InvalidConfig("n_samples must be at least 100".into()));
        }
        if self.n_bins == 0 {
            return Err(Error::InvalidConfig("n_bins must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// SHA-256 over the settings that determine the output bytes
    /// (everything except `output_path` and `workers`).
    pub fn content_hash(&self) -> String {
        let canonical = ExperimentConfig {
            output_path: PathBuf::new(),
            workers: 0,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Analytic family matching a spec.
pub fn family_for(spec: &EnsembleSpec) -> Family {
    match spec.background_kind {
        BackgroundKind::Regular => Family::regular(spec.beta),
        BackgroundKind::Goe => Family::Goe,
        BackgroundKind::Gue => Family::Gue,
    }
}

/// Closed-form distribution for the samples of `spec` at coupling `lambda`.
pub fn analytic_for(spec: &EnsembleSpec, lambda: f64) -> Result<AnalyticDistribution> {
    let family = family_for(spec);
    let a = family
        .is_regular()
        .then(|| a_factor(spec.interaction_kind, spec.beta));
    AnalyticDistribution::new(family, lambda, a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub lambda: f64,
    pub route: Route,
    pub ks_to_analytic: f64,
    pub n_resampled: u64,
    pub n_ties: u64,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
    pub provenance: Provenance,
}

fn route_name(route: Route) -> &'static str {
    match route {
        Route::Fidelity => "fidelity",
        Route::MaxOverlap => "max_overlap",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// File name stem for one (route, λ) pair.
pub fn stem(route: Route, lambda: f64) -> String {
    format!("{}_lambda{lambda}", route_name(route))
}

fn histogram_csv(values: &EmpiricalDistribution, n_bins: usize) -> Result<String> {
    let h = histogram(values, n_bins)?;
    let mut out = String::from("bin_left,bin_right,density\n");
    for (e, d) in h.bin_edges.windows(2).zip(&h.densities) {
        let _ = writeln!(out, "{},{},{}", e[0], e[1], d);
    }
    Ok(out)
}

/// One analytic curve sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveTable {
    pub family: Family,
    pub lambda: f64,
    pub rows: Vec<[f64; 3]>,
}

impl CurveTable {
    /// `c,pdf,cdf` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,pdf,cdf\n");
        for [c, p, f] in &self.rows {
            let _ = writeln!(out, "{c},{p},{f}");
        }
        out
    }
}

/// Tabulates `family` on `grid_size` points of `[0, 1 − 1e−6]` for every
/// coupling in `lambdas`. `a_beta` is required by regular families.
pub fn tabulate_analytic(
    family: Family,
    lambdas: &[f64],
    grid_size: usize,
    a_beta: Option<f64>,
) -> Result<Vec<CurveTable>> {
    if grid_size < 2 {
        return Err(Error::InvalidConfig("grid_size must be at least 2".into()));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let d = AnalyticDistribution::new(family, lambda, a_beta)?;
            let rows = (0..grid_size)
                .map(|i| {
                    let c = CURVE_C_MAX * i as f64 / (grid_size - 1) as f64;
                    Ok([c, d.pdf(c)?, d.cdf(c)?])
                })
                .collect::<Result<_>>()?;
            Ok(CurveTable { family, lambda, rows })
        })
        .collect()
}

/// Runs every (λ, route) pair of `config` on the current rayon pool and
/// writes histogram, curve and (optionally) sample files, `report.json`
/// and `timings.csv` into `config.output_path`. Every file except
/// `timings.csv` depends only on the configuration.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let out = &config.output_path;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut records = Vec::new();
    for &lambda in &config.lambdas {
        let spec = config.spec.with_lambda(lambda);
        let analytic = analytic_for(&spec, lambda)?;
        let curve = tabulate_analytic(analytic.family, &[lambda], 1001, analytic.a_beta)?;
        write_file(
            &out.join(format!("{}_lambda{lambda}_curve.csv", analytic.family.name())),
            &curve[0].to_csv(),
        )?;
        for &route in config.route.routes() {
            let start = Instant::now();
            let batch = sample(&spec, config.n_samples, route)?;
            let raw = batch.values();
            let empirical = EmpiricalDistribution::new(raw.clone())?;
            let ks = ks_distance(&empirical, |c| analytic.cdf(c).unwrap_or(f64::NAN))?;
            let name = stem(route, lambda);
            write_file(
                &out.join(format!("{name}_hist.csv")),
                &histogram_csv(&empirical, config.n_bins)?,
            )?;
            if config.emit_samples {
                let mut text = String::with_capacity(raw.len() * 20);
                text.push_str("c\n");
                for c in &raw {
                    let _ = writeln!(text, "{c}");
                }
                write_file(&out.join(format!("{name}_samples.csv")), &text)?;
            }
            log::info!("lambda {lambda} {}: KS {ks:.5}", route_name(route));
            records.push(RunRecord {
                lambda,
                route,
                ks_to_analytic: ks,
                n_resampled: batch.n_resampled,
                n_ties: batch.n_ties,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
    }
    let report = RunReport {
        records,
        provenance: Provenance {
            seed: config.spec.seed,
            config_hash: config.content_hash(),
            version: VERSION.to_string(),
        },
    };
    // timings go to their own file so report.json is reproducible byte for byte
    let mut value = serde_json::to_value(&report)?;
    let mut timings = String::from("lambda,route,wall_time\n");
    if let Some(records) = value["records"].as_array_mut() {
        for (record, r) in records.iter_mut().zip(&report.records) {
            if let Some(obj) = record.as_object_mut() {
                obj.remove("wall_time");
            }
            let _ = writeln!(timings, "{},{},{}", r.lambda, route_name(r.route), r.wall_time);
        }
    }
    write_file(
        &out.join("report.json"),
        &(serde_json::to_string_pretty(&value)? + "\n"),
    )?;
    write_file(&out.join("timings.csv"), &timings)?;
    Ok(report)
}

/// Writes the analytic curves of every family at every coupling, using
/// the a-factor of `interaction` for the regular families. Returns the
/// written paths.
pub fn compare(
    lambdas: &[f64],
    grid_size: usize,
    interaction: InteractionKind,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    for family in Family::ALL {
        let a = match family {
            Family::RegularBeta1 => Some(a_factor(interaction, Beta::Real)),
            Family::RegularBeta2 => Some(a_factor(interaction, Beta::Complex)),
            _ => None,
        };
        for table in tabulate_analytic(family, lambdas, grid_size, a)? {
            let path = out.join(format!("{}_lambda{}_curve.csv", family.name(), table.lambda));
            write_file(&path, &table.to_csv())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `kind,beta,a_factor` for all six interaction laws.
pub fn a_factor_table() -> String {
    let mut out = String::from("kind,beta,a_factor\n");
    for kind in [
        InteractionKind::Gaussian,
        InteractionKind::Uniform,
        InteractionKind::Semicircle,
    ] {
        for beta in [Beta::Real, Beta::Complex] {
            let name = serde_json::to_value(kind).expect("serializes");
            let _ = writeln!(
                out,
                "{},{},{}",
                name.as_str().unwrap_or_default(),
                u8::from(beta),
                a_factor(kind, beta)
            );
        }
    }
    out
}

/// Reads a `*_samples.csv` file back into its values.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("{}: bad sample {l:?}: {e}", path.display())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::ChaoticSampler;
    use proptest::prelude::*;

    fn config(out: PathBuf) -> ExperimentConfig {
        ExperimentConfig {
            spec: EnsembleSpec {
                background_kind: BackgroundKind::Regular,
                n_levels: 50,
                w: 1.0,
                interaction_kind: InteractionKind::Gaussian,
                beta: Beta::Real,
                v: 0.0,
                seed: 5,
                chaotic_sampler: ChaoticSampler::Tridiagonal,
            },
            lambdas: vec![0.1, 0.5],
            n_samples: 500,
            route: RouteSelection::Both,
            output_path: out,
            n_bins: 20,
            workers: 1,
            emit_samples: true,
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let c = config(PathBuf::from("x"));
        let mut v = serde_json::to_value(&c).unwrap();
        v["n_sample"] = serde_json::json!(3);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
        let mut v = serde_json::to_value(&c).unwrap();
        v["spec"]["lamda"] = serde_json::json!(3);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn validation() {
        let mut c = config(PathBuf::from("x"));
        c.lambdas.clear();
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let mut c = config(PathBuf::from("x"));
        c.n_samples = 99;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_location_and_workers() {
        let a = config(PathBuf::from("a"));
        let b = ExperimentConfig {
            workers: 7,
            ..config(PathBuf::from("b"))
        };
        assert_eq!(a.content_hash(), b.content_hash());
        let c = ExperimentConfig {
            n_samples: 501,
            ..a.clone()
        };
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn tabulated_gue_origin_and_cdf_end() {
        let t = tabulate_analytic(Family::Gue, &[0.5], 3, None).unwrap();
        assert_eq!(t[0].rows[0][0], 0.0);
        assert!((t[0].rows[0][1] - 0.8862).abs() < 1e-4);
        assert!(tabulate_analytic(Family::Gue, &[0.5], 1, None).is_err());
        for family in Family::ALL {
            let a = family.is_regular().then_some(0.8);
            for table in tabulate_analytic(family, &DEFAULT_LAMBDAS, 200, a).unwrap() {
                assert!(table.rows.windows(2).all(|r| r[0][2] <= r[1][2]));
                assert!((table.rows.last().unwrap()[2] - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn regular_curves_separate_beta_at_strong_coupling() {
        let g1 = a_factor(InteractionKind::Gaussian, Beta::Real);
        let g2 = a_factor(InteractionKind::Gaussian, Beta::Complex);
        let a = tabulate_analytic(Family::RegularBeta1, &[2.0], 101, Some(g1)).unwrap();
        let b = tabulate_analytic(Family::RegularBeta2, &[2.0], 101, Some(g2)).unwrap();
        let gap = a[0]
            .rows
            .iter()
            .zip(&b[0].rows)
            .map(|(x, y)| (x[1] - y[1]).abs())
            .fold(0.0, f64::max);
        assert!(gap > 0.0);
    }

    #[test]
    fn run_writes_outputs_and_ks_is_reproducible_from_samples() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path().to_path_buf());
        let report = run(&c).unwrap();
        assert_eq!(report.records.len(), 4);
        for r in &report.records {
            assert!((0.0..=1.0).contains(&r.ks_to_analytic));
            let name = stem(r.route, r.lambda);
            let raw = read_samples(&dir.path().join(format!("{name}_samples.csv"))).unwrap();
            let analytic = analytic_for(&c.spec, r.lambda).unwrap();
            let ks = ks_distance(&EmpiricalDistribution::new(raw).unwrap(), |x| {
                analytic.cdf(x).unwrap()
            })
            .unwrap();
            assert_eq!(ks, r.ks_to_analytic);
            assert!(dir.path().join(format!("{name}_hist.csv")).exists());
        }
        assert!(dir.path().join("regular_beta1_lambda0.1_curve.csv").exists());
        let hist = fs::read_to_string(dir.path().join("fidelity_lambda0.1_hist.csv")).unwrap();
        assert!(hist.starts_with("bin_left,bin_right,density\n"));
        assert_eq!(hist.lines().count(), 21);
    }

    #[test]
    fn compare_writes_sixteen_curves() {
        let dir = tempfile::tempdir().unwrap();
        let files = compare(&DEFAULT_LAMBDAS, 50, InteractionKind::Gaussian, dir.path()).unwrap();
        assert_eq!(files.len(), 16);
        assert!(files.iter().all(|f| f.exists()));
    }

    #[test]
    fn a_factor_table_has_six_rows() {
        let t = a_factor_table();
        assert_eq!(t.lines().count(), 7);
        assert!(t.contains("semicircle,2,"));
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            prop::sample::select(vec![
                BackgroundKind::Regular,
                BackgroundKind::Goe,
                BackgroundKind::Gue,
            ]),
            1usize..2000,
            0.01f64..10.0,
            prop::sample::select(vec![
                InteractionKind::Gaussian,
                InteractionKind::Uniform,
                InteractionKind::Semicircle,
            ]),
            any::<u64>(),
            prop::collection::vec(0.001f64..10.0, 1..6),
            100usize..1_000_000,
            prop::sample::select(vec![
                RouteSelection::Fidelity,
                RouteSelection::MaxOverlap,
                RouteSelection::Both,
            ]),
            (1usize..500, 0usize..64, any::<bool>(), any::<bool>()),
        )
            .prop_map(
                |(kind, n, w, inter, seed, lambdas, n_samples, route, (bins, workers, emit, dense))| {
                    let beta = match kind {
                        BackgroundKind::Gue => Beta::Complex,
                        _ => Beta::Real,
                    };
                    ExperimentConfig {
                        spec: EnsembleSpec {
                            background_kind: kind,
                            n_levels: n,
                            w,
                            interaction_kind: inter,
                            beta,
                            v: w * 0.1,
                            seed,
                            chaotic_sampler: if dense {
                                ChaoticSampler::Dense
                            } else {
                                ChaoticSampler::Tridiagonal
                            },
                        },
                        lambdas,
                        n_samples,
                        route,
                        output_path: PathBuf::from(format!("out/{seed}")),
                        n_bins: bins,
                        workers,
                        emit_samples: emit,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn config_round_trips(c in arb_config()) {
            let text = serde_json::to_string(&c).unwrap();
            prop_assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        }
    }
}
