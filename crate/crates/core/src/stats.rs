//! Empirical distributions, histograms and Kolmogorov–Smirnov distances.

use crate::{Error, Result};

/// Asymptotic 99% quantile of the Kolmogorov distribution.
pub const KS_99: f64 = 1.63;

/// One-sample KS distance that a correct model exceeds with probability
/// about 1% at `n` samples.
pub fn ks_null_quantile(n: usize) -> f64 {
    KS_99 / (n as f64).sqrt()
}

/// Two-sample analogue of [`ks_null_quantile`].
pub fn ks_two_sample_null_quantile(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_99 * ((n + m) / (n * m)).sqrt()
}

/// Sorted sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Samples of an overlap-type quantity; every value must lie in `[0, 1]`.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!("sample {bad} outside [0, 1]")));
        }
        Self::from_unbounded(samples)
    }

    /// Samples on the whole real line (NaN is rejected).
    pub fn from_unbounded(mut samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("NaN sample".into()));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    /// Merges already sorted chunks, e.g. per-worker results.
    pub fn from_sorted_chunks(chunks: Vec<Vec<f64>>) -> Result<Self> {
        let mut out: Vec<f64> = Vec::with_capacity(chunks.iter().map(Vec::len).sum());
        for chunk in chunks {
            if chunk.windows(2).any(|p| p[0] > p[1]) || chunk.iter().any(|x| x.is_nan()) {
                return Err(Error::Domain("chunk is not sorted".into()));
            }
            let mut merged = Vec::with_capacity(out.len() + chunk.len());
            let (mut i, mut j) = (0, 0);
            while i < out.len() && j < chunk.len() {
                if out[i] <= chunk[j] {
                    merged.push(out[i]);
                    i += 1;
                } else {
                    merged.push(chunk[j]);
                    j += 1;
                }
            }
            merged.extend_from_slice(&out[i..]);
            merged.extend_from_slice(&chunk[j..]);
            out = merged;
        }
        Ok(EmpiricalDistribution { samples: out })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        let k = self.samples.partition_point(|&s| s <= x);
        k as f64 / self.samples.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Standard error of [`mean`](Self::mean).
    pub fn standard_error(&self) -> f64 {
        let n = self.samples.len() as f64;
        let m = self.mean();
        let var = self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// `sup_x |ECDF(x) - cdf(x)|`, evaluated on both sides of every step.
pub fn ks_distance(empirical: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if empirical.is_empty() {
        return Err(Error::Domain("KS distance of an empty sample".into()));
    }
    let n = empirical.len() as f64;
    let mut d: f64 = 0.0;
    let s = empirical.samples();
    let mut i = 0;
    while i < s.len() {
        // ties: the ECDF jumps once over the whole run
        let mut j = i + 1;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        let f = cdf(s[i]);
        if f.is_nan() {
            return Err(Error::Numeric(format!("CDF is NaN at {}", s[i])));
        }
        d = d.max(j as f64 / n - f).max(f - i as f64 / n);
        i = j;
    }
    Ok(d)
}

/// Largest gap between two empirical CDFs.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS distance of an empty sample".into()));
    }
    let (x, y) = (a.samples(), b.samples());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Equal-width density histogram on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    /// `Σ density · width`.
    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

/// Bins samples in `[0, 1]`; the value 1 falls in the last bin.
pub fn histogram(empirical: &EmpiricalDistribution, n_bins: usize) -> Result<Histogram> {
    if n_bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    if empirical.is_empty() {
        return Err(Error::Domain("histogram of an empty sample".into()));
    }
    let s = empirical.samples();
    if s[0] < 0.0 || s[s.len() - 1] > 1.0 {
        return Err(Error::Domain("histogram samples must lie in [0, 1]".into()));
    }
    let mut counts = vec![0usize; n_bins];
    for &x in s {
        let k = ((x * n_bins as f64) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let bin_edges: Vec<f64> = (0..=n_bins).map(|k| k as f64 / n_bins as f64).collect();
    let total = s.len() as f64;
    let densities = counts
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(&c, e)| c as f64 / (total * (e[1] - e[0])))
        .collect();
    Ok(Histogram { bin_edges, densities })
}
