use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exceedances of a threshold and the gaps between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStatistics {
    pub exceedance_positions: Vec<usize>,
    /// `T_i = l_{i+1} - l_i`.
    pub gaps: Vec<usize>,
    /// `S_i = T_i - 1`.
    pub s_values: Vec<usize>,
    pub n_exceedances: usize,
    /// `#{i : S_i != 0}`.
    pub n_clusters: usize,
    /// Fraction of the series above the threshold.
    pub exceed_prob: f64,
    pub series_len: usize,
    pub threshold: f64,
}

/// Positions strictly above the threshold. `+inf` sentinels always count.
pub fn exceedance_positions(series: &[f64], threshold: f64) -> Vec<usize> {
    series
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > threshold || (v.is_infinite() && **v > 0.0))
        .map(|(i, _)| i)
        .collect()
}

pub fn extract_clusters(series: &[f64], threshold: f64) -> Result<ClusterStatistics> {
    clusters_from_positions(exceedance_positions(series, threshold), series.len(), threshold)
}

/// Same as [`extract_clusters`], starting from sorted exceedance positions.
pub fn clusters_from_positions(
    positions: Vec<usize>,
    series_len: usize,
    threshold: f64,
) -> Result<ClusterStatistics> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::InsufficientExceedances { found: n, needed: 2 });
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) || positions[n - 1] >= series_len {
        return Err(Error::Data("exceedance positions must be strictly increasing and in range".into()));
    }
    let gaps: Vec<usize> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    let s_values: Vec<usize> = gaps.iter().map(|t| t - 1).collect();
    let n_clusters = s_values.iter().filter(|s| **s != 0).count();
    Ok(ClusterStatistics {
        exceedance_positions: positions,
        gaps,
        s_values,
        n_exceedances: n,
        n_clusters,
        exceed_prob: n as f64 / series_len as f64,
        series_len,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EiMethod {
    Suveges,
    Blocks,
    Runs,
}

impl EiMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EiMethod::Suveges => "suveges",
            EiMethod::Blocks => "blocks",
            EiMethod::Runs => "runs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EIEstimate {
    /// Clamped to `[0, 1]`.
    pub theta_hat: f64,
    /// Value before clamping.
    pub theta_raw: f64,
    pub method: EiMethod,
    pub threshold: f64,
    pub n_exceedances: usize,
}

impl EIEstimate {
    fn new(raw: f64, method: EiMethod, threshold: f64, n: usize) -> Self {
        EIEstimate { theta_hat: raw.clamp(0.0, 1.0), theta_raw: raw, method, threshold, n_exceedances: n }
    }
}

/// Which number plays the role of `q` in the Süveges formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QConvention {
    /// Exceedance probability, `1 - quantile level`.
    #[default]
    ExceedProb,
    /// The quantile level itself.
    QuantileLevel,
}

/// Süveges maximum-likelihood estimator from interexceedance times.
pub fn suveges_ei(c: &ClusterStatistics) -> EIEstimate {
    suveges_kgap(c, 1, QConvention::ExceedProb)
}

/// K-gap generalization: gaps are reduced by `k` instead of 1 before the likelihood.
/// `k = 1` is the plain Süveges estimator.
pub fn suveges_kgap(c: &ClusterStatistics, k: usize, convention: QConvention) -> EIEstimate {
    let k = k.max(1);
    let q = match convention {
        QConvention::ExceedProb => c.exceed_prob,
        QConvention::QuantileLevel => 1.0 - c.exceed_prob,
    };
    let mk = |raw| EIEstimate::new(raw, EiMethod::Suveges, c.threshold, c.n_exceedances);
    if c.n_exceedances < 2 {
        log::warn!("fewer than two exceedances, Suveges estimate set to 1");
        return mk(1.0);
    }
    let s: Vec<usize> = c.gaps.iter().map(|t| t.saturating_sub(k)).collect();
    let nc = s.iter().filter(|v| **v != 0).count() as f64;
    let sum_s: f64 = s.iter().map(|v| *v as f64).sum();
    if sum_s == 0.0 {
        log::warn!("all exceedances form a single run, Suveges estimate set to 0");
        return mk(0.0);
    }
    let b = q * sum_s;
    let a = b + (c.n_exceedances - 1) as f64 + nc;
    let disc = (a * a - 8.0 * nc * b).max(0.0);
    mk((a - disc.sqrt()) / (2.0 * b))
}

pub fn blocks_ei(series: &[f64], threshold: f64, block_len: usize) -> Result<EIEstimate> {
    if block_len < 2 {
        return Err(Error::Domain(format!("block length must be at least 2, got {block_len}")));
    }
    let pos = exceedance_positions(series, threshold);
    if pos.is_empty() {
        return Err(Error::InsufficientExceedances { found: 0, needed: 1 });
    }
    let mut occupied = 0usize;
    let mut last = usize::MAX;
    for p in &pos {
        let b = p / block_len;
        if b != last {
            occupied += 1;
            last = b;
        }
    }
    Ok(EIEstimate::new(occupied as f64 / pos.len() as f64, EiMethod::Blocks, threshold, pos.len()))
}

pub fn runs_ei(series: &[f64], threshold: f64, run_gap: usize) -> Result<EIEstimate> {
    if run_gap < 1 {
        return Err(Error::Domain("run gap must be at least 1".into()));
    }
    let pos = exceedance_positions(series, threshold);
    if pos.is_empty() {
        return Err(Error::InsufficientExceedances { found: 0, needed: 1 });
    }
    let clusters = 1 + pos.windows(2).filter(|w| w[1] - w[0] >= run_gap).count();
    Ok(EIEstimate::new(clusters as f64 / pos.len() as f64, EiMethod::Runs, threshold, pos.len()))
}

fn default_gap() -> usize {
    1
}

fn default_block_len() -> usize {
    100
}

fn default_run_gap() -> usize {
    10
}

/// Estimator choice with its parameters, as written in config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    Suveges {
        #[serde(default = "default_gap")]
        gap: usize,
        #[serde(default)]
        q_convention: QConvention,
    },
    Blocks {
        #[serde(default = "default_block_len")]
        block_len: usize,
    },
    Runs {
        #[serde(default = "default_run_gap")]
        run_gap: usize,
    },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Suveges { gap: 1, q_convention: QConvention::ExceedProb }
    }
}

impl Estimator {
    pub fn method(&self) -> EiMethod {
        match self {
            Estimator::Suveges { .. } => EiMethod::Suveges,
            Estimator::Blocks { .. } => EiMethod::Blocks,
            Estimator::Runs { .. } => EiMethod::Runs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Estimator::Suveges { gap, .. } if *gap < 1 => {
                Err(Error::Config("Suveges gap must be at least 1".into()))
            }
            Estimator::Blocks { block_len } if *block_len < 2 => {
                Err(Error::Config("block_len must be at least 2".into()))
            }
            Estimator::Runs { run_gap } if *run_gap < 1 => {
                Err(Error::Config("run_gap must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Estimate at a fixed threshold.
    pub fn estimate(&self, series: &[f64], threshold: f64) -> Result<EIEstimate> {
        match self {
            Estimator::Suveges { gap, q_convention } => {
                let c = extract_clusters(series, threshold)?;
                Ok(suveges_kgap(&c, *gap, *q_convention))
            }
            Estimator::Blocks { block_len } => blocks_ei(series, threshold, *block_len),
            Estimator::Runs { run_gap } => runs_ei(series, threshold, *run_gap),
        }
    }

    /// Estimate at the empirical quantile of the series.
    pub fn estimate_at_level(&self, series: &[f64], quantile_level: f64) -> Result<EIEstimate> {
        let u = super::threshold_at(series, quantile_level)?;
        self.estimate(series, u)
    }
}
