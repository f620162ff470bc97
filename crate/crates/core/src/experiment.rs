//! Config-driven runs: one extremal-index estimate per realization and sweep
//! point, plus the closed-form prediction.
//!
//! Realization `r` of sweep point `p` draws from stream `stream_index(p, r)`
//! of the config seed, so results do not depend on the worker count.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::parallel::try_map_indexed;
use crate::rng::{stream, stream_index};
use crate::systems::realization_series;
use crate::theory::{predict_for, ThetaPrediction};

pub const CSV_HEADER: &str = "row_kind,realization,label,threshold,quantile_level,theta,n_exceedances";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Estimate,
    Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub row_kind: RowKind,
    pub realization: Option<usize>,
    pub label: String,
    pub threshold: Option<f64>,
    pub quantile_level: f64,
    pub theta: f64,
    pub n_exceedances: Option<usize>,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let opt_f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            match self.row_kind {
                RowKind::Estimate => "estimate",
                RowKind::Prediction => "prediction",
            },
            opt_u(self.realization),
            self.label,
            opt_f(self.threshold),
            self.quantile_level,
            self.theta,
            opt_u(self.n_exceedances),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub label: String,
    pub prediction: Option<ThetaPrediction>,
    pub mean_theta: f64,
    /// Sample standard deviation over realizations, 0 for a single one.
    pub spread: f64,
    pub min_theta: f64,
    pub max_theta: f64,
    pub n_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub name: Option<String>,
    pub seed: u64,
    pub n: usize,
    pub quantile_level: f64,
    pub estimator: String,
    pub points: Vec<PointSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub summary: ExperimentSummary,
}

impl ExperimentResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.to_csv())?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// The CSV at `path` and the summary next to it with a `.json` extension.
    pub fn write_files(&self, path: &Path) -> Result<PathBuf> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
        let json = path.with_extension("json");
        std::fs::write(&json, self.summary_json() + "\n")?;
        Ok(json)
    }
}

/// Runs every sweep point and realization of `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let points = cfg.sweep_points().map_err(|e| e.at_stage("config"))?;
    let compiled = points
        .iter()
        .map(|(l, p)| p.compile().map_err(|e| e.at_stage(format!("build {l}"))))
        .collect::<Result<Vec<_>>>()?;
    let nr = cfg.n_realizations;
    let estimates = try_map_indexed(points.len() * nr, |task| {
        let (p, r) = (task / nr, task % nr);
        let (label, pc) = &points[p];
        let c = &compiled[p];
        let at = |stage: &str| format!("{stage} {}realization {r}", if label.is_empty() { String::new() } else { format!("{label} ") });
        let mut rng = stream(cfg.seed, stream_index(p, r));
        let series = realization_series(&c.system, &c.observable, pc.n, pc.burn_in, &mut rng)
            .map_err(|e| e.at_stage(at("simulate")))?;
        pc.estimator
            .estimate_at_level(&series, pc.quantile_level)
            .map_err(|e| e.at_stage(at("estimate")))
    })?;

    let mut rows = Vec::with_capacity(estimates.len() + points.len());
    let mut summaries = Vec::with_capacity(points.len());
    for (p, ((label, pc), c)) in points.iter().zip(&compiled).enumerate() {
        let ests = &estimates[p * nr..(p + 1) * nr];
        for (r, e) in ests.iter().enumerate() {
            rows.push(ResultRow {
                row_kind: RowKind::Estimate,
                realization: Some(r),
                label: label.clone(),
                threshold: Some(e.threshold),
                quantile_level: pc.quantile_level,
                theta: e.theta_hat,
                n_exceedances: Some(e.n_exceedances),
            });
        }
        let prediction = match predict_for(&c.system, &c.observable, &pc.theory.options()) {
            Ok(pred) => Some(pred),
            Err(Error::UnsupportedSystem(msg)) => {
                log::info!("no prediction for {label}: {msg}");
                None
            }
            Err(e) => return Err(e.at_stage(format!("theory {label}"))),
        };
        if let Some(pred) = &prediction {
            rows.push(ResultRow {
                row_kind: RowKind::Prediction,
                realization: None,
                label: label.clone(),
                threshold: None,
                quantile_level: pc.quantile_level,
                theta: pred.value,
                n_exceedances: None,
            });
        }
        let thetas: Vec<f64> = ests.iter().map(|e| e.theta_hat).collect();
        summaries.push(summarize(label, prediction, &thetas));
    }
    Ok(ExperimentResult {
        rows,
        summary: ExperimentSummary {
            name: cfg.name.clone(),
            seed: cfg.seed,
            n: cfg.n,
            quantile_level: cfg.quantile_level,
            estimator: cfg.estimator.method().as_str().to_string(),
            points: summaries,
        },
    })
}

fn summarize(label: &str, prediction: Option<ThetaPrediction>, thetas: &[f64]) -> PointSummary {
    let k = thetas.len() as f64;
    let mean = thetas.iter().sum::<f64>() / k;
    let spread = if thetas.len() > 1 {
        (thetas.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    PointSummary {
        label: label.to_string(),
        prediction,
        mean_theta: mean,
        spread,
        min_theta: thetas.iter().copied().fold(f64::INFINITY, f64::min),
        max_theta: thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n_realizations: thetas.len(),
    }
}
