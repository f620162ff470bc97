//! Experiment configuration, read from TOML or JSON.
//!
//! ```toml
//! seed = 7
//! n = 10000
//! n_realizations = 10
//! quantile_level = 0.98
//!
//! [system]
//! kind = "toral"
//!
//! [observable]
//! kind = "neg_log_segment_dist"
//! segment = { center = [0.2, 0.4], direction = "v+", length = 0.5 }
//!
//! [estimator]
//! method = "suveges"
//! gap = 2
//!
//! [[sweep]]
//! parameter = "system.gamma"
//! values = [0.1, 0.2]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evt::Estimator;
use crate::observables::{Observable, ObservableSpec};
use crate::systems::{System, SystemSpec};
use crate::theory::{BilliardAlignment, TheoryOptions, DEFAULT_ALIGNMENT_TOL, DEFAULT_Q_MAX};

const REQUIRED: [&str; 6] = ["system", "observable", "n", "n_realizations", "quantile_level", "seed"];

fn default_burn_in() -> usize {
    1_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    #[serde(default = "default_q_max")]
    pub q_max: u32,
    #[serde(default = "default_alignment_tol")]
    pub alignment_tol: f64,
    #[serde(default = "default_billiard_alignment")]
    pub billiard_alignment: BilliardAlignment,
}

fn default_q_max() -> u32 {
    DEFAULT_Q_MAX
}

fn default_alignment_tol() -> f64 {
    DEFAULT_ALIGNMENT_TOL
}

fn default_billiard_alignment() -> BilliardAlignment {
    BilliardAlignment::Transverse
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            q_max: DEFAULT_Q_MAX,
            alignment_tol: DEFAULT_ALIGNMENT_TOL,
            billiard_alignment: BilliardAlignment::Transverse,
        }
    }
}

impl TheoryConfig {
    pub fn options(&self) -> TheoryOptions {
        TheoryOptions {
            q_max: self.q_max,
            alignment_tol: self.alignment_tol,
            billiard_alignment: self.billiard_alignment,
        }
    }
}

/// One axis of a parameter sweep: `parameter` is a dotted path into the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub system: SystemSpec,
    pub observable: ObservableSpec,
    pub n: usize,
    pub n_realizations: usize,
    pub quantile_level: f64,
    #[serde(default)]
    pub estimator: Estimator,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub theory: TheoryConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

/// Built system and observable for one sweep point.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub system: System,
    pub observable: Observable,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let v: toml::Value = toml::from_str(s)?;
        Self::from_value(serde_json::to_value(v)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(s)?)
    }

    /// JSON for a `.json` extension, TOML otherwise.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    fn from_value(v: Value) -> Result<Self> {
        let Value::Object(map) = &v else {
            return Err(Error::Config("config must be a table".into()));
        };
        let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !map.contains_key(*k)).collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing required fields: {}", missing.join(", "))));
        }
        let cfg: ExperimentConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks scalars, the estimator and that every sweep point compiles.
    pub fn validate(&self) -> Result<()> {
        if self.n < crate::evt::MIN_SERIES_LEN {
            return Err(Error::Config(format!("n must be at least {}", crate::evt::MIN_SERIES_LEN)));
        }
        if self.n_realizations == 0 {
            return Err(Error::Config("n_realizations must be positive".into()));
        }
        if !(self.quantile_level > 0.5 && self.quantile_level < 1.0) {
            return Err(Error::Config(format!("quantile_level must lie in (0.5, 1), got {}", self.quantile_level)));
        }
        if !(self.theory.alignment_tol > 0.0) {
            return Err(Error::Config("alignment_tol must be positive".into()));
        }
        self.estimator.validate()?;
        for axis in &self.sweep {
            if axis.values.is_empty() {
                return Err(Error::Config(format!("sweep over {} has no values", axis.parameter)));
            }
        }
        for (_, point) in self.sweep_points()? {
            point.compile()?;
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<Compiled> {
        let system = self.system.build()?;
        let observable = self.observable.build(&system)?;
        Ok(Compiled { system, observable })
    }

    /// The cartesian product of the sweep axes, first axis slowest, each with a
    /// label such as `gamma=0.1`. Without a sweep this is the config itself
    /// with an empty label.
    pub fn sweep_points(&self) -> Result<Vec<(String, ExperimentConfig)>> {
        let mut base = self.clone();
        base.sweep.clear();
        let mut points = vec![(String::new(), serde_json::to_value(&base)?)];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for (label, v) in &points {
                for val in &axis.values {
                    let mut v = v.clone();
                    set_path(&mut v, &axis.parameter, val.clone())?;
                    let key = axis.parameter.rsplit('.').next().unwrap_or(&axis.parameter);
                    let item = format!("{key}={}", compact(val));
                    let label = if label.is_empty() { item } else { format!("{label};{item}") };
                    next.push((label, v));
                }
            }
            points = next;
        }
        points
            .into_iter()
            .map(|(l, v)| {
                let c: ExperimentConfig = serde_json::from_value(v)
                    .map_err(|e| Error::Config(format!("sweep point {l}: {e}")))?;
                Ok((l, c))
            })
            .collect()
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string().replace(',', " "),
    }
}

fn set_path(root: &mut Value, path: &str, val: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        let Value::Object(map) = cur else {
            return Err(Error::Config(format!("sweep parameter {path}: {p} is not inside a table")));
        };
        if i + 1 == parts.len() {
            map.insert((*p).to_string(), val);
            return Ok(());
        }
        cur = map
            .get_mut(*p)
            .ok_or_else(|| Error::Config(format!("sweep parameter {path}: no field {p}")))?;
    }
    Err(Error::Config("empty sweep parameter".into()))
}
