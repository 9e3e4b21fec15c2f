use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::{invalid_input, invalid_param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorId {
    Baseline,
    Restricted,
    /// Restricted mechanism run on every input; private on `H` only.
    Promise,
    /// Exact extension (`n ≤ 5`).
    Extended,
    Blocks,
}

impl EstimatorId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Restricted => "restricted",
            Self::Promise => "promise",
            Self::Extended => "extended",
            Self::Blocks => "blocks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphModel {
    /// `m = ⌊edge_fraction · C(n,2)⌋` edges.
    Gnm,
    /// `p = edge_fraction`.
    Gnp,
    /// `G_n(ρW)` with `W` the equal-block graphon on `blocks`.
    Sbm,
}

fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match Either::deserialize(de)? {
        Either::One(v) => vec![v],
        Either::Many(v) => v,
    })
}

fn default_rho() -> f64 {
    0.5
}
fn default_c() -> f64 {
    crate::density::DEFAULT_C
}
fn default_fraction() -> f64 {
    0.5
}
fn default_k() -> usize {
    2
}
fn default_lambda() -> f64 {
    2.0
}
fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub estimator: EstimatorId,
    pub model: GraphModel,
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_fraction")]
    pub edge_fraction: f64,
    #[serde(default)]
    pub blocks: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid_param("trials must be at least 1"));
        }
        if self.n.is_empty() || self.epsilon.is_empty() {
            return Err(invalid_param("n and epsilon grids must be nonempty"));
        }
        if self.n.iter().any(|&n| n < 3) {
            return Err(invalid_param("every n must be at least 3"));
        }
        if self.epsilon.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(invalid_param("every epsilon must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.edge_fraction) {
            return Err(invalid_param("edge_fraction must lie in [0,1]"));
        }
        if self.model == GraphModel::Sbm && self.blocks.is_none() {
            return Err(invalid_param("model sbm needs blocks"));
        }
        if self.estimator == EstimatorId::Blocks && self.model != GraphModel::Sbm {
            return Err(invalid_param("the blocks estimator needs model sbm"));
        }
        Ok(())
    }

    /// JSON when the text starts with `{`, otherwise `key = value` lines.
    /// Lists are comma separated; matrix rows are separated by `;`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| invalid_input(format!("config: {e}")))?
        } else {
            serde_json::from_value(key_value_to_json(text)?).map_err(|e| invalid_input(format!("config: {e}")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn scalar_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<u64>() {
        return Value::from(i);
    }
    match s.parse::<f64>() {
        Ok(f) => Value::from(f),
        Err(_) => Value::from(s),
    }
}

fn key_value_to_json(text: &str) -> Result<Value> {
    let mut map = Map::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got {line:?}") })?;
        let value = value.trim();
        let parsed = if value.contains(';') {
            Value::Array(value.split(';').map(|row| Value::Array(row.split(',').map(|x| scalar_value(x.trim())).collect())).collect())
        } else if value.contains(',') {
            Value::Array(value.split(',').map(|x| scalar_value(x.trim())).collect())
        } else {
            scalar_value(value)
        };
        map.insert(key.trim().to_string(), parsed);
    }
    Ok(Value::Object(map))
}
