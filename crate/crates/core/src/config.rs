// SPDX-License-Identifier: Apache-2.0

//! Run configuration files.
//!
//! Flat `key = value` lines grouped under `[model]`, `[optimizer]`,
//! `[checkpoint]`, `[best]` and `[backend]`. Keys before the first section
//! are top-level. `#` starts a comment line. Example:
//!
//! ```text
//! data = gaussians.csv
//!
//! [model]
//! layer_sizes = 2,16,8,2
//! activations = tanh,tanh
//! output = softmax
//! init_seed = 1
//!
//! [optimizer]
//! learning_rate = 0.05
//! momentum = 0.9
//! loss = cross_entropy
//! epochs = 10
//! batch_size = 16
//! shuffle_seed = 7
//!
//! [checkpoint]
//! interval = 7
//! sync = sync
//!
//! [best]
//! monitor = loss
//! min_delta = 0
//! sustain = 1
//!
//! [backend]
//! store = runs/ckpt
//! ```
//!
//! A mock-remote scenario file uses the same syntax with a `[faults]`
//! section mapping zero-based put indices to faults (`fail_before_write`,
//! `truncate:<fraction>`, `disconnect_after_write`, `delay_ms:<n>`), plus
//! optional top-level `recover = true` and `max_crashes = <n>`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::loss::{LossKind, DEFAULT_HUBER_DELTA};
use crate::mlp::{Activation, ModelSpec, OptimizerConfig, OutputActivation};
use crate::storage::{Fault, FaultPlan};
use crate::trainer::{BestPolicy, Monitor, SyncMode, TrainPlan, DEFAULT_CHECKPOINT_INTERVAL};

pub const STORE_ENV_VAR: &str = "RESUME_FORGE_STORE";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("missing setting `{0}`")]
    Missing(&'static str),
    #[error("path does not exist: {0}")]
    MissingPath(PathBuf),
}

const RUN_KEYS: &[(&str, &[&str])] = &[
    ("", &["data", "classes", "report"]),
    ("model", &["layer_sizes", "activations", "output", "init_seed"]),
    ("optimizer", &["learning_rate", "momentum", "loss", "huber_delta", "epochs", "batch_size", "shuffle_seed"]),
    ("checkpoint", &["interval", "sync"]),
    ("best", &["monitor", "min_delta", "sustain"]),
    ("backend", &["store"]),
];

/// Parsed `section.key -> value` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| ConfigError::Invalid { key: key.to_string(), message: e.to_string() }))
            .transpose()
    }
}

/// Parses `text`. When `allowed` is given, unknown sections and keys are
/// errors; otherwise any section is accepted.
pub fn parse_key_values(text: &str, allowed: Option<&[(&str, &[&str])]>) -> Result<KeyValues, ConfigError> {
    let mut section = String::new();
    let mut out = KeyValues::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if let Some(allowed) = allowed {
                if !allowed.iter().any(|(s, _)| *s == name) || name.is_empty() {
                    return Err(ConfigError::Syntax { line: line_no, message: format!("unknown section [{name}]") });
                }
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: line_no, message: format!("expected `key = value`, found `{line}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: line_no, message: "empty key".into() });
        }
        if let Some(allowed) = allowed {
            let known = allowed.iter().any(|(s, keys)| *s == section && keys.contains(&key));
            if !known {
                return Err(ConfigError::Syntax { line: line_no, message: format!("unknown key `{key}` in [{section}]") });
            }
        }
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        if out.entries.insert(full.clone(), value.to_string()).is_some() {
            return Err(ConfigError::Syntax { line: line_no, message: format!("`{full}` set twice") });
        }
    }
    Ok(out)
}

pub fn parse_run_config(text: &str) -> Result<KeyValues, ConfigError> {
    parse_key_values(text, Some(RUN_KEYS))
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| ConfigError::Invalid { key: key.to_string(), message: e.to_string() }))
        .collect()
}

/// Values given on the command line; each one wins over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub store: Option<String>,
    pub interval: Option<u64>,
    pub epochs: Option<u64>,
    pub batch: Option<usize>,
    /// Sets both the init and the shuffle seed.
    pub seed: Option<u64>,
    pub monitor: Option<Monitor>,
    pub min_delta: Option<f64>,
    pub sustain: Option<usize>,
    pub sync: Option<SyncMode>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    Local(PathBuf),
    MockRemote(Scenario),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scenario {
    pub faults: FaultPlan,
    /// Reconnect and resume after each storage failure instead of exiting.
    pub recover: bool,
    pub max_crashes: usize,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let kv = parse_key_values(text, None)?;
    let mut faults = Vec::new();
    let mut scenario = Scenario { max_crashes: 100, ..Scenario::default() };
    for (key, value) in kv.iter() {
        if let Some(index) = key.strip_prefix("faults.") {
            let index: u64 = index
                .parse()
                .map_err(|_| ConfigError::Invalid { key: key.to_string(), message: "put index must be an integer".into() })?;
            let fault: Fault =
                value.parse().map_err(|e: crate::storage::StorageError| ConfigError::Invalid { key: key.to_string(), message: e.to_string() })?;
            faults.push((index, fault));
        } else if key == "recover" {
            scenario.recover = kv.parsed("recover")?.unwrap_or(false);
        } else if key == "max_crashes" {
            scenario.max_crashes = kv.parsed("max_crashes")?.unwrap_or(100);
        } else {
            return Err(ConfigError::Invalid { key: key.to_string(), message: "unknown scenario setting".into() });
        }
    }
    scenario.faults =
        FaultPlan::new(faults).map_err(|e| ConfigError::Invalid { key: "faults".into(), message: e.to_string() })?;
    Ok(scenario)
}

/// Resolves a `--store` value: an existing regular file is a mock-remote
/// scenario, anything else a local store directory.
pub fn resolve_backend(store: &str) -> Result<Backend, ConfigError> {
    let path = PathBuf::from(store);
    if path.is_file() {
        Ok(Backend::MockRemote(parse_scenario(&read(&path)?)?))
    } else {
        Ok(Backend::Local(path))
    }
}

/// Everything a `train` or `resume` invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    pub classes: Option<usize>,
    pub backend: Backend,
    pub report: Option<PathBuf>,
    layer_sizes: Option<Vec<usize>>,
    activations: Option<Vec<Activation>>,
    output_activation: OutputActivation,
    init_seed: u64,
    optimizer: OptimizerConfig,
    epochs: u64,
    batch_size: usize,
    shuffle_seed: u64,
    interval: u64,
    sync_mode: SyncMode,
    best_policy: BestPolicy,
}

impl RunConfig {
    /// Merges file settings, overrides and the store environment variable.
    pub fn resolve(file: &KeyValues, overrides: &Overrides, env_store: Option<&str>) -> Result<Self, ConfigError> {
        let data = overrides
            .data
            .clone()
            .or_else(|| file.get("data").map(PathBuf::from))
            .ok_or(ConfigError::Missing("data"))?;
        if !data.is_file() {
            return Err(ConfigError::MissingPath(data));
        }
        let store = overrides
            .store
            .clone()
            .or_else(|| file.get("backend.store").map(str::to_string))
            .or_else(|| env_store.map(str::to_string))
            .ok_or(ConfigError::Missing("backend.store"))?;
        let backend = resolve_backend(&store)?;

        let layer_sizes = file.get("model.layer_sizes").map(|v| parse_list("model.layer_sizes", v)).transpose()?;
        let activations = file.get("model.activations").map(|v| parse_list("model.activations", v)).transpose()?;
        let output_activation = file.parsed("model.output")?.unwrap_or(OutputActivation::Softmax);

        let loss_name = file.get("optimizer.loss").unwrap_or("cross_entropy");
        let delta = file.parsed("optimizer.huber_delta")?.unwrap_or(DEFAULT_HUBER_DELTA);
        let loss = LossKind::parse_with_delta(loss_name, delta)
            .map_err(|e| ConfigError::Invalid { key: "optimizer.loss".into(), message: e.to_string() })?;
        let optimizer = OptimizerConfig::new(
            file.parsed("optimizer.learning_rate")?.unwrap_or(0.05),
            file.parsed("optimizer.momentum")?.unwrap_or(0.9),
            loss,
        )
        .map_err(|e| ConfigError::Invalid { key: "optimizer".into(), message: e.to_string() })?;

        let best_policy = BestPolicy {
            monitored: match overrides.monitor {
                Some(m) => m,
                None => file.parsed("best.monitor")?.unwrap_or(Monitor::Loss),
            },
            min_delta: match overrides.min_delta {
                Some(d) => d,
                None => file.parsed("best.min_delta")?.unwrap_or(0.0),
            },
            sustain_epochs: match overrides.sustain {
                Some(s) => s,
                None => file.parsed("best.sustain")?.unwrap_or(1),
            },
        };
        let seed_or = |key: &str| -> Result<u64, ConfigError> {
            match overrides.seed {
                Some(s) => Ok(s),
                None => Ok(file.parsed(key)?.unwrap_or(0)),
            }
        };
        Ok(Self {
            data,
            classes: file.parsed("classes")?,
            backend,
            report: overrides.report.clone().or_else(|| file.get("report").map(PathBuf::from)),
            layer_sizes,
            activations,
            output_activation,
            init_seed: seed_or("model.init_seed")?,
            optimizer,
            epochs: match overrides.epochs {
                Some(e) => e,
                None => file.parsed("optimizer.epochs")?.unwrap_or(10),
            },
            batch_size: match overrides.batch {
                Some(b) => b,
                None => file.parsed("optimizer.batch_size")?.unwrap_or(16),
            },
            shuffle_seed: seed_or("optimizer.shuffle_seed")?,
            interval: match overrides.interval {
                Some(i) => i,
                None => file.parsed("checkpoint.interval")?.unwrap_or(DEFAULT_CHECKPOINT_INTERVAL),
            },
            sync_mode: match overrides.sync {
                Some(s) => s,
                None => file.parsed("checkpoint.sync")?.unwrap_or(SyncMode::Synchronous),
            },
            best_policy,
        })
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides, env_store: Option<&str>) -> Result<Self, ConfigError> {
        let file = match path {
            Some(p) => parse_run_config(&read(p)?)?,
            None => KeyValues::default(),
        };
        Self::resolve(&file, overrides, env_store)
    }

    /// The training plan for a dataset with `input_dim` features and
    /// `classes` classes. Without explicit layer sizes the network is
    /// `input_dim-16-8-classes` with tanh hidden layers.
    pub fn plan(&self, input_dim: usize, classes: usize) -> TrainPlan {
        let layer_sizes = self.layer_sizes.clone().unwrap_or_else(|| vec![input_dim, 16, 8, classes]);
        let hidden = layer_sizes.len().saturating_sub(2);
        let activations = self.activations.clone().unwrap_or_else(|| vec![Activation::Tanh; hidden]);
        TrainPlan {
            model_spec: ModelSpec {
                layer_sizes,
                activations,
                output_activation: self.output_activation,
                init_seed: self.init_seed,
            },
            optimizer_config: self.optimizer,
            epochs: self.epochs,
            batch_size: self.batch_size,
            checkpoint_interval_steps: self.interval,
            best_policy: self.best_policy,
            shuffle_seed: self.shuffle_seed,
            deterministic: true,
            sync_mode: self.sync_mode,
        }
    }
}
