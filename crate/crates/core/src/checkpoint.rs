// SPDX-License-Identifier: Apache-2.0

//! The `.ilck` checkpoint format.
//!
//! ```text
//! magic        4 bytes   "ILCK" (49 4C 43 4B)
//! version      u32 LE    FORMAT_VERSION
//! header_len   u64 LE    byte length of the header text
//! header       UTF-8     `key=value\n` lines sorted by key
//! payload      tensors   [name_len u32][name][ndims u32][dims u64 ...][values f64 ...]
//! trailer      u32 LE    CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! All integers are little-endian. Tensor values are `f64` LE in row-major
//! order, except `rng.state`, whose slots carry the raw `u64` generator words.
//! The header's `payload_bytes` key gives the payload length, which lets a
//! reader tell a truncated stream from a damaged one.
//!
//! Tensors appear in this order: `weight.<l>` for every layer, `bias.<l>`,
//! `velocity.weight.<l>`, `velocity.bias.<l>`, `rng.state`, `metrics`
//! (`n × 3` rows of epoch, loss, accuracy).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::loss::LossKind;
use crate::mlp::{Activation, ModelSpec, ModelState, OptimizerConfig, OptimizerState, OutputActivation};
use crate::rng;
use crate::tensor::Matrix;

pub const MAGIC: [u8; 4] = *b"ILCK";
pub const FORMAT_VERSION: u32 = 1;
pub const FILE_EXTENSION: &str = "ilck";

const PREAMBLE_LEN: usize = 16;
const TRAILER_LEN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricRecord {
    pub epoch: u64,
    pub loss: f64,
    pub accuracy: f64,
}

/// Monitored metric value of the stored best model and the epoch it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestRecord {
    pub epoch: u64,
    pub metric: f64,
}

/// Everything needed to continue a run with zero divergence.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointSnapshot {
    pub format_version: u32,
    /// Number of fully completed epochs.
    pub epoch: u64,
    pub global_step: u64,
    pub step_in_epoch: u64,
    pub batch_size: u64,
    pub sample_count: u64,
    pub model: ModelState,
    pub optimizer: OptimizerState,
    pub optimizer_config: OptimizerConfig,
    pub rng_state: Vec<u64>,
    pub shuffle_seed: u64,
    pub epoch_shuffle_seed: u64,
    pub metric_history: Vec<MetricRecord>,
    pub best: Option<BestRecord>,
    /// Informational only; ignored by [`CheckpointSnapshot::semantic_eq`].
    pub wall_time_unix_seconds: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorruptionVerdict {
    Valid,
    BadMagic,
    BadVersion,
    ChecksumMismatch,
    Truncated,
}

impl CorruptionVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            CorruptionVerdict::Valid => "Valid",
            CorruptionVerdict::BadMagic => "BadMagic",
            CorruptionVerdict::BadVersion => "BadVersion",
            CorruptionVerdict::ChecksumMismatch => "ChecksumMismatch",
            CorruptionVerdict::Truncated => "Truncated",
        }
    }
}

impl fmt::Display for CorruptionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("not a checkpoint: bad magic bytes")]
    BadMagic,
    #[error("unsupported checkpoint format version")]
    BadVersion,
    #[error("checkpoint checksum mismatch")]
    ChecksumMismatch,
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("malformed checkpoint: {0}")]
    Structural(String),
}

fn structural(msg: impl Into<String>) -> CodecError {
    CodecError::Structural(msg.into())
}

trait BitEq {
    fn bit_eq(&self, other: &Self) -> bool;
}

impl BitEq for f64 {
    fn bit_eq(&self, other: &Self) -> bool {
        self.to_bits() == other.to_bits()
    }
}

impl BitEq for [f64] {
    fn bit_eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.bit_eq(b))
    }
}

impl BitEq for Matrix {
    fn bit_eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.as_slice().bit_eq(other.as_slice())
    }
}

impl<T: BitEq> BitEq for Vec<T> {
    fn bit_eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.bit_eq(b))
    }
}

impl BitEq for LossKind {
    fn bit_eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LossKind::Huber { delta: a }, LossKind::Huber { delta: b }) => a.bit_eq(b),
            (a, b) => a == b,
        }
    }
}

impl CheckpointSnapshot {
    /// Bitwise equality of every field except the wall-clock time.
    pub fn semantic_eq(&self, other: &Self) -> bool {
        let history_eq = self.metric_history.len() == other.metric_history.len()
            && self
                .metric_history
                .iter()
                .zip(&other.metric_history)
                .all(|(a, b)| a.epoch == b.epoch && a.loss.bit_eq(&b.loss) && a.accuracy.bit_eq(&b.accuracy));
        let best_eq = match (&self.best, &other.best) {
            (None, None) => true,
            (Some(a), Some(b)) => a.epoch == b.epoch && a.metric.bit_eq(&b.metric),
            _ => false,
        };
        let cfg_a = &self.optimizer_config;
        let cfg_b = &other.optimizer_config;
        self.format_version == other.format_version
            && self.epoch == other.epoch
            && self.global_step == other.global_step
            && self.step_in_epoch == other.step_in_epoch
            && self.batch_size == other.batch_size
            && self.sample_count == other.sample_count
            && self.model.spec == other.model.spec
            && self.model.weights.bit_eq(&other.model.weights)
            && self.model.biases.bit_eq(&other.model.biases)
            && self.optimizer.weight_velocity.bit_eq(&other.optimizer.weight_velocity)
            && self.optimizer.bias_velocity.bit_eq(&other.optimizer.bias_velocity)
            && self.optimizer.step_count == other.optimizer.step_count
            && cfg_a.learning_rate.bit_eq(&cfg_b.learning_rate)
            && cfg_a.momentum.bit_eq(&cfg_b.momentum)
            && cfg_a.loss.bit_eq(&cfg_b.loss)
            && self.rng_state == other.rng_state
            && self.shuffle_seed == other.shuffle_seed
            && self.epoch_shuffle_seed == other.epoch_shuffle_seed
            && history_eq
            && best_eq
    }

    /// Structural invariants a decoded snapshot must satisfy.
    pub fn validate(&self) -> Result<(), CodecError> {
        self.model.spec.validate().map_err(|e| structural(e.to_string()))?;
        self.optimizer_config.validate().map_err(|e| structural(e.to_string()))?;
        let sizes = &self.model.spec.layer_sizes;
        let layers = sizes.len() - 1;
        if self.model.weights.len() != layers
            || self.model.biases.len() != layers
            || self.optimizer.weight_velocity.len() != layers
            || self.optimizer.bias_velocity.len() != layers
        {
            return Err(structural("layer count disagrees with layer_sizes"));
        }
        for l in 0..layers {
            let shape = (sizes[l + 1], sizes[l]);
            if self.model.weights[l].shape() != shape
                || self.optimizer.weight_velocity[l].shape() != shape
                || self.model.biases[l].len() != shape.0
                || self.optimizer.bias_velocity[l].len() != shape.0
            {
                return Err(structural(format!("layer {l} tensors do not match {shape:?}")));
            }
        }
        if self.rng_state.len() != rng::STATE_WORDS {
            return Err(structural("rng state has wrong length"));
        }
        if self.sample_count == 0 || self.batch_size == 0 {
            return Err(structural("sample_count and batch_size must be positive"));
        }
        if self.step_in_epoch >= self.sample_count {
            return Err(structural("step_in_epoch must be below the dataset size"));
        }
        if self.metric_history.windows(2).any(|w| w[0].epoch >= w[1].epoch) {
            return Err(structural("metric history epochs must be strictly increasing"));
        }
        Ok(())
    }
}

fn header_map(s: &CheckpointSnapshot, payload_bytes: usize) -> BTreeMap<&'static str, String> {
    let spec = &s.model.spec;
    let join = |items: Vec<String>| items.join(",");
    let mut h = BTreeMap::new();
    h.insert("activations", join(spec.activations.iter().map(|a| a.name().to_string()).collect()));
    h.insert("batch_size", s.batch_size.to_string());
    if let Some(best) = &s.best {
        h.insert("best_epoch", best.epoch.to_string());
        h.insert("best_metric", best.metric.to_string());
    }
    h.insert("epoch", s.epoch.to_string());
    h.insert("epoch_shuffle_seed", s.epoch_shuffle_seed.to_string());
    h.insert("global_step", s.global_step.to_string());
    if let LossKind::Huber { delta } = s.optimizer_config.loss {
        h.insert("huber_delta", delta.to_string());
    }
    h.insert("init_seed", spec.init_seed.to_string());
    h.insert("layer_sizes", join(spec.layer_sizes.iter().map(usize::to_string).collect()));
    h.insert("learning_rate", s.optimizer_config.learning_rate.to_string());
    h.insert("loss", s.optimizer_config.loss.name().to_string());
    h.insert("momentum", s.optimizer_config.momentum.to_string());
    h.insert("optimizer_step_count", s.optimizer.step_count.to_string());
    h.insert("output_activation", spec.output_activation.name().to_string());
    h.insert("payload_bytes", payload_bytes.to_string());
    h.insert("sample_count", s.sample_count.to_string());
    h.insert("shuffle_seed", s.shuffle_seed.to_string());
    h.insert("step_in_epoch", s.step_in_epoch.to_string());
    h.insert("wall_time_unix_seconds", s.wall_time_unix_seconds.to_string());
    h
}

fn put_tensor_header(out: &mut Vec<u8>, name: &str, dims: &[usize]) {
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
}

fn put_f64_tensor(out: &mut Vec<u8>, name: &str, dims: &[usize], values: &[f64]) {
    put_tensor_header(out, name, dims);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn encode_payload(s: &CheckpointSnapshot) -> Vec<u8> {
    let mut p = Vec::new();
    for (l, w) in s.model.weights.iter().enumerate() {
        put_f64_tensor(&mut p, &format!("weight.{l}"), &[w.rows(), w.cols()], w.as_slice());
    }
    for (l, b) in s.model.biases.iter().enumerate() {
        put_f64_tensor(&mut p, &format!("bias.{l}"), &[b.len()], b);
    }
    for (l, v) in s.optimizer.weight_velocity.iter().enumerate() {
        put_f64_tensor(&mut p, &format!("velocity.weight.{l}"), &[v.rows(), v.cols()], v.as_slice());
    }
    for (l, v) in s.optimizer.bias_velocity.iter().enumerate() {
        put_f64_tensor(&mut p, &format!("velocity.bias.{l}"), &[v.len()], v);
    }
    put_tensor_header(&mut p, "rng.state", &[s.rng_state.len()]);
    for w in &s.rng_state {
        p.extend_from_slice(&w.to_le_bytes());
    }
    let metrics: Vec<f64> =
        s.metric_history.iter().flat_map(|m| [m.epoch as f64, m.loss, m.accuracy]).collect();
    put_f64_tensor(&mut p, "metrics", &[s.metric_history.len(), 3], &metrics);
    p
}

/// Serialises a snapshot. The output is a pure function of the snapshot.
pub fn encode_checkpoint(s: &CheckpointSnapshot) -> Vec<u8> {
    let payload = encode_payload(s);
    let mut header = String::new();
    for (k, v) in header_map(s, payload.len()) {
        header.push_str(k);
        header.push('=');
        header.push_str(&v);
        header.push('\n');
    }
    let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + payload.len() + TRAILER_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&s.format_version.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&payload);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn parse_header(text: &[u8]) -> Result<BTreeMap<String, String>, CodecError> {
    let text = std::str::from_utf8(text).map_err(|_| structural("header is not UTF-8"))?;
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let (k, v) = line.split_once('=').ok_or_else(|| structural(format!("header line without `=`: {line}")))?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(structural(format!("duplicate header key `{k}`")));
        }
    }
    Ok(map)
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn read_u64(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Classifies a byte stream without decoding the payload.
pub fn verify_checksum(bytes: &[u8]) -> CorruptionVerdict {
    if bytes.len() < MAGIC.len() {
        return CorruptionVerdict::Truncated;
    }
    if bytes[..4] != MAGIC {
        return CorruptionVerdict::BadMagic;
    }
    if bytes.len() < 8 {
        return CorruptionVerdict::Truncated;
    }
    if read_u32(bytes, 4) != FORMAT_VERSION {
        return CorruptionVerdict::BadVersion;
    }
    if bytes.len() < PREAMBLE_LEN {
        return CorruptionVerdict::Truncated;
    }
    let header_len = read_u64(bytes, 8);
    let available = (bytes.len() - PREAMBLE_LEN) as u64;
    if header_len > available.saturating_sub(TRAILER_LEN as u64) {
        return CorruptionVerdict::Truncated;
    }
    let header_end = PREAMBLE_LEN + header_len as usize;
    let payload_len = parse_header(&bytes[PREAMBLE_LEN..header_end])
        .ok()
        .and_then(|h| h.get("payload_bytes").and_then(|v| v.parse::<u64>().ok()));
    let Some(payload_len) = payload_len else {
        return CorruptionVerdict::ChecksumMismatch;
    };
    let expected = (header_end as u64).checked_add(payload_len).and_then(|v| v.checked_add(TRAILER_LEN as u64));
    match expected {
        Some(e) if e > bytes.len() as u64 => return CorruptionVerdict::Truncated,
        Some(e) if e == bytes.len() as u64 => {}
        Some(_) => return CorruptionVerdict::ChecksumMismatch,
        None => return CorruptionVerdict::Truncated,
    }
    let body = bytes.len() - TRAILER_LEN;
    if crc32fast::hash(&bytes[..body]) != read_u32(bytes, body) {
        return CorruptionVerdict::ChecksumMismatch;
    }
    CorruptionVerdict::Valid
}

struct HeaderView(BTreeMap<String, String>);

impl HeaderView {
    fn raw(&self, key: &str) -> Result<&str, CodecError> {
        self.0.get(key).map(String::as_str).ok_or_else(|| structural(format!("missing header key `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CodecError> {
        self.raw(key)?.parse().map_err(|_| structural(format!("bad value for `{key}`")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CodecError> {
        let raw = self.raw(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',').map(|v| v.parse().map_err(|_| structural(format!("bad list entry in `{key}`")))).collect()
    }
}

struct PayloadReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| structural("tensor runs past end of payload"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// Reads one tensor, checking its name and shape. Returns raw 8-byte words.
    fn tensor(&mut self, name: &str, dims: &[usize]) -> Result<Vec<[u8; 8]>, CodecError> {
        let name_len = self.u32()? as usize;
        let found = self.take(name_len)?;
        if found != name.as_bytes() {
            return Err(structural(format!("expected tensor `{name}`, found `{}`", String::from_utf8_lossy(found))));
        }
        let ndims = self.u32()? as usize;
        if ndims != dims.len() {
            return Err(structural(format!("tensor `{name}` has {ndims} dims, expected {}", dims.len())));
        }
        for &d in dims {
            if self.u64()? != d as u64 {
                return Err(structural(format!("tensor `{name}` has unexpected shape")));
            }
        }
        let count: usize = dims.iter().product();
        let raw = self.take(count.checked_mul(8).ok_or_else(|| structural("tensor too large"))?)?;
        Ok(raw.chunks_exact(8).map(|c| c.try_into().expect("8 bytes")).collect())
    }

    fn f64_tensor(&mut self, name: &str, dims: &[usize]) -> Result<Vec<f64>, CodecError> {
        Ok(self.tensor(name, dims)?.into_iter().map(f64::from_le_bytes).collect())
    }

    /// Reads the metric history, whose row count is not known in advance.
    fn metrics(&mut self) -> Result<Vec<f64>, CodecError> {
        let save = self.pos;
        let name_len = self.u32()? as usize;
        self.take(name_len)?;
        if self.u32()? != 2 {
            return Err(structural("metrics tensor must be 2-d"));
        }
        let rows = self.u64()?;
        self.pos = save;
        let rows = usize::try_from(rows).map_err(|_| structural("metrics row count overflows"))?;
        if rows > self.bytes.len() / 24 {
            return Err(structural("metrics tensor runs past end of payload"));
        }
        self.f64_tensor("metrics", &[rows, 3])
    }
}

/// Decodes a stream, refusing anything that does not verify.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<CheckpointSnapshot, CodecError> {
    match verify_checksum(bytes) {
        CorruptionVerdict::Valid => {}
        CorruptionVerdict::BadMagic => return Err(CodecError::BadMagic),
        CorruptionVerdict::BadVersion => return Err(CodecError::BadVersion),
        CorruptionVerdict::ChecksumMismatch => return Err(CodecError::ChecksumMismatch),
        CorruptionVerdict::Truncated => return Err(CodecError::Truncated),
    }
    let header_len = read_u64(bytes, 8) as usize;
    let header_end = PREAMBLE_LEN + header_len;
    let h = HeaderView(parse_header(&bytes[PREAMBLE_LEN..header_end])?);

    let layer_sizes: Vec<usize> = h.list("layer_sizes")?;
    let activations: Vec<Activation> = h.list("activations")?;
    let spec = ModelSpec {
        layer_sizes: layer_sizes.clone(),
        activations,
        output_activation: h.parse::<OutputActivation>("output_activation")?,
        init_seed: h.parse("init_seed")?,
    };
    spec.validate().map_err(|e| structural(e.to_string()))?;

    let loss_name = h.raw("loss")?;
    let loss = if loss_name == "huber" {
        LossKind::huber(h.parse("huber_delta")?).map_err(|e| structural(e.to_string()))?
    } else {
        loss_name.parse().map_err(|_| structural(format!("unknown loss `{loss_name}`")))?
    };
    let optimizer_config = OptimizerConfig {
        learning_rate: h.parse("learning_rate")?,
        momentum: h.parse("momentum")?,
        loss,
    };

    let best = match (h.0.get("best_epoch"), h.0.get("best_metric")) {
        (None, None) => None,
        (Some(_), Some(_)) => Some(BestRecord { epoch: h.parse("best_epoch")?, metric: h.parse("best_metric")? }),
        _ => return Err(structural("best_epoch and best_metric must appear together")),
    };

    let payload = &bytes[header_end..bytes.len() - TRAILER_LEN];
    let mut r = PayloadReader { bytes: payload, pos: 0 };
    let layers = layer_sizes.len() - 1;
    let mut weights = Vec::with_capacity(layers);
    let mut biases = Vec::with_capacity(layers);
    let mut weight_velocity = Vec::with_capacity(layers);
    let mut bias_velocity = Vec::with_capacity(layers);
    for l in 0..layers {
        let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
        weights.push(Matrix::from_vec(rows, cols, r.f64_tensor(&format!("weight.{l}"), &[rows, cols])?));
    }
    for l in 0..layers {
        biases.push(r.f64_tensor(&format!("bias.{l}"), &[layer_sizes[l + 1]])?);
    }
    for l in 0..layers {
        let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
        weight_velocity
            .push(Matrix::from_vec(rows, cols, r.f64_tensor(&format!("velocity.weight.{l}"), &[rows, cols])?));
    }
    for l in 0..layers {
        bias_velocity.push(r.f64_tensor(&format!("velocity.bias.{l}"), &[layer_sizes[l + 1]])?);
    }
    let rng_state: Vec<u64> =
        r.tensor("rng.state", &[rng::STATE_WORDS])?.into_iter().map(u64::from_le_bytes).collect();
    let metrics = r.metrics()?;
    if r.pos != payload.len() {
        return Err(structural("trailing bytes after last tensor"));
    }
    let mut metric_history = Vec::with_capacity(metrics.len() / 3);
    for row in metrics.chunks_exact(3) {
        let epoch = row[0];
        if !(epoch >= 0.0 && epoch.fract() == 0.0 && epoch < 9.007_199_254_740_992e15) {
            return Err(structural("metric epoch is not a non-negative integer"));
        }
        metric_history.push(MetricRecord { epoch: epoch as u64, loss: row[1], accuracy: row[2] });
    }

    let snapshot = CheckpointSnapshot {
        format_version: FORMAT_VERSION,
        epoch: h.parse("epoch")?,
        global_step: h.parse("global_step")?,
        step_in_epoch: h.parse("step_in_epoch")?,
        batch_size: h.parse("batch_size")?,
        sample_count: h.parse("sample_count")?,
        model: ModelState { spec, weights, biases },
        optimizer: OptimizerState { weight_velocity, bias_velocity, step_count: h.parse("optimizer_step_count")? },
        optimizer_config,
        rng_state,
        shuffle_seed: h.parse("shuffle_seed")?,
        epoch_shuffle_seed: h.parse("epoch_shuffle_seed")?,
        metric_history,
        best,
        wall_time_unix_seconds: h.parse("wall_time_unix_seconds")?,
    };
    snapshot.validate()?;
    Ok(snapshot)
}

/// Header fields as `(key, value)` pairs, for display.
pub fn header_fields(bytes: &[u8]) -> Result<Vec<(String, String)>, CodecError> {
    let s = decode_checkpoint(bytes)?;
    let payload_len = encode_payload(&s).len();
    Ok(header_map(&s, payload_len).into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mlp::init_model;
    use crate::rng::TrainRng;

    pub(crate) fn minimal_snapshot() -> CheckpointSnapshot {
        let spec = ModelSpec {
            layer_sizes: vec![1, 1],
            activations: vec![],
            output_activation: OutputActivation::Identity,
            init_seed: 1,
        };
        let (model, optimizer) = init_model(&spec).unwrap();
        CheckpointSnapshot {
            format_version: FORMAT_VERSION,
            epoch: 0,
            global_step: 0,
            step_in_epoch: 0,
            batch_size: 1,
            sample_count: 1,
            model,
            optimizer,
            optimizer_config: OptimizerConfig { learning_rate: 0.1, momentum: 0.0, loss: LossKind::L2 },
            rng_state: TrainRng::seed_from_u64(0).state_words(),
            shuffle_seed: 0,
            epoch_shuffle_seed: 0,
            metric_history: vec![],
            best: None,
            wall_time_unix_seconds: 1_700_000_000,
        }
    }

    #[test]
    fn magic_and_determinism() {
        let s = minimal_snapshot();
        let a = encode_checkpoint(&s);
        assert_eq!(&a[..4], &[0x49, 0x4C, 0x43, 0x4B]);
        assert_eq!(a, encode_checkpoint(&s));
        assert_eq!(verify_checksum(&a), CorruptionVerdict::Valid);
    }

    #[test]
    fn minimal_round_trip() {
        let s = minimal_snapshot();
        let d = decode_checkpoint(&encode_checkpoint(&s)).unwrap();
        assert!(d.semantic_eq(&s));
        assert_eq!(d.wall_time_unix_seconds, s.wall_time_unix_seconds);
    }

    #[test]
    fn wall_time_excluded_from_semantic_eq() {
        let s = minimal_snapshot();
        let mut t = s.clone();
        t.wall_time_unix_seconds += 5;
        assert!(s.semantic_eq(&t));
    }

    #[test]
    fn verdicts_for_damaged_streams() {
        let bytes = encode_checkpoint(&minimal_snapshot());
        assert_eq!(verify_checksum(&[]), CorruptionVerdict::Truncated);
        assert_eq!(decode_checkpoint(&[]), Err(CodecError::Truncated));
        assert_eq!(verify_checksum(&bytes[..bytes.len() / 2]), CorruptionVerdict::Truncated);

        let mut zeroed = bytes.clone();
        let n = zeroed.len();
        zeroed[n - 4..].fill(0);
        assert_eq!(verify_checksum(&zeroed), CorruptionVerdict::ChecksumMismatch);

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert_eq!(decode_checkpoint(&magic), Err(CodecError::BadMagic));

        let mut version = bytes.clone();
        version[4] = 9;
        assert_eq!(decode_checkpoint(&version), Err(CodecError::BadVersion));

        let mut extended = bytes.clone();
        extended.push(0);
        assert_eq!(verify_checksum(&extended), CorruptionVerdict::ChecksumMismatch);
    }

    #[test]
    fn structurally_bad_but_checksummed_is_structural_error() {
        let mut s = minimal_snapshot();
        s.step_in_epoch = 5;
        let bytes = encode_checkpoint(&s);
        assert_eq!(verify_checksum(&bytes), CorruptionVerdict::Valid);
        assert!(matches!(decode_checkpoint(&bytes), Err(CodecError::Structural(_))));
    }

    #[test]
    fn header_is_sorted_and_inspectable() {
        let mut s = minimal_snapshot();
        s.best = Some(BestRecord { epoch: 2, metric: 0.25 });
        s.optimizer_config.loss = LossKind::Huber { delta: 0.5 };
        let bytes = encode_checkpoint(&s);
        let fields = header_fields(&bytes).unwrap();
        let keys: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert!(fields.contains(&("best_metric".into(), "0.25".into())));
        assert!(fields.contains(&("huber_delta".into(), "0.5".into())));
        assert!(decode_checkpoint(&bytes).unwrap().semantic_eq(&s));
    }
}
