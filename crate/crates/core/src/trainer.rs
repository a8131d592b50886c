// SPDX-License-Identifier: Apache-2.0

//! Training loop with interval checkpoints, best-model retention and exact
//! resume.
//!
//! Order of events for one global step:
//!
//! 1. At the start of an epoch a fresh epoch seed is drawn from the run's
//!    generator and the epoch permutation is derived from it.
//! 2. The next contiguous slice of the permutation is trained on.
//! 3. If the step closed the epoch: evaluate on the full training set, append
//!    to the metric history, roll the epoch counter, save `Best` when the
//!    policy fires, then save `Latest`.
//! 4. Otherwise save `Latest` when `global_step` is a multiple of the interval.
//!
//! A checkpoint captures the generator *after* the current epoch's draw plus
//! the epoch seed itself, so a resumed run regenerates the same permutation
//! and skips to `step_in_epoch` without any replay.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{Scope, ScopedJoinHandle};
use std::time::{SystemTime, UNIX_EPOCH};

use log::warn;
use rand::seq::SliceRandom;
use thiserror::Error;

use crate::checkpoint::{self, BestRecord, CheckpointSnapshot, CodecError, MetricRecord, FORMAT_VERSION};
use crate::data::TrainingData;
use crate::mlp::{self, EngineError, ModelSpec, ModelState, OptimizerConfig, OptimizerState};
use crate::rng::TrainRng;
use crate::storage::{CheckpointRole, CheckpointStore, StorageError, StoreDescriptor};

pub const DEFAULT_CHECKPOINT_INTERVAL: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Monitor {
    Loss,
    Accuracy,
}

impl FromStr for Monitor {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loss" => Ok(Monitor::Loss),
            "accuracy" => Ok(Monitor::Accuracy),
            other => Err(TrainError::InvalidPlan(format!("unknown monitor `{other}`"))),
        }
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monitor::Loss => "loss",
            Monitor::Accuracy => "accuracy",
        })
    }
}

/// When does the current model replace the stored best?
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestPolicy {
    pub monitored: Monitor,
    pub min_delta: f64,
    pub sustain_epochs: usize,
}

impl Default for BestPolicy {
    fn default() -> Self {
        Self { monitored: Monitor::Loss, min_delta: 0.0, sustain_epochs: 1 }
    }
}

impl BestPolicy {
    pub fn metric(&self, record: &MetricRecord) -> f64 {
        match self.monitored {
            Monitor::Loss => record.loss,
            Monitor::Accuracy => record.accuracy,
        }
    }

    fn improves(&self, value: f64, best: Option<f64>) -> bool {
        match (self.monitored, best) {
            (_, None) => true,
            (Monitor::Loss, Some(b)) => b - value > self.min_delta,
            (Monitor::Accuracy, Some(b)) => value - b > self.min_delta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SyncMode {
    Synchronous,
    AsyncSingleInflight,
}

impl FromStr for SyncMode {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(SyncMode::Synchronous),
            "async" => Ok(SyncMode::AsyncSingleInflight),
            other => Err(TrainError::InvalidPlan(format!("unknown sync mode `{other}`"))),
        }
    }
}

impl fmt::Display for SyncMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyncMode::Synchronous => "sync",
            SyncMode::AsyncSingleInflight => "async",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainPlan {
    pub model_spec: ModelSpec,
    pub optimizer_config: OptimizerConfig,
    pub epochs: u64,
    pub batch_size: usize,
    pub checkpoint_interval_steps: u64,
    pub best_policy: BestPolicy,
    pub shuffle_seed: u64,
    pub deterministic: bool,
    pub sync_mode: SyncMode,
}

impl TrainPlan {
    pub fn validate(&self) -> Result<(), TrainError> {
        self.model_spec.validate()?;
        self.optimizer_config.validate()?;
        if self.epochs == 0 {
            return Err(TrainError::InvalidPlan("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidPlan("batch size must be >= 1".into()));
        }
        if self.checkpoint_interval_steps == 0 {
            return Err(TrainError::InvalidPlan("checkpoint interval must be >= 1".into()));
        }
        if self.best_policy.sustain_epochs == 0 {
            return Err(TrainError::InvalidPlan("sustain epochs must be >= 1".into()));
        }
        if self.best_policy.min_delta.is_nan() || self.best_policy.min_delta < 0.0 {
            return Err(TrainError::InvalidPlan("min_delta must be non-negative".into()));
        }
        if !self.deterministic {
            return Err(TrainError::InvalidPlan("only deterministic training is supported".into()));
        }
        Ok(())
    }

    pub fn steps_per_epoch(&self, sample_count: usize) -> u64 {
        sample_count.div_ceil(self.batch_size) as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs_completed: u64,
    pub global_step: u64,
    pub step_in_epoch: u64,
    pub steps_per_epoch: u64,
    /// Steps executed by this invocation.
    pub steps_run: u64,
    pub final_loss: Option<f64>,
    pub final_accuracy: Option<f64>,
    pub checkpoints_written: u64,
    pub skipped_saves: u64,
    /// `(epoch, global_step)` of the checkpoint this run resumed from.
    pub resumed_from: Option<(u64, u64)>,
    pub already_complete: bool,
    pub best: Option<BestRecord>,
}

impl TrainReport {
    /// `key: value` lines in a fixed order.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        let mut lines = vec![
            format!("epochs_completed: {}", self.epochs_completed),
            format!("global_step: {}", self.global_step),
            format!("steps_per_epoch: {}", self.steps_per_epoch),
            format!("steps_run: {}", self.steps_run),
            format!("final_loss: {}", opt(self.final_loss)),
            format!("final_accuracy: {}", opt(self.final_accuracy)),
            format!("checkpoints_written: {}", self.checkpoints_written),
            format!("skipped_saves: {}", self.skipped_saves),
        ];
        lines.push(match self.resumed_from {
            Some((e, s)) => format!("resumed_from: epoch {e} step {s}"),
            None => "resumed_from: none".into(),
        });
        lines.push(format!("already_complete: {}", self.already_complete));
        lines.push(match self.best {
            Some(b) => format!("best: epoch {} metric {}", b.epoch, b.metric),
            None => "best: none".into(),
        });
        lines.join("\n") + "\n"
    }

    /// Flat `key=value` form for machines.
    pub fn to_key_values(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("already_complete", self.already_complete.to_string());
        kv("best_epoch", self.best.map_or_else(String::new, |b| b.epoch.to_string()));
        kv("best_metric", opt(self.best.map(|b| b.metric)));
        kv("checkpoints_written", self.checkpoints_written.to_string());
        kv("epochs_completed", self.epochs_completed.to_string());
        kv("final_accuracy", opt(self.final_accuracy));
        kv("final_loss", opt(self.final_loss));
        kv("global_step", self.global_step.to_string());
        kv("resumed_from_epoch", self.resumed_from.map_or_else(String::new, |r| r.0.to_string()));
        kv("resumed_from_step", self.resumed_from.map_or_else(String::new, |r| r.1.to_string()));
        kv("skipped_saves", self.skipped_saves.to_string());
        kv("steps_per_epoch", self.steps_per_epoch.to_string());
        kv("steps_run", self.steps_run.to_string());
        out
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training plan: {0}")]
    InvalidPlan(String),
    #[error("dataset incompatible with model: {0}")]
    Data(String),
    #[error("no checkpoint to resume from")]
    NoCheckpoint,
    #[error("checkpoint does not match the plan: {0}")]
    SpecMismatch(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// How a [`Trainer::run`] call ended.
#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Completed(TrainReport),
    /// The simulated kill fired right after this global step's arithmetic,
    /// before any checkpoint it would have triggered.
    Killed { at_step: u64 },
}

/// Result of handing one checkpoint to the uploader.
#[derive(Clone, Debug, PartialEq)]
pub enum SaveOutcome {
    Committed(StoreDescriptor),
    /// Async mode: upload running in the background.
    InFlight,
}

/// Deterministic permutation of `0..m` for one epoch (Fisher–Yates).
pub fn plan_epoch_order(shuffle_seed: u64, epoch_index: u64, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = TrainRng::with_stream(shuffle_seed, epoch_index);
    order.shuffle(rng.inner_mut());
    order
}

/// True iff each of the last `sustain_epochs` evaluations beats
/// `current_best` by more than `min_delta`. An absent best counts as the
/// worst possible value.
pub fn should_save_best(history: &[MetricRecord], policy: &BestPolicy, current_best: Option<f64>) -> bool {
    let s = policy.sustain_epochs.max(1);
    if history.len() < s {
        return false;
    }
    history[history.len() - s..].iter().all(|r| policy.improves(policy.metric(r), current_best))
}

type UploadResult = Result<StoreDescriptor, StorageError>;

enum Slot<'scope, 'env, S: ?Sized + 'env> {
    Idle(&'env mut S),
    Busy(ScopedJoinHandle<'scope, (&'env mut S, UploadResult)>),
    Poisoned,
}

/// Delivers encoded checkpoints to a store, at most one put in flight.
pub struct Uploader<'scope, 'env, S: ?Sized + 'env> {
    scope: &'scope Scope<'scope, 'env>,
    slot: Slot<'scope, 'env, S>,
    mode: SyncMode,
    abandon: Arc<AtomicBool>,
    committed: u64,
    skipped: u64,
}

impl<'scope, 'env, S> Uploader<'scope, 'env, S>
where
    S: CheckpointStore + Send + ?Sized + 'env,
{
    pub fn new(scope: &'scope Scope<'scope, 'env>, store: &'env mut S, mode: SyncMode) -> Self {
        Self {
            scope,
            slot: Slot::Idle(store),
            mode,
            abandon: Arc::new(AtomicBool::new(false)),
            committed: 0,
            skipped: 0,
        }
    }

    pub fn mode(&self) -> SyncMode {
        self.mode
    }

    pub fn committed(&self) -> u64 {
        self.committed
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// Waits for the in-flight put, if any, and returns the store.
    fn wait_idle(&mut self) -> Option<UploadResult> {
        match std::mem::replace(&mut self.slot, Slot::Poisoned) {
            Slot::Idle(store) => {
                self.slot = Slot::Idle(store);
                None
            }
            Slot::Busy(handle) => {
                let (store, result) = handle.join().expect("upload thread panicked");
                self.slot = Slot::Idle(store);
                match &result {
                    Ok(_) => self.committed += 1,
                    Err(e) => {
                        self.skipped += 1;
                        warn!("checkpoint upload failed after retry, continuing: {e}");
                    }
                }
                Some(result)
            }
            Slot::Poisoned => unreachable!("uploader slot left poisoned"),
        }
    }

    /// Sends one checkpoint. Synchronous mode returns the storage error;
    /// async mode retries once in the background and only counts a skip.
    pub fn submit(&mut self, role: CheckpointRole, bytes: Vec<u8>) -> Result<SaveOutcome, StorageError> {
        self.wait_idle();
        let Slot::Idle(store) = std::mem::replace(&mut self.slot, Slot::Poisoned) else {
            unreachable!("uploader idle after wait")
        };
        match self.mode {
            SyncMode::Synchronous => {
                let result = store.put(&role, &bytes);
                self.slot = Slot::Idle(store);
                let descriptor = result?;
                self.committed += 1;
                Ok(SaveOutcome::Committed(descriptor))
            }
            SyncMode::AsyncSingleInflight => {
                let abandon = Arc::clone(&self.abandon);
                let handle = self.scope.spawn(move || {
                    let mut result = store.put(&role, &bytes);
                    if result.is_err() && !abandon.load(Ordering::SeqCst) {
                        result = store.put(&role, &bytes);
                    }
                    (store, result)
                });
                self.slot = Slot::Busy(handle);
                Ok(SaveOutcome::InFlight)
            }
        }
    }

    /// Waits for any in-flight put.
    pub fn flush(&mut self) {
        self.wait_idle();
    }

    /// Emulates process death: the in-flight put gets no retry.
    fn abandon(&mut self) {
        self.abandon.store(true, Ordering::SeqCst);
        self.wait_idle();
        self.abandon.store(false, Ordering::SeqCst);
    }
}

/// Runs `f` with an [`Uploader`] bound to `store`, then drains it.
pub fn with_uploader<S, R>(
    store: &mut S,
    mode: SyncMode,
    f: impl for<'scope, 'env> FnOnce(&mut Uploader<'scope, 'env, S>) -> R,
) -> R
where
    S: CheckpointStore + Send + ?Sized,
{
    std::thread::scope(|scope| {
        let mut up = Uploader::new(scope, store, mode);
        let r = f(&mut up);
        up.flush();
        r
    })
}

/// In-memory training state between steps.
pub struct Trainer<'d> {
    plan: TrainPlan,
    data: &'d TrainingData,
    model: ModelState,
    optimizer: OptimizerState,
    rng: TrainRng,
    epoch: u64,
    step_in_epoch: u64,
    global_step: u64,
    epoch_seed: u64,
    order: Vec<usize>,
    history: Vec<MetricRecord>,
    best: Option<BestRecord>,
    resumed_from: Option<(u64, u64)>,
    checkpoints_written: u64,
    skipped_saves: u64,
}

impl<'d> Trainer<'d> {
    /// Fresh run from a newly initialised model.
    pub fn new(plan: TrainPlan, data: &'d TrainingData) -> Result<Self, TrainError> {
        plan.validate()?;
        check_data(&plan.model_spec, data)?;
        let (model, optimizer) = mlp::init_model(&plan.model_spec)?;
        let rng = TrainRng::seed_from_u64(plan.shuffle_seed);
        Ok(Self {
            plan,
            data,
            model,
            optimizer,
            rng,
            epoch: 0,
            step_in_epoch: 0,
            global_step: 0,
            epoch_seed: 0,
            order: Vec::new(),
            history: Vec::new(),
            best: None,
            resumed_from: None,
            checkpoints_written: 0,
            skipped_saves: 0,
        })
    }

    /// Restores from a decoded checkpoint after checking it against the plan.
    pub fn from_snapshot(plan: TrainPlan, data: &'d TrainingData, s: CheckpointSnapshot) -> Result<Self, TrainError> {
        plan.validate()?;
        check_data(&plan.model_spec, data)?;
        if s.model.spec != plan.model_spec {
            return Err(TrainError::SpecMismatch(format!(
                "checkpoint model {:?} vs plan {:?}",
                s.model.spec.layer_sizes, plan.model_spec.layer_sizes
            )));
        }
        let (a, b) = (&s.optimizer_config, &plan.optimizer_config);
        let same_loss = match (a.loss, b.loss) {
            (crate::LossKind::Huber { delta: x }, crate::LossKind::Huber { delta: y }) => x.to_bits() == y.to_bits(),
            (x, y) => x == y,
        };
        if a.learning_rate.to_bits() != b.learning_rate.to_bits() || a.momentum.to_bits() != b.momentum.to_bits() || !same_loss
        {
            return Err(TrainError::SpecMismatch("optimizer configuration differs".into()));
        }
        if s.batch_size != plan.batch_size as u64 {
            return Err(TrainError::SpecMismatch(format!("batch size {} vs plan {}", s.batch_size, plan.batch_size)));
        }
        if s.shuffle_seed != plan.shuffle_seed {
            return Err(TrainError::SpecMismatch("shuffle seed differs".into()));
        }
        if s.sample_count != data.len() as u64 {
            return Err(TrainError::SpecMismatch(format!(
                "checkpoint trained on {} samples, dataset has {}",
                s.sample_count,
                data.len()
            )));
        }
        let rng = TrainRng::from_state_words(&s.rng_state).map_err(|e| CodecError::Structural(e.to_string()))?;
        Ok(Self {
            plan,
            data,
            model: s.model,
            optimizer: s.optimizer,
            rng,
            epoch: s.epoch,
            step_in_epoch: s.step_in_epoch,
            global_step: s.global_step,
            epoch_seed: s.epoch_shuffle_seed,
            order: Vec::new(),
            history: s.metric_history,
            best: s.best,
            resumed_from: Some((s.epoch, s.global_step)),
            checkpoints_written: 0,
            skipped_saves: 0,
        })
    }

    /// Loads the newest valid `Latest` checkpoint from `store`.
    pub fn resume<S: CheckpointStore + ?Sized>(plan: TrainPlan, data: &'d TrainingData, store: &S) -> Result<Self, TrainError> {
        let retrieved = match store.get(&CheckpointRole::Latest) {
            Ok(r) => r,
            Err(StorageError::NotFound(_)) => return Err(TrainError::NoCheckpoint),
            Err(e) => return Err(e.into()),
        };
        if retrieved.fell_back {
            warn!("newest checkpoint generation is corrupt; resuming from generation {}", retrieved.generation);
        }
        let snapshot = checkpoint::decode_checkpoint(&retrieved.bytes)?;
        Self::from_snapshot(plan, data, snapshot)
    }

    pub fn plan(&self) -> &TrainPlan {
        &self.plan
    }

    pub fn model(&self) -> &ModelState {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut ModelState {
        &mut self.model
    }

    pub fn optimizer(&self) -> &OptimizerState {
        &self.optimizer
    }

    pub fn history(&self) -> &[MetricRecord] {
        &self.history
    }

    pub fn best(&self) -> Option<BestRecord> {
        self.best
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn step_in_epoch(&self) -> u64 {
        self.step_in_epoch
    }

    pub fn steps_per_epoch(&self) -> u64 {
        self.plan.steps_per_epoch(self.data.len())
    }

    pub fn total_steps(&self) -> u64 {
        self.plan.epochs * self.steps_per_epoch()
    }

    pub fn is_complete(&self) -> bool {
        self.epoch >= self.plan.epochs
    }

    pub fn snapshot(&self) -> CheckpointSnapshot {
        CheckpointSnapshot {
            format_version: FORMAT_VERSION,
            epoch: self.epoch,
            global_step: self.global_step,
            step_in_epoch: self.step_in_epoch,
            batch_size: self.plan.batch_size as u64,
            sample_count: self.data.len() as u64,
            model: self.model.clone(),
            optimizer: self.optimizer.clone(),
            optimizer_config: self.plan.optimizer_config,
            rng_state: self.rng.state_words(),
            shuffle_seed: self.plan.shuffle_seed,
            epoch_shuffle_seed: self.epoch_seed,
            metric_history: self.history.clone(),
            best: self.best,
            wall_time_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    /// Encodes the current state and hands it to `up` under `role`.
    ///
    /// The bytes are produced before this returns, so later mutation of the
    /// trainer cannot leak into an async upload.
    pub fn checkpoint_now<S>(&mut self, up: &mut Uploader<'_, '_, S>, role: CheckpointRole) -> Result<SaveOutcome, TrainError>
    where
        S: CheckpointStore + Send + ?Sized,
    {
        let bytes = checkpoint::encode_checkpoint(&self.snapshot());
        let before = up.committed();
        let skipped_before = up.skipped();
        let outcome = up.submit(role, bytes);
        self.checkpoints_written += up.committed() - before;
        self.skipped_saves += up.skipped() - skipped_before;
        Ok(outcome?)
    }

    fn ensure_epoch_order(&mut self) {
        if self.order.is_empty() {
            if self.step_in_epoch == 0 {
                self.epoch_seed = self.rng.next_u64();
            }
            self.order = plan_epoch_order(self.epoch_seed, self.epoch, self.data.len());
        }
    }

    /// One forward/backward/update on the next mini-batch.
    fn train_step(&mut self) -> Result<(), TrainError> {
        self.ensure_epoch_order();
        let bs = self.plan.batch_size;
        let start = self.step_in_epoch as usize * bs;
        let end = (start + bs).min(self.data.len());
        let idx = &self.order[start..end];
        let x = self.data.features.select_rows(idx);
        let t = self.data.targets.select_rows(idx);
        let trace = mlp::forward(&self.model, &x)?;
        let grads = mlp::backward(&self.model, &trace, &t, self.plan.optimizer_config.loss)?;
        mlp::sgd_step(&mut self.model, &grads, &mut self.optimizer, &self.plan.optimizer_config)?;
        self.global_step += 1;
        self.step_in_epoch += 1;
        Ok(())
    }

    fn after_step<S>(&mut self, up: &mut Uploader<'_, '_, S>) -> Result<(), TrainError>
    where
        S: CheckpointStore + Send + ?Sized,
    {
        if self.step_in_epoch == self.steps_per_epoch() {
            let (loss, accuracy) =
                mlp::evaluate(&self.model, &self.data.features, &self.data.targets, self.plan.optimizer_config.loss)?;
            let finished = self.epoch;
            self.history.push(MetricRecord { epoch: finished, loss, accuracy });
            self.epoch += 1;
            self.step_in_epoch = 0;
            self.order.clear();
            let policy = self.plan.best_policy;
            if should_save_best(&self.history, &policy, self.best.map(|b| b.metric)) {
                let metric = policy.metric(self.history.last().expect("just pushed"));
                self.best = Some(BestRecord { epoch: finished, metric });
                self.checkpoint_now(up, CheckpointRole::Best)?;
            }
            self.checkpoint_now(up, CheckpointRole::Latest)?;
        } else if self.global_step.is_multiple_of(self.plan.checkpoint_interval_steps) {
            self.checkpoint_now(up, CheckpointRole::Latest)?;
        }
        Ok(())
    }

    /// Trains to plan completion through an existing uploader.
    pub fn run_with<S>(&mut self, up: &mut Uploader<'_, '_, S>, kill_at: Option<u64>) -> Result<RunOutcome, TrainError>
    where
        S: CheckpointStore + Send + ?Sized,
    {
        let already_complete = self.is_complete();
        let start_step = self.global_step;
        while !self.is_complete() {
            self.train_step()?;
            if kill_at == Some(self.global_step) {
                up.abandon();
                return Ok(RunOutcome::Killed { at_step: self.global_step });
            }
            self.after_step(up)?;
        }
        let before = up.committed();
        let skipped_before = up.skipped();
        up.flush();
        self.checkpoints_written += up.committed() - before;
        self.skipped_saves += up.skipped() - skipped_before;
        Ok(RunOutcome::Completed(self.report(start_step, already_complete)))
    }

    /// Trains to completion, or until the simulated kill at `kill_at`.
    pub fn run<S>(&mut self, store: &mut S, kill_at: Option<u64>) -> Result<RunOutcome, TrainError>
    where
        S: CheckpointStore + Send + ?Sized,
    {
        let mode = self.plan.sync_mode;
        with_uploader(store, mode, |up| self.run_with(up, kill_at))
    }

    fn report(&self, start_step: u64, already_complete: bool) -> TrainReport {
        let last = self.history.last();
        TrainReport {
            epochs_completed: self.epoch,
            global_step: self.global_step,
            step_in_epoch: self.step_in_epoch,
            steps_per_epoch: self.steps_per_epoch(),
            steps_run: self.global_step - start_step,
            final_loss: last.map(|m| m.loss),
            final_accuracy: last.map(|m| m.accuracy),
            checkpoints_written: self.checkpoints_written,
            skipped_saves: self.skipped_saves,
            resumed_from: self.resumed_from,
            already_complete,
            best: self.best,
        }
    }
}

fn check_data(spec: &ModelSpec, data: &TrainingData) -> Result<(), TrainError> {
    if data.is_empty() {
        return Err(TrainError::Data("dataset is empty".into()));
    }
    if data.features.cols() != spec.input_dim() {
        return Err(TrainError::Data(format!(
            "{} feature columns, model expects {}",
            data.features.cols(),
            spec.input_dim()
        )));
    }
    if data.targets.shape() != (data.len(), spec.output_dim()) {
        return Err(TrainError::Data(format!(
            "targets have shape {:?}, model expects {} columns",
            data.targets.shape(),
            spec.output_dim()
        )));
    }
    Ok(())
}

fn expect_completed(outcome: RunOutcome) -> TrainReport {
    match outcome {
        RunOutcome::Completed(r) => r,
        RunOutcome::Killed { .. } => unreachable!("no kill point was set"),
    }
}

/// Fresh run of `plan` to completion.
pub fn train<S>(plan: &TrainPlan, data: &TrainingData, store: &mut S) -> Result<TrainReport, TrainError>
where
    S: CheckpointStore + Send + ?Sized,
{
    let mut trainer = Trainer::new(plan.clone(), data)?;
    trainer.run(store, None).map(expect_completed)
}

/// Resumes `plan` from the store's `Latest` checkpoint and runs to completion.
pub fn resume<S>(plan: &TrainPlan, data: &TrainingData, store: &mut S) -> Result<TrainReport, TrainError>
where
    S: CheckpointStore + Send + ?Sized,
{
    let mut trainer = Trainer::resume(plan.clone(), data, &*store)?;
    trainer.run(store, None).map(expect_completed)
}
