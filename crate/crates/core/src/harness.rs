// SPDX-License-Identifier: Apache-2.0

//! Crash-injection drivers.
//!
//! [`crash_injected_run`] kills a run at chosen global steps, throws away all
//! in-memory state, resumes from the store and finally compares the result
//! bit for bit with an uninterrupted reference run.
//! [`run_with_recovery`] treats every storage failure as a crash instead.
//!
//! When the store holds no usable `Latest` checkpoint (nothing saved yet, or
//! only a partial first upload) both drivers restart from scratch.

use std::fmt;

use crate::checkpoint::{self, CheckpointSnapshot};
use crate::data::TrainingData;
use crate::storage::{CheckpointRole, CheckpointStore, MockRemoteStore, StorageError};
use crate::tensor::Matrix;
use crate::trainer::{RunOutcome, TrainError, TrainPlan, Trainer};

/// Global steps at which the process is killed, strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KillPlan {
    points: Vec<u64>,
}

impl KillPlan {
    pub fn new(points: Vec<u64>) -> Result<Self, TrainError> {
        if points.first() == Some(&0) {
            return Err(TrainError::InvalidPlan("kill points start at step 1".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TrainError::InvalidPlan(format!("kill points {points:?} are not strictly increasing")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrashRecord {
    /// Global step at which the process died.
    pub crash_step: u64,
    /// Step restored on resume (0 for a restart from scratch).
    pub resumed_step: u64,
    pub repeated_steps: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub weights_identical: bool,
    pub velocities_identical: bool,
    pub history_identical: bool,
    pub crashes: Vec<CrashRecord>,
    pub total_steps: u64,
}

impl EquivalenceReport {
    pub fn identical(&self) -> bool {
        self.weights_identical && self.velocities_identical && self.history_identical
    }

    pub fn max_repeated_steps(&self) -> u64 {
        self.crashes.iter().map(|c| c.repeated_steps).max().unwrap_or(0)
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", if self.identical() { "identical" } else { "divergent" })?;
        writeln!(f, "weights_identical: {}", self.weights_identical)?;
        writeln!(f, "velocities_identical: {}", self.velocities_identical)?;
        writeln!(f, "history_identical: {}", self.history_identical)?;
        writeln!(f, "total_steps: {}", self.total_steps)?;
        for c in &self.crashes {
            writeln!(f, "crash at step {} resumed at {} repeated {}", c.crash_step, c.resumed_step, c.repeated_steps)?;
        }
        Ok(())
    }
}

fn bits_equal(a: &[Matrix], b: &[Matrix]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.shape() == y.shape() && x.as_slice().iter().zip(y.as_slice()).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}

fn vec_bits_equal(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()))
}

/// Compares two end states without regard to timestamps.
pub fn compare_snapshots(a: &CheckpointSnapshot, b: &CheckpointSnapshot) -> (bool, bool, bool) {
    let weights = bits_equal(&a.model.weights, &b.model.weights) && vec_bits_equal(&a.model.biases, &b.model.biases);
    let velocities = bits_equal(&a.optimizer.weight_velocity, &b.optimizer.weight_velocity)
        && vec_bits_equal(&a.optimizer.bias_velocity, &b.optimizer.bias_velocity)
        && a.optimizer.step_count == b.optimizer.step_count;
    let history = a.metric_history.len() == b.metric_history.len()
        && a.metric_history.iter().zip(&b.metric_history).all(|(x, y)| {
            x.epoch == y.epoch && x.loss.to_bits() == y.loss.to_bits() && x.accuracy.to_bits() == y.accuracy.to_bits()
        });
    (weights, velocities, history)
}

/// Uninterrupted run against a throwaway in-memory store.
pub fn reference_run(plan: &TrainPlan, data: &TrainingData) -> Result<CheckpointSnapshot, TrainError> {
    let mut trainer = Trainer::new(plan.clone(), data)?;
    trainer.run(&mut MockRemoteStore::new(), None)?;
    Ok(trainer.snapshot())
}

/// Resumes from `store`, or starts over when it has nothing usable.
fn resume_or_restart<'d, S: CheckpointStore + ?Sized>(
    plan: &TrainPlan,
    data: &'d TrainingData,
    store: &S,
) -> Result<Trainer<'d>, TrainError> {
    match Trainer::resume(plan.clone(), data, store) {
        Err(TrainError::NoCheckpoint) | Err(TrainError::Storage(StorageError::AllGenerationsCorrupt(_))) => {
            Trainer::new(plan.clone(), data)
        }
        other => other,
    }
}

fn finish(reference: &CheckpointSnapshot, trainer: &Trainer<'_>, crashes: Vec<CrashRecord>) -> EquivalenceReport {
    let (weights_identical, velocities_identical, history_identical) = compare_snapshots(reference, &trainer.snapshot());
    EquivalenceReport { weights_identical, velocities_identical, history_identical, crashes, total_steps: trainer.global_step() }
}

pub fn crash_injected_run<S>(
    plan: &TrainPlan,
    data: &TrainingData,
    kills: &KillPlan,
    store: &mut S,
) -> Result<EquivalenceReport, TrainError>
where
    S: CheckpointStore + Send + ?Sized,
{
    let reference = reference_run(plan, data)?;
    let mut trainer = Trainer::new(plan.clone(), data)?;
    let total = trainer.total_steps();
    if let Some(&last) = kills.points().last() {
        if last > total {
            return Err(TrainError::InvalidPlan(format!("kill point {last} beyond the run's {total} steps")));
        }
    }
    let mut crashes = Vec::new();
    for &k in kills.points() {
        match trainer.run(&mut *store, Some(k))? {
            RunOutcome::Killed { at_step } => debug_assert_eq!(at_step, k),
            RunOutcome::Completed(_) => unreachable!("kill point {k} is within the run"),
        }
        drop(trainer);
        store.reconnect()?;
        trainer = resume_or_restart(plan, data, &*store)?;
        let resumed_step = trainer.global_step();
        crashes.push(CrashRecord { crash_step: k, resumed_step, repeated_steps: k - resumed_step });
    }
    trainer.run(&mut *store, None)?;
    Ok(finish(&reference, &trainer, crashes))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub equivalence: EquivalenceReport,
    /// Reads of `Latest` that verified but failed to decode. Must stay zero.
    pub undecodable_reads: u64,
}

/// Runs `plan` to completion, treating each storage error as a crash of the
/// process followed by reconnect and resume. Gives up after `max_crashes`.
pub fn run_with_recovery<S>(
    plan: &TrainPlan,
    data: &TrainingData,
    store: &mut S,
    max_crashes: usize,
) -> Result<RecoveryReport, TrainError>
where
    S: CheckpointStore + Send + ?Sized,
{
    let reference = reference_run(plan, data)?;
    let mut trainer = Trainer::new(plan.clone(), data)?;
    let mut crashes = Vec::new();
    let mut undecodable_reads = 0;
    loop {
        match trainer.run(&mut *store, None) {
            Ok(_) => break,
            Err(TrainError::Storage(e)) if crashes.len() < max_crashes => {
                log::info!("storage failure at step {}: {e}", trainer.global_step());
                let crash_step = trainer.global_step();
                drop(trainer);
                store.reconnect()?;
                if let Ok(r) = store.get(&CheckpointRole::Latest) {
                    if checkpoint::decode_checkpoint(&r.bytes).is_err() {
                        undecodable_reads += 1;
                    }
                }
                trainer = resume_or_restart(plan, data, &*store)?;
                let resumed_step = trainer.global_step();
                crashes.push(CrashRecord {
                    crash_step,
                    resumed_step,
                    repeated_steps: crash_step.saturating_sub(resumed_step),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RecoveryReport { equivalence: finish(&reference, &trainer, crashes), undecodable_reads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::two_gaussians;
    use crate::loss::LossKind;
    use crate::mlp::{Activation, ModelSpec, OptimizerConfig, OutputActivation};
    use crate::storage::{Fault, FaultPlan};
    use crate::trainer::{BestPolicy, SyncMode};

    fn plan(sync_mode: SyncMode) -> TrainPlan {
        TrainPlan {
            model_spec: ModelSpec {
                layer_sizes: vec![2, 6, 2],
                activations: vec![Activation::Relu],
                output_activation: OutputActivation::Softmax,
                init_seed: 2,
            },
            optimizer_config: OptimizerConfig::new(0.05, 0.9, LossKind::CrossEntropy).unwrap(),
            epochs: 2,
            batch_size: 4,
            checkpoint_interval_steps: 3,
            best_policy: BestPolicy::default(),
            shuffle_seed: 11,
            deterministic: true,
            sync_mode,
        }
    }

    #[test]
    fn kill_plan_validation() {
        assert!(KillPlan::new(vec![3, 3]).is_err());
        assert!(KillPlan::new(vec![5, 2]).is_err());
        assert!(KillPlan::new(vec![0]).is_err());
        assert!(KillPlan::new(vec![1, 2, 9]).is_ok());
    }

    #[test]
    fn empty_kill_plan_is_identical() {
        let data = two_gaussians(40, 1).to_training_data();
        let report = crash_injected_run(&plan(SyncMode::Synchronous), &data, &KillPlan::default(), &mut MockRemoteStore::new())
            .unwrap();
        assert!(report.identical());
        assert!(report.crashes.is_empty());
        assert!(report.to_string().starts_with("verdict: identical"));
    }

    #[test]
    fn mid_epoch_kill_repeats_at_most_interval() {
        let data = two_gaussians(40, 1).to_training_data();
        let p = plan(SyncMode::Synchronous);
        let report = crash_injected_run(&p, &data, &KillPlan::new(vec![5, 14]).unwrap(), &mut MockRemoteStore::new()).unwrap();
        assert!(report.identical(), "{report}");
        assert_eq!(report.crashes[0], CrashRecord { crash_step: 5, resumed_step: 3, repeated_steps: 2 });
        assert!(report.max_repeated_steps() <= p.checkpoint_interval_steps);
    }

    #[test]
    fn kill_before_first_save_restarts() {
        let data = two_gaussians(40, 1).to_training_data();
        let report =
            crash_injected_run(&plan(SyncMode::Synchronous), &data, &KillPlan::new(vec![1]).unwrap(), &mut MockRemoteStore::new())
                .unwrap();
        assert!(report.identical());
        assert_eq!(report.crashes[0].resumed_step, 0);
    }

    #[test]
    fn kill_during_inflight_async_upload() {
        // the step-6 upload lands truncated and its retry is refused
        let faults = FaultPlan::new([(1, Fault::TruncateAt(0.5)), (2, Fault::FailBeforeWrite)]).unwrap();
        let mut store = MockRemoteStore::with_plan(faults);
        let data = two_gaussians(40, 1).to_training_data();
        let report =
            crash_injected_run(&plan(SyncMode::AsyncSingleInflight), &data, &KillPlan::new(vec![7]).unwrap(), &mut store).unwrap();
        assert_eq!(report.crashes[0].resumed_step, 3);
        assert!(report.identical(), "{report}");
    }

    #[test]
    fn kill_beyond_run_is_rejected() {
        let data = two_gaussians(40, 1).to_training_data();
        let err = crash_injected_run(&plan(SyncMode::Synchronous), &data, &KillPlan::new(vec![21]).unwrap(), &mut MockRemoteStore::new());
        assert!(matches!(err, Err(TrainError::InvalidPlan(_))));
    }

    #[test]
    fn recovery_from_storage_faults() {
        let faults = FaultPlan::new([
            (0, Fault::TruncateAt(0.3)),
            (2, Fault::DisconnectAfterWrite),
            (4, Fault::FailBeforeWrite),
        ])
        .unwrap();
        let mut store = MockRemoteStore::with_plan(faults);
        let data = two_gaussians(40, 1).to_training_data();
        let p = plan(SyncMode::Synchronous);
        let report = run_with_recovery(&p, &data, &mut store, 100).unwrap();
        assert_eq!(report.undecodable_reads, 0);
        assert_eq!(report.equivalence.crashes.len(), 3);
        assert!(report.equivalence.identical());
        assert!(report.equivalence.crashes.iter().all(|c| c.resumed_step <= c.crash_step && c.repeated_steps <= 3));
    }
}
