// SPDX-License-Identifier: Apache-2.0

//! Fault-tolerant incremental training.
//!
//! A small multilayer perceptron trained with momentum SGD whose complete
//! state is checkpointed through crash-consistent storage, so that a run
//! killed at any step resumes to bitwise-identical weights. The crate also
//! ships a Learn++ incremental ensemble of decision stumps, a crash-injection
//! harness and a preemptible-session simulator.
//!
//! Module map:
//!
//! - [`loss`]: closed-form losses and their gradients.
//! - [`mlp`]: deterministic MLP, backprop and the SGD step.
//! - [`checkpoint`]: the `.ilck` binary format.
//! - [`storage`]: local and fault-injectable mock-remote checkpoint stores.
//! - [`trainer`]: interval checkpointing, best-model retention, resume.
//! - [`learnpp`]: the Learn++ ensemble.
//! - [`data`], [`config`], [`harness`], [`sim`], [`cli`]: ingestion and tooling.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod harness;
pub mod learnpp;
pub mod loss;
pub mod mlp;
pub mod rng;
pub mod sim;
pub mod storage;
pub mod tensor;
pub mod trainer;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, verify_checksum, CheckpointSnapshot, CorruptionVerdict};
pub use loss::LossKind;
pub use mlp::{ModelSpec, ModelState, OptimizerConfig, OptimizerState};
pub use storage::{CheckpointRole, CheckpointStore, LocalStore, MockRemoteStore};
pub use tensor::Matrix;
pub use trainer::{TrainPlan, TrainReport, Trainer};
