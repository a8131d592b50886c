// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors
//! (including a checkpoint that fails verification).

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checkpoint::{header_fields, verify_checksum, CorruptionVerdict};
use crate::config::{Backend, ConfigError, Overrides, RunConfig, STORE_ENV_VAR};
use crate::data::{load_dataset, two_gaussians, write_dataset, LabeledSet};
use crate::harness::{crash_injected_run, run_with_recovery, KillPlan};
use crate::learnpp::{learner_accuracy, learnpp_train, LearnppConfig, WeakLearnerKind};
use crate::sim::{simulate_sessions, SessionLength, SessionModel, SimSettings};
use crate::storage::{CheckpointStore, LocalStore, MockRemoteStore};
use crate::trainer::{self, Monitor, SyncMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "resume-forge", version, about = "Resumable SGD training with crash-consistent checkpoints")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train from scratch, checkpointing into the store.
    Train(TrainArgs),
    /// Continue from the newest valid `latest` checkpoint.
    Resume(RunArgs),
    /// Print the header fields of a checkpoint file.
    Inspect { file: PathBuf },
    /// Print the integrity verdict of a checkpoint file.
    Verify { file: PathBuf },
    /// Train a Learn++ ensemble over datasets given in arrival order.
    Learnpp(LearnppArgs),
    /// Tabulate lost work under preemptible sessions per checkpoint interval.
    Simulate(SimulateArgs),
    /// Write the two-Gaussians dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Local store directory, or a mock-remote scenario file.
    #[arg(long, env = STORE_ENV_VAR)]
    store: Option<String>,
    #[arg(long)]
    interval: Option<u64>,
    #[arg(long)]
    epochs: Option<u64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    monitor: Option<MonitorArg>,
    #[arg(long = "min-delta")]
    min_delta: Option<f64>,
    #[arg(long)]
    sustain: Option<usize>,
    #[arg(long, value_enum)]
    sync: Option<SyncArg>,
    /// Also write the report as key=value lines to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Test mode: kill at these global steps, resume each time and compare
    /// with an uninterrupted run.
    #[arg(long = "kill-at", value_delimiter = ',')]
    kill_at: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
struct LearnppArgs {
    /// Dataset files, one per database, in arrival order.
    #[arg(required = true)]
    databases: Vec<PathBuf>,
    /// Split a single dataset into this many sequential databases.
    #[arg(long)]
    split: Option<usize>,
    /// Held-out evaluation set; defaults to the union of the databases.
    #[arg(long)]
    test: Option<PathBuf>,
    /// T_k, either one value or one per database.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    iterations: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LearnerArg::Stump)]
    learner: LearnerArg,
    #[arg(long)]
    classes: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value = "fixed:50")]
    sessions: String,
    /// Checkpoint intervals, one table row each.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,25")]
    intervals: Vec<u64>,
    /// Single interval; replaces --intervals.
    #[arg(long)]
    interval: Option<u64>,
    #[arg(long = "total-steps", default_value_t = 100)]
    total_steps: u64,
    #[arg(long = "save-cost", default_value_t = 0)]
    save_cost: u64,
    #[arg(long = "reconnect-delay", default_value_t = 0)]
    reconnect_delay: u64,
    /// Steps per epoch; epoch ends also save.
    #[arg(long = "epoch-steps")]
    epoch_steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MonitorArg {
    Loss,
    Accuracy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SyncArg {
    Sync,
    Async,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LearnerArg {
    Stump,
    Mlp,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Missing(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Train(args) => train(args.run, args.kill_at, false, out),
        Command::Resume(args) => train(args, None, true, out),
        Command::Inspect { file } => inspect(&file, out),
        Command::Verify { file } => verify(&file, out),
        Command::Learnpp(args) => learnpp(args, out),
        Command::Simulate(args) => simulate(args, out),
        Command::Synth(args) => {
            write_dataset(&two_gaussians(args.samples, args.seed), &args.out)
                .with_context(|| format!("writing {}", args.out.display()))?;
            writeln!(out, "wrote {} samples to {}", args.samples, args.out.display()).map_err(anyhow::Error::from)?;
            Ok(EXIT_OK)
        }
    }
}

fn overrides(args: &RunArgs) -> Overrides {
    Overrides {
        data: args.data.clone(),
        store: args.store.clone(),
        interval: args.interval,
        epochs: args.epochs,
        batch: args.batch,
        seed: args.seed,
        monitor: args.monitor.map(|m| match m {
            MonitorArg::Loss => Monitor::Loss,
            MonitorArg::Accuracy => Monitor::Accuracy,
        }),
        min_delta: args.min_delta,
        sustain: args.sustain,
        sync: args.sync.map(|s| match s {
            SyncArg::Sync => SyncMode::Synchronous,
            SyncArg::Async => SyncMode::AsyncSingleInflight,
        }),
        report: args.report.clone(),
    }
}

fn train(args: RunArgs, kill_at: Option<Vec<u64>>, resume: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    // the env var is already folded into `args.store` by clap
    let cfg = RunConfig::load(args.config.as_deref(), &overrides(&args), None)?;
    let set = load_dataset(&cfg.data, cfg.classes).with_context(|| format!("loading {}", cfg.data.display()))?;
    let data = set.to_training_data();
    let plan = cfg.plan(set.feature_dim(), set.class_count());

    let mut local;
    let mut mock;
    let mut recover = None;
    let store: &mut (dyn CheckpointStore + Send) = match &cfg.backend {
        Backend::Local(dir) => {
            local = LocalStore::open(dir).with_context(|| format!("opening store {}", dir.display()))?;
            &mut local
        }
        Backend::MockRemote(scenario) => {
            mock = MockRemoteStore::with_plan(scenario.faults.clone());
            if scenario.recover {
                recover = Some(scenario.max_crashes);
            }
            &mut mock
        }
    };

    if let Some(points) = kill_at {
        let kills = KillPlan::new(points).map_err(|e| Failure::Usage(e.to_string()))?;
        let report = crash_injected_run(&plan, &data, &kills, store).map_err(anyhow::Error::from)?;
        write!(out, "{report}").map_err(anyhow::Error::from)?;
        return Ok(if report.identical() { EXIT_OK } else { EXIT_RUNTIME });
    }
    if let Some(max_crashes) = recover {
        let report = run_with_recovery(&plan, &data, store, max_crashes).map_err(anyhow::Error::from)?;
        write!(out, "{}", report.equivalence).map_err(anyhow::Error::from)?;
        return Ok(EXIT_OK);
    }
    let report = if resume { trainer::resume(&plan, &data, store) } else { trainer::train(&plan, &data, store) }
        .map_err(anyhow::Error::from)?;
    write!(out, "{}", report.to_text()).map_err(anyhow::Error::from)?;
    if let Some(path) = &cfg.report {
        std::fs::write(path, report.to_key_values()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EXIT_OK)
}

fn read_checkpoint(file: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(file).with_context(|| format!("reading {}", file.display()))
}

fn inspect(file: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = read_checkpoint(file)?;
    let verdict = verify_checksum(&bytes);
    if verdict != CorruptionVerdict::Valid {
        return Err(anyhow!("{} is corrupt: {verdict}", file.display()).into());
    }
    let fields = header_fields(&bytes).map_err(|e| anyhow!("{}: {e}", file.display()))?;
    for (k, v) in fields {
        writeln!(out, "{k}={v}").map_err(anyhow::Error::from)?;
    }
    Ok(EXIT_OK)
}

fn verify(file: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let verdict = verify_checksum(&read_checkpoint(file)?);
    writeln!(out, "{verdict}").map_err(anyhow::Error::from)?;
    Ok(if verdict == CorruptionVerdict::Valid { EXIT_OK } else { EXIT_RUNTIME })
}

fn learnpp(args: LearnppArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut sets: Vec<LabeledSet> = Vec::new();
    for path in &args.databases {
        sets.push(load_dataset(path, args.classes).with_context(|| format!("loading {}", path.display()))?);
    }
    // a common class count, so that every database votes over the same labels
    let classes = args.classes.unwrap_or_else(|| sets.iter().map(LabeledSet::class_count).max().unwrap_or(1));
    for set in &mut sets {
        if set.class_count() != classes {
            *set = LabeledSet::new(set.features().clone(), set.labels().to_vec(), classes).map_err(anyhow::Error::from)?;
        }
    }
    if let Some(k) = args.split {
        if sets.len() != 1 {
            return Err(Failure::Usage("--split needs exactly one dataset".into()));
        }
        if k == 0 {
            return Err(Failure::Usage("--split must be >= 1".into()));
        }
        sets = sets[0].split_sequential(k);
    }
    let test = match &args.test {
        Some(path) => load_dataset(path, Some(classes)).with_context(|| format!("loading {}", path.display()))?,
        None => {
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for s in &sets {
                rows.extend_from_slice(s.features().as_slice());
                labels.extend_from_slice(s.labels());
            }
            let dim = sets[0].feature_dim();
            LabeledSet::new(crate::tensor::Matrix::from_vec(labels.len(), dim, rows), labels, classes)
                .map_err(anyhow::Error::from)?
        }
    };
    let config = LearnppConfig {
        iterations: args.iterations,
        seed: args.seed,
        weak_learner: match args.learner {
            LearnerArg::Stump => WeakLearnerKind::Stump,
            LearnerArg::Mlp => WeakLearnerKind::tiny_mlp(),
        },
        ..LearnppConfig::default()
    };
    let ensemble = learnpp_train(&sets, &config).map_err(anyhow::Error::from)?;
    let mut lines = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        lines.push(format!(
            "database {}: samples {} stages {} accuracy_through_database {:.4}",
            k + 1,
            set.len(),
            ensemble.stages[k].len(),
            ensemble.accuracy_upto(k + 1, &test)
        ));
    }
    let best_weak = ensemble.weak_hypotheses().map(|h| learner_accuracy(&h.learner, &test)).fold(0.0, f64::max);
    lines.push(format!("best_weak_accuracy {best_weak:.4}"));
    lines.push(format!("final_accuracy {:.4}", ensemble.accuracy(&test)));
    writeln!(out, "{}", lines.join("\n")).map_err(anyhow::Error::from)?;
    Ok(EXIT_OK)
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let length: SessionLength = args.sessions.parse().map_err(|e: crate::sim::SimError| Failure::Usage(e.to_string()))?;
    let model = SessionModel { length, reconnect_delay: args.reconnect_delay, seed: args.seed };
    let settings = SimSettings { total_steps: args.total_steps, save_cost: args.save_cost, steps_per_epoch: args.epoch_steps };
    let intervals = match args.interval {
        Some(i) => vec![i],
        None => args.intervals,
    };
    let table = simulate_sessions(&intervals, &model, &settings).map_err(|e| Failure::Usage(e.to_string()))?;
    write!(out, "{table}").map_err(anyhow::Error::from)?;
    if table.rows.iter().any(|r| r.stalled) {
        return Err(anyhow!("at least one interval never commits a checkpoint within a session").into());
    }
    Ok(EXIT_OK)
}
