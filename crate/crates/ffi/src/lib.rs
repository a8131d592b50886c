// SPDX-License-Identifier: Apache-2.0

//! C ABI over `resume-forge`.
//!
//! Every function returns an [`RfStatus`]. On failure a message is available
//! from [`rf_last_error`] on the same thread until the next failing call.
//! Handles are opaque and released with their `*_free` function. Buffers
//! follow the two-call convention: pass a null buffer or a short capacity to
//! learn the length through `out_len`, then call again.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use resume_forge::checkpoint::{decode_checkpoint, encode_checkpoint, CheckpointSnapshot, CodecError, CorruptionVerdict};
use resume_forge::config::{Backend, ConfigError, Overrides, RunConfig, STORE_ENV_VAR};
use resume_forge::data::load_dataset;
use resume_forge::loss::{eval_loss, eval_loss_gradient, LossKind};
use resume_forge::storage::{CheckpointRole, CheckpointStore, LocalStore, MockRemoteStore, StorageError};
use resume_forge::trainer::{self, TrainError, TrainReport};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Corrupt = 4,
    NotFound = 5,
    Storage = 6,
    Training = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfVerdict {
    Valid = 0,
    BadMagic = 1,
    BadVersion = 2,
    ChecksumMismatch = 3,
    Truncated = 4,
}

impl From<CorruptionVerdict> for RfVerdict {
    fn from(v: CorruptionVerdict) -> Self {
        match v {
            CorruptionVerdict::Valid => RfVerdict::Valid,
            CorruptionVerdict::BadMagic => RfVerdict::BadMagic,
            CorruptionVerdict::BadVersion => RfVerdict::BadVersion,
            CorruptionVerdict::ChecksumMismatch => RfVerdict::ChecksumMismatch,
            CorruptionVerdict::Truncated => RfVerdict::Truncated,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfRole {
    Latest = 0,
    Best = 1,
}

impl RfRole {
    fn role(self) -> CheckpointRole {
        match self {
            RfRole::Latest => CheckpointRole::Latest,
            RfRole::Best => CheckpointRole::Best,
        }
    }
}

/// A decoded checkpoint.
pub struct RfCheckpoint(CheckpointSnapshot);

/// A local filesystem checkpoint store.
pub struct RfStore(LocalStore);

/// Summary of a finished training run.
pub struct RfReport(TrainReport);

struct Failure(RfStatus, String);

type Outcome = Result<(), Failure>;

impl Failure {
    fn new(status: RfStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

impl From<StorageError> for Failure {
    fn from(e: StorageError) -> Self {
        let status = match e {
            StorageError::NotFound(_) => RfStatus::NotFound,
            StorageError::AllGenerationsCorrupt(_) => RfStatus::Corrupt,
            StorageError::Io(_) => RfStatus::Io,
            StorageError::InvalidRole(_) | StorageError::EmptyPayload => RfStatus::InvalidArgument,
            _ => RfStatus::Storage,
        };
        Failure::new(status, e)
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        Failure::new(RfStatus::Corrupt, e)
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Storage(s) => s.into(),
            TrainError::Codec(c) => c.into(),
            TrainError::NoCheckpoint => Failure::new(RfStatus::NotFound, e),
            other => Failure::new(RfStatus::Training, other),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let status = if matches!(e, ConfigError::Io { .. }) { RfStatus::Io } else { RfStatus::InvalidArgument };
        Failure::new(status, e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Outcome) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RfStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(RfStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(RfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn bytes_arg<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn copy_out(bytes: &[u8], buf: *mut u8, cap: usize, out_len: *mut usize) -> Outcome {
    non_null(out_len, "out_len")?;
    *out_len = bytes.len();
    if buf.is_null() || cap < bytes.len() {
        return Err(Failure::new(RfStatus::BufferTooSmall, format!("need {} bytes, have {cap}", bytes.len())));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
    Ok(())
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Outcome {
    non_null(out, "output pointer")?;
    *out = value;
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    non_null(p, "handle")?;
    Ok(&*p)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Checks framing and checksum without decoding.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_verify(bytes: *const u8, len: usize, out: *mut RfVerdict) -> RfStatus {
    guard(|| {
        let data = bytes_arg(bytes, len, "bytes")?;
        write_out(out, resume_forge::verify_checksum(data).into())
    })
}

/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_checkpoint_decode(bytes: *const u8, len: usize, out: *mut *mut RfCheckpoint) -> RfStatus {
    guard(|| {
        non_null(out, "out")?;
        let snapshot = decode_checkpoint(bytes_arg(bytes, len, "bytes")?)?;
        write_out(out, Box::into_raw(Box::new(RfCheckpoint(snapshot))))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_checkpoint_read_file(path: *const c_char, out: *mut *mut RfCheckpoint) -> RfStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = str_arg(path, "path")?;
        let bytes = std::fs::read(path).map_err(|e| Failure::new(RfStatus::Io, format!("{path}: {e}")))?;
        let snapshot = decode_checkpoint(&bytes)?;
        write_out(out, Box::into_raw(Box::new(RfCheckpoint(snapshot))))
    })
}

/// Serialises the checkpoint into `buf`.
///
/// # Safety
/// `cp` must come from this library; `buf` must have `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rf_checkpoint_encode(
    cp: *const RfCheckpoint,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> RfStatus {
    guard(|| copy_out(&encode_checkpoint(&handle(cp)?.0), buf, cap, out_len))
}

/// Completed epochs, global step and step within the current epoch. Any
/// output pointer may be null.
///
/// # Safety
/// `cp` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_checkpoint_progress(
    cp: *const RfCheckpoint,
    epoch: *mut u64,
    global_step: *mut u64,
    step_in_epoch: *mut u64,
) -> RfStatus {
    guard(|| {
        let s = &handle(cp)?.0;
        for (out, v) in [(epoch, s.epoch), (global_step, s.global_step), (step_in_epoch, s.step_in_epoch)] {
            if !out.is_null() {
                *out = v;
            }
        }
        Ok(())
    })
}

/// The recorded best metric and its epoch; `NotFound` when none was kept.
///
/// # Safety
/// `cp` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_checkpoint_best(cp: *const RfCheckpoint, metric: *mut f64, epoch: *mut u64) -> RfStatus {
    guard(|| {
        let best = handle(cp)?.0.best.ok_or_else(|| Failure::new(RfStatus::NotFound, "checkpoint has no best record"))?;
        write_out(metric, best.metric)?;
        write_out(epoch, best.epoch)
    })
}

/// # Safety
/// `cp` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rf_checkpoint_free(cp: *mut RfCheckpoint) {
    if !cp.is_null() {
        drop(Box::from_raw(cp));
    }
}

/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_store_open_local(dir: *const c_char, out: *mut *mut RfStore) -> RfStatus {
    guard(|| {
        non_null(out, "out")?;
        let store = LocalStore::open(str_arg(dir, "dir")?)?;
        write_out(out, Box::into_raw(Box::new(RfStore(store))))
    })
}

/// Writes a new generation of `role`. `generation` may be null.
///
/// # Safety
/// `store` must come from this library; `bytes` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rf_store_put(
    store: *mut RfStore,
    role: RfRole,
    bytes: *const u8,
    len: usize,
    generation: *mut u64,
) -> RfStatus {
    guard(|| {
        non_null(store, "store")?;
        let data = bytes_arg(bytes, len, "bytes")?;
        let desc = (*store).0.put(&role.role(), data)?;
        if !generation.is_null() {
            *generation = desc.generation;
        }
        Ok(())
    })
}

/// Reads the newest valid generation of `role` into `buf`.
///
/// # Safety
/// `store` must come from this library; `buf` must have `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rf_store_get(
    store: *const RfStore,
    role: RfRole,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> RfStatus {
    guard(|| {
        let got = handle(store)?.0.get(&role.role())?;
        copy_out(&got.bytes, buf, cap, out_len)
    })
}

/// # Safety
/// `store` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rf_store_free(store: *mut RfStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

unsafe fn loss_args<'a>(
    name: *const c_char,
    huber_delta: f64,
    prediction: *const f64,
    target: *const f64,
    n: usize,
) -> Result<(LossKind, &'a [f64], &'a [f64]), Failure> {
    let kind = LossKind::parse_with_delta(str_arg(name, "loss name")?, huber_delta)
        .map_err(|e| Failure::new(RfStatus::InvalidArgument, e))?;
    non_null(prediction, "prediction")?;
    non_null(target, "target")?;
    Ok((kind, slice::from_raw_parts(prediction, n), slice::from_raw_parts(target, n)))
}

/// One sample's loss. `huber_delta` is read only for `"huber"`.
///
/// # Safety
/// `prediction` and `target` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_loss_eval(
    name: *const c_char,
    huber_delta: f64,
    prediction: *const f64,
    target: *const f64,
    n: usize,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        let (kind, p, t) = loss_args(name, huber_delta, prediction, target, n)?;
        let v = eval_loss(kind, p, t).map_err(|e| Failure::new(RfStatus::InvalidArgument, e))?;
        write_out(out, v)
    })
}

/// Gradient of [`rf_loss_eval`] with respect to the prediction.
///
/// # Safety
/// `prediction`, `target` and `gradient` must each hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn rf_loss_gradient(
    name: *const c_char,
    huber_delta: f64,
    prediction: *const f64,
    target: *const f64,
    n: usize,
    gradient: *mut f64,
) -> RfStatus {
    guard(|| {
        let (kind, p, t) = loss_args(name, huber_delta, prediction, target, n)?;
        non_null(gradient, "gradient")?;
        let g = eval_loss_gradient(kind, p, t).map_err(|e| Failure::new(RfStatus::InvalidArgument, e))?;
        ptr::copy_nonoverlapping(g.as_ptr(), gradient, n);
        Ok(())
    })
}

/// Trains (or resumes, when `resume` is true) the run described by a config
/// file. `store` overrides the file's backend and may be null, in which case
/// the file or the `RESUME_FORGE_STORE` variable must name one.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_train(
    config_path: *const c_char,
    store: *const c_char,
    resume: bool,
    out: *mut *mut RfReport,
) -> RfStatus {
    guard(|| {
        non_null(out, "out")?;
        let config = PathBuf::from(str_arg(config_path, "config path")?);
        let overrides =
            Overrides { store: if store.is_null() { None } else { Some(str_arg(store, "store")?.to_string()) }, ..Overrides::default() };
        let env_store = std::env::var(STORE_ENV_VAR).ok();
        let cfg = RunConfig::load(Some(&config), &overrides, env_store.as_deref())?;
        let set = load_dataset(&cfg.data, cfg.classes)
            .map_err(|e| Failure::new(RfStatus::InvalidArgument, format!("{}: {e}", cfg.data.display())))?;
        let data = set.to_training_data();
        let plan = cfg.plan(set.feature_dim(), set.class_count());
        let run = |s: &mut (dyn CheckpointStore + Send)| {
            if resume {
                trainer::resume(&plan, &data, s)
            } else {
                trainer::train(&plan, &data, s)
            }
        };
        let report = match &cfg.backend {
            Backend::Local(dir) => run(&mut LocalStore::open(dir)?)?,
            Backend::MockRemote(scenario) => run(&mut MockRemoteStore::with_plan(scenario.faults.clone()))?,
        };
        write_out(out, Box::into_raw(Box::new(RfReport(report))))
    })
}

/// Completed epochs and global step. Either output may be null.
///
/// # Safety
/// `report` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_progress(report: *const RfReport, epochs: *mut u64, global_step: *mut u64) -> RfStatus {
    guard(|| {
        let r = &handle(report)?.0;
        if !epochs.is_null() {
            *epochs = r.epochs_completed;
        }
        if !global_step.is_null() {
            *global_step = r.global_step;
        }
        Ok(())
    })
}

/// Final training loss and accuracy; `NotFound` when no epoch was evaluated.
///
/// # Safety
/// `report` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_metrics(report: *const RfReport, loss: *mut f64, accuracy: *mut f64) -> RfStatus {
    guard(|| {
        let r = &handle(report)?.0;
        match (r.final_loss, r.final_accuracy) {
            (Some(l), Some(a)) => {
                write_out(loss, l)?;
                write_out(accuracy, a)
            }
            _ => Err(Failure::new(RfStatus::NotFound, "no epoch was evaluated")),
        }
    })
}

/// Number of checkpoints this run committed.
///
/// # Safety
/// `report` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_checkpoints(report: *const RfReport, out: *mut u64) -> RfStatus {
    guard(|| write_out(out, handle(report)?.0.checkpoints_written))
}

/// # Safety
/// `report` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rf_report_free(report: *mut RfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
