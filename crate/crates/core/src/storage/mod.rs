// SPDX-License-Identifier: Apache-2.0

//! Crash-consistent checkpoint storage.
//!
//! Each role (`latest`, `best`, or a named label) owns a sequence of
//! generations stored as `<stem>.gen-<N>.ilck`. A put never touches the
//! currently readable generation: the new object is staged, flushed and then
//! installed, and only afterwards is the generation before the previous one
//! deleted. Readers resolve the newest generation that verifies and fall back
//! to the retained previous one otherwise.

mod local;
mod mock;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::checkpoint::CorruptionVerdict;

pub use local::LocalStore;
pub use mock::MockRemoteStore;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckpointRole {
    Latest,
    Best,
    Named(String),
}

impl CheckpointRole {
    pub fn named(label: &str) -> Result<Self, StorageError> {
        let ok = (1..=64).contains(&label.len())
            && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
        if ok {
            Ok(CheckpointRole::Named(label.to_string()))
        } else {
            Err(StorageError::InvalidRole(label.to_string()))
        }
    }

    /// File-name stem: `latest`, `best` or `named-<label>`.
    pub fn stem(&self) -> String {
        match self {
            CheckpointRole::Latest => "latest".into(),
            CheckpointRole::Best => "best".into(),
            CheckpointRole::Named(label) => format!("named-{label}"),
        }
    }

    pub fn object_name(&self, generation: u64) -> String {
        format!("{}.gen-{generation}.ilck", self.stem())
    }

    /// Inverse of [`CheckpointRole::object_name`].
    pub fn parse_object_name(name: &str) -> Option<(CheckpointRole, u64)> {
        let rest = name.strip_suffix(".ilck")?;
        let (stem, gen) = rest.rsplit_once(".gen-")?;
        if gen.is_empty() || !gen.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let generation = gen.parse().ok()?;
        let role = match stem {
            "latest" => CheckpointRole::Latest,
            "best" => CheckpointRole::Best,
            other => CheckpointRole::named(other.strip_prefix("named-")?).ok()?,
        };
        Some((role, generation))
    }
}

impl fmt::Display for CheckpointRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.stem())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreDescriptor {
    pub role: CheckpointRole,
    pub generation: u64,
    pub size_bytes: u64,
    pub verdict: CorruptionVerdict,
}

/// Bytes read back from a store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Retrieved {
    pub bytes: Vec<u8>,
    pub generation: u64,
    /// True when a newer generation existed but failed verification.
    pub fell_back: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fault {
    FailBeforeWrite,
    /// Keeps only this fraction of the bytes, in `(0, 1)`.
    TruncateAt(f64),
    DisconnectAfterWrite,
    DelayMs(u64),
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::FailBeforeWrite => f.write_str("fail_before_write"),
            Fault::TruncateAt(x) => write!(f, "truncate:{x}"),
            Fault::DisconnectAfterWrite => f.write_str("disconnect_after_write"),
            Fault::DelayMs(ms) => write!(f, "delay_ms:{ms}"),
        }
    }
}

impl FromStr for Fault {
    type Err = StorageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StorageError::PlanRejected(format!("unknown fault `{s}`"));
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("fail_before_write", None) => Ok(Fault::FailBeforeWrite),
            ("disconnect_after_write", None) => Ok(Fault::DisconnectAfterWrite),
            ("truncate", Some(a)) => Ok(Fault::TruncateAt(a.parse().map_err(|_| bad())?)),
            ("delay_ms", Some(a)) => Ok(Fault::DelayMs(a.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Faults keyed by the zero-based index of the put they apply to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FaultPlan {
    schedule: BTreeMap<u64, Fault>,
}

impl FaultPlan {
    pub fn new(entries: impl IntoIterator<Item = (u64, Fault)>) -> Result<Self, StorageError> {
        let mut schedule = BTreeMap::new();
        for (index, fault) in entries {
            if let Fault::TruncateAt(x) = fault {
                if !(x > 0.0 && x < 1.0) {
                    return Err(StorageError::PlanRejected(format!("truncation fraction {x} not in (0, 1)")));
                }
            }
            if schedule.insert(index, fault).is_some() {
                return Err(StorageError::PlanRejected(format!("operation index {index} scheduled twice")));
            }
        }
        Ok(Self { schedule })
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }

    pub fn fault_at(&self, index: u64) -> Option<Fault> {
        self.schedule.get(&index).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, Fault)> + '_ {
        self.schedule.iter().map(|(&i, &f)| (i, f))
    }
}

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("write failed: {0}")]
    WriteFailed(String),
    #[error("no checkpoint stored for role `{0}`")]
    NotFound(CheckpointRole),
    #[error("every retained generation of `{0}` is corrupt")]
    AllGenerationsCorrupt(CheckpointRole),
    #[error("fault plan rejected: {0}")]
    PlanRejected(String),
    #[error("invalid checkpoint role label `{0}`")]
    InvalidRole(String),
    #[error("refusing to store an empty checkpoint")]
    EmptyPayload,
    #[error("storage i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Put/get/list contract shared by every backend.
///
/// A failed put leaves the readable state unchanged: every `get` that
/// succeeded before it returns the same bytes after it.
pub trait CheckpointStore {
    fn put(&mut self, role: &CheckpointRole, bytes: &[u8]) -> Result<StoreDescriptor, StorageError>;

    fn get(&self, role: &CheckpointRole) -> Result<Retrieved, StorageError>;

    /// Every retained object ordered by (role, generation).
    fn list(&self) -> Result<Vec<StoreDescriptor>, StorageError>;

    fn inject_faults(&mut self, _plan: FaultPlan) -> Result<(), StorageError> {
        Err(StorageError::PlanRejected("backend does not support fault injection".into()))
    }

    /// Starts a fresh session after a disconnect.
    fn reconnect(&mut self) -> Result<(), StorageError> {
        Ok(())
    }
}

impl<S: CheckpointStore + ?Sized> CheckpointStore for &mut S {
    fn put(&mut self, role: &CheckpointRole, bytes: &[u8]) -> Result<StoreDescriptor, StorageError> {
        (**self).put(role, bytes)
    }

    fn get(&self, role: &CheckpointRole) -> Result<Retrieved, StorageError> {
        (**self).get(role)
    }

    fn list(&self) -> Result<Vec<StoreDescriptor>, StorageError> {
        (**self).list()
    }

    fn inject_faults(&mut self, plan: FaultPlan) -> Result<(), StorageError> {
        (**self).inject_faults(plan)
    }

    fn reconnect(&mut self) -> Result<(), StorageError> {
        (**self).reconnect()
    }
}

/// Picks the newest verifying generation out of `candidates` (any order).
pub(crate) fn resolve_newest_valid(
    role: &CheckpointRole,
    mut candidates: Vec<(u64, Vec<u8>)>,
) -> Result<Retrieved, StorageError> {
    if candidates.is_empty() {
        return Err(StorageError::NotFound(role.clone()));
    }
    candidates.sort_by_key(|c| std::cmp::Reverse(c.0));
    for (skipped, (generation, bytes)) in candidates.into_iter().enumerate() {
        if crate::checkpoint::verify_checksum(&bytes) == CorruptionVerdict::Valid {
            return Ok(Retrieved { bytes, generation, fell_back: skipped > 0 });
        }
    }
    Err(StorageError::AllGenerationsCorrupt(role.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_names() {
        assert_eq!(CheckpointRole::Latest.object_name(3), "latest.gen-3.ilck");
        assert_eq!(CheckpointRole::named("run_1-a").unwrap().object_name(1), "named-run_1-a.gen-1.ilck");
        assert!(CheckpointRole::named("").is_err());
        assert!(CheckpointRole::named("has space").is_err());
        assert!(CheckpointRole::named(&"x".repeat(65)).is_err());
        assert!(CheckpointRole::named(&"x".repeat(64)).is_ok());
        for role in [CheckpointRole::Latest, CheckpointRole::Best, CheckpointRole::named("q").unwrap()] {
            assert_eq!(CheckpointRole::parse_object_name(&role.object_name(12)), Some((role, 12)));
        }
        assert_eq!(CheckpointRole::parse_object_name(".latest.gen-1.ilck.tmp"), None);
        assert_eq!(CheckpointRole::parse_object_name("latest.gen-.ilck"), None);
    }

    #[test]
    fn role_order_is_latest_best_named() {
        let mut roles = [CheckpointRole::named("a").unwrap(), CheckpointRole::Best, CheckpointRole::Latest];
        roles.sort();
        assert_eq!(roles[0], CheckpointRole::Latest);
        assert_eq!(roles[1], CheckpointRole::Best);
    }

    #[test]
    fn fault_plan_validation() {
        assert!(FaultPlan::new([(0, Fault::FailBeforeWrite), (0, Fault::DelayMs(1))]).is_err());
        assert!(FaultPlan::new([(0, Fault::TruncateAt(1.0))]).is_err());
        assert!(FaultPlan::new([(0, Fault::TruncateAt(0.0))]).is_err());
        let plan = FaultPlan::new([(2, Fault::TruncateAt(0.5))]).unwrap();
        assert_eq!(plan.fault_at(2), Some(Fault::TruncateAt(0.5)));
        assert!(FaultPlan::default().is_empty());
    }

    #[test]
    fn fault_parse() {
        for f in [Fault::FailBeforeWrite, Fault::TruncateAt(0.25), Fault::DisconnectAfterWrite, Fault::DelayMs(7)] {
            assert_eq!(f.to_string().parse::<Fault>().unwrap(), f);
        }
        assert!("explode".parse::<Fault>().is_err());
    }
}
