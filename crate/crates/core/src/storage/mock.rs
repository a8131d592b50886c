// SPDX-License-Identifier: Apache-2.0

//! In-process remote store with a deterministic fault schedule.
//!
//! Stands in for a cloud drive reached from a preemptible session. Objects are
//! named `<stem>.gen-<N>.ilck`; a read resolves the highest N that verifies.
//! Faults are keyed by put index (every put attempt consumes one index, even
//! one rejected by a dead session):
//!
//! - `FailBeforeWrite`: the put is refused, nothing is uploaded.
//! - `TruncateAt(f)`: a partial upload of `⌊f·len⌋` bytes lands under the new
//!   generation's name and the put reports `WriteFailed`.
//! - `DisconnectAfterWrite`: the upload reaches staging, then the session
//!   dies before install. Every later call fails until [`CheckpointStore::reconnect`].
//! - `DelayMs(ms)`: the put sleeps first, then proceeds normally.

use std::collections::BTreeMap;
use std::time::Duration;

use super::{resolve_newest_valid, CheckpointRole, CheckpointStore, Fault, FaultPlan, Retrieved, StorageError, StoreDescriptor};
use crate::checkpoint::verify_checksum;

#[derive(Debug, Default)]
pub struct MockRemoteStore {
    objects: BTreeMap<(CheckpointRole, u64), Vec<u8>>,
    staged: Vec<Vec<u8>>,
    plan: FaultPlan,
    put_index: u64,
    disconnected: bool,
    reconnects: u64,
}

impl MockRemoteStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_plan(plan: FaultPlan) -> Self {
        Self { plan, ..Self::default() }
    }

    pub fn is_connected(&self) -> bool {
        !self.disconnected
    }

    /// Put attempts seen so far; the index the next put will consume.
    pub fn put_count(&self) -> u64 {
        self.put_index
    }

    pub fn reconnect_count(&self) -> u64 {
        self.reconnects
    }

    pub fn object_names(&self) -> Vec<String> {
        self.objects.keys().map(|(r, g)| r.object_name(*g)).collect()
    }

    /// Damages a stored object in place, emulating out-of-contract external
    /// corruption. Returns false when the object does not exist.
    pub fn tamper(&mut self, role: &CheckpointRole, generation: u64, f: impl FnOnce(&mut Vec<u8>)) -> bool {
        match self.objects.get_mut(&(role.clone(), generation)) {
            Some(bytes) => {
                f(bytes);
                true
            }
            None => false,
        }
    }

    fn ensure_connected(&self) -> Result<(), StorageError> {
        if self.disconnected {
            Err(StorageError::BackendUnavailable("remote session disconnected".into()))
        } else {
            Ok(())
        }
    }

    fn generations(&self, role: &CheckpointRole) -> Vec<(u64, Vec<u8>)> {
        self.objects
            .range((role.clone(), 0)..=(role.clone(), u64::MAX))
            .map(|((_, g), b)| (*g, b.clone()))
            .collect()
    }

    fn next_generation(&self, role: &CheckpointRole) -> u64 {
        self.objects
            .range((role.clone(), 0)..=(role.clone(), u64::MAX))
            .next_back()
            .map_or(1, |((_, g), _)| g + 1)
    }
}

impl CheckpointStore for MockRemoteStore {
    fn put(&mut self, role: &CheckpointRole, bytes: &[u8]) -> Result<StoreDescriptor, StorageError> {
        let index = self.put_index;
        self.put_index += 1;
        self.ensure_connected()?;
        if bytes.is_empty() {
            return Err(StorageError::EmptyPayload);
        }
        let generation = self.next_generation(role);
        match self.plan.fault_at(index) {
            Some(Fault::FailBeforeWrite) => {
                return Err(StorageError::BackendUnavailable(format!("injected failure before put #{index}")));
            }
            Some(Fault::TruncateAt(fraction)) => {
                let keep = (bytes.len() as f64 * fraction).floor() as usize;
                self.objects.insert((role.clone(), generation), bytes[..keep].to_vec());
                return Err(StorageError::WriteFailed(format!(
                    "upload of {} interrupted after {keep} of {} bytes",
                    role.object_name(generation),
                    bytes.len()
                )));
            }
            Some(Fault::DisconnectAfterWrite) => {
                self.staged.push(bytes.to_vec());
                self.disconnected = true;
                return Err(StorageError::BackendUnavailable(format!(
                    "session terminated before installing {}",
                    role.object_name(generation)
                )));
            }
            Some(Fault::DelayMs(ms)) => std::thread::sleep(Duration::from_millis(ms)),
            None => {}
        }

        let previous = resolve_newest_valid(role, self.generations(role)).ok().map(|r| r.generation);
        self.objects.insert((role.clone(), generation), bytes.to_vec());
        self.objects.retain(|(r, g), _| r != role || *g == generation || Some(*g) == previous);
        Ok(StoreDescriptor {
            role: role.clone(),
            generation,
            size_bytes: bytes.len() as u64,
            verdict: verify_checksum(bytes),
        })
    }

    fn get(&self, role: &CheckpointRole) -> Result<Retrieved, StorageError> {
        self.ensure_connected()?;
        resolve_newest_valid(role, self.generations(role))
    }

    fn list(&self) -> Result<Vec<StoreDescriptor>, StorageError> {
        self.ensure_connected()?;
        Ok(self
            .objects
            .iter()
            .map(|((role, generation), bytes)| StoreDescriptor {
                role: role.clone(),
                generation: *generation,
                size_bytes: bytes.len() as u64,
                verdict: verify_checksum(bytes),
            })
            .collect())
    }

    fn inject_faults(&mut self, plan: FaultPlan) -> Result<(), StorageError> {
        self.plan = plan;
        self.put_index = 0;
        Ok(())
    }

    fn reconnect(&mut self) -> Result<(), StorageError> {
        // a new instance never sees the dead session's staged uploads
        self.staged.clear();
        self.disconnected = false;
        self.reconnects += 1;
        Ok(())
    }
}
