// SPDX-License-Identifier: Apache-2.0

//! Local filesystem backend.
//!
//! Layout under the root directory:
//!
//! ```text
//! latest.gen-N.ilck       committed generations (current + previous)
//! best.gen-N.ilck
//! named-<label>.gen-N.ilck
//! <stem>.pointer          text file holding the committed generation number
//! .<object>.tmp           staging file, never read
//! ```
//!
//! A put writes and fsyncs the staging file, renames it into place, fsyncs
//! the directory, and only then rewrites the pointer the same way. The pointer
//! marks the commit; generations above it are ignored by readers.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{resolve_newest_valid, CheckpointRole, CheckpointStore, Retrieved, StorageError, StoreDescriptor};
use crate::checkpoint::verify_checksum;

#[derive(Debug, Clone)]
pub struct LocalStore {
    root: PathBuf,
}

fn sync_dir(dir: &Path) -> std::io::Result<()> {
    File::open(dir)?.sync_all()
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, dir.join(name))?;
        sync_dir(dir)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

impl LocalStore {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StorageError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn object_path(&self, role: &CheckpointRole, generation: u64) -> PathBuf {
        self.root.join(role.object_name(generation))
    }

    fn pointer_name(role: &CheckpointRole) -> String {
        format!("{}.pointer", role.stem())
    }

    fn committed_pointer(&self, role: &CheckpointRole) -> Option<u64> {
        fs::read_to_string(self.root.join(Self::pointer_name(role))).ok()?.trim().parse().ok()
    }

    fn scan(&self) -> Result<Vec<(CheckpointRole, u64)>, StorageError> {
        let mut found = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if !entry.file_type()?.is_file() {
                continue;
            }
            if let Some(parsed) = entry.file_name().to_str().and_then(CheckpointRole::parse_object_name) {
                found.push(parsed);
            }
        }
        found.sort();
        Ok(found)
    }

    fn generations(&self, role: &CheckpointRole) -> Result<Vec<u64>, StorageError> {
        Ok(self.scan()?.into_iter().filter(|(r, _)| r == role).map(|(_, g)| g).collect())
    }

    /// Generations a reader may consider: those at or below the pointer, or
    /// every generation when the pointer is missing.
    fn readable(&self, role: &CheckpointRole) -> Result<Vec<(u64, Vec<u8>)>, StorageError> {
        let limit = self.committed_pointer(role).unwrap_or(u64::MAX);
        let mut out = Vec::new();
        for generation in self.generations(role)? {
            if generation > limit {
                continue;
            }
            match fs::read(self.object_path(role, generation)) {
                Ok(bytes) => out.push((generation, bytes)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(out)
    }
}

impl CheckpointStore for LocalStore {
    fn put(&mut self, role: &CheckpointRole, bytes: &[u8]) -> Result<StoreDescriptor, StorageError> {
        if bytes.is_empty() {
            return Err(StorageError::EmptyPayload);
        }
        let existing = self.generations(role)?;
        let newest_on_disk = existing.last().copied().unwrap_or(0);
        let generation = newest_on_disk.max(self.committed_pointer(role).unwrap_or(0)) + 1;
        let previous = resolve_newest_valid(role, self.readable(role)?).ok().map(|r| r.generation);

        let name = role.object_name(generation);
        write_atomic(&self.root, &name, bytes).map_err(|e| StorageError::WriteFailed(format!("{name}: {e}")))?;
        write_atomic(&self.root, &Self::pointer_name(role), format!("{generation}\n").as_bytes())
            .map_err(|e| StorageError::WriteFailed(format!("pointer for {role}: {e}")))?;

        for old in existing {
            if old != generation && Some(old) != previous {
                // stale generations are garbage; a failed delete only costs space
                let _ = fs::remove_file(self.object_path(role, old));
            }
        }
        Ok(StoreDescriptor {
            role: role.clone(),
            generation,
            size_bytes: bytes.len() as u64,
            verdict: verify_checksum(bytes),
        })
    }

    fn get(&self, role: &CheckpointRole) -> Result<Retrieved, StorageError> {
        resolve_newest_valid(role, self.readable(role)?)
    }

    fn list(&self) -> Result<Vec<StoreDescriptor>, StorageError> {
        let mut out = Vec::new();
        for (role, generation) in self.scan()? {
            let bytes = match fs::read(self.object_path(&role, generation)) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(e.into()),
            };
            out.push(StoreDescriptor {
                role,
                generation,
                size_bytes: bytes.len() as u64,
                verdict: verify_checksum(&bytes),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkpoint::{encode_checkpoint, tests::minimal_snapshot, CorruptionVerdict};
    use crate::storage::FaultPlan;

    fn checkpoint(step: u64) -> Vec<u8> {
        let mut s = minimal_snapshot();
        s.global_step = step;
        encode_checkpoint(&s)
    }

    #[test]
    fn layout_and_retention() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LocalStore::open(dir.path()).unwrap();
        assert!(matches!(store.get(&CheckpointRole::Latest), Err(StorageError::NotFound(_))));
        for step in 1..=4 {
            let d = store.put(&CheckpointRole::Latest, &checkpoint(step)).unwrap();
            assert_eq!(d.generation, step);
        }
        store.put(&CheckpointRole::Best, &checkpoint(9)).unwrap();
        let mut names: Vec<String> =
            fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(
            names,
            vec!["best.gen-1.ilck", "best.pointer", "latest.gen-3.ilck", "latest.gen-4.ilck", "latest.pointer"]
        );
        assert_eq!(store.get(&CheckpointRole::Latest).unwrap().bytes, checkpoint(4));
        let listed: Vec<_> = store.list().unwrap().into_iter().map(|d| (d.role, d.generation)).collect();
        assert_eq!(
            listed,
            vec![(CheckpointRole::Latest, 3), (CheckpointRole::Latest, 4), (CheckpointRole::Best, 1)]
        );
    }

    #[test]
    fn corrupted_newest_falls_back_and_is_listed() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LocalStore::open(dir.path()).unwrap();
        store.put(&CheckpointRole::Latest, &checkpoint(1)).unwrap();
        store.put(&CheckpointRole::Latest, &checkpoint(2)).unwrap();
        let path = store.object_path(&CheckpointRole::Latest, 2);
        let mut bytes = fs::read(&path).unwrap();
        bytes[40] ^= 0x01;
        fs::write(&path, bytes).unwrap();

        let got = store.get(&CheckpointRole::Latest).unwrap();
        assert_eq!(got.bytes, checkpoint(1));
        assert!(got.fell_back);
        let listed = store.list().unwrap();
        assert_eq!(listed[1].verdict, CorruptionVerdict::ChecksumMismatch);

        fs::write(store.object_path(&CheckpointRole::Latest, 1), b"junk").unwrap();
        assert!(matches!(store.get(&CheckpointRole::Latest), Err(StorageError::AllGenerationsCorrupt(_))));
    }

    #[test]
    fn uncommitted_generation_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LocalStore::open(dir.path()).unwrap();
        store.put(&CheckpointRole::Latest, &checkpoint(1)).unwrap();
        // crash between data rename and pointer update
        fs::write(store.object_path(&CheckpointRole::Latest, 2), checkpoint(2)).unwrap();
        assert_eq!(store.get(&CheckpointRole::Latest).unwrap().bytes, checkpoint(1));
        let d = store.put(&CheckpointRole::Latest, &checkpoint(3)).unwrap();
        assert_eq!(d.generation, 3);
        assert_eq!(store.get(&CheckpointRole::Latest).unwrap().bytes, checkpoint(3));
    }

    #[test]
    fn survives_pointer_loss() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LocalStore::open(dir.path()).unwrap();
        store.put(&CheckpointRole::Latest, &checkpoint(1)).unwrap();
        store.put(&CheckpointRole::Latest, &checkpoint(2)).unwrap();
        fs::remove_file(dir.path().join("latest.pointer")).unwrap();
        assert_eq!(store.get(&CheckpointRole::Latest).unwrap().bytes, checkpoint(2));
    }

    #[test]
    fn rejects_fault_plans_and_empty_puts() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LocalStore::open(dir.path()).unwrap();
        assert!(matches!(store.inject_faults(FaultPlan::default()), Err(StorageError::PlanRejected(_))));
        assert!(matches!(store.put(&CheckpointRole::Latest, &[]), Err(StorageError::EmptyPayload)));
    }

    #[test]
    fn failed_write_keeps_previous() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LocalStore::open(dir.path()).unwrap();
        store.put(&CheckpointRole::Latest, &checkpoint(1)).unwrap();
        // a directory squatting on the next generation's name makes the rename fail
        fs::create_dir(store.object_path(&CheckpointRole::Latest, 2)).unwrap();
        fs::write(store.object_path(&CheckpointRole::Latest, 2).join("x"), b"x").unwrap();
        let err = store.put(&CheckpointRole::Latest, &checkpoint(2)).unwrap_err();
        assert!(matches!(err, StorageError::WriteFailed(_)), "{err}");
        assert_eq!(store.get(&CheckpointRole::Latest).unwrap().bytes, checkpoint(1));
    }
}
