//! On-disk cache of sampled training matrices.
//!
//! Entries are feature dumps named by a SHA-256 key over everything that
//! shapes them. Writers hold a lock file in the cache directory, so two
//! processes never write the same directory at once.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pipeline::{read_feature_dump, write_feature_dump, FeatureLayout, Sample};

const LOCK_NAME: &str = ".lock";
const LOCK_TIMEOUT: Duration = Duration::from_secs(120);

/// Accumulates named key parts into a hex digest.
#[derive(Debug, Clone, Default)]
pub struct CacheKey {
    hasher: Sha256,
}

impl CacheKey {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn part(mut self, name: &str, value: impl AsRef<[u8]>) -> Self {
        let value = value.as_ref();
        self.hasher.update(name.as_bytes());
        self.hasher.update((value.len() as u64).to_le_bytes());
        self.hasher.update(value);
        self
    }

    pub fn hex(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

impl FeatureCache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(FeatureCache { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("samples-{key}.tsv"))
    }

    fn lock(&self) -> Result<LockGuard> {
        let path = self.dir.join(LOCK_NAME);
        let started = Instant::now();
        loop {
            match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(LockGuard(path)),
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    if started.elapsed() > LOCK_TIMEOUT {
                        return Err(Error::load(
                            &path,
                            "cache is locked by another process; remove the lock file if it is stale",
                        ));
                    }
                    thread::sleep(Duration::from_millis(50));
                }
                Err(e) => return Err(Error::io(&path, e)),
            }
        }
    }

    pub fn get(&self, key: &str, layout: FeatureLayout) -> Result<Option<Vec<Sample>>> {
        let path = self.entry_path(key);
        if path.is_file() {
            read_feature_dump(&path, layout).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Returns the cached samples for `key`, computing and storing them on
    /// a miss.
    pub fn get_or_insert_with(
        &self,
        key: &str,
        layout: FeatureLayout,
        compute: impl FnOnce() -> Result<Vec<Sample>>,
    ) -> Result<Vec<Sample>> {
        if let Some(hit) = self.get(key, layout)? {
            log::info!("feature cache hit {key}");
            return Ok(hit);
        }
        let samples = compute()?;
        let _guard = self.lock()?;
        let path = self.entry_path(key);
        let tmp = path.with_extension("tmp");
        write_feature_dump(&samples, &tmp)?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(samples)
    }
}
