//! On-disk cache of target values keyed by problem and parameter.
//!
//! Layout: `<dir>/<problem hash>/<first two hex digits>/<key>.json`, where
//! `key` is the SHA-256 of the problem hash and the bit patterns of `y`.
//! Each file holds the JSON array of output values. Writes go to a
//! temporary file in the same directory and are renamed into place, so
//! concurrent writers of the same key leave one complete file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::Target;

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let text = serde_json::to_string(value)?;
    Ok(hex(&Sha256::digest(text.as_bytes())))
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
    problem: String,
}

impl DiskCache {
    pub fn new(dir: impl AsRef<Path>, problem_hash: impl Into<String>) -> Result<Self> {
        let problem = problem_hash.into();
        let root = dir.as_ref().join(&problem);
        fs::create_dir_all(&root)?;
        Ok(Self { root, problem })
    }

    fn path(&self, y: &[f64]) -> PathBuf {
        let mut h = Sha256::new();
        h.update(self.problem.as_bytes());
        for v in y {
            h.update(v.to_bits().to_le_bytes());
        }
        let key = hex(&h.finalize());
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, y: &[f64]) -> Option<Vec<f64>> {
        let text = fs::read_to_string(self.path(y)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, y: &[f64], value: &[f64]) -> Result<()> {
        let path = self.path(y);
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, serde_json::to_string(value)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

/// A target whose evaluations go through a [`DiskCache`].
pub struct CachedTarget<T> {
    inner: T,
    cache: DiskCache,
}

impl<T: Target> CachedTarget<T> {
    pub fn new(inner: T, cache: DiskCache) -> Self {
        Self { inner, cache }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Target> Target for CachedTarget<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, y: &[f64]) -> std::result::Result<Vec<f64>, String> {
        if let Some(v) = self.cache.get(y) {
            if v.len() == self.inner.dim() {
                return Ok(v);
            }
        }
        let v = self.inner.eval(y)?;
        self.cache.put(y, &v).map_err(|e| e.to_string())?;
        Ok(v)
    }

    fn param_dim(&self) -> Option<usize> {
        self.inner.param_dim()
    }
}
