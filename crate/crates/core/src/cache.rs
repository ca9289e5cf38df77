//! Content-addressed on-disk cache of per-point results.
//!
//! Each entry stores the exact bit patterns of a small vector of `f64`
//! values under a SHA-256 key of its canonical inputs. Writes go through a
//! temporary file and an atomic rename, so concurrent writers of the same
//! key cannot leave a torn entry behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::round_sig;
use crate::error::{Error, Result};

/// Environment variable that overrides the configured cache directory.
pub const CACHE_DIR_ENV: &str = "XYCHAIN_CACHE_DIR";

/// Bumped whenever cached numbers could change meaning.
pub const CACHE_SCHEMA: u32 = 1;

pub fn version_tag() -> String {
    format!("{}+schema{}", env!("CARGO_PKG_VERSION"), CACHE_SCHEMA)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    digest: String,
    material: String,
}

impl CacheKey {
    /// `pattern` names which part of the state the value belongs to (for
    /// example `classes<=4` or `spacing=5`).
    pub fn new(observable: &str, pattern: &str, n: usize, gamma: f64, lambda: f64) -> Self {
        let material = format!(
            "{observable}|{pattern}|N={n}|gamma={:.11e}|lambda={:.11e}|{}",
            round_sig(gamma, 12),
            round_sig(lambda, 12),
            version_tag()
        );
        let digest = hex::encode(Sha256::digest(material.as_bytes()));
        Self { digest, material }
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn material(&self) -> &str {
        &self.material
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    key: String,
    bits: Vec<String>,
}

#[derive(Debug, Default)]
pub struct CacheStats {
    pub hits: AtomicU64,
    pub misses: AtomicU64,
    pub corrupt: AtomicU64,
}

#[derive(Debug)]
pub struct Cache {
    root: PathBuf,
    pub stats: CacheStats,
}

impl Cache {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            stats: CacheStats::default(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.root.join(&key.digest[..2]).join(format!("{}.json", key.digest))
    }

    /// `None` on a miss. Unreadable or mismatching entries count as misses.
    pub fn load(&self, key: &CacheKey) -> Option<Vec<f64>> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => {
                self.stats.misses.fetch_add(1, Ordering::Relaxed);
                return None;
            }
        };
        match decode(&text, key) {
            Some(v) => {
                self.stats.hits.fetch_add(1, Ordering::Relaxed);
                Some(v)
            }
            None => {
                log::warn!("ignoring corrupted cache entry {}", path.display());
                self.stats.corrupt.fetch_add(1, Ordering::Relaxed);
                self.stats.misses.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    /// Stores `values`. If a valid entry already exists it must hold the
    /// same bits.
    pub fn store(&self, key: &CacheKey, values: &[f64]) -> Result<()> {
        let path = self.path(key);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Some(existing) = decode(&text, key) {
                let same = existing.len() == values.len()
                    && existing.iter().zip(values).all(|(a, b)| a.to_bits() == b.to_bits());
                if !same {
                    return Err(Error::numerical(format!(
                        "cache entry {} disagrees with a fresh computation",
                        key.material
                    )));
                }
                return Ok(());
            }
        }
        let dir = path.parent().expect("entry paths have a parent");
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let entry = Entry {
            key: key.material.clone(),
            bits: values.iter().map(|v| format!("{:016x}", v.to_bits())).collect(),
        };
        let json = serde_json::to_string(&entry).expect("entry serializes");
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(json.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        Ok(())
    }

    /// Returns the cached value or computes and stores it.
    pub fn get_or_compute(&self, key: &CacheKey, f: impl FnOnce() -> Result<Vec<f64>>) -> Result<Vec<f64>> {
        if let Some(v) = self.load(key) {
            return Ok(v);
        }
        let v = f()?;
        self.store(key, &v)?;
        Ok(v)
    }
}

fn decode(text: &str, key: &CacheKey) -> Option<Vec<f64>> {
    let entry: Entry = serde_json::from_str(text).ok()?;
    if entry.key != key.material {
        return None;
    }
    entry
        .bits
        .iter()
        .map(|b| u64::from_str_radix(b, 16).ok().map(f64::from_bits))
        .collect()
}

/// Optional cache: every operation is a pass-through when disabled.
pub fn cached(
    cache: Option<&Cache>,
    key: impl FnOnce() -> CacheKey,
    f: impl FnOnce() -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    match cache {
        Some(c) => c.get_or_compute(&key(), f),
        None => f(),
    }
}
