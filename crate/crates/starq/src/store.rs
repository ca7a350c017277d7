//! Object-store abstraction the worker publishes results through.
//!
//! Keys are opaque slash-delimited paths like `results/SRR123/result.json`.
//! The trait mirrors the minimal bucket operations the pipeline needs, so
//! a remote backend could slot in later; the shipped implementation maps
//! keys onto a local directory tree with atomic writes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid object key '{key}': {reason}")]
    InvalidKey { key: String, reason: &'static str },
    #[error("no object at key '{0}'")]
    NotFound(String),
    #[error("object store i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Minimal blob-store contract: write, read, enumerate. Writes are
/// whole-object and last-writer-wins; a reader in the same process sees
/// its own writes immediately.
pub trait ObjectStore: Send + Sync {
    fn put(&self, key: &str, bytes: &[u8]) -> Result<(), StoreError>;
    fn get(&self, key: &str) -> Result<Vec<u8>, StoreError>;
    /// All keys starting with `prefix`, sorted. An empty prefix lists
    /// everything.
    fn list(&self, prefix: &str) -> Result<Vec<String>, StoreError>;
}

/// Keys must be relative slash-delimited paths with sane segments, so
/// they can never escape the store root when mapped to a filesystem.
fn check_key(key: &str) -> Result<(), StoreError> {
    let fail = |reason| {
        Err(StoreError::InvalidKey {
            key: key.to_string(),
            reason,
        })
    };
    if key.is_empty() {
        return fail("empty key");
    }
    if key.starts_with('/') || key.ends_with('/') {
        return fail("leading or trailing slash");
    }
    if key.contains('\\') {
        return fail("backslash in key");
    }
    for segment in key.split('/') {
        match segment {
            "" => return fail("empty path segment"),
            "." | ".." => return fail("relative path segment"),
            _ => {}
        }
    }
    Ok(())
}

/// Replaces characters that would break a key when embedding an
/// arbitrary identifier into one.
pub fn key_segment(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '-'
            }
        })
        .collect();
    if cleaned.is_empty() || cleaned.chars().all(|c| c == '.') {
        "unnamed".to_string()
    } else {
        cleaned
    }
}

/// Directory-backed object store. Each key is one file under the root;
/// puts stage to a hidden temp directory and rename into place, so
/// readers never observe partial objects.
pub struct FsObjectStore {
    root: PathBuf,
}

impl FsObjectStore {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let staging = root.join(".staging");
        fs::create_dir_all(&staging).map_err(|source| StoreError::Io {
            path: staging,
            source,
        })?;
        Ok(FsObjectStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn object_path(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }
}

impl ObjectStore for FsObjectStore {
    fn put(&self, key: &str, bytes: &[u8]) -> Result<(), StoreError> {
        check_key(key)?;
        let target = self.object_path(key);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|source| StoreError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        let staging = self.root.join(".staging").join(format!(
            "{:08x}_{}",
            rand::random::<u32>(),
            key_segment(key.rsplit('/').next().unwrap_or(key)),
        ));
        let write = || -> io::Result<()> {
            let mut f = fs::File::create(&staging)?;
            use io::Write;
            f.write_all(bytes)?;
            f.sync_all()
        };
        write().map_err(|source| StoreError::Io {
            path: staging.clone(),
            source,
        })?;
        fs::rename(&staging, &target).map_err(|source| StoreError::Io {
            path: target,
            source,
        })
    }

    fn get(&self, key: &str) -> Result<Vec<u8>, StoreError> {
        check_key(key)?;
        let path = self.object_path(key);
        match fs::read(&path) {
            Ok(bytes) => Ok(bytes),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                Err(StoreError::NotFound(key.to_string()))
            }
            Err(source) => Err(StoreError::Io { path, source }),
        }
    }

    fn list(&self, prefix: &str) -> Result<Vec<String>, StoreError> {
        if !prefix.is_empty() {
            // A prefix is a string prefix over keys, not a directory, so
            // only the segments are validated.
            let probe = prefix.trim_end_matches('/');
            check_key(probe)?;
        }
        let mut keys = Vec::new();
        for entry in walkdir::WalkDir::new(&self.root).min_depth(1) {
            let entry = entry.map_err(|e| StoreError::Io {
                path: self.root.clone(),
                source: e.into(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(&self.root)
                .expect("walk stays under root");
            let Some(key) = rel.to_str() else { continue };
            if key.starts_with(".staging/") {
                continue;
            }
            if key.starts_with(prefix) {
                keys.push(key.to_string());
            }
        }
        keys.sort();
        Ok(keys)
    }
}
