//! Dataset download with a content-addressed cache.
//!
//! Cache layout under the cache directory, keyed by the manifest checksum:
//!
//! ```text
//! <sha256>.json        the verified payload
//! <sha256>.meta.json   manifest echo (no timestamps, byte-stable)
//! <sha256>.lock        held while a process downloads or verifies
//! <sha256>.json.corrupt-<n>   quarantined entries that failed verification
//! ```
//!
//! Every cache hit is re-hashed before use; a corrupted entry is moved
//! aside (never deleted — it may be wanted for debugging) and fetched
//! again. Downloads stream through the hasher into a temp file and are
//! renamed into place only after the checksum matches, so a crash or a
//! mismatch never leaves a bad file at the final path.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, XtalError};
use crate::fsutil;

/// Where to get a dataset and how to know it arrived intact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub source_url: String,
    /// Expected SHA-256 of the payload, 64 lowercase hex digits.
    pub sha256: String,
    /// Expected number of records, if known; checked by callers, not here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_count: Option<u64>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(XtalError::InvalidManifest("name must not be empty".into()));
        }
        if !(self.source_url.starts_with("http://") || self.source_url.starts_with("https://")) {
            return Err(XtalError::InvalidManifest(format!(
                "source_url {:?} must start with http:// or https://",
                self.source_url
            )));
        }
        if self.sha256.len() != 64
            || !self
                .sha256
                .bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        {
            return Err(XtalError::InvalidManifest(format!(
                "sha256 {:?} must be 64 lowercase hex digits",
                self.sha256
            )));
        }
        Ok(())
    }
}

/// Parse a manifest JSON file and validate it.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = crate::fsutil::read_text(path)?;
    let manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| XtalError::InvalidManifest(format!("{}: {e}", path.display())))?;
    manifest.validate()?;
    Ok(manifest)
}

/// Removes the lock file when the holder is done (including on panic).
struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Take an exclusive advisory lock via `create_new`, retrying for ~30 s.
/// A stale lock from a killed process blocks fetches until removed; the
/// timeout error names the file so the operator knows what to delete.
fn acquire_lock(path: &Path) -> Result<LockGuard> {
    for _ in 0..600 {
        match fs::OpenOptions::new().write(true).create_new(true).open(path) {
            Ok(_) => {
                return Ok(LockGuard {
                    path: path.to_path_buf(),
                })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                std::thread::sleep(Duration::from_millis(50));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(XtalError::Io(io::Error::new(
        io::ErrorKind::TimedOut,
        format!(
            "timed out waiting for cache lock {} (remove it if no other fetch is running)",
            path.display()
        ),
    )))
}

/// SHA-256 of a file, streamed.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Return the cached path for `manifest`, downloading if needed.
///
/// Concurrent calls for the same checksum serialize on a lock file, so
/// exactly one process downloads while the rest wait and then hit cache.
pub fn fetch_dataset(manifest: &DatasetManifest, cache_dir: &Path) -> Result<PathBuf> {
    manifest.validate()?;
    fs::create_dir_all(cache_dir)?;
    let data_path = cache_dir.join(format!("{}.json", manifest.sha256));
    let lock_path = cache_dir.join(format!("{}.lock", manifest.sha256));
    let _lock = acquire_lock(&lock_path)?;

    if data_path.exists() {
        let actual = sha256_file(&data_path)?;
        if actual == manifest.sha256 {
            return Ok(data_path);
        }
        quarantine(&data_path)?;
    }

    download_verified(manifest, &data_path)?;
    let meta = serde_json::to_string_pretty(manifest)
        .map_err(|e| XtalError::InvalidManifest(e.to_string()))?;
    fsutil::write_atomic(
        &cache_dir.join(format!("{}.meta.json", manifest.sha256)),
        meta.as_bytes(),
    )?;
    Ok(data_path)
}

/// Move a failed cache entry to `<name>.corrupt-<n>` instead of deleting it.
fn quarantine(path: &Path) -> Result<()> {
    for n in 0.. {
        let candidate = path.with_file_name(format!(
            "{}.corrupt-{n}",
            path.file_name().unwrap_or_default().to_string_lossy()
        ));
        if !candidate.exists() {
            fs::rename(path, &candidate)?;
            return Ok(());
        }
    }
    unreachable!()
}

fn download_verified(manifest: &DatasetManifest, data_path: &Path) -> Result<()> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(600)))
        .build()
        .into();
    let url = &manifest.source_url;
    let mut resp = agent.get(url).call().map_err(|e| XtalError::Network {
        url: url.clone(),
        detail: e.to_string(),
    })?;

    let (mut tmp, tmp_path) = fsutil::create_unique_sibling(data_path)?;
    let mut hasher = Sha256::new();
    let mut reader = resp.body_mut().as_reader();
    let mut buf = [0u8; 65536];
    let stream_result: Result<()> = loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break Ok(()),
            Ok(n) => n,
            // a read failure here is the connection, not the disk
            Err(e) => {
                break Err(XtalError::Network {
                    url: url.clone(),
                    detail: e.to_string(),
                })
            }
        };
        hasher.update(&buf[..n]);
        if let Err(e) = tmp.write_all(&buf[..n]) {
            break Err(e.into());
        }
    };
    if let Err(e) = stream_result.and_then(|()| tmp.flush().map_err(Into::into)) {
        drop(tmp);
        let _ = fs::remove_file(&tmp_path);
        return Err(e);
    }
    drop(tmp);

    let actual = hex::encode(hasher.finalize());
    if actual != manifest.sha256 {
        let _ = fs::remove_file(&tmp_path);
        return Err(XtalError::ChecksumMismatch {
            path: data_path.to_path_buf(),
            expected: manifest.sha256.clone(),
            actual,
        });
    }
    fs::rename(&tmp_path, data_path)?;
    Ok(())
}
