//! Filesystem helpers: atomic writes, shared by the fetch cache and the CLI.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Write `bytes` to `path` atomically: write to a unique temp file in the
/// same directory, then rename over the target. Readers never observe a
/// partial file; interrupted runs leave only a `.tmp-*` droppings file,
/// never a truncated output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let (mut f, tmp_path) = create_unique_sibling(path)?;
    if let Err(e) = f.write_all(bytes).and_then(|_| f.flush()) {
        drop(f);
        let _ = fs::remove_file(&tmp_path);
        return Err(e);
    }
    drop(f);
    match fs::rename(&tmp_path, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp_path);
            Err(e)
        }
    }
}

/// `fs::read_to_string` with the path prepended to any error — bare
/// "No such file or directory (os error 2)" is useless in a pipeline.
pub fn read_text(path: &Path) -> std::io::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Open a fresh temp file in `path`'s directory for streaming writes.
/// The caller renames it into place (or removes it on failure).
pub(crate) fn create_unique_sibling(path: &Path) -> std::io::Result<(fs::File, PathBuf)> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let mut attempt = 0u32;
    loop {
        let candidate = dir.join(format!(".{stem}.tmp-{}-{attempt}", std::process::id()));
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&candidate)
        {
            Ok(f) => return Ok((f, candidate)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists && attempt < 1000 => {
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
