//! Zone files on disk.
//!
//! Writers replace the file atomically (temporary file in the same
//! directory, then rename), so a server polling the path never sees a
//! half-written zone.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use certdns_core::zone::ZoneError;
use certdns_core::Zone;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Zone { path: PathBuf, source: ZoneError },
}

pub fn load_zone(path: &Path) -> Result<Zone, StoreError> {
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io { path: path.into(), source })?;
    Zone::parse_master_file(&text).map_err(|source| StoreError::Zone { path: path.into(), source })
}

/// Writes `zone` to `path`, replacing any previous file in one step.
pub fn save_zone(path: &Path, zone: &Zone) -> Result<(), StoreError> {
    let io_err = |source| StoreError::Io { path: path.into(), source };
    let file_name = path.file_name().ok_or_else(|| io_err(io::Error::other("not a file path")))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp.{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let write = || -> io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(zone.to_master_file().as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(e)
    })
}
