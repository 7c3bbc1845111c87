use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::args::UNECHOED_FLAGS;

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| panelcheck::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// The invocation with output locations and thread counts removed.
pub fn command_echo(args: impl IntoIterator<Item = OsString>) -> Vec<String> {
    let mut echo = Vec::new();
    let mut skip_value = false;
    for arg in args {
        let arg = arg.to_string_lossy().into_owned();
        if skip_value {
            skip_value = false;
            continue;
        }
        let flag = arg.split_once('=').map_or(arg.as_str(), |(f, _)| f);
        if UNECHOED_FLAGS.contains(&flag) {
            skip_value = !arg.contains('=');
            continue;
        }
        echo.push(arg);
    }
    echo
}

/// Everything a command writes, held until the whole computation succeeded.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    /// Writes each file through a sibling temporary and a rename, so a
    /// reader never sees a half-written artifact.
    pub fn commit(self, primary: Option<&Path>, primary_bytes: &[u8]) -> Result<()> {
        for (path, bytes) in &self.files {
            write_atomic(path, bytes)?;
        }
        match primary {
            Some(path) => write_atomic(path, primary_bytes),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(primary_bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("moving {} into place", path.display()))?;
    Ok(())
}
