//! Directory listing and filename-stem pairing of dataset artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CmdError;

/// Files in `dir` with one of `exts` (lowercase, no dot), sorted by name.
pub fn list_files(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>, CmdError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CmdError::Io(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CmdError::Io(format!("cannot read {}: {e}", dir.display())))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if exts.contains(&ext.as_str()) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Pairs two file lists by filename stem; any stem present on only one
/// side is reported as a misalignment.
pub fn pair_by_stem(
    left: &[PathBuf],
    right: &[PathBuf],
    what: (&str, &str),
) -> Result<Vec<(PathBuf, PathBuf)>, CmdError> {
    let mut right_by_stem: BTreeMap<String, PathBuf> = BTreeMap::new();
    for p in right {
        right_by_stem.insert(stem(p), p.clone());
    }
    let mut pairs = Vec::with_capacity(left.len());
    let mut missing = Vec::new();
    for p in left {
        match right_by_stem.remove(&stem(p)) {
            Some(r) => pairs.push((p.clone(), r)),
            None => missing.push(stem(p)),
        }
    }
    if !missing.is_empty() {
        return Err(CmdError::Misaligned(format!(
            "no {} for {}(s): {}",
            what.1,
            what.0,
            missing.join(", ")
        )));
    }
    if !right_by_stem.is_empty() {
        let extra: Vec<String> = right_by_stem.into_keys().collect();
        return Err(CmdError::Misaligned(format!(
            "no {} for {}(s): {}",
            what.0,
            what.1,
            extra.join(", ")
        )));
    }
    Ok(pairs)
}
