//! Source-file enumeration.
//!
//! Produces the `.c` files to verify in a deterministic order: single-file
//! targets yield exactly that file, directory targets yield the `*.c` files
//! directly inside, and recursive targets walk the whole subtree. Output is
//! always sorted lexicographically on the normalized path so repeated runs
//! see the same schedule.

use std::path::{Component, Path, PathBuf};

use walkdir::WalkDir;

use crate::config::{RunConfig, Target};
use crate::{Error, Result};

/// One enumerated C source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Normalized path (no `.` components, `..` collapsed where possible).
    pub path: PathBuf,
    pub size_bytes: u64,
    pub line_count: u64,
}

/// Enumerate the source files selected by the configuration.
///
/// Unreadable subdirectories and files are recorded as warnings and skipped;
/// a missing target or a single-file target that is not a `.c` file is fatal.
pub fn list_sources(config: &RunConfig, warnings: &mut Vec<String>) -> Result<Vec<SourceFile>> {
    match &config.target {
        Target::File(path) => {
            if !path.exists() {
                return Err(Error::Input(format!(
                    "target `{}` does not exist",
                    path.display()
                )));
            }
            if !is_c_file(path) {
                return Err(Error::Input(format!(
                    "target `{}` is not a .c file",
                    path.display()
                )));
            }
            let file = stat_source(&normalize_path(path))
                .map_err(|e| Error::input(format!("cannot read `{}`", path.display()), e))?;
            Ok(vec![file])
        }
        Target::Directory(dir) => {
            if !dir.is_dir() {
                return Err(Error::Input(format!(
                    "target directory `{}` does not exist",
                    dir.display()
                )));
            }
            let mut out = Vec::new();
            let max_depth = if config.recursive { usize::MAX } else { 1 };
            let walker = WalkDir::new(dir)
                .max_depth(max_depth)
                .follow_links(false)
                .into_iter()
                // Hidden directories (VCS metadata and the like) are skipped;
                // the root itself is always allowed even if its name is dotted.
                .filter_entry(|e| {
                    e.depth() == 0 || !(e.file_type().is_dir() && is_hidden(e.file_name()))
                });
            for entry in walker {
                let entry = match entry {
                    Ok(e) => e,
                    Err(e) => {
                        warnings.push(format!("skipping unreadable directory entry: {e}"));
                        continue;
                    }
                };
                if entry.depth() == 0 || !is_c_file(entry.path()) {
                    continue;
                }
                // Metadata follows symlinks, so a link to a regular .c file
                // still counts; links to directories were not descended into.
                let is_file = entry
                    .path()
                    .metadata()
                    .map(|m| m.is_file())
                    .unwrap_or(false);
                if !is_file {
                    continue;
                }
                match stat_source(&normalize_path(entry.path())) {
                    Ok(f) => out.push(f),
                    Err(e) => {
                        warnings.push(format!(
                            "skipping unreadable file `{}`: {e}",
                            entry.path().display()
                        ));
                    }
                }
            }
            out.sort_by(|a, b| a.path.as_os_str().cmp(b.path.as_os_str()));
            Ok(out)
        }
    }
}

fn is_c_file(path: &Path) -> bool {
    path.extension().map(|e| e == "c").unwrap_or(false)
}

fn is_hidden(name: &std::ffi::OsStr) -> bool {
    name.to_string_lossy().starts_with('.')
}

fn stat_source(path: &Path) -> std::io::Result<SourceFile> {
    let meta = std::fs::metadata(path)?;
    let bytes = std::fs::read(path)?;
    let mut line_count = bytes.iter().filter(|b| **b == b'\n').count() as u64;
    if !bytes.is_empty() && bytes.last() != Some(&b'\n') {
        line_count += 1;
    }
    Ok(SourceFile {
        path: path.to_path_buf(),
        size_bytes: meta.len(),
        line_count,
    })
}

/// Lexical path cleanup: drops `.` components and collapses `x/..` pairs
/// without touching the file system.
pub fn normalize_path(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for comp in path.components() {
        match comp {
            Component::CurDir => {}
            Component::ParentDir => {
                let popped = matches!(
                    out.components().next_back(),
                    Some(Component::Normal(_))
                ) && out.pop();
                if !popped {
                    out.push("..");
                }
            }
            other => out.push(other.as_os_str()),
        }
    }
    if out.as_os_str().is_empty() {
        out.push(".");
    }
    out
}
