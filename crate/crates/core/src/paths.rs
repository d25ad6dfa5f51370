//! Lexical handling of repository-relative data paths.
//!
//! A leading `/` means "relative to the repository root". Anything that
//! would climb above the root is rejected before the filesystem is touched.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathError {
    Empty,
    /// Host-absolute forms: `//server`, `\\server`, `C:`, `~`.
    Absolute,
    /// `..` segments climb above the repository root.
    Escape,
    /// Embedded NUL.
    Invalid,
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathError::Empty => "empty path",
            PathError::Absolute => "absolute filesystem paths are not allowed",
            PathError::Escape => "path escapes the repository root",
            PathError::Invalid => "path contains a NUL byte",
        })
    }
}

/// Normalizes a data path to `a/b/c` form relative to the repository root.
///
/// Backslashes are treated as separators. `.` segments are dropped and `..`
/// pops one segment. The empty result means the root itself.
pub fn normalize_data_path(raw: &str) -> Result<String, PathError> {
    if raw.trim().is_empty() {
        return Err(PathError::Empty);
    }
    if raw.contains('\0') {
        return Err(PathError::Invalid);
    }
    let unified: String = raw.chars().map(|c| if c == '\\' { '/' } else { c }).collect();
    let bytes = unified.as_bytes();
    if unified.starts_with("//") || unified.starts_with('~') {
        return Err(PathError::Absolute);
    }
    if bytes.len() >= 2 && bytes[0].is_ascii_alphabetic() && bytes[1] == b':' {
        return Err(PathError::Absolute);
    }
    let mut stack: Vec<&str> = Vec::new();
    for seg in unified.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                if stack.pop().is_none() {
                    return Err(PathError::Escape);
                }
            }
            s => stack.push(s),
        }
    }
    Ok(stack.join("/"))
}

/// True when the path uses glob syntax (`*`, `?`, `[`).
pub fn is_glob(path: &str) -> bool {
    path.contains(['*', '?', '['])
}

/// The leading run of segments that contain no glob syntax.
pub fn literal_prefix(normalized: &str) -> String {
    let mut parts = Vec::new();
    for seg in normalized.split('/') {
        if is_glob(seg) {
            break;
        }
        parts.push(seg);
    }
    // A fully literal path is its own file, so the prefix is its parent.
    if parts.len() == normalized.split('/').count() {
        parts.pop();
    }
    parts.join("/")
}

/// Segment-wise containment check on normalized `a/b` strings.
pub fn is_within(root: &str, candidate: &str) -> bool {
    if root.is_empty() {
        return true;
    }
    candidate == root || (candidate.starts_with(root) && candidate.as_bytes().get(root.len()) == Some(&b'/'))
}
