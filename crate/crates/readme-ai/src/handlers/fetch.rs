//! `fetch`: files from the checked-out repository.

use std::fs;
use std::path::{Path, PathBuf};

use globset::GlobBuilder;
use readme_ai_core::paths::{is_glob, literal_prefix, normalize_data_path, PathError};
use readme_ai_core::{ContextItem, DataSpec, Diagnostic, Origin, StructuredObject};
use walkdir::WalkDir;

use super::{data_path, text_item, Handler, HandlerContext, HandlerOutput};
use crate::source::Checkout;

/// Bytes inspected for a NUL when deciding a file is binary.
pub const BINARY_SNIFF_BYTES: usize = 8 * 1024;

#[derive(Debug, Default, Clone, Copy)]
pub struct FetchHandler;

impl Handler for FetchHandler {
    fn handle(&self, key: &str, obj: &StructuredObject, ctx: &HandlerContext) -> HandlerOutput {
        fetch_data(key, &ctx.checkout, &obj.data)
    }
}

/// Reads each data path (or glob) relative to the checkout root.
pub fn fetch_data(key: &str, checkout: &Checkout, data: &DataSpec) -> HandlerOutput {
    let mut out = HandlerOutput::default();
    let root = match fs::canonicalize(&checkout.root_path) {
        Ok(root) => root,
        Err(e) => {
            for (raw, _) in data.iter() {
                out.items.push(ContextItem::failed(Origin::Fetch, raw, format!("repository root unreadable: {e}")));
            }
            return out;
        }
    };

    for (index, (raw, description)) in data.iter().enumerate() {
        let at = data_path(key, index);
        let rel = match normalize_data_path(raw) {
            Ok(rel) => rel,
            Err(PathError::Empty) => {
                out.items.push(ContextItem::failed(Origin::Fetch, raw, "empty path").with_description(description));
                continue;
            }
            Err(e) => {
                out.skip(Diagnostic::error(at, format!("security: `{raw}` rejected: {e}")));
                continue;
            }
        };

        let files = if is_glob(&rel) {
            match expand_glob(&root, &rel) {
                Ok(files) if files.is_empty() => {
                    out.items.push(
                        ContextItem::failed(Origin::Fetch, raw, "no files match the pattern")
                            .with_description(description),
                    );
                    continue;
                }
                Ok(files) => files,
                Err(message) => {
                    out.items.push(ContextItem::failed(Origin::Fetch, raw, message).with_description(description));
                    continue;
                }
            }
        } else {
            let path = root.join(&rel);
            if path.is_dir() {
                out.items.push(ContextItem::failed(Origin::Fetch, raw, "is a directory").with_description(description));
                continue;
            }
            if !path.exists() {
                out.items.push(ContextItem::failed(Origin::Fetch, raw, "no such file").with_description(description));
                continue;
            }
            vec![rel]
        };

        for rel in files {
            let label = format!("/{rel}");
            match read_contained(&root, &rel) {
                Read::Text(content) => {
                    out.items.push(text_item(Origin::Fetch, &label, content, false).with_description(description))
                }
                Read::Escape => {
                    out.skip(Diagnostic::error(&at, format!("security: `{label}` resolves outside the repository")))
                }
                Read::Binary => out.skip(Diagnostic::warning(&at, format!("`{label}` looks binary; skipped"))),
                Read::Failed(e) => {
                    out.items.push(ContextItem::failed(Origin::Fetch, &label, e).with_description(description))
                }
            }
        }
    }
    out
}

/// Regular files under `root` matching `pattern`, as sorted `a/b` paths.
/// `*` and `?` stay within one segment; `**` crosses segments.
fn expand_glob(root: &Path, pattern: &str) -> Result<Vec<String>, String> {
    let matcher = GlobBuilder::new(pattern)
        .literal_separator(true)
        .backslash_escape(true)
        .build()
        .map_err(|e| format!("invalid pattern: {e}"))?
        .compile_matcher();
    let prefix = literal_prefix(pattern);
    let start = if prefix.is_empty() { root.to_path_buf() } else { root.join(&prefix) };
    if !start.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<String> = WalkDir::new(&start)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| e.file_name() != ".git")
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .filter_map(|e| relative(root, e.path()))
        .filter(|rel| matcher.is_match(rel))
        .collect();
    files.sort();
    Ok(files)
}

fn relative(root: &Path, path: &Path) -> Option<String> {
    let rel = path.strip_prefix(root).ok()?;
    let parts: Option<Vec<&str>> = rel.components().map(|c| c.as_os_str().to_str()).collect();
    Some(parts?.join("/"))
}

enum Read {
    Text(String),
    Escape,
    Binary,
    Failed(String),
}

/// Reads `root/rel` after checking the fully resolved path (symlinks
/// included) is still inside `root`.
fn read_contained(root: &Path, rel: &str) -> Read {
    let resolved: PathBuf = match fs::canonicalize(root.join(rel)) {
        Ok(p) => p,
        Err(e) => return Read::Failed(e.to_string()),
    };
    if !resolved.starts_with(root) {
        return Read::Escape;
    }
    if resolved.is_dir() {
        return Read::Failed("is a directory".into());
    }
    match fs::read(&resolved) {
        Ok(bytes) if bytes[..bytes.len().min(BINARY_SNIFF_BYTES)].contains(&0) => Read::Binary,
        Ok(bytes) => Read::Text(String::from_utf8_lossy(&bytes).into_owned()),
        Err(e) => Read::Failed(e.to_string()),
    }
}
