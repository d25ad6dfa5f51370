use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::item::ContextItem;

/// Ordered, tagged context ready for serialization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextTree {
    pub nodes: Vec<ContextNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextNode {
    /// Matches `[A-Z][A-Z0-9_]*`.
    pub tag: String,
    pub text: Option<String>,
    pub children: Vec<ChildNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildNode {
    /// `file1`, `link2`, ...
    pub tag: String,
    /// Path or URL the content came from.
    pub source: Option<String>,
    pub description: Option<String>,
    pub content: String,
}

impl ContextNode {
    pub fn text(key: &str, text: impl Into<String>) -> Self {
        ContextNode { tag: normalize_tag(key), text: Some(text.into()), children: Vec::new() }
    }

    /// Builds a node from handler output. Failed items are dropped; ordinals
    /// count per stem and start at 1.
    pub fn from_items<'a>(key: &str, items: impl IntoIterator<Item = &'a ContextItem>) -> Self {
        let mut ordinals: BTreeMap<&'static str, usize> = BTreeMap::new();
        let children = items
            .into_iter()
            .filter(|item| !item.is_error())
            .map(|item| {
                let stem = item.origin.child_stem();
                let n = ordinals.entry(stem).or_insert(0);
                *n += 1;
                ChildNode {
                    tag: format!("{stem}{n}"),
                    source: Some(item.label.clone()),
                    description: item.description.clone(),
                    content: item.content.clone(),
                }
            })
            .collect();
        ContextNode { tag: normalize_tag(key), text: None, children }
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_none() && self.children.is_empty()
    }
}

/// Maps a document key to an element name.
///
/// ASCII letters, digits and `_` are kept (uppercased); everything else
/// becomes `_`. Names that would not start with a letter get an `X_` prefix.
pub fn normalize_tag(key: &str) -> String {
    let mut tag: String =
        key.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c.to_ascii_uppercase() } else { '_' }).collect();
    if !tag.starts_with(|c: char| c.is_ascii_uppercase()) {
        tag.insert_str(0, "X_");
    }
    tag
}

/// Checks the `[A-Z][A-Z0-9_]*` shape.
pub fn is_valid_tag(tag: &str) -> bool {
    let mut chars = tag.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// Drops characters XML 1.0 cannot carry: C0/C1 controls other than tab
/// and newline (so `\r` goes too), and the noncharacters U+FFFE / U+FFFF.
pub fn strip_control(text: &str) -> String {
    text.chars()
        .filter(|&c| !((c.is_control() && c != '\t' && c != '\n') || c == '\u{FFFE}' || c == '\u{FFFF}'))
        .collect()
}
