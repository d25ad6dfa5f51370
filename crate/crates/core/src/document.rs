//! The Readme_AI document model and its strict parser.
//!
//! A document is a JSON object whose members are either plain strings or
//! structured objects of the form `{"data": <list|map of strings>, "type": <tag>}`.
//! Member order is significant and preserved.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagnostic::{pointer_push, Diagnostic, Location};
use crate::json::{self, Member, Node, Value};

/// Default upper bound on the size of a metadata file.
pub const DEFAULT_MAX_SPEC_BYTES: usize = 10 * 1024 * 1024;

/// Type tags that ship with a handler.
pub const BUILTIN_TAGS: [&str; 3] = ["fetch", "crawl", "download"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadmeAiDocument {
    pub entries: Vec<(String, Entry)>,
    pub source_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Text(String),
    Structured(StructuredObject),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredObject {
    pub data: DataSpec,
    /// Always lowercase.
    pub type_tag: String,
    /// Members other than `data` and `type`, as compact JSON text.
    /// They are carried through but no built-in handler reads them.
    pub extensions: Vec<(String, String)>,
}

impl StructuredObject {
    pub fn new(data: DataSpec, type_tag: &str) -> Self {
        StructuredObject { data, type_tag: type_tag.to_lowercase(), extensions: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSpec {
    Items(Vec<String>),
    /// Ordered `(value, description)` pairs.
    Described(Vec<(String, String)>),
}

impl DataSpec {
    pub fn len(&self) -> usize {
        match self {
            DataSpec::Items(v) => v.len(),
            DataSpec::Described(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates `(value, description)` in source order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        let (items, described) = match self {
            DataSpec::Items(v) => (Some(v), None),
            DataSpec::Described(v) => (None, Some(v)),
        };
        items
            .into_iter()
            .flatten()
            .map(|s| (s.as_str(), None))
            .chain(described.into_iter().flatten().map(|(k, d)| (k.as_str(), Some(d.as_str()))))
    }
}

impl ReadmeAiDocument {
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pretty-printed JSON with two-space indentation and entries in model order.
    ///
    /// Single-string `data` is written back as a one-element list, which
    /// parses to the same model.
    pub fn to_canonical_json(&self) -> String {
        let mut out = String::new();
        if self.entries.is_empty() {
            out.push_str("{}\n");
            return out;
        }
        out.push_str("{\n");
        for (i, (key, entry)) in self.entries.iter().enumerate() {
            out.push_str("  ");
            json::write_string(&mut out, key);
            out.push_str(": ");
            match entry {
                Entry::Text(text) => json::write_string(&mut out, text),
                Entry::Structured(obj) => write_structured(&mut out, obj),
            }
            if i + 1 < self.entries.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("}\n");
        out
    }
}

fn write_structured(out: &mut String, obj: &StructuredObject) {
    out.push_str("{\n    \"data\": ");
    match &obj.data {
        DataSpec::Items(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                json::write_string(out, item);
            }
            out.push(']');
        }
        DataSpec::Described(pairs) => {
            out.push_str("{\n");
            for (i, (k, d)) in pairs.iter().enumerate() {
                out.push_str("      ");
                json::write_string(out, k);
                out.push_str(": ");
                json::write_string(out, d);
                if i + 1 < pairs.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str("    }");
        }
    }
    out.push_str(",\n    \"type\": ");
    json::write_string(out, &obj.type_tag);
    for (k, raw) in &obj.extensions {
        out.push_str(",\n    ");
        json::write_string(out, k);
        out.push_str(": ");
        out.push_str(raw);
    }
    out.push_str("\n  }");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub max_bytes: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { max_bytes: DEFAULT_MAX_SPEC_BYTES }
    }
}

pub fn parse_document(text: &str, source_path: &str) -> Result<ReadmeAiDocument, Vec<Diagnostic>> {
    parse_document_with(text, source_path, ParseOptions::default())
}

/// Parses and checks a metadata file against the grammar.
///
/// On failure every structural problem found is returned, not just the
/// first one. Syntax errors stop the scan, so they come alone.
pub fn parse_document_with(
    text: &str,
    source_path: &str,
    options: ParseOptions,
) -> Result<ReadmeAiDocument, Vec<Diagnostic>> {
    if text.len() > options.max_bytes {
        return Err(alloc::vec![Diagnostic::error(
            "",
            format!("file is {} bytes, limit is {} bytes", text.len(), options.max_bytes),
        )]);
    }
    let text_body = text.strip_prefix('\u{feff}').unwrap_or(text);
    let bom = text.len() - text_body.len();
    let root = match json::parse(text_body) {
        Ok(root) => root,
        Err(e) => {
            return Err(alloc::vec![Diagnostic::error("", format!("invalid JSON: {}", e.message))
                .at(Location::from_offset(text, e.offset + bom))]);
        }
    };

    let mut cx = Checker { text, bom, diags: Vec::new() };
    let members = match root.value {
        Value::Object(members) => members,
        other => {
            cx.error("", root.start, format!("top level must be an object, found {}", other.kind()));
            return Err(cx.diags);
        }
    };

    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(members.len());
    for Member { key, key_start, value } in members {
        let path = pointer_push("", &key);
        if key.is_empty() {
            cx.error(&path, key_start, "keys must be non-empty".to_string());
            continue;
        }
        if !seen.insert(key.clone()) {
            cx.error(&path, key_start, format!("duplicate key `{key}`"));
            continue;
        }
        if let Some(entry) = cx.entry(&path, value) {
            entries.push((key, entry));
        }
    }

    if cx.diags.is_empty() {
        Ok(ReadmeAiDocument { entries, source_path: source_path.to_string() })
    } else {
        Err(cx.diags)
    }
}

struct Checker<'a> {
    text: &'a str,
    bom: usize,
    diags: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn error(&mut self, path: &str, offset: usize, message: String) {
        let loc = Location::from_offset(self.text, offset + self.bom);
        self.diags.push(Diagnostic::error(path, message).at(loc));
    }

    fn entry(&mut self, path: &str, node: Node) -> Option<Entry> {
        match node.value {
            Value::String(s) => Some(Entry::Text(s)),
            Value::Object(members) => self.structured(path, node.start, members).map(Entry::Structured),
            other => {
                self.error(
                    path,
                    node.start,
                    format!("expected a string or a structured object, found {}", other.kind()),
                );
                None
            }
        }
    }

    fn structured(&mut self, path: &str, start: usize, members: Vec<Member>) -> Option<StructuredObject> {
        let before = self.diags.len();
        let mut data = None;
        let mut tag = None;
        let mut extensions = Vec::new();
        let mut seen = BTreeSet::new();
        for m in members {
            let field_path = pointer_push(path, &m.key);
            if !seen.insert(m.key.clone()) {
                self.error(&field_path, m.key_start, format!("duplicate field `{}`", m.key));
                continue;
            }
            match m.key.as_str() {
                "data" => data = self.data(&field_path, m.value),
                "type" => tag = self.type_tag(&field_path, m.value),
                _ => {
                    let mut raw = String::new();
                    json::write_compact(&mut raw, &m.value);
                    extensions.push((m.key, raw));
                }
            }
        }
        if !seen.contains("data") {
            self.error(path, start, "missing required field `data`".to_string());
        }
        if !seen.contains("type") {
            self.error(path, start, "missing required field `type`".to_string());
        }
        if self.diags.len() > before {
            return None;
        }
        Some(StructuredObject { data: data?, type_tag: tag?, extensions })
    }

    fn type_tag(&mut self, path: &str, node: Node) -> Option<String> {
        match node.value {
            Value::String(s) if !s.trim().is_empty() => Some(s.to_lowercase()),
            Value::String(_) => {
                self.error(path, node.start, "`type` must be a non-empty string".to_string());
                None
            }
            other => {
                self.error(path, node.start, format!("`type` must be a string, found {}", other.kind()));
                None
            }
        }
    }

    fn data(&mut self, path: &str, node: Node) -> Option<DataSpec> {
        match node.value {
            Value::String(s) => {
                if s.is_empty() {
                    self.error(path, node.start, "`data` entries must be non-empty strings".to_string());
                    return None;
                }
                Some(DataSpec::Items(alloc::vec![s]))
            }
            Value::Array(items) => {
                if items.is_empty() {
                    self.error(path, node.start, "`data` must not be empty".to_string());
                    return None;
                }
                let mut out = Vec::with_capacity(items.len());
                let mut ok = true;
                for (i, item) in items.into_iter().enumerate() {
                    let item_path = pointer_push(path, &i.to_string());
                    match item.value {
                        Value::String(s) if !s.is_empty() => out.push(s),
                        Value::String(_) => {
                            self.error(&item_path, item.start, "`data` entries must be non-empty strings".to_string());
                            ok = false;
                        }
                        other => {
                            self.error(
                                &item_path,
                                item.start,
                                format!("`data` list entries must be strings, found {}", other.kind()),
                            );
                            ok = false;
                        }
                    }
                }
                ok.then_some(DataSpec::Items(out))
            }
            Value::Object(members) => {
                if members.is_empty() {
                    self.error(path, node.start, "`data` must not be empty".to_string());
                    return None;
                }
                let mut out = Vec::with_capacity(members.len());
                let mut seen = BTreeMap::new();
                let mut ok = true;
                for m in members {
                    let item_path = pointer_push(path, &m.key);
                    if m.key.is_empty() {
                        self.error(&item_path, m.key_start, "`data` entries must be non-empty strings".to_string());
                        ok = false;
                        continue;
                    }
                    if seen.insert(m.key.clone(), ()).is_some() {
                        self.error(&item_path, m.key_start, format!("duplicate data entry `{}`", m.key));
                        ok = false;
                        continue;
                    }
                    match m.value.value {
                        Value::String(d) => out.push((m.key, d)),
                        other => {
                            self.error(
                                &item_path,
                                m.value.start,
                                format!("`data` descriptions must be strings, found {}", other.kind()),
                            );
                            ok = false;
                        }
                    }
                }
                ok.then_some(DataSpec::Described(out))
            }
            other => {
                self.error(
                    path,
                    node.start,
                    format!("`data` must be a list or map of strings, found {}", other.kind()),
                );
                None
            }
        }
    }
}

/// Lints a parsed document. Advisory only: everything returned is a warning.
pub fn validate_document(doc: &ReadmeAiDocument, known_tags: &BTreeSet<String>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut tags: BTreeMap<String, &str> = BTreeMap::new();
    for (key, entry) in &doc.entries {
        let path = pointer_push("", key);
        let tag = crate::tree::normalize_tag(key);
        if let Some(prev) = tags.get(&tag) {
            out.push(Diagnostic::warning(
                path.clone(),
                format!("key `{key}` and key `{prev}` both render as tag <{tag}>"),
            ));
        } else {
            tags.insert(tag, key);
        }
        match entry {
            Entry::Text(text) => {
                if text.trim().is_empty() {
                    out.push(Diagnostic::warning(path, "empty text value"));
                }
            }
            Entry::Structured(obj) => {
                if !known_tags.contains(&obj.type_tag) {
                    out.push(Diagnostic::warning(
                        pointer_push(&path, "type"),
                        format!("no handler is registered for type `{}`", obj.type_tag),
                    ));
                }
                if let DataSpec::Described(pairs) = &obj.data {
                    for (value, desc) in pairs {
                        if desc.trim().is_empty() {
                            out.push(Diagnostic::warning(
                                pointer_push(&pointer_push(&path, "data"), value),
                                "empty description",
                            ));
                        }
                    }
                }
                for (field, _) in &obj.extensions {
                    out.push(Diagnostic::warning(
                        pointer_push(&path, field),
                        format!("field `{field}` is not used by any built-in handler"),
                    ));
                }
            }
        }
    }
    out
}

/// The built-in tags as an owned set, for use with [`validate_document`].
pub fn builtin_tag_set() -> BTreeSet<String> {
    BUILTIN_TAGS.iter().map(|t| t.to_string()).collect()
}
