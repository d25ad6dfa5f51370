//! Core model for Readme_AI metadata files.
//!
//! This crate holds everything that does not touch the outside world: the
//! strict parser for `Readme_AI.json`, the lint layer, the context tree and
//! its XML / Markdown serializers, the token heuristic, path containment for
//! repository-relative data paths, and the crawl eligibility predicate.
//!
//! It is `no_std` and only needs an allocator. Networking, git, PDF handling
//! and the tool server live in the `readme-ai` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostic;
pub mod document;
pub mod item;
pub mod json;
pub mod markdown;
pub mod paths;
pub mod policy;
pub mod report;
pub mod tokens;
pub mod tree;
pub mod xml;

pub use diagnostic::{Diagnostic, Location, Severity};
pub use document::{
    parse_document, parse_document_with, validate_document, DataSpec, Entry, ParseOptions, ReadmeAiDocument,
    StructuredObject, BUILTIN_TAGS, DEFAULT_MAX_SPEC_BYTES,
};
pub use item::{ContextItem, Origin};
pub use markdown::serialize_markdown;
pub use policy::CrawlPolicy;
pub use report::BuildReport;
pub use tokens::count_tokens;
pub use tree::{normalize_tag, ChildNode, ContextNode, ContextTree};
pub use xml::serialize_xml;
