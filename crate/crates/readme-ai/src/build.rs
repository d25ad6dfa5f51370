//! Orchestration: document entries to a context tree plus a report.

use std::sync::Arc;
use std::thread;
use std::time::Instant;

use readme_ai_core::diagnostic::pointer_push;
use readme_ai_core::{
    count_tokens, normalize_tag, serialize_xml, BuildReport, ContextNode, ContextTree, CrawlPolicy, Diagnostic, Entry,
    ReadmeAiDocument, StructuredObject,
};

use crate::error::{BuildError, DispatchError};
use crate::handlers::{HandlerContext, HandlerOutput, HandlerRegistry};
use crate::net::{Deadline, HttpClient};
use crate::pdf::{PdfTextExtractor, TextExtractor};
use crate::source::Checkout;

/// Shared services handed to every handler.
#[derive(Clone)]
pub struct BuildEnv {
    pub http: HttpClient,
    pub extractor: Arc<dyn TextExtractor>,
}

impl Default for BuildEnv {
    fn default() -> Self {
        BuildEnv { http: HttpClient::new(), extractor: Arc::new(PdfTextExtractor) }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Keep only these entries. Matched case-insensitively against the key
    /// or its element name.
    pub include_keys: Option<Vec<String>>,
    /// Unknown type tags become warnings instead of failing the build.
    pub lenient: bool,
    pub deadline: Deadline,
}

fn selected(key: &str, include: &[String]) -> bool {
    include.iter().any(|k| k.trim().eq_ignore_ascii_case(key) || normalize_tag(k.trim()) == normalize_tag(key))
}

/// Runs the handlers for every selected entry and assembles the tree in
/// document order. Handlers for different entries run concurrently.
pub fn build_context(
    doc: &ReadmeAiDocument,
    checkout: &Checkout,
    registry: &HandlerRegistry,
    policy: &CrawlPolicy,
    env: &BuildEnv,
    options: &BuildOptions,
) -> Result<(ContextTree, BuildReport), BuildError> {
    let start = Instant::now();
    let mut report = BuildReport::default();

    let mut entries: Vec<(&str, &Entry)> = Vec::new();
    let mut considered = 0usize;
    for (key, entry) in &doc.entries {
        if options.include_keys.as_deref().is_some_and(|inc| !selected(key, inc)) {
            continue;
        }
        considered += 1;
        if let Entry::Structured(obj) = entry {
            if registry.get(&obj.type_tag).is_none() {
                let err = DispatchError::UnregisteredTag { tag: obj.type_tag.clone(), registered: registry.tags() };
                if !options.lenient {
                    return Err(BuildError::Dispatch { key: key.clone(), source: err });
                }
                report.diagnostics.push(Diagnostic::warning(
                    pointer_push(&pointer_push("", key), "type"),
                    format!("{err}; entry skipped"),
                ));
                continue;
            }
        }
        entries.push((key, entry));
    }
    if let Some(include) = &options.include_keys {
        for k in include {
            if !doc.entries.iter().any(|(key, _)| selected(key, std::slice::from_ref(k))) {
                report
                    .diagnostics
                    .push(Diagnostic::warning("/", format!("include key `{}` matches no entry", k.trim())));
            }
        }
    }

    let ctx = HandlerContext {
        checkout: checkout.clone(),
        policy: policy.clone(),
        deadline: options.deadline,
        http: env.http.clone(),
        extractor: env.extractor.clone(),
    };
    let outputs: Vec<Option<HandlerOutput>> = thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|&(key, entry)| match entry {
                Entry::Structured(obj) => Some(scope.spawn(|| run(registry, key, obj, &ctx))),
                Entry::Text(_) => None,
            })
            .collect();
        handles.into_iter().map(|h| h.map(|h| h.join().unwrap_or_default())).collect()
    });

    let mut tree = ContextTree::default();
    let mut processed = 0usize;
    for ((key, entry), output) in entries.iter().zip(outputs) {
        let at = pointer_push("", key);
        let node = match (entry, output) {
            (Entry::Text(text), _) => ContextNode::text(key, text.clone()),
            (Entry::Structured(_), Some(out)) => {
                report.items_total += out.items.len() + out.skipped;
                report.items_failed += out.skipped;
                report.diagnostics.extend(out.diagnostics);
                for item in out.items.iter().filter(|i| i.is_error()) {
                    report.items_failed += 1;
                    let reason = item.error.as_deref().unwrap_or_default();
                    report.diagnostics.push(Diagnostic::error(&at, format!("{}: {reason}", item.label)));
                }
                let node = ContextNode::from_items(key, &out.items);
                if node.children.is_empty() {
                    report.diagnostics.push(Diagnostic::warning(&at, "entry produced no content; omitted"));
                    continue;
                }
                node
            }
            (Entry::Structured(_), None) => continue,
        };
        processed += 1;
        tree.nodes.push(node);
    }

    report.token_count = count_tokens(&serialize_xml(&tree));
    report.duration = start.elapsed();
    if processed == 0 && considered > 0 {
        return Err(BuildError::NothingProcessed { report });
    }
    Ok((tree, report))
}

fn run(registry: &HandlerRegistry, key: &str, obj: &StructuredObject, ctx: &HandlerContext) -> HandlerOutput {
    match registry.dispatch(key, obj, ctx) {
        Ok(out) => out,
        Err(e) => HandlerOutput {
            diagnostics: vec![Diagnostic::error(pointer_push("", key), e.to_string())],
            ..Default::default()
        },
    }
}
