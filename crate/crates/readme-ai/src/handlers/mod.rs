//! Typed handlers that turn a structured object into context items.

mod crawl;
mod download;
mod fetch;

use std::collections::BTreeMap;
use std::sync::Arc;

use readme_ai_core::item::{truncate_utf8, MAX_ITEM_TEXT_BYTES};
use readme_ai_core::{ContextItem, CrawlPolicy, Diagnostic, Origin, StructuredObject};

use crate::error::{DispatchError, RegisterError};
use crate::net::{Deadline, HttpClient};
use crate::pdf::{PdfTextExtractor, TextExtractor};
use crate::source::Checkout;

pub use crawl::{web_crawler, CrawlHandler};
pub use download::{download_and_extract, DownloadHandler};
pub use fetch::{fetch_data, FetchHandler};

/// Everything a handler may need besides the object itself.
#[derive(Clone)]
pub struct HandlerContext {
    pub checkout: Checkout,
    pub policy: CrawlPolicy,
    pub deadline: Deadline,
    pub http: HttpClient,
    pub extractor: Arc<dyn TextExtractor>,
}

impl HandlerContext {
    pub fn new(checkout: Checkout, policy: CrawlPolicy) -> Self {
        HandlerContext {
            checkout,
            policy,
            deadline: Deadline::none(),
            http: HttpClient::new(),
            extractor: Arc::new(PdfTextExtractor),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HandlerOutput {
    /// In data order. Failed elements are present with `error` set.
    pub items: Vec<ContextItem>,
    pub diagnostics: Vec<Diagnostic>,
    /// Elements dropped without an item (policy, binary, unsupported).
    pub skipped: usize,
}

impl HandlerOutput {
    pub(crate) fn skip(&mut self, diagnostic: Diagnostic) {
        self.skipped += 1;
        self.diagnostics.push(diagnostic);
    }
}

pub trait Handler: Send + Sync {
    /// `key` is the document entry key, used for diagnostic paths.
    fn handle(&self, key: &str, obj: &StructuredObject, ctx: &HandlerContext) -> HandlerOutput;
}

impl<F> Handler for F
where
    F: Fn(&str, &StructuredObject, &HandlerContext) -> HandlerOutput + Send + Sync,
{
    fn handle(&self, key: &str, obj: &StructuredObject, ctx: &HandlerContext) -> HandlerOutput {
        self(key, obj, ctx)
    }
}

/// Type tag to handler. The three built-ins are always present.
#[derive(Clone)]
pub struct HandlerRegistry {
    handlers: BTreeMap<String, Arc<dyn Handler>>,
}

impl Default for HandlerRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl HandlerRegistry {
    pub fn new() -> Self {
        let mut handlers: BTreeMap<String, Arc<dyn Handler>> = BTreeMap::new();
        handlers.insert("fetch".into(), Arc::new(FetchHandler));
        handlers.insert("crawl".into(), Arc::new(CrawlHandler));
        handlers.insert("download".into(), Arc::new(DownloadHandler));
        HandlerRegistry { handlers }
    }

    /// Installs `handler` for `tag` (lowercased). An existing tag is only
    /// replaced when `replace` is set.
    pub fn register(&mut self, tag: &str, handler: Arc<dyn Handler>, replace: bool) -> Result<(), RegisterError> {
        let tag = tag.trim().to_lowercase();
        if tag.is_empty() {
            return Err(RegisterError::EmptyTag);
        }
        if self.handlers.contains_key(&tag) && !replace {
            return Err(RegisterError::Exists(tag));
        }
        self.handlers.insert(tag, handler);
        Ok(())
    }

    pub fn get(&self, tag: &str) -> Option<&Arc<dyn Handler>> {
        self.handlers.get(tag)
    }

    pub fn tags(&self) -> Vec<String> {
        self.handlers.keys().cloned().collect()
    }

    pub fn dispatch(
        &self,
        key: &str,
        obj: &StructuredObject,
        ctx: &HandlerContext,
    ) -> Result<HandlerOutput, DispatchError> {
        let handler = self
            .get(&obj.type_tag)
            .ok_or_else(|| DispatchError::UnregisteredTag { tag: obj.type_tag.clone(), registered: self.tags() })?;
        Ok(handler.handle(key, obj, ctx))
    }
}

/// An item whose content is capped at the per-item limit. `cut` records
/// that the source was already cut upstream.
pub(crate) fn text_item(origin: Origin, label: impl Into<String>, mut content: String, cut: bool) -> ContextItem {
    let capped = truncate_utf8(&mut content, MAX_ITEM_TEXT_BYTES);
    let mut item = ContextItem::new(origin, label, content);
    item.truncated = cut || capped;
    item
}

/// `/key` or `/key/data/i` style diagnostic path.
pub(crate) fn data_path(key: &str, index: usize) -> String {
    let base = readme_ai_core::diagnostic::pointer_push("", key);
    let base = readme_ai_core::diagnostic::pointer_push(&base, "data");
    readme_ai_core::diagnostic::pointer_push(&base, &index.to_string())
}
