//! `download`: fetch whole documents (PDF or text) and extract their text.

use std::fs;
use std::io::Read;

use readme_ai_core::{ContextItem, CrawlPolicy, Diagnostic, Origin, StructuredObject};
use url::Url;

use super::{data_path, text_item, Handler, HandlerContext, HandlerOutput};
use crate::html;
use crate::net::{Deadline, HttpClient};
use crate::pdf::{looks_like_pdf, TextExtractor};

#[derive(Debug, Default, Clone, Copy)]
pub struct DownloadHandler;

impl Handler for DownloadHandler {
    fn handle(&self, key: &str, obj: &StructuredObject, ctx: &HandlerContext) -> HandlerOutput {
        let urls: Vec<(&str, Option<&str>)> = obj.data.iter().collect();
        download_and_extract(key, &urls, &ctx.policy, &ctx.http, ctx.extractor.as_ref(), ctx.deadline)
    }
}

struct Payload {
    content_type: Option<String>,
    body: Vec<u8>,
}

fn is_textual(content_type: &str) -> bool {
    content_type.starts_with("text/")
        || matches!(content_type, "application/json" | "application/xml" | "application/javascript")
        || content_type.ends_with("+json")
        || content_type.ends_with("+xml")
}

/// Downloads each URL in order. One item per URL, except unsupported
/// binary payloads, which are skipped with a diagnostic.
pub fn download_and_extract(
    key: &str,
    urls: &[(&str, Option<&str>)],
    policy: &CrawlPolicy,
    http: &HttpClient,
    extractor: &dyn TextExtractor,
    deadline: Deadline,
) -> HandlerOutput {
    let mut out = HandlerOutput::default();
    for (index, &(raw, description)) in urls.iter().enumerate() {
        let label = raw.trim();
        let fail =
            |message: String| ContextItem::failed(Origin::Download, label, message).with_description(description);
        if deadline.expired() {
            out.items.push(fail("deadline exceeded".into()));
            continue;
        }
        let payload = match fetch(label, policy, http, deadline) {
            Ok(p) => p,
            Err(message) => {
                out.items.push(fail(message));
                continue;
            }
        };
        let ct = payload.content_type.as_deref();
        let text = if ct == Some("application/pdf") || looks_like_pdf(&payload.body) {
            match extractor.extract(&payload.body) {
                Ok(text) => text,
                Err(e) => {
                    out.items.push(fail(format!("PDF extraction failed: {e}")));
                    continue;
                }
            }
        } else if matches!(ct, Some("text/html" | "application/xhtml+xml")) {
            html::extract(&String::from_utf8_lossy(&payload.body)).text
        } else if ct.is_some_and(is_textual) || (ct.is_none() && sniff_text(&payload.body)) {
            String::from_utf8_lossy(&payload.body).into_owned()
        } else {
            let ct = ct.unwrap_or("unknown");
            out.skip(Diagnostic::warning(data_path(key, index), format!("{label}: unsupported binary format `{ct}`")));
            continue;
        };
        out.items.push(text_item(Origin::Download, label, text, false).with_description(description));
    }
    out
}

fn sniff_text(body: &[u8]) -> bool {
    let head = &body[..body.len().min(super::fetch::BINARY_SNIFF_BYTES)];
    !head.contains(&0) && std::str::from_utf8(body).is_ok()
}

fn fetch(raw: &str, policy: &CrawlPolicy, http: &HttpClient, deadline: Deadline) -> Result<Payload, String> {
    let url = Url::parse(raw).map_err(|e| format!("invalid URL: {e}"))?;
    let cap = policy.max_download_bytes;
    match url.scheme() {
        "file" => {
            let path = url.to_file_path().map_err(|_| "invalid file URL".to_string())?;
            let file = fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let mut body = Vec::new();
            file.take(cap as u64 + 1).read_to_end(&mut body).map_err(|e| e.to_string())?;
            if body.len() > cap {
                return Err(format!("payload exceeds the {cap}-byte download cap"));
            }
            Ok(Payload { content_type: None, body })
        }
        "http" | "https" => {
            let permit = |u: &Url| u.host_str().is_some_and(|h| policy.is_host_permitted(h));
            let fetched = http
                .get(&url, policy.timeout, policy.request_delay, cap, deadline, &permit)
                .map_err(|e| e.to_string())?;
            if fetched.truncated {
                return Err(format!("payload exceeds the {cap}-byte download cap"));
            }
            Ok(Payload { content_type: fetched.content_type, body: fetched.body })
        }
        other => Err(format!("unsupported URL scheme `{other}`")),
    }
}
