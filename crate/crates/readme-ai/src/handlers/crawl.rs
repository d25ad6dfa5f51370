//! `crawl`: breadth-first traversal of same-site web pages.

use std::collections::{BTreeSet, HashSet, VecDeque};

use readme_ai_core::{ContextItem, CrawlPolicy, Diagnostic, Origin, StructuredObject};
use url::Url;

use super::{data_path, text_item, Handler, HandlerContext, HandlerOutput};
use crate::html;
use crate::net::{canonicalize, Deadline, FetchError, HttpClient};

#[derive(Debug, Default, Clone, Copy)]
pub struct CrawlHandler;

impl Handler for CrawlHandler {
    fn handle(&self, key: &str, obj: &StructuredObject, ctx: &HandlerContext) -> HandlerOutput {
        let seeds: Vec<(&str, Option<&str>)> = obj.data.iter().collect();
        web_crawler(key, &seeds, &ctx.policy, &ctx.http, ctx.deadline)
    }
}

enum Body {
    Html,
    Text,
}

fn classify(content_type: Option<&str>) -> Option<Body> {
    match content_type? {
        "text/html" | "application/xhtml+xml" => Some(Body::Html),
        "text/plain" => Some(Body::Text),
        _ => None,
    }
}

/// Crawls each seed breadth-first. `max_pages` bounds the whole call, and
/// pages are visited at most once across all seeds. Within a page, links
/// are queued in lexicographic order of their canonical form.
pub fn web_crawler(
    key: &str,
    seeds: &[(&str, Option<&str>)],
    policy: &CrawlPolicy,
    http: &HttpClient,
    deadline: Deadline,
) -> HandlerOutput {
    let mut out = HandlerOutput::default();
    let mut visited: HashSet<String> = HashSet::new();
    let mut pages = 0usize;

    for (index, &(raw, description)) in seeds.iter().enumerate() {
        let at = data_path(key, index);
        let seed = match Url::parse(raw.trim()) {
            Ok(u) if matches!(u.scheme(), "http" | "https") && u.host_str().is_some() => canonicalize(&u),
            _ => {
                out.items.push(
                    ContextItem::failed(Origin::Crawl, raw, "not an absolute http(s) URL")
                        .with_description(description),
                );
                continue;
            }
        };
        let seed_host = seed.host_str().unwrap_or_default().to_string();
        if !policy.is_eligible(&seed_host, &seed_host) {
            out.skip(Diagnostic::warning(&at, format!("host `{seed_host}` is blocked by policy")));
            continue;
        }
        if !visited.insert(seed.to_string()) {
            continue;
        }

        let permit = |u: &Url| u.host_str().is_some_and(|h| policy.is_eligible(h, &seed_host));
        let mut queue = VecDeque::from([(seed.clone(), 0usize)]);
        while let Some((url, depth)) = queue.pop_front() {
            if pages >= policy.max_pages {
                break;
            }
            if deadline.expired() {
                out.diagnostics
                    .push(Diagnostic::warning(&at, format!("deadline reached; {url} and later pages not visited")));
                break;
            }
            pages += 1;
            let is_seed = depth == 0;
            tracing::debug!(%url, depth, "crawl fetch");
            let fetched =
                match http.get(&url, policy.timeout, policy.request_delay, policy.max_content_bytes, deadline, &permit)
                {
                    Ok(f) => f,
                    Err(e) => {
                        if is_seed {
                            out.items.push(
                                ContextItem::failed(Origin::Crawl, url.as_str(), e.to_string())
                                    .with_description(description),
                            );
                        } else if let FetchError::Policy(_) = e {
                            out.skip(Diagnostic::warning(&at, format!("{url}: redirect {e}")));
                        } else {
                            out.skip(Diagnostic::warning(&at, format!("{url}: {e}")));
                        }
                        continue;
                    }
                };
            let final_url = canonicalize(&fetched.final_url);
            if final_url != url && !visited.insert(final_url.to_string()) {
                continue;
            }
            let label = final_url.to_string();
            let body = String::from_utf8_lossy(&fetched.body);
            let page = match classify(fetched.content_type.as_deref()) {
                Some(Body::Html) => html::extract(&body),
                Some(Body::Text) => html::Page { text: body.into_owned(), ..Default::default() },
                None => {
                    let ct = fetched.content_type.as_deref().unwrap_or("unknown");
                    out.skip(Diagnostic::warning(&at, format!("{label}: content type `{ct}` is not crawled")));
                    continue;
                }
            };
            let item = text_item(Origin::Crawl, &label, page.text, fetched.truncated);
            out.items.push(if is_seed { item.with_description(description) } else { item });

            if depth >= policy.max_depth {
                continue;
            }
            let base = page.base.as_deref().and_then(|b| final_url.join(b).ok()).unwrap_or(final_url);
            let links: BTreeSet<String> = page
                .links
                .iter()
                .filter_map(|href| base.join(href).ok())
                .filter(|u| matches!(u.scheme(), "http" | "https"))
                .filter(|u| permit(u))
                .map(|u| canonicalize(&u).to_string())
                .collect();
            for link in links {
                if visited.insert(link.clone()) {
                    if let Ok(u) = Url::parse(&link) {
                        queue.push_back((u, depth + 1));
                    }
                }
            }
        }
    }
    out
}
