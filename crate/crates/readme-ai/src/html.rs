//! Visible text and hyperlinks from HTML pages.

use ego_tree::iter::Edge;
use scraper::{Html, Node, Selector};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Page {
    /// Title and body text, one block per line, whitespace collapsed.
    pub text: String,
    /// `href` values of `<a>` elements in document order, unresolved.
    pub links: Vec<String>,
    /// `<base href>`, when present.
    pub base: Option<String>,
}

const SKIPPED: &[&str] = &["script", "style", "noscript", "template", "svg", "iframe", "object", "canvas"];

const BLOCK: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "br",
    "caption",
    "dd",
    "details",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "summary",
    "table",
    "td",
    "th",
    "title",
    "tr",
    "ul",
];

pub fn extract(html: &str) -> Page {
    let doc = Html::parse_document(html);
    let mut raw = String::new();
    let mut skip_depth = 0usize;
    let mut pre_depth = 0usize;
    for edge in doc.tree.root().traverse() {
        match edge {
            Edge::Open(node) => match node.value() {
                Node::Element(el) => {
                    let name = el.name();
                    if skip_depth > 0 || SKIPPED.contains(&name) {
                        skip_depth += 1;
                    } else if BLOCK.contains(&name) {
                        raw.push('\n');
                        pre_depth += usize::from(name == "pre");
                    }
                }
                // Source line breaks are plain whitespace except inside <pre>.
                Node::Text(text) if skip_depth == 0 && pre_depth > 0 => raw.push_str(text),
                Node::Text(text) if skip_depth == 0 => {
                    raw.extend(text.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }))
                }
                _ => {}
            },
            Edge::Close(node) => {
                if let Node::Element(el) = node.value() {
                    if skip_depth > 0 {
                        skip_depth -= 1;
                    } else if BLOCK.contains(&el.name()) {
                        raw.push('\n');
                        pre_depth -= usize::from(el.name() == "pre");
                    }
                }
            }
        }
    }

    let anchors = Selector::parse("a[href]").expect("static selector");
    let links = doc
        .select(&anchors)
        .filter_map(|a| a.value().attr("href"))
        .map(|h| h.trim().to_string())
        .filter(|h| !h.is_empty())
        .collect();
    let base_sel = Selector::parse("base[href]").expect("static selector");
    let base = doc.select(&base_sel).next().and_then(|b| b.value().attr("href")).map(|h| h.trim().to_string());

    Page { text: collapse_whitespace(&raw), links, base }
}

/// Collapses runs of whitespace inside each line and drops blank lines.
pub fn collapse_whitespace(raw: &str) -> String {
    raw.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}
