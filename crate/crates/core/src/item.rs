use alloc::string::String;
use core::fmt;

/// Which handler produced an item.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Fetch,
    Crawl,
    Download,
    Custom(String),
}

impl Origin {
    pub fn from_tag(tag: &str) -> Self {
        match tag {
            "fetch" => Origin::Fetch,
            "crawl" => Origin::Crawl,
            "download" => Origin::Download,
            other => Origin::Custom(String::from(other)),
        }
    }

    /// Stem used for child element names: `file1`, `link1`, `paper1`, `item1`.
    pub fn child_stem(&self) -> &'static str {
        match self {
            Origin::Fetch => "file",
            Origin::Crawl => "link",
            Origin::Download => "paper",
            Origin::Custom(_) => "item",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Fetch => f.write_str("fetch"),
            Origin::Crawl => f.write_str("crawl"),
            Origin::Download => f.write_str("download"),
            Origin::Custom(tag) => f.write_str(tag),
        }
    }
}

/// One labeled piece of acquired text.
///
/// Items with `error` set record a failed data element; they are counted in
/// the build report and never rendered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextItem {
    pub label: String,
    pub description: Option<String>,
    pub content: String,
    pub origin: Origin,
    pub truncated: bool,
    pub error: Option<String>,
}

impl ContextItem {
    pub fn new(origin: Origin, label: impl Into<String>, content: impl Into<String>) -> Self {
        ContextItem {
            label: label.into(),
            description: None,
            content: content.into(),
            origin,
            truncated: false,
            error: None,
        }
    }

    pub fn failed(origin: Origin, label: impl Into<String>, error: impl Into<String>) -> Self {
        ContextItem {
            label: label.into(),
            description: None,
            content: String::new(),
            origin,
            truncated: false,
            error: Some(error.into()),
        }
    }

    pub fn with_description(mut self, description: Option<&str>) -> Self {
        self.description = description.map(String::from);
        self
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Cuts `text` to at most `max_bytes`, backing off to a char boundary.
/// Returns whether anything was removed.
pub fn truncate_utf8(text: &mut String, max_bytes: usize) -> bool {
    if text.len() <= max_bytes {
        return false;
    }
    let mut cut = max_bytes;
    while !text.is_char_boundary(cut) {
        cut -= 1;
    }
    text.truncate(cut);
    true
}

/// Per-item cap on extracted text.
pub const MAX_ITEM_TEXT_BYTES: usize = 512 * 1024;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(Origin::from_tag("fetch").child_stem(), "file");
        assert_eq!(Origin::from_tag("crawl").child_stem(), "link");
        assert_eq!(Origin::from_tag("download").child_stem(), "paper");
        assert_eq!(Origin::from_tag("datapackage").child_stem(), "item");
    }

    #[test]
    fn truncation_respects_char_boundaries() {
        let mut s = String::from("aé");
        assert!(truncate_utf8(&mut s, 2));
        assert_eq!(s, "a");
        let mut s = String::from("abc");
        assert!(!truncate_utf8(&mut s, 3));
    }
}
