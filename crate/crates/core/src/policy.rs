use alloc::collections::BTreeSet;
use alloc::string::String;
use core::time::Duration;

/// Bounds and host filters for crawling and downloading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlPolicy {
    pub max_pages: usize,
    pub max_depth: usize,
    pub same_host_only: bool,
    /// Lowercase host names. Empty means "no allow-list".
    pub allow_hosts: BTreeSet<String>,
    /// Lowercase host names. Always wins over `allow_hosts`.
    pub deny_hosts: BTreeSet<String>,
    /// Minimum spacing between two requests to the same host.
    pub request_delay: Duration,
    pub timeout: Duration,
    pub max_content_bytes: usize,
    /// Download size cap, separate from the per-page cap.
    pub max_download_bytes: usize,
}

impl Default for CrawlPolicy {
    fn default() -> Self {
        CrawlPolicy {
            max_pages: 50,
            max_depth: 3,
            same_host_only: true,
            allow_hosts: BTreeSet::new(),
            deny_hosts: BTreeSet::new(),
            request_delay: Duration::from_millis(500),
            timeout: Duration::from_secs(15),
            max_content_bytes: 1024 * 1024,
            max_download_bytes: 50 * 1024 * 1024,
        }
    }
}

impl CrawlPolicy {
    /// Whether a URL on `host` may be fetched during a crawl seeded on `seed_host`.
    pub fn is_eligible(&self, host: &str, seed_host: &str) -> bool {
        let host = host.to_ascii_lowercase();
        if self.same_host_only && host != seed_host.to_ascii_lowercase() {
            return false;
        }
        if self.deny_hosts.contains(&host) {
            return false;
        }
        self.allow_hosts.is_empty() || self.allow_hosts.contains(&host)
    }

    /// Host check for single downloads, where there is no seed.
    pub fn is_host_permitted(&self, host: &str) -> bool {
        let host = host.to_ascii_lowercase();
        !self.deny_hosts.contains(&host) && (self.allow_hosts.is_empty() || self.allow_hosts.contains(&host))
    }

    pub fn allow_host(mut self, host: &str) -> Self {
        self.allow_hosts.insert(host.to_ascii_lowercase());
        self
    }

    pub fn deny_host(mut self, host: &str) -> Self {
        self.deny_hosts.insert(host.to_ascii_lowercase());
        self
    }
}
