//! Blocking HTTP access shared by the crawl and download handlers.

use std::collections::HashMap;
use std::io::Read;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;
use url::Url;

use crate::USER_AGENT;

pub const MAX_REDIRECTS: usize = 5;

/// An optional point in time after which work should stop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Instant::now().checked_add(d))
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }

    pub fn remaining(&self) -> Option<Duration> {
        self.0.map(|t| t.saturating_duration_since(Instant::now()))
    }

    /// `d`, shortened so it does not run past the deadline.
    pub fn clamp(&self, d: Duration) -> Duration {
        match self.remaining() {
            Some(r) => d.min(r),
            None => d,
        }
    }
}

/// Keeps requests to the same host at least `delay` apart, across every
/// thread that shares the throttle.
#[derive(Debug, Default)]
pub struct HostThrottle {
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl HostThrottle {
    pub fn wait(&self, host: &str, delay: Duration) {
        if delay.is_zero() {
            return;
        }
        let slot = {
            let mut map = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = map.get(host).copied().filter(|t| *t > now).unwrap_or(now);
            map.insert(host.to_string(), slot + delay);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FetchError {
    #[error("HTTP {0}")]
    Status(u16),
    #[error("{0}")]
    Transport(String),
    #[error("blocked by host policy: {0}")]
    Policy(String),
    #[error("too many redirects")]
    TooManyRedirects,
    #[error("deadline exceeded")]
    Deadline,
}

#[derive(Debug, Clone)]
pub struct Fetched {
    pub final_url: Url,
    /// Lowercased MIME essence, without parameters.
    pub content_type: Option<String>,
    pub body: Vec<u8>,
    /// The body was longer than the requested cap and was cut.
    pub truncated: bool,
}

#[derive(Clone)]
pub struct HttpClient {
    agent: ureq::Agent,
    throttle: Arc<HostThrottle>,
}

impl Default for HttpClient {
    fn default() -> Self {
        Self::new()
    }
}

impl HttpClient {
    pub fn new() -> Self {
        let agent = ureq::AgentBuilder::new().redirects(0).user_agent(USER_AGENT).build();
        HttpClient { agent, throttle: Arc::new(HostThrottle::default()) }
    }

    /// GET with manual redirect handling so every hop passes `permit`.
    pub fn get(
        &self,
        url: &Url,
        timeout: Duration,
        delay: Duration,
        max_bytes: usize,
        deadline: Deadline,
        permit: &dyn Fn(&Url) -> bool,
    ) -> Result<Fetched, FetchError> {
        let mut current = url.clone();
        for _ in 0..=MAX_REDIRECTS {
            if !permit(&current) {
                return Err(FetchError::Policy(current.host_str().unwrap_or_default().to_string()));
            }
            if deadline.expired() {
                return Err(FetchError::Deadline);
            }
            self.throttle.wait(current.host_str().unwrap_or_default(), delay);
            let timeout = deadline.clamp(timeout);
            if timeout.is_zero() {
                return Err(FetchError::Deadline);
            }
            let resp = match self.agent.get(current.as_str()).timeout(timeout).call() {
                Ok(resp) => resp,
                Err(ureq::Error::Status(code, _)) => return Err(FetchError::Status(code)),
                Err(e) => return Err(FetchError::Transport(e.to_string())),
            };
            if (300..400).contains(&resp.status()) {
                let next = resp.header("location").and_then(|loc| current.join(loc).ok()).ok_or_else(|| {
                    FetchError::Transport(format!("redirect {} without a usable Location", resp.status()))
                })?;
                current = next;
                continue;
            }
            let content_type = resp.header("content-type").map(|_| resp.content_type().trim().to_ascii_lowercase());
            let mut body = Vec::new();
            resp.into_reader()
                .take(max_bytes as u64 + 1)
                .read_to_end(&mut body)
                .map_err(|e| FetchError::Transport(e.to_string()))?;
            let truncated = body.len() > max_bytes;
            body.truncate(max_bytes);
            return Ok(Fetched { final_url: current, content_type, body, truncated });
        }
        Err(FetchError::TooManyRedirects)
    }
}

/// Canonical form used for the crawler's visited set and item labels:
/// scheme and host lowercased (done by the parser), default port dropped,
/// fragment removed, trailing slash removed except on the root path.
pub fn canonicalize(url: &Url) -> Url {
    let mut u = url.clone();
    u.set_fragment(None);
    let path = u.path().to_string();
    if path.len() > 1 && path.ends_with('/') {
        u.set_path(path.trim_end_matches('/'));
        if u.path().is_empty() {
            u.set_path("/");
        }
    }
    u
}
