//! Offline fixtures: a loopback web site, generated PDFs and local git
//! repositories.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::thread;

use lopdf::content::{Content, Operation};
use lopdf::{dictionary, Document, Object, Stream};

pub const PDF_SENTINEL: &str = "hello readme ai";
pub const DESCRIPTION: &str = "Hedgehog fixture: a dataflow graph library used for offline tests.";

/// Single-page PDF showing `text`, with compressed streams.
pub fn pdf_with_text(text: &str) -> Vec<u8> {
    let mut doc = Document::with_version("1.5");
    let pages_id = doc.new_object_id();
    let font_id = doc.add_object(dictionary! {
        "Type" => "Font",
        "Subtype" => "Type1",
        "BaseFont" => "Helvetica",
    });
    let resources_id = doc.add_object(dictionary! {
        "Font" => dictionary! { "F1" => font_id },
    });
    let content = Content {
        operations: vec![
            Operation::new("BT", vec![]),
            Operation::new("Tf", vec!["F1".into(), 24.into()]),
            Operation::new("Td", vec![72.into(), 700.into()]),
            Operation::new("Tj", vec![Object::string_literal(text)]),
            Operation::new("ET", vec![]),
        ],
    };
    let content_id = doc.add_object(Stream::new(dictionary! {}, content.encode().unwrap()));
    let page_id = doc.add_object(dictionary! {
        "Type" => "Page",
        "Parent" => pages_id,
        "Contents" => content_id,
    });
    doc.objects.insert(
        pages_id,
        Object::Dictionary(dictionary! {
            "Type" => "Pages",
            "Kids" => vec![page_id.into()],
            "Count" => 1,
            "Resources" => resources_id,
            "MediaBox" => vec![0.into(), 0.into(), 612.into(), 792.into()],
        }),
    );
    let catalog_id = doc.add_object(dictionary! { "Type" => "Catalog", "Pages" => pages_id });
    doc.trailer.set("Root", catalog_id);
    doc.compress();
    let mut out = Vec::new();
    doc.save_to(&mut out).unwrap();
    out
}

/// Page path and outgoing hrefs. `{ext}` is replaced with the same server
/// reached through a different host name (`localhost`).
pub const PAGES: &[(&str, &[&str])] = &[
    ("/a.html", &["b.html", "c.html#intro", "{ext}/ext.html", "mailto:owner@example.com", "/a.html"]),
    ("/b.html", &["a.html", "./b.html"]),
    ("/c.html", &["d.html", "/notes.txt", "/image.png", "/missing.html"]),
    ("/d.html", &["e.html"]),
    ("/e.html", &["a.html"]),
    ("/ext.html", &["{self}/a.html"]),
];

pub const NOTES: &str = "abc";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hit {
    pub host: String,
    pub path: String,
}

/// A static web site on 127.0.0.1 that logs every request.
pub struct Site {
    pub port: u16,
    server: Arc<tiny_http::Server>,
    log: Arc<Mutex<Vec<Hit>>>,
    worker: Option<thread::JoinHandle<()>>,
}

fn page_html(path: &str, links: &[&str], port: u16) -> String {
    let name = path.trim_start_matches('/').trim_end_matches(".html");
    let mut html = format!(
        "<!doctype html><html><head><title>Page {name}</title><script>var hidden = 1;</script></head><body>\n<h1>Section {name}</h1>\n<p>Sentinel text for page {name}.</p>\n"
    );
    for href in links {
        let href = href
            .replace("{ext}", &format!("http://localhost:{port}"))
            .replace("{self}", &format!("http://127.0.0.1:{port}"));
        html.push_str(&format!("<a href=\"{href}\">link</a>\n"));
    }
    html.push_str("</body></html>\n");
    html
}

impl Site {
    pub fn start() -> Site {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let log = Arc::new(Mutex::new(Vec::new()));
        let pdf = pdf_with_text(PDF_SENTINEL);
        let worker = {
            let (server, log) = (server.clone(), log.clone());
            thread::spawn(move || {
                for request in server.incoming_requests() {
                    let host = request
                        .headers()
                        .iter()
                        .find(|h| h.field.equiv("Host"))
                        .map(|h| h.value.as_str().split(':').next().unwrap_or_default().to_string())
                        .unwrap_or_default();
                    let path = request.url().split('?').next().unwrap_or_default().to_string();
                    log.lock().unwrap().push(Hit { host, path: path.clone() });
                    let (status, ctype, body): (u16, &str, Vec<u8>) =
                        if let Some((p, links)) = PAGES.iter().find(|(p, _)| *p == path) {
                            (200, "text/html; charset=utf-8", page_html(p, links, port).into_bytes())
                        } else {
                            match path.as_str() {
                                "/notes.txt" => (200, "text/plain", NOTES.as_bytes().to_vec()),
                                "/image.png" => (200, "image/png", vec![0x89, b'P', b'N', b'G', 0, 0, 0, 0]),
                                "/paper.pdf" => (200, "application/pdf", pdf.clone()),
                                "/loop" => (302, "text/plain", Vec::new()),
                                _ => (404, "text/plain", b"not found".to_vec()),
                            }
                        };
                    let mut response = tiny_http::Response::from_data(body)
                        .with_status_code(status)
                        .with_header(tiny_http::Header::from_bytes("Content-Type", ctype).unwrap());
                    if path == "/loop" {
                        response.add_header(tiny_http::Header::from_bytes("Location", "/loop").unwrap());
                    }
                    let _ = request.respond(response);
                }
            })
        };
        Site { port, server, log, worker: Some(worker) }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://127.0.0.1:{}{path}", self.port)
    }

    pub fn hits(&self) -> Vec<Hit> {
        self.log.lock().unwrap().clone()
    }

    pub fn clear(&self) {
        self.log.lock().unwrap().clear();
    }
}

impl Drop for Site {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

/// Paths reachable from `seed` through [`PAGES`] while staying on the
/// seed's host and within `max_depth` link hops. Non-page targets count as
/// reachable leaves.
pub fn reachable_same_host(seed: &str, max_depth: usize) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([seed.to_string()]);
    let mut queue = VecDeque::from([(seed.to_string(), 0)]);
    while let Some((path, depth)) = queue.pop_front() {
        if depth == max_depth {
            continue;
        }
        let links = PAGES.iter().find(|(p, _)| *p == path).map(|(_, l)| *l).unwrap_or(&[]);
        for href in links {
            if href.starts_with('{') || href.contains(':') {
                continue;
            }
            let target = href.split('#').next().unwrap();
            let target = if target.starts_with('/') {
                target.to_string()
            } else {
                format!("/{}", target.trim_start_matches("./"))
            };
            if seen.insert(target.clone()) {
                queue.push_back((target, depth + 1));
            }
        }
    }
    seen
}

pub fn git(dir: &Path, args: &[&str]) {
    let status = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "user.name=Fixture", "-c", "user.email=fixture@example.com", "-c", "commit.gpgsign=false"])
        .args(args)
        .env("GIT_TERMINAL_PROMPT", "0")
        .status()
        .expect("git runs");
    assert!(status.success(), "git {args:?} failed in {}", dir.display());
}

/// Writes `files` under `root`, then makes it a git repository with one commit.
pub fn git_repo(root: &Path, files: &[(&str, &[u8])]) -> PathBuf {
    fs::create_dir_all(root).unwrap();
    for (rel, body) in files {
        let path = root.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, body).unwrap();
    }
    git(root, &["init", "-q", "-b", "main"]);
    git(root, &["add", "-A"]);
    git(root, &["commit", "-q", "-m", "fixture"]);
    root.to_path_buf()
}

/// Metadata exercising all three built-in types against `site`.
pub fn full_spec(site: &Site) -> String {
    format!(
        r#"{{
  "description": "{DESCRIPTION}",
  "source_files": {{
    "data": {{ "/src/main.py": "Main file", "/src/utils.py": "Utility file" }},
    "type": "fetch"
  }},
  "api_files": {{ "data": ["/src/api/*"], "type": "fetch" }},
  "documentation": {{ "data": ["{a}"], "type": "crawl" }},
  "papers": {{ "data": {{ "{pdf}": "Design paper" }}, "type": "download" }}
}}
"#,
        a = site.url("/a.html"),
        pdf = site.url("/paper.pdf"),
    )
}

pub const MAIN_PY: &str = "print(\"hi\")\n";

/// Repository files besides the metadata.
pub fn repo_files() -> Vec<(&'static str, Vec<u8>)> {
    vec![
        ("src/main.py", MAIN_PY.as_bytes().to_vec()),
        ("src/utils.py", b"def helper(x):\n    return x < 3 and x > 1\n".to_vec()),
        ("src/api/a.h", b"int a(void);\n".to_vec()),
        ("src/api/b.h", b"int b(void); // <b> & \"quoted\"\n".to_vec()),
        ("src/api/c.hpp", b"namespace c {}\n".to_vec()),
        ("src/api/detail/inner.h", b"int inner;\n".to_vec()),
        ("assets/logo.bin", b"\x89PNG\r\n\x1a\n\x00\x00\x00\rIHDR".to_vec()),
    ]
}

/// A git repository named `name` under `parent` with the full spec.
pub fn fixture_repo(parent: &Path, name: &str, site: &Site) -> PathBuf {
    let spec = full_spec(site);
    let mut files = repo_files();
    files.push(("Readme_AI.json", spec.into_bytes()));
    let borrowed: Vec<(&str, &[u8])> = files.iter().map(|(p, b)| (*p, b.as_slice())).collect();
    git_repo(&parent.join(name), &borrowed)
}

pub fn file_url(path: &Path) -> String {
    url::Url::from_file_path(path).unwrap().to_string()
}
