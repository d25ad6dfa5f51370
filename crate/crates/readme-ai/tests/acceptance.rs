//! Acceptance gate: one line per criterion, non-zero exit if any fails.

mod common;
#[path = "../../core/tests/support/mod.rs"]
mod core_support;

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use readme_ai::handlers::{download_and_extract, fetch_data, web_crawler};
use readme_ai::pdf::PdfTextExtractor;
use readme_ai::source::{Acquisition, Checkout};
use readme_ai::{ContextService, Deadline, HttpClient, OutputFormat, ServiceConfig};
use readme_ai_core::{CrawlPolicy, DataSpec};
use serde_json::{json, Value};

use common::*;

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn fast_policy() -> CrawlPolicy {
    CrawlPolicy { request_delay: Duration::ZERO, ..CrawlPolicy::default() }
}

fn grammar_conformance() -> Outcome {
    core_support::check_listing()?;
    core_support::check_invalid_corpus()
}

fn property_suite() -> Outcome {
    runner(1000)
        .run(&core_support::document(), |(pairs, text)| {
            core_support::check_generated_document(&pairs, &text)?;
            core_support::check_round_trip(&text)
        })
        .map_err(|e| e.to_string())
}

fn checkout_of(root: &Path) -> Checkout {
    Checkout {
        root_path: root.to_path_buf(),
        origin_url: file_url(root),
        spec_path: root.join("Readme_AI.json"),
        action: Acquisition::Directory,
    }
}

fn fetch_handler() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path().join("repo");
    for (rel, body) in repo_files() {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, body).unwrap();
    }
    let secret = "TOP-SECRET-SENTINEL";
    fs::write(tmp.path().join("secret.txt"), secret).unwrap();
    #[cfg(unix)]
    std::os::unix::fs::symlink(tmp.path().join("secret.txt"), root.join("src/leak.txt")).unwrap();
    let checkout = checkout_of(&root);

    // Described path.
    let out =
        fetch_data("source_files", &checkout, &DataSpec::Described(vec![("/src/main.py".into(), "Main file".into())]));
    ensure!(out.items.len() == 1, "described: {:?}", out.items);
    let item = &out.items[0];
    ensure!(
        item.label == "/src/main.py" && item.description.as_deref() == Some("Main file") && item.content == MAIN_PY,
        "described item: {item:?}"
    );

    // Glob against an independent directory listing.
    let mut expected: Vec<String> = fs::read_dir(root.join("src/api"))
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| format!("/src/api/{}", e.file_name().to_str().unwrap()))
        .collect();
    expected.sort();
    let out = fetch_data("api_files", &checkout, &DataSpec::Items(vec!["/src/api/*".into()]));
    let labels: Vec<String> = out.items.iter().map(|i| i.label.clone()).collect();
    ensure!(labels == expected, "glob {labels:?} != {expected:?}");
    ensure!(out.items.iter().all(|i| !i.is_error()), "glob produced errors");

    // Escapes: generated traversal and absolute forms, plus the symlink.
    let canon_root = fs::canonicalize(&root).unwrap();
    let outside = tmp.path().join("secret.txt").display().to_string();
    let prefixes = proptest::sample::select(vec![
        "../",
        "..\\",
        "/../",
        "./../",
        "src/../../",
        "src/api/../../../",
        "a/b/../../../",
        "//",
        "\\\\",
        "C:/",
        "c:\\",
        "~/",
        "/",
        "",
        "./",
        "src/./../..//",
    ]);
    let targets = proptest::sample::select(vec![
        "secret.txt".to_string(),
        "../secret.txt".to_string(),
        "etc/passwd".to_string(),
        outside.clone(),
        "src/leak.txt".to_string(),
        "*".to_string(),
        "../*".to_string(),
        "**/*.txt".to_string(),
    ]);
    let strategy = (prefixes, proptest::collection::vec(Just(()), 0..3), targets)
        .prop_map(|(p, reps, t)| format!("{}{p}{t}", "../".repeat(reps.len())));
    let mut fuzz = runner(1);
    let mut inputs = BTreeSet::new();
    while inputs.len() < 60 {
        inputs.insert(strategy.new_tree(&mut fuzz).unwrap().current());
    }
    let out = fetch_data("fuzz", &checkout, &DataSpec::Items(inputs.iter().cloned().collect()));
    for item in out.items.iter().filter(|i| !i.is_error()) {
        ensure!(!item.content.contains(secret), "secret leaked through {}", item.label);
        let resolved = fs::canonicalize(canon_root.join(item.label.trim_start_matches('/'))).unwrap();
        ensure!(resolved.starts_with(&canon_root), "{} resolves outside the root", item.label);
    }
    ensure!(out.diagnostics.iter().any(|d| d.message.starts_with("security")), "no security diagnostics recorded");

    // Binary skip.
    let out = fetch_data("assets", &checkout, &DataSpec::Items(vec!["/assets/logo.bin".into(), "/src/main.py".into()]));
    ensure!(out.items.len() == 1 && out.items[0].label == "/src/main.py", "binary: {:?}", out.items);
    ensure!(out.skipped == 1 && out.diagnostics[0].message.contains("binary"), "binary diag: {:?}", out.diagnostics);
    Ok(())
}

use proptest::strategy::Just;

fn crawl_labels(site: &Site, policy: &CrawlPolicy) -> Vec<String> {
    let seed = site.url("/a.html");
    let out = web_crawler("documentation", &[(seed.as_str(), None)], policy, &HttpClient::new(), Deadline::none());
    out.items.iter().filter(|i| !i.is_error()).map(|i| i.label.clone()).collect()
}

fn crawl_handler() -> Outcome {
    let site = Site::start();
    let policy = fast_policy();

    // Visited set equals the same-host reachable set.
    let labels = crawl_labels(&site, &policy);
    let hits = site.hits();
    let visited: BTreeSet<String> = hits.iter().map(|h| h.path.clone()).collect();
    let expected = reachable_same_host("/a.html", policy.max_depth);
    ensure!(visited == expected, "visited {visited:?}, expected {expected:?}");
    ensure!(hits.len() == visited.len(), "a page was fetched twice: {hits:?}");
    ensure!(hits.iter().all(|h| h.host == "127.0.0.1"), "external host contacted: {hits:?}");
    let item_paths: BTreeSet<String> =
        labels.iter().map(|l| l.trim_start_matches(&site.url(""))).map(String::from).collect();
    let pages: BTreeSet<String> = expected
        .iter()
        .filter(|p| p.ends_with(".html") || p.ends_with(".txt"))
        .filter(|p| *p != "/missing.html")
        .cloned()
        .collect();
    ensure!(item_paths == pages, "items {item_paths:?} != {pages:?}");

    // Budget on a cyclic graph.
    for max_pages in [1, 2, 3] {
        site.clear();
        let labels = crawl_labels(&site, &CrawlPolicy { max_pages, ..fast_policy() });
        ensure!(site.hits().len() <= max_pages, "max_pages {max_pages}: {} requests", site.hits().len());
        ensure!(labels.len() <= max_pages, "max_pages {max_pages}: {labels:?}");
    }
    site.clear();
    let only = crawl_labels(&site, &CrawlPolicy { max_pages: 1, ..fast_policy() });
    ensure!(only == [site.url("/a.html")], "max_pages 1: {only:?}");

    // Deny wins over allow.
    let open = CrawlPolicy { same_host_only: false, ..fast_policy() }.allow_host("127.0.0.1").allow_host("localhost");
    site.clear();
    crawl_labels(&site, &open);
    ensure!(site.hits().iter().any(|h| h.host == "localhost"), "allowed external host was not crawled");
    site.clear();
    crawl_labels(&site, &open.clone().deny_host("localhost"));
    ensure!(site.hits().iter().all(|h| h.host != "localhost"), "denied host crawled despite allow");
    site.clear();
    let labels = crawl_labels(&site, &fast_policy().allow_host("127.0.0.1").deny_host("127.0.0.1"));
    ensure!(labels.is_empty() && site.hits().is_empty(), "denied seed host was contacted");

    // Determinism.
    let mut first: Option<Vec<String>> = None;
    for _ in 0..5 {
        let mut run = crawl_labels(&site, &policy);
        run.sort();
        match &first {
            None => first = Some(run),
            Some(f) => ensure!(f == &run, "label multiset changed: {f:?} vs {run:?}"),
        }
    }
    Ok(())
}

fn download_handler() -> Outcome {
    let site = Site::start();
    let pdf = pdf_with_text(PDF_SENTINEL);
    // Fixture sanity through an independent reader.
    let oracle =
        lopdf::Document::load_mem(&pdf).map_err(|e| e.to_string())?.extract_text(&[1]).map_err(|e| e.to_string())?;
    ensure!(oracle.contains(PDF_SENTINEL), "fixture PDF lacks the sentinel: {oracle:?}");

    let (paper, missing, notes) = (site.url("/paper.pdf"), site.url("/missing.pdf"), site.url("/notes.txt"));
    let urls = [(paper.as_str(), Some("Design paper")), (missing.as_str(), None), (notes.as_str(), None)];
    let out =
        download_and_extract("papers", &urls, &fast_policy(), &HttpClient::new(), &PdfTextExtractor, Deadline::none());
    ensure!(out.items.len() == 3, "items: {:?}", out.items);
    ensure!(out.items[0].content.contains(PDF_SENTINEL), "PDF text: {:?}", out.items[0].content);
    ensure!(
        out.items[1].is_error() && out.items[1].error.as_deref().unwrap_or_default().contains("404"),
        "404: {:?}",
        out.items[1]
    );
    ensure!(out.items[2].content == NOTES, "text passthrough: {:?}", out.items[2]);
    Ok(())
}

fn xml_well_formedness() -> Outcome {
    runner(1000).run(&core_support::tree(), |tree| core_support::check_xml_tree(&tree)).map_err(|e| e.to_string())
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_readme-ai"))
}

fn cli_build(state: &Path, source: &str) -> Result<String, String> {
    let out = bin()
        .args(["build", source, "--delay-ms", "0"])
        .env("READMEAI_CACHE_DIR", state.join("cache"))
        .env("READMEAI_REGISTRY_PATH", state.join("lookup.json"))
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("build {source} exited {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn serve_call(state: &Path, source: &str) -> Result<String, String> {
    let mut child = bin()
        .args(["serve", "--delay-ms", "0"])
        .env("READMEAI_CACHE_DIR", state.join("cache"))
        .env("READMEAI_REGISTRY_PATH", state.join("lookup.json"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    {
        let mut stdin = child.stdin.take().unwrap();
        let messages = [
            json!({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {"protocolVersion": "2024-11-05"}}),
            json!({"jsonrpc": "2.0", "method": "notifications/initialized"}),
            json!({"jsonrpc": "2.0", "id": 2, "method": "tools/list"}),
            json!({"jsonrpc": "2.0", "id": 3, "method": "tools/call", "params": {"name": "readme_ai", "arguments": {"url_or_name": source}}}),
        ];
        for m in messages {
            writeln!(stdin, "{m}").map_err(|e| e.to_string())?;
        }
    }
    let replies: Vec<Value> = BufReader::new(child.stdout.take().unwrap())
        .lines()
        .map(|l| serde_json::from_str(&l.unwrap()).unwrap())
        .collect();
    let status = child.wait().map_err(|e| e.to_string())?;
    ensure!(status.success(), "server exited with {status}");
    let by_id = |id: i64| replies.iter().find(|r| r["id"] == id).cloned();
    let tools = by_id(2).ok_or("no tools/list reply")?;
    ensure!(tools["result"]["tools"][0]["name"] == "readme_ai", "tools/list: {tools}");
    let call = by_id(3).ok_or("no tools/call reply")?;
    ensure!(call["result"]["isError"] == false, "tool error: {call}");
    Ok(call["result"]["content"][0]["text"].as_str().unwrap_or_default().to_string())
}

fn end_to_end() -> Outcome {
    let site = Site::start();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let repo = fixture_repo(tmp.path(), "hedgehog", &site);
    let url = file_url(&repo);
    let state = tmp.path().join("state");

    let first = cli_build(&state, &url)?;
    let second = cli_build(&state, &url)?;
    ensure!(first == second, "two builds differ");
    for needle in ["<DESCRIPTION>", DESCRIPTION, "<file1", "<link1", "<paper1", PDF_SENTINEL] {
        ensure!(first.contains(needle), "context lacks {needle:?}:\n{first}");
    }
    let wrapped = format!("<root>{first}</root>");
    let doc = roxmltree::Document::parse(&wrapped).map_err(|e| e.to_string())?;
    let tags: Vec<&str> =
        doc.root_element().children().filter(|n| n.is_element()).map(|n| n.tag_name().name()).collect();
    ensure!(tags == ["DESCRIPTION", "SOURCE_FILES", "API_FILES", "DOCUMENTATION", "PAPERS"], "node order {tags:?}");

    let served = serve_call(&state, &url)?;
    ensure!(served == first, "server content differs from CLI output");
    Ok(())
}

fn registry() -> Outcome {
    let site = Site::start();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let repo = fixture_repo(tmp.path(), "hedgehog", &site);
    let url = file_url(&repo);
    let state = tmp.path().join("state");

    let by_url = cli_build(&state, &url)?;
    let stored: Value =
        serde_json::from_str(&fs::read_to_string(state.join("lookup.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure!(stored == json!({ "hedgehog": url }), "lookup.json: {stored}");
    // A fresh process only has the persisted file to go on.
    let by_name = cli_build(&state, "hedgehog")?;
    ensure!(by_name == by_url, "name and URL resolution differ");

    let out = bin()
        .args(["register", "hog", &url])
        .env("READMEAI_REGISTRY_PATH", state.join("lookup.json"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "register failed");
    ensure!(cli_build(&state, "HOG")? == by_url, "registered alias differs");
    Ok(())
}

fn subsetting() -> Outcome {
    let site = Site::start();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let repo = fixture_repo(tmp.path(), "hedgehog", &site);
    let mut config = ServiceConfig::new(tmp.path().join("cache"), tmp.path().join("lookup.json"));
    config.policy = fast_policy();
    let service = ContextService::new(config).map_err(|e| e.to_string())?;
    let build = |keys: Option<Vec<String>>| {
        let req = readme_ai::tool::BuildRequest {
            url_or_name: file_url(&repo),
            include_keys: keys,
            format: OutputFormat::Xml,
        };
        service.run(&req).map(|b| b.report.token_count).map_err(|e| e.to_string())
    };
    let full = build(None)?;
    ensure!(full > 0, "empty full build");
    let keys: Vec<String> =
        ["description", "source_files", "api_files", "documentation", "papers"].map(String::from).to_vec();
    let subsets = proptest::sample::subsequence(keys.clone(), 1..=keys.len());
    let mut rng = runner(1);
    for _ in 0..10 {
        let subset = subsets.new_tree(&mut rng).unwrap().current();
        let count = build(Some(subset.clone()))?;
        ensure!(count <= full, "{subset:?}: {count} > {full}");
    }
    Ok(())
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { name: "grammar conformance", limit: Duration::from_secs(1), check: grammar_conformance },
    Criterion { name: "property suite", limit: Duration::from_secs(30), check: property_suite },
    Criterion { name: "fetch handler", limit: Duration::from_secs(10), check: fetch_handler },
    Criterion { name: "crawl handler", limit: Duration::from_secs(30), check: crawl_handler },
    Criterion { name: "download handler", limit: Duration::from_secs(10), check: download_handler },
    Criterion { name: "XML well-formedness", limit: Duration::from_secs(30), check: xml_well_formedness },
    Criterion { name: "end-to-end", limit: Duration::from_secs(60), check: end_to_end },
    Criterion { name: "registry", limit: Duration::from_secs(5), check: registry },
    Criterion { name: "subsetting monotonicity", limit: Duration::from_secs(5), check: subsetting },
];

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, c) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            if elapsed <= c.limit {
                Ok(())
            } else {
                Err(format!("took {elapsed:.2?}, limit {:?}", c.limit))
            }
        });
        match result {
            Ok(()) => println!("[PASS] {}. {} ({elapsed:.2?})", i + 1, c.name),
            Err(e) => {
                failed += 1;
                println!("[FAIL] {}. {} ({elapsed:.2?}): {e}", i + 1, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
