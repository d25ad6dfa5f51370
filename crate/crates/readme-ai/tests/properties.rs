mod common;

use std::collections::BTreeSet;
use std::fs;
use std::time::Duration;

use common::*;
use proptest::prelude::*;
use readme_ai::handlers::web_crawler;
use readme_ai::source::Checkout;
use readme_ai::{build_context, BuildEnv, BuildOptions, Deadline, HandlerRegistry, HttpClient};
use readme_ai_core::{parse_document, CrawlPolicy};

const CANDIDATES: &[(&str, bool)] = &[
    ("/src/main.py", true),
    ("/src/utils.py", true),
    ("/src/api/a.h", true),
    ("/src/api/*.hpp", true),
    ("/missing.txt", false),
    ("/assets/logo.bin", false),
    ("/src/api/*.none", false),
    ("/../outside", false),
];

fn repo() -> (tempfile::TempDir, Checkout) {
    let tmp = tempfile::tempdir().unwrap();
    for (rel, body) in repo_files() {
        let p = tmp.path().join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, body).unwrap();
    }
    fs::write(tmp.path().join("Readme_AI.json"), "{}").unwrap();
    let checkout = Checkout::from_directory(tmp.path()).unwrap();
    (tmp, checkout)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    // Failures never hide the other elements of an entry, and the report
    // counts every element exactly once.
    #[test]
    fn error_isolation_and_report_consistency(picks in proptest::collection::vec(0..CANDIDATES.len(), 1..8)) {
        let (_tmp, checkout) = repo();
        let paths: Vec<String> = picks.iter().map(|&i| format!("{:?}", CANDIDATES[i].0)).collect();
        let text = format!(r#"{{"k": {{"type": "fetch", "data": [{}]}}}}"#, paths.join(", "));
        let doc = parse_document(&text, "t").unwrap();
        let result = build_context(&doc, &checkout, &HandlerRegistry::new(), &CrawlPolicy::default(), &BuildEnv::default(), &BuildOptions::default());
        let good: Vec<&str> = picks.iter().map(|&i| CANDIDATES[i]).filter(|c| c.1).map(|c| c.0).collect();
        match result {
            Ok((tree, report)) => {
                prop_assert_eq!(report.items_total, picks.len());
                prop_assert_eq!(report.items_failed, picks.len() - good.len());
                let sources: Vec<String> = tree.nodes[0].children.iter().map(|c| c.source.clone().unwrap()).collect();
                let expected: Vec<String> = good.iter().map(|p| p.replace("*.hpp", "c.hpp")).collect();
                prop_assert_eq!(sources, expected);
            }
            Err(_) => prop_assert!(good.is_empty()),
        }
    }
}

fn eligible(host: &str, seed: &str, same: bool, allow: &BTreeSet<&str>, deny: &BTreeSet<&str>) -> bool {
    (!same || host == seed) && !deny.contains(host) && (allow.is_empty() || allow.contains(host))
}

#[test]
fn crawl_scope_matches_eligibility() {
    let site = Site::start();
    let hosts = ["127.0.0.1", "localhost"];
    let subset = proptest::sample::subsequence(hosts.to_vec(), 0..=2);
    let strategy = (any::<bool>(), subset.clone(), subset);
    let config = ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() };
    let mut runner = proptest::test_runner::TestRunner::new(config);
    runner
        .run(&strategy, |(same, allow, deny)| {
            let mut policy = CrawlPolicy { same_host_only: same, request_delay: Duration::ZERO, ..CrawlPolicy::default() };
            for h in &allow {
                policy = policy.allow_host(h);
            }
            for h in &deny {
                policy = policy.deny_host(h);
            }
            let (allow, deny): (BTreeSet<&str>, BTreeSet<&str>) = (allow.into_iter().collect(), deny.into_iter().collect());
            site.clear();
            let seed = site.url("/a.html");
            let out = web_crawler("docs", &[(seed.as_str(), None)], &policy, &HttpClient::new(), Deadline::none());
            for hit in site.hits() {
                prop_assert!(eligible(&hit.host, "127.0.0.1", same, &allow, &deny), "contacted {}", hit.host);
            }
            for item in out.items.iter().filter(|i| !i.is_error()) {
                let host = url::Url::parse(&item.label).unwrap().host_str().unwrap().to_string();
                prop_assert!(eligible(&host, "127.0.0.1", same, &allow, &deny), "emitted {}", item.label);
            }
            Ok(())
        })
        .unwrap();
}
