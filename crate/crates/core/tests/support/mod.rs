//! Generators, corpora and reference oracles shared by the core property
//! tests and the workspace acceptance harness.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use readme_ai_core::tree::is_valid_tag;
use readme_ai_core::{parse_document, serialize_xml, ChildNode, ContextNode, ContextTree, DataSpec, Entry};

/// The example document from the format's introduction, with its two
/// typesetting slips (unterminated string, missing comma) repaired.
pub const LISTING: &str = r#"{
  "description": "An example project demonstrating the Readme_AI specification.",
  "source_files": {
    "data": {
      "/src/main.py": "Main file",
      "/src/utils.py": "Utility file"
    },
    "type": "fetch"
  },
  "api_files" : {
    "data": [ "/src/api/*" ],
    "type": "fetch"
  },
  "documentation" : {
    "data": "doc-url",
    "type": "crawl"
  }
}"#;

/// Renders one JSON string literal; keeps the generator independent of the
/// crate's own writer.
pub fn lit(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone)]
pub enum GenValue {
    Text(String),
    List(Vec<String>, String),
    Dict(Vec<(String, String)>, String),
}

pub fn nonempty() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_/.*\\-é \"\\\\]{1,12}"
}

pub fn type_tag() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("fetch".to_string()),
        Just("crawl".to_string()),
        Just("download".to_string()),
        "[a-zA-Z][a-zA-Z0-9]{0,8}",
    ]
}

pub fn data_value() -> impl Strategy<Value = GenValue> {
    prop_oneof![
        any::<String>().prop_map(GenValue::Text),
        (prop::collection::vec(nonempty(), 1..5), type_tag()).prop_map(|(v, t)| GenValue::List(v, t)),
        (prop::collection::btree_map(nonempty(), any::<String>(), 1..5), type_tag())
            .prop_map(|(m, t)| GenValue::Dict(m.into_iter().collect(), t)),
    ]
}

/// `<readmeai_json> ::= { (<string> : <data_value>)* }` with unique keys.
pub fn document() -> impl Strategy<Value = (Vec<(String, GenValue)>, String)> {
    prop::collection::vec(("[a-z_][a-z0-9_\\-]{0,10}", data_value()), 0..8).prop_map(|pairs| {
        let mut seen = std::collections::HashSet::new();
        let pairs: Vec<_> = pairs.into_iter().filter(|(k, _)| seen.insert(k.clone())).collect();
        let body: Vec<String> = pairs
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    GenValue::Text(s) => lit(s),
                    GenValue::List(items, t) => {
                        let items: Vec<_> = items.iter().map(|s| lit(s)).collect();
                        format!("{{\"data\": [{}], \"type\": {}}}", items.join(", "), lit(t))
                    }
                    GenValue::Dict(m, t) => {
                        let m: Vec<_> = m.iter().map(|(k, d)| format!("{}: {}", lit(k), lit(d))).collect();
                        format!("{{ \"type\": {}, \"data\": {{{}}} }}", lit(t), m.join(",\n"))
                    }
                };
                format!("{}: {}", lit(k), v)
            })
            .collect();
        (pairs, format!("{{\n{}\n}}", body.join(",\n")))
    })
}

/// At least twenty malformed documents, each must yield a located error.
pub const INVALID: &[&str] = &[
    r#"{"x": {"type": "fetch"}}"#,
    r#"{"x": {"data": ["a"]}}"#,
    r#"{"x": {}}"#,
    r#"{"x": {"data": [1], "type": "fetch"}}"#,
    r#"{"x": {"data": [["a"]], "type": "fetch"}}"#,
    r#"{"x": {"data": {"a": 1}, "type": "fetch"}}"#,
    r#"{"x": {"data": {"a": null}, "type": "fetch"}}"#,
    r#"{"x": {"data": 3, "type": "fetch"}}"#,
    r#"{"x": {"data": [], "type": "fetch"}}"#,
    r#"{"x": {"data": {}, "type": "fetch"}}"#,
    r#"{"x": {"data": [""], "type": "fetch"}}"#,
    r#"{"x": {"data": ["a"], "type": 7}}"#,
    r#"{"x": {"data": ["a"], "type": ""}}"#,
    r#"{"x": {"data": ["a"], "data": ["b"], "type": "fetch"}}"#,
    r#"{"x": "a", "x": "b"}"#,
    r#"{"x": 1}"#,
    r#"{"x": true}"#,
    r#"{"x": null}"#,
    r#"{"x": ["a", "b"]}"#,
    r#"[]"#,
    r#""just a string""#,
    r#"42"#,
    r#"{"x": "unterminated}"#,
    r#"{"x": "a" "y": "b"}"#,
    r#"{"": "empty key"}"#,
];

/// Reference removal of characters XML 1.0 cannot hold, written from the
/// character-range definition rather than `char::is_control`.
pub fn xml_representable(s: &str) -> String {
    s.chars()
        .filter(|&c| {
            let u = c as u32;
            u == 0x9 || u == 0xA || (0x20..0x7F).contains(&u) || (0xA0..0xFFFE).contains(&u) || u >= 0x10000
        })
        .collect()
}

/// Undoes the block layout: first newline, closing indent, per-line indent.
pub fn unindent(raw: &str, depth: usize) -> String {
    let close_indent = "    ".repeat(depth);
    let line_indent = "    ".repeat(depth + 1);
    let body = raw.strip_prefix('\n').expect("leading newline");
    let body = body.strip_suffix(&format!("\n{close_indent}")).expect("closing indent");
    body.split('\n')
        .map(|l| if l.is_empty() { l } else { l.strip_prefix(&line_indent).expect("line indent") })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn text_of(node: roxmltree::Node) -> String {
    node.children().filter(|c| c.is_text()).map(|c| c.text().unwrap()).collect()
}

pub fn content() -> impl Strategy<Value = String> {
    prop_oneof![
        any::<String>(),
        "[<>&\"' \n\t\r\u{0}-\u{1f}a-z\u{7f}\u{85}\u{fffe}]{0,30}",
        Just("]]> <![CDATA[ x ]]> &amp; &#0;".to_string()),
    ]
}

pub fn tree() -> impl Strategy<Value = ContextTree> {
    let text_node = (any::<String>(), content()).prop_map(|(k, t)| ContextNode::text(&k, t));
    let child = ("[a-z]{1,6}[1-9]", proptest::option::of(content()), proptest::option::of(content()), content())
        .prop_map(|(tag, source, description, content)| ChildNode { tag, source, description, content });
    let child_node = (any::<String>(), prop::collection::vec(child, 1..4)).prop_map(|(k, children)| {
        let mut n = ContextNode::text(&k, "");
        n.text = None;
        n.children = children;
        n
    });
    prop::collection::vec(prop_oneof![text_node, child_node], 0..5).prop_map(|nodes| ContextTree { nodes })
}

/// Independent restatement of the counting rule with regular expressions.
pub fn regex_count(s: &str) -> u64 {
    let chunk = regex::Regex::new(r"\S+").unwrap();
    let alnum = regex::Regex::new(r"[\p{Alphabetic}\p{Nd}\p{Nl}\p{No}]").unwrap();
    chunk.find_iter(s).map(|m| if alnum.is_match(m.as_str()) { 1 } else { m.as_str().chars().count() as u64 }).sum()
}

/// A generated document parses without diagnostics, keeps key order and
/// yields the generated values.
pub fn check_generated_document(pairs: &[(String, GenValue)], text: &str) -> Result<(), TestCaseError> {
    let doc = parse_document(text, "gen.json");
    prop_assert!(doc.is_ok(), "{:?}\n{}", doc.err(), text);
    let doc = doc.unwrap();
    let keys: Vec<&str> = doc.keys().collect();
    let expected: Vec<&str> = pairs.iter().map(|(k, _)| k.as_str()).collect();
    prop_assert_eq!(keys, expected);
    for ((_, gen), (_, entry)) in pairs.iter().zip(&doc.entries) {
        match (gen, entry) {
            (GenValue::Text(a), Entry::Text(b)) => prop_assert_eq!(a, b),
            (GenValue::List(a, t), Entry::Structured(o)) => {
                prop_assert_eq!(&o.data, &DataSpec::Items(a.clone()));
                prop_assert_eq!(&o.type_tag, &t.to_lowercase());
            }
            (GenValue::Dict(a, t), Entry::Structured(o)) => {
                prop_assert_eq!(&o.data, &DataSpec::Described(a.clone()));
                prop_assert_eq!(&o.type_tag, &t.to_lowercase());
            }
            _ => prop_assert!(false, "variant mismatch"),
        }
    }
    Ok(())
}

/// Parse, canonical write, parse again: the same document.
pub fn check_round_trip(text: &str) -> Result<(), TestCaseError> {
    let doc = parse_document(text, "gen.json").unwrap();
    let again = parse_document(&doc.to_canonical_json(), "gen.json").unwrap();
    prop_assert_eq!(doc, again);
    Ok(())
}

/// The XML output parses inside a synthetic root and decodes back to the
/// tree's content after control-character stripping.
pub fn check_xml_tree(tree: &ContextTree) -> Result<(), TestCaseError> {
    let xml = serialize_xml(tree);
    let wrapped = format!("<root>\n{xml}</root>");
    let doc = roxmltree::Document::parse(&wrapped);
    prop_assert!(doc.is_ok(), "{:?}\n{}", doc.err(), wrapped);
    let doc = doc.unwrap();
    let elems: Vec<_> = doc.root_element().children().filter(|n| n.is_element()).collect();
    prop_assert_eq!(elems.len(), tree.nodes.len());
    for (el, node) in elems.iter().zip(&tree.nodes) {
        prop_assert!(is_valid_tag(&node.tag));
        prop_assert_eq!(el.tag_name().name(), node.tag.as_str());
        if let Some(text) = &node.text {
            prop_assert_eq!(unindent(&text_of(*el), 0), xml_representable(text));
        } else {
            let kids: Vec<_> = el.children().filter(|n| n.is_element()).collect();
            prop_assert_eq!(kids.len(), node.children.len());
            for (k, c) in kids.iter().zip(&node.children) {
                prop_assert_eq!(k.tag_name().name(), c.tag.as_str());
                prop_assert_eq!(unindent(&text_of(*k), 1), xml_representable(&c.content));
                prop_assert_eq!(
                    k.attribute("description").map(String::from),
                    c.description.as_deref().map(xml_representable)
                );
                prop_assert_eq!(k.attribute("source").map(String::from), c.source.as_deref().map(xml_representable));
            }
        }
    }
    Ok(())
}

/// The corrected listing parses with no diagnostics into its four entries.
pub fn check_listing() -> Result<(), String> {
    let doc = parse_document(LISTING, "Readme_AI.json").map_err(|d| format!("{d:?}"))?;
    let warnings = readme_ai_core::validate_document(&doc, &readme_ai_core::document::builtin_tag_set());
    if !warnings.is_empty() {
        return Err(format!("unexpected diagnostics: {warnings:?}"));
    }
    let expected = vec![
        (
            "description".to_string(),
            Entry::Text("An example project demonstrating the Readme_AI specification.".into()),
        ),
        (
            "source_files".to_string(),
            Entry::Structured(readme_ai_core::StructuredObject::new(
                DataSpec::Described(vec![
                    ("/src/main.py".into(), "Main file".into()),
                    ("/src/utils.py".into(), "Utility file".into()),
                ]),
                "fetch",
            )),
        ),
        (
            "api_files".to_string(),
            Entry::Structured(readme_ai_core::StructuredObject::new(
                DataSpec::Items(vec!["/src/api/*".into()]),
                "fetch",
            )),
        ),
        (
            "documentation".to_string(),
            Entry::Structured(readme_ai_core::StructuredObject::new(DataSpec::Items(vec!["doc-url".into()]), "crawl")),
        ),
    ];
    if doc.entries != expected {
        return Err(format!("structure mismatch: {:?}", doc.entries));
    }
    Ok(())
}

/// Every invalid document fails with at least one located error.
pub fn check_invalid_corpus() -> Result<(), String> {
    if INVALID.len() < 20 {
        return Err(format!("corpus has only {} documents", INVALID.len()));
    }
    for text in INVALID {
        let diags = parse_document(text, "bad.json").err().ok_or_else(|| format!("accepted: {text}"))?;
        if diags.is_empty() || !diags.iter().all(|d| d.is_error() && d.location.is_some()) {
            return Err(format!("{text}: {diags:?}"));
        }
    }
    Ok(())
}
