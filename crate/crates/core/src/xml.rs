//! XML rendering of a context tree.
//!
//! Output is a sequence of top-level elements (a fragment). Wrapped in any
//! single root element it is a well-formed document. Content lines are
//! indented four spaces per level; empty lines are left empty.

use alloc::string::String;

use crate::tree::{strip_control, ContextNode, ContextTree};

const INDENT: &str = "    ";

pub fn serialize_xml(tree: &ContextTree) -> String {
    let mut out = String::new();
    for node in &tree.nodes {
        write_node(&mut out, node);
    }
    out
}

fn write_node(out: &mut String, node: &ContextNode) {
    if let Some(text) = &node.text {
        write_block(out, &node.tag, &[], text, 0);
        return;
    }
    out.push('<');
    out.push_str(&node.tag);
    out.push_str(">\n");
    for child in &node.children {
        let attrs = [("source", child.source.as_deref()), ("description", child.description.as_deref())];
        write_block(out, &child.tag, &attrs, &child.content, 1);
    }
    out.push_str("</");
    out.push_str(&node.tag);
    out.push_str(">\n");
}

fn write_block(out: &mut String, tag: &str, attrs: &[(&str, Option<&str>)], content: &str, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push('<');
    out.push_str(tag);
    for (name, value) in attrs {
        if let Some(value) = value {
            out.push(' ');
            out.push_str(name);
            out.push_str("=\"");
            escape_attr(out, &strip_control(value));
            out.push('"');
        }
    }
    out.push_str(">\n");
    let content = strip_control(content);
    for line in content.split('\n') {
        if !line.is_empty() {
            for _ in 0..=depth {
                out.push_str(INDENT);
            }
            escape_text(out, line);
        }
        out.push('\n');
    }
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str("</");
    out.push_str(tag);
    out.push_str(">\n");
}

pub fn escape_text(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

/// Attribute values also escape quotes, and tab/newline so that attribute
/// value normalization in the reader does not turn them into spaces.
pub fn escape_attr(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
}
