//! Markdown rendering: one `#` heading per node, `##` per child, child
//! content in fenced blocks.

use alloc::string::String;

use crate::tree::{strip_control, ContextTree};

pub fn serialize_markdown(tree: &ContextTree) -> String {
    let mut out = String::new();
    for node in &tree.nodes {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str("# ");
        out.push_str(&node.tag);
        out.push_str("\n\n");
        if let Some(text) = &node.text {
            out.push_str(strip_control(text).trim_end_matches('\n'));
            out.push('\n');
        }
        for (i, child) in node.children.iter().enumerate() {
            if i > 0 || node.text.is_some() {
                out.push('\n');
            }
            out.push_str("## ");
            out.push_str(&child.tag);
            out.push_str("\n\n");
            if let Some(source) = &child.source {
                out.push_str("Source: ");
                out.push_str(&one_line(source));
                out.push('\n');
            }
            if let Some(desc) = &child.description {
                out.push_str("Description: ");
                out.push_str(&one_line(desc));
                out.push('\n');
            }
            if child.source.is_some() || child.description.is_some() {
                out.push('\n');
            }
            let content = strip_control(&child.content);
            let fence = fence_for(&content);
            out.push_str(&fence);
            out.push('\n');
            out.push_str(&content);
            if !content.is_empty() && !content.ends_with('\n') {
                out.push('\n');
            }
            out.push_str(&fence);
            out.push('\n');
        }
    }
    out
}

/// A backtick fence longer than any backtick run inside `content`.
fn fence_for(content: &str) -> String {
    let mut longest = 0;
    let mut run = 0;
    for c in content.chars() {
        if c == '`' {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    "`".repeat(longest.max(2) + 1)
}

fn one_line(s: &str) -> String {
    strip_control(s).replace('\n', " ")
}
