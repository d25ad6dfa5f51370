//! Token-size heuristic for emitted context.
//!
//! This is not any model's tokenizer. The rule: split on Unicode whitespace;
//! a chunk containing at least one alphanumeric character counts as one word;
//! a chunk made only of punctuation or symbols counts one per character.

/// Approximate token count of `text`.
pub fn count_tokens(text: &str) -> u64 {
    text.split_whitespace()
        .map(|chunk| if chunk.chars().any(char::is_alphanumeric) { 1 } else { chunk.chars().count() as u64 })
        .sum()
}
