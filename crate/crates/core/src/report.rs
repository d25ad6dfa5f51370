use alloc::vec::Vec;
use core::time::Duration;

use crate::diagnostic::Diagnostic;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// Heuristic size of the XML rendering of the tree.
    pub token_count: u64,
    /// Data elements attempted across all handlers.
    pub items_total: usize,
    pub items_failed: usize,
    pub diagnostics: Vec<Diagnostic>,
    pub duration: Duration,
}

impl BuildReport {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}
