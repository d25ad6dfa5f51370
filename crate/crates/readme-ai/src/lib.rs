//! Readme_AI context builder: acquires a data source, reads its
//! `Readme_AI.json`, runs the typed handlers and renders tagged context.
//!
//! The pure model (parser, tree, serializers) lives in `readme_ai_core`;
//! this crate adds everything that talks to the network, git, or disk.

pub mod build;
pub mod cli;
pub mod error;
pub mod handlers;
pub mod html;
pub mod net;
pub mod pdf;
pub mod server;
pub mod source;
pub mod tool;

pub use build::{build_context, BuildEnv, BuildOptions};
pub use error::{BuildError, DispatchError, RegisterError, SourceError};
pub use handlers::{Handler, HandlerContext, HandlerOutput, HandlerRegistry};
pub use net::{Deadline, HttpClient};
pub use source::{acquire_repo, resolve_source, Checkout, Registry, SourceKind, SourceRef};
pub use tool::{ContextService, OutputFormat, ServiceConfig, ToolResult, ToolSchema};

/// Sent with every HTTP request.
pub const USER_AGENT: &str = concat!("readme-ai/", env!("CARGO_PKG_VERSION"), " (+context builder)");
