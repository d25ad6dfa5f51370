//! The `readme_ai` tool: source reference in, serialized context out.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use readme_ai_core::document::{parse_document_with, validate_document, ParseOptions};
use readme_ai_core::{serialize_markdown, serialize_xml, BuildReport, CrawlPolicy, Diagnostic};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::build::{build_context, BuildEnv, BuildOptions};
use crate::error::{BuildError, SourceError};
use crate::handlers::HandlerRegistry;
use crate::net::Deadline;
use crate::source::{resolve_source, Acquirer, GitAcquirer, Registry, SourceRef};

pub const TOOL_NAME: &str = "readme_ai";
pub const TOOL_DESCRIPTION: &str = include_str!("../resources/tool_description.txt");
pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Xml,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xml" => Ok(OutputFormat::Xml),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(format!("unknown format `{other}` (expected xml or markdown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolSchema {
    pub name: String,
    pub description: String,
    #[serde(rename = "inputSchema")]
    pub input_schema: Value,
}

impl ToolSchema {
    pub fn readme_ai() -> Self {
        ToolSchema {
            name: TOOL_NAME.into(),
            description: TOOL_DESCRIPTION.trim().into(),
            input_schema: json!({
                "type": "object",
                "properties": {
                    "url_or_name": {
                        "type": "string",
                        "description": "Repository URL (https or file) or a registered short name."
                    },
                    "include_keys": {
                        "type": "array",
                        "items": {"type": "string"},
                        "description": "Top-level metadata entries to include; all when omitted."
                    },
                    "format": {
                        "type": "string",
                        "enum": ["xml", "markdown"],
                        "default": "xml",
                        "description": "Serialization of the returned context."
                    }
                },
                "required": ["url_or_name"],
                "additionalProperties": false
            }),
        }
    }
}

/// One build request, shared by the CLI and the server.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildRequest {
    pub url_or_name: String,
    pub include_keys: Option<Vec<String>>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub token_count: u64,
    pub items_total: usize,
    pub items_failed: usize,
    pub duration_ms: u64,
    pub diagnostics: Vec<String>,
}

impl From<&BuildReport> for ReportSummary {
    fn from(r: &BuildReport) -> Self {
        ReportSummary {
            token_count: r.token_count,
            items_total: r.items_total,
            items_failed: r.items_failed,
            duration_ms: r.duration.as_millis() as u64,
            diagnostics: r.diagnostics.iter().map(ToString::to_string).collect(),
        }
    }
}

impl fmt::Display for ReportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tokens: {}  items: {} ({} failed)  duration: {} ms",
            self.token_count, self.items_total, self.items_failed, self.duration_ms
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolResult {
    /// The context, or a readable explanation when `is_error`.
    pub content: String,
    pub is_error: bool,
    pub report: Option<ReportSummary>,
}

impl ToolResult {
    /// MCP `tools/call` result shape.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "content": [{"type": "text", "text": self.content}],
            "isError": self.is_error,
        });
        if let Some(report) = &self.report {
            v["_meta"] = json!({ "readme_ai/report": report });
        }
        v
    }
}

/// Failures of the build pipeline, by stage.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("{}", parse_message(.0))]
    Parse(Vec<Diagnostic>),
    #[error("{0}")]
    Build(#[from] BuildError),
    #[error("deadline of {}s exceeded while {stage}", .limit.as_secs())]
    Deadline { limit: Duration, stage: &'static str },
}

fn parse_message(diags: &[Diagnostic]) -> String {
    let mut s = String::from("Readme_AI.json is invalid:");
    for d in diags {
        s.push_str("\n  ");
        s.push_str(&d.to_string());
    }
    s
}

impl PipelineError {
    /// Local configuration or disk trouble, as opposed to a problem with the
    /// data source.
    pub fn is_local(&self) -> bool {
        matches!(self, PipelineError::Source(e) if e.is_local())
    }

    fn report(&self) -> Option<ReportSummary> {
        match self {
            PipelineError::Build(BuildError::NothingProcessed { report }) => Some(report.into()),
            _ => None,
        }
    }
}

/// Protocol-level failures of `call_tool`.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CallError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

#[derive(Clone)]
pub struct ServiceConfig {
    pub cache_dir: PathBuf,
    pub registry_path: PathBuf,
    pub policy: CrawlPolicy,
    pub lenient: bool,
    /// Overall limit for one call, acquisition included.
    pub deadline: Duration,
    pub handlers: HandlerRegistry,
    pub env: BuildEnv,
}

impl ServiceConfig {
    pub fn new(cache_dir: impl Into<PathBuf>, registry_path: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            cache_dir: cache_dir.into(),
            registry_path: registry_path.into(),
            policy: CrawlPolicy::default(),
            lenient: false,
            deadline: DEFAULT_DEADLINE,
            handlers: HandlerRegistry::new(),
            env: BuildEnv::default(),
        }
    }
}

/// Output of a successful pipeline run.
#[derive(Debug, Clone)]
pub struct Built {
    pub content: String,
    pub report: BuildReport,
}

/// Cheap to clone; clones share the registry and configuration.
#[derive(Clone)]
pub struct ContextService {
    shared: Arc<Shared>,
}

struct Shared {
    config: ServiceConfig,
    registry: Mutex<Registry>,
    acquirer: Arc<dyn Acquirer>,
}

impl ContextService {
    pub fn new(config: ServiceConfig) -> Result<Self, SourceError> {
        let registry = Registry::load(&config.registry_path)?;
        let shared = Shared { config, registry: Mutex::new(registry), acquirer: Arc::new(GitAcquirer) };
        Ok(ContextService { shared: Arc::new(shared) })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.shared.config
    }

    pub fn list_tools(&self) -> Vec<ToolSchema> {
        vec![ToolSchema::readme_ai()]
    }

    /// Protocol entry point. Data failures come back as `is_error` results.
    pub fn call_tool(&self, name: &str, arguments: &Value) -> Result<ToolResult, CallError> {
        if name != TOOL_NAME {
            return Err(CallError::UnknownTool(name.to_string()));
        }
        let request = parse_arguments(arguments)?;
        Ok(match self.run(&request) {
            Ok(built) => ToolResult { content: built.content, is_error: false, report: Some((&built.report).into()) },
            Err(e) => ToolResult { content: e.to_string(), is_error: true, report: e.report() },
        })
    }

    /// Resolve, acquire, parse, build and serialize under the configured
    /// deadline. A pipeline that overruns is abandoned; its handlers observe
    /// the same deadline and wind down on their own.
    pub fn run(&self, request: &BuildRequest) -> Result<Built, PipelineError> {
        let limit = self.shared.config.deadline;
        let deadline = Deadline::after(limit);
        let stage = Arc::new(Mutex::new("resolving the source"));
        let (tx, rx) = mpsc::channel();
        let (shared, request_owned, stage_w) = (self.shared.clone(), request.clone(), stage.clone());
        thread::Builder::new()
            .name("readme-ai-build".into())
            .spawn(move || {
                let _ = tx.send(shared.pipeline(&request_owned, deadline, &stage_w));
            })
            .map_err(SourceError::from)?;
        match rx.recv_timeout(limit + Duration::from_millis(500)) {
            Ok(result) => result,
            Err(_) => {
                let stage = *stage.lock().unwrap_or_else(|e| e.into_inner());
                Err(PipelineError::Deadline { limit, stage })
            }
        }
    }
}

impl Shared {
    fn pipeline(
        &self,
        request: &BuildRequest,
        deadline: Deadline,
        stage: &Mutex<&'static str>,
    ) -> Result<Built, PipelineError> {
        let set_stage = |s: &'static str| {
            tracing::debug!(stage = s, "pipeline");
            *stage.lock().unwrap_or_else(|e| e.into_inner()) = s;
        };
        let source = SourceRef::classify(&request.url_or_name)?;
        let url = {
            let mut registry = self.registry.lock().unwrap_or_else(|e| e.into_inner());
            registry.reload()?;
            resolve_source(&source, &mut registry)?
        };

        set_stage("acquiring the repository");
        let checkout = self.acquirer.acquire(&url, &self.config.cache_dir, deadline)?;
        if deadline.expired() {
            return Err(PipelineError::Deadline { limit: self.config.deadline, stage: "acquiring the repository" });
        }

        set_stage("parsing Readme_AI.json");
        let text = fs::read(&checkout.spec_path).map_err(SourceError::from)?;
        let text = String::from_utf8(text)
            .map_err(|_| PipelineError::Parse(vec![Diagnostic::error("/", "Readme_AI.json is not valid UTF-8")]))?;
        let path = checkout.spec_path.display().to_string();
        let doc = parse_document_with(&text, &path, ParseOptions::default()).map_err(PipelineError::Parse)?;
        let tags: BTreeSet<String> = self.config.handlers.tags().into_iter().collect();
        let warnings = validate_document(&doc, &tags);

        set_stage("building context");
        let options =
            BuildOptions { include_keys: request.include_keys.clone(), lenient: self.config.lenient, deadline };
        let started = Instant::now();
        let (tree, mut report) =
            build_context(&doc, &checkout, &self.config.handlers, &self.config.policy, &self.config.env, &options)?;
        // The build restates some validation findings with more detail.
        let warnings: Vec<Diagnostic> =
            warnings.into_iter().filter(|w| !report.diagnostics.iter().any(|d| d.path == w.path)).collect();
        report.diagnostics.splice(0..0, warnings);
        report.duration = started.elapsed();
        if deadline.expired() {
            report.diagnostics.push(Diagnostic::warning("/", "deadline reached; context may be incomplete"));
        }
        let content = match request.format {
            OutputFormat::Xml => serialize_xml(&tree),
            OutputFormat::Markdown => serialize_markdown(&tree),
        };
        Ok(Built { content, report })
    }
}

fn parse_arguments(arguments: &Value) -> Result<BuildRequest, CallError> {
    let bad = |m: &str| CallError::InvalidArguments(m.to_string());
    let obj = match arguments {
        Value::Object(obj) => obj,
        Value::Null => return Err(bad("`url_or_name` is required")),
        _ => return Err(bad("arguments must be an object")),
    };
    let url_or_name = match obj.get("url_or_name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(bad("`url_or_name` must be a string")),
        None => return Err(bad("`url_or_name` is required")),
    };
    let include_keys = match obj.get("include_keys") {
        None | Some(Value::Null) => None,
        Some(Value::Array(keys)) => Some(
            keys.iter()
                .map(|k| k.as_str().map(str::to_string).ok_or_else(|| bad("`include_keys` must be a list of strings")))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Some(_) => return Err(bad("`include_keys` must be a list of strings")),
    };
    let format = match obj.get("format") {
        None | Some(Value::Null) => OutputFormat::Xml,
        Some(Value::String(s)) => s.parse().map_err(|e: String| CallError::InvalidArguments(e))?,
        Some(_) => return Err(bad("`format` must be a string")),
    };
    if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "url_or_name" | "include_keys" | "format")) {
        return Err(CallError::InvalidArguments(format!("unknown argument `{extra}`")));
    }
    Ok(BuildRequest { url_or_name, include_keys, format })
}
