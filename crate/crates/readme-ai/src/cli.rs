//! Command-line front end: `validate`, `build`, `register`, `serve`.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use readme_ai_core::document::{builtin_tag_set, parse_document, validate_document};
use readme_ai_core::CrawlPolicy;

use crate::server::{Framing, Server};
use crate::source::Registry;
use crate::tool::{BuildRequest, ContextService, OutputFormat, ServiceConfig, DEFAULT_DEADLINE};

/// Exit status: success.
pub const EXIT_OK: u8 = 0;
/// Exit status: the request failed for domain reasons (bad spec, failed build, collision).
pub const EXIT_FAILURE: u8 = 1;
/// Exit status: usage error or local IO failure.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "readme-ai", version, about = "Build LLM context from Readme_AI.json metadata")]
pub struct Cli {
    /// Where repositories are cloned.
    #[arg(long, global = true, env = "READMEAI_CACHE_DIR", value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Name-to-URL lookup file.
    #[arg(long, global = true, env = "READMEAI_REGISTRY_PATH", value_name = "FILE")]
    pub registry: Option<PathBuf>,
    /// Log filter for standard error, e.g. `info` or `readme_ai=debug`.
    #[arg(long, global = true, default_value = "warn", value_name = "FILTER")]
    pub log: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a Readme_AI.json file and print diagnostics.
    Validate { path: PathBuf },
    /// Build context for a repository URL or registered name.
    Build {
        url_or_name: String,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Map a short name to a repository URL.
    Register {
        name: String,
        url: String,
        /// Replace an existing mapping for the name.
        #[arg(long)]
        overwrite: bool,
    },
    /// Run the JSON-RPC tool server.
    Serve {
        #[command(flatten)]
        build: BuildArgs,
        /// Stdio message framing: auto, lines or content-length.
        #[arg(long, default_value = "auto")]
        framing: Framing,
        /// Serve over HTTP on this address instead of stdio.
        #[arg(long, value_name = "ADDR")]
        http: Option<String>,
        /// Concurrent tool calls.
        #[arg(long, default_value_t = crate::server::DEFAULT_WORKERS)]
        workers: usize,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Output serialization.
    #[arg(long, default_value = "xml")]
    pub format: OutputFormat,
    /// Only build these entries (comma-separated or repeated).
    #[arg(long, value_delimiter = ',', value_name = "KEY")]
    pub include_keys: Vec<String>,
    /// Skip entries with unknown types instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Page budget for one crawl entry.
    #[arg(long, value_name = "N")]
    pub max_pages: Option<usize>,
    /// Link hops followed from each crawl seed.
    #[arg(long, value_name = "N")]
    pub max_depth: Option<usize>,
    /// Crawl or download from this host (repeatable). Crawls may then
    /// leave the seed's host.
    #[arg(long, value_name = "HOST")]
    pub allow_host: Vec<String>,
    /// Never contact this host (repeatable). Wins over --allow-host.
    #[arg(long, value_name = "HOST")]
    pub deny_host: Vec<String>,
    /// Minimum delay between requests to one host.
    #[arg(long, value_name = "MS")]
    pub delay_ms: Option<u64>,
    /// Per-request HTTP timeout.
    #[arg(long, value_name = "SECS")]
    pub timeout: Option<u64>,
    /// Overall limit for one build, acquisition included.
    #[arg(long, value_name = "SECS", default_value_t = DEFAULT_DEADLINE.as_secs())]
    pub deadline: u64,
}

impl BuildArgs {
    pub fn policy(&self) -> CrawlPolicy {
        let mut policy = CrawlPolicy::default();
        if let Some(n) = self.max_pages {
            policy.max_pages = n.max(1);
        }
        if let Some(n) = self.max_depth {
            policy.max_depth = n;
        }
        if let Some(ms) = self.delay_ms {
            policy.request_delay = Duration::from_millis(ms);
        }
        if let Some(s) = self.timeout {
            policy.timeout = Duration::from_secs(s.max(1));
        }
        if !self.allow_host.is_empty() {
            policy.same_host_only = false;
        }
        for h in &self.allow_host {
            policy = policy.allow_host(h);
        }
        for h in &self.deny_host {
            policy = policy.deny_host(h);
        }
        policy
    }

    fn request(&self, url_or_name: &str) -> BuildRequest {
        BuildRequest {
            url_or_name: url_or_name.to_string(),
            include_keys: (!self.include_keys.is_empty()).then(|| self.include_keys.clone()),
            format: self.format,
        }
    }
}

pub fn default_cache_dir() -> PathBuf {
    dirs::cache_dir().unwrap_or_else(std::env::temp_dir).join("readme-ai")
}

pub fn default_registry_path() -> PathBuf {
    dirs::data_dir().unwrap_or_else(std::env::temp_dir).join("readme-ai").join("lookup.json")
}

impl Cli {
    fn config(&self, build: &BuildArgs) -> ServiceConfig {
        let mut config = ServiceConfig::new(
            self.cache_dir.clone().unwrap_or_else(default_cache_dir),
            self.registry.clone().unwrap_or_else(default_registry_path),
        );
        config.policy = build.policy();
        config.lenient = build.lenient;
        config.deadline = Duration::from_secs(build.deadline.max(1));
        config
    }
}

/// Parses `args` and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_new(&cli.log).unwrap_or_else(|_| "warn".into()))
        .with_writer(io::stderr)
        .try_init();
    ExitCode::from(match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Build { url_or_name, build } => cmd_build(&cli, url_or_name, build),
        Command::Register { name, url, overwrite } => cmd_register(&cli, name, url, *overwrite),
        Command::Serve { build, framing, http, workers } => cmd_serve(&cli, build, *framing, http.as_deref(), *workers),
    })
}

fn cmd_validate(path: &PathBuf) -> u8 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let name = path.display().to_string();
    match parse_document(&text, &name) {
        Ok(doc) => {
            for d in validate_document(&doc, &builtin_tag_set()) {
                eprintln!("{d}");
            }
            EXIT_OK
        }
        Err(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            EXIT_FAILURE
        }
    }
}

fn cmd_build(cli: &Cli, url_or_name: &str, build: &BuildArgs) -> u8 {
    let service = match ContextService::new(cli.config(build)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match service.run(&build.request(url_or_name)) {
        Ok(built) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(built.content.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return EXIT_USAGE;
            }
            for d in &built.report.diagnostics {
                eprintln!("{d}");
            }
            eprintln!("{}", crate::tool::ReportSummary::from(&built.report));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_local() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn cmd_register(cli: &Cli, name: &str, url: &str, overwrite: bool) -> u8 {
    let path = cli.registry.clone().unwrap_or_else(default_registry_path);
    let result = Registry::load(&path).and_then(|mut r| r.register(name, url, overwrite));
    match result {
        Ok(()) => {
            eprintln!("registered {} -> {url}", name.trim().to_lowercase());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_local() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn cmd_serve(cli: &Cli, build: &BuildArgs, framing: Framing, http: Option<&str>, workers: usize) -> u8 {
    let config = cli.config(build);
    let deadline = config.deadline;
    let service = match ContextService::new(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let server = Arc::new(Server::new(service).with_workers(workers));
    let in_flight = server.in_flight();
    let handler = ctrlc::set_handler(move || {
        if !in_flight.wait_idle(deadline) {
            tracing::warn!("shutting down with calls still running");
        }
        std::process::exit(i32::from(EXIT_OK));
    });
    if let Err(e) = handler {
        tracing::warn!("no signal handler installed: {e}");
    }
    let result = match http {
        Some(addr) => server.serve_http(addr, None),
        None => server.serve_stream(io::stdin().lock(), io::stdout(), framing),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
