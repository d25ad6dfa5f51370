//! JSON-RPC 2.0 tool server (MCP tool-calling message shapes).
//!
//! The stdio transport reads newline-delimited or `Content-Length` framed
//! messages. `tools/call` requests run on a small worker pool, so responses
//! can be written out of request order.

use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::str::FromStr;
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::tool::{CallError, ContextService};

pub const PROTOCOL_VERSION: &str = "2024-11-05";
pub const DEFAULT_WORKERS: usize = 4;

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Framing {
    /// Decide from the first message.
    #[default]
    Auto,
    Lines,
    ContentLength,
}

impl FromStr for Framing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Framing::Auto),
            "lines" | "ndjson" => Ok(Framing::Lines),
            "content-length" | "lsp" => Ok(Framing::ContentLength),
            other => Err(format!("unknown framing `{other}` (expected auto, lines or content-length)")),
        }
    }
}

/// Counts requests being worked on, so shutdown can wait for them.
#[derive(Debug, Default)]
pub struct InFlight {
    count: Mutex<usize>,
    idle: Condvar,
}

impl InFlight {
    fn enter(self: &Arc<Self>) -> InFlightGuard {
        *self.count.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        InFlightGuard(self.clone())
    }

    pub fn current(&self) -> usize {
        *self.count.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Blocks until nothing is in flight or `timeout` passes. Returns
    /// whether the server went idle.
    pub fn wait_idle(&self, timeout: Duration) -> bool {
        let end = Instant::now() + timeout;
        let mut count = self.count.lock().unwrap_or_else(|e| e.into_inner());
        while *count > 0 {
            let left = end.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return false;
            }
            count = self.idle.wait_timeout(count, left).unwrap_or_else(|e| e.into_inner()).0;
        }
        true
    }
}

struct InFlightGuard(Arc<InFlight>);

impl Drop for InFlightGuard {
    fn drop(&mut self) {
        let mut count = self.0.count.lock().unwrap_or_else(|e| e.into_inner());
        *count -= 1;
        if *count == 0 {
            self.0.idle.notify_all();
        }
    }
}

pub struct Server {
    service: ContextService,
    workers: usize,
    in_flight: Arc<InFlight>,
}

fn error_response(id: Value, code: i64, message: impl Into<String>) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message.into()}})
}

fn ok_response(id: Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

impl Server {
    pub fn new(service: ContextService) -> Self {
        Server { service, workers: DEFAULT_WORKERS, in_flight: Arc::default() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn in_flight(&self) -> Arc<InFlight> {
        self.in_flight.clone()
    }

    /// Handles one decoded message (single request or batch). `None` for
    /// notifications and all-notification batches.
    pub fn handle_value(&self, message: Value) -> Option<Value> {
        match message {
            Value::Array(batch) if batch.is_empty() => {
                Some(error_response(Value::Null, INVALID_REQUEST, "empty batch"))
            }
            Value::Array(batch) => {
                let responses: Vec<Value> = batch.into_iter().filter_map(|m| self.handle_single(m)).collect();
                (!responses.is_empty()).then_some(Value::Array(responses))
            }
            single => self.handle_single(single),
        }
    }

    /// Handles raw message text, answering parse errors itself.
    pub fn handle_text(&self, text: &str) -> Option<Value> {
        match serde_json::from_str::<Value>(text) {
            Ok(v) => self.handle_value(v),
            Err(e) => Some(error_response(Value::Null, PARSE_ERROR, format!("parse error: {e}"))),
        }
    }

    fn handle_single(&self, message: Value) -> Option<Value> {
        let Value::Object(obj) = message else {
            return Some(error_response(Value::Null, INVALID_REQUEST, "request must be an object"));
        };
        let id = obj.get("id").cloned();
        if id.as_ref().is_some_and(|id| !matches!(id, Value::String(_) | Value::Number(_) | Value::Null)) {
            return Some(error_response(Value::Null, INVALID_REQUEST, "id must be a string, number or null"));
        }
        let reply_id = id.clone().unwrap_or(Value::Null);
        if obj.get("jsonrpc").and_then(Value::as_str) != Some("2.0") {
            return Some(error_response(reply_id, INVALID_REQUEST, "jsonrpc must be \"2.0\""));
        }
        let Some(method) = obj.get("method").and_then(Value::as_str) else {
            // A response from the client; nothing to answer.
            if obj.contains_key("result") || obj.contains_key("error") {
                return None;
            }
            return Some(error_response(reply_id, INVALID_REQUEST, "method must be a string"));
        };
        let params = obj.get("params").cloned().unwrap_or(Value::Null);
        let _guard = self.in_flight.enter();
        let outcome = self.dispatch(method, params);
        let id = id?; // notifications get no reply
        Some(match outcome {
            Ok(result) => ok_response(id, result),
            Err((code, message)) => error_response(id, code, message),
        })
    }

    fn dispatch(&self, method: &str, params: Value) -> Result<Value, (i64, String)> {
        match method {
            "initialize" => {
                let version = params.get("protocolVersion").and_then(Value::as_str).unwrap_or(PROTOCOL_VERSION);
                Ok(json!({
                    "protocolVersion": version,
                    "capabilities": {"tools": {"listChanged": false}},
                    "serverInfo": {"name": "readme-ai", "version": env!("CARGO_PKG_VERSION")}
                }))
            }
            "notifications/initialized" | "notifications/cancelled" | "ping" => Ok(json!({})),
            "tools/list" => Ok(json!({ "tools": self.service.list_tools() })),
            "tools/call" => {
                let name = params
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or((INVALID_PARAMS, "params.name must be a string".to_string()))?;
                let arguments = params.get("arguments").cloned().unwrap_or(Value::Null);
                match self.service.call_tool(name, &arguments) {
                    Ok(result) => Ok(result.to_json()),
                    Err(e @ (CallError::UnknownTool(_) | CallError::InvalidArguments(_))) => {
                        Err((INVALID_PARAMS, e.to_string()))
                    }
                }
            }
            other => Err((METHOD_NOT_FOUND, format!("method not found: {other}"))),
        }
    }

    /// Serves until `input` reaches end of stream, then waits for in-flight
    /// calls to finish.
    pub fn serve_stream<R, W>(self: &Arc<Self>, input: R, output: W, framing: Framing) -> io::Result<()>
    where
        R: BufRead,
        W: Write + Send + 'static,
    {
        let mut reader = FrameReader { input, framing };
        let writer = Arc::new(Mutex::new(FrameWriter { output, framing: Framing::Lines }));
        let (tx, rx) = mpsc::channel::<(Value, InFlightGuard)>();
        let rx = Arc::new(Mutex::new(rx));
        let workers: Vec<_> = (0..self.workers)
            .map(|_| {
                let (server, rx, writer) = (self.clone(), rx.clone(), writer.clone());
                thread::spawn(move || loop {
                    let job = rx.lock().unwrap_or_else(|e| e.into_inner()).recv();
                    let Ok((message, guard)) = job else { break };
                    if let Some(reply) = server.handle_value(message) {
                        let _ = writer.lock().unwrap_or_else(|e| e.into_inner()).send(&reply);
                    }
                    drop(guard);
                })
            })
            .collect();

        let result = loop {
            match reader.next_frame() {
                Ok(None) => break Ok(()),
                Ok(Some(text)) => {
                    writer.lock().unwrap_or_else(|e| e.into_inner()).framing = reader.framing;
                    if text.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<Value>(&text) {
                        Ok(message) if is_call(&message) => {
                            // Counted from enqueue so shutdown also waits for queued calls.
                            let _ = tx.send((message, self.in_flight.enter()));
                        }
                        Ok(message) => {
                            if let Some(reply) = self.handle_value(message) {
                                writer.lock().unwrap_or_else(|e| e.into_inner()).send(&reply)?;
                            }
                        }
                        Err(e) => {
                            let reply = error_response(Value::Null, PARSE_ERROR, format!("parse error: {e}"));
                            writer.lock().unwrap_or_else(|e| e.into_inner()).send(&reply)?;
                        }
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    let reply = error_response(Value::Null, PARSE_ERROR, e.to_string());
                    writer.lock().unwrap_or_else(|e| e.into_inner()).send(&reply)?;
                }
                Err(e) => break Err(e),
            }
        };
        drop(tx);
        for w in workers {
            let _ = w.join();
        }
        result
    }

    /// Serves JSON-RPC over HTTP POST on `addr` until the process exits.
    /// `ready` receives the bound address.
    pub fn serve_http(self: &Arc<Self>, addr: &str, ready: Option<mpsc::Sender<SocketAddr>>) -> io::Result<()> {
        let http = tiny_http::Server::http(addr)
            .map_err(|e| io::Error::new(io::ErrorKind::AddrNotAvailable, e.to_string()))?;
        let http = Arc::new(http);
        if let (Some(tx), Some(bound)) = (ready, http.server_addr().to_ip()) {
            let _ = tx.send(bound);
        }
        let workers: Vec<_> = (0..self.workers)
            .map(|_| {
                let (server, http) = (self.clone(), http.clone());
                thread::spawn(move || {
                    while let Ok(mut request) = http.recv() {
                        let mut body = String::new();
                        let reply = if *request.method() != tiny_http::Method::Post {
                            Some(error_response(Value::Null, INVALID_REQUEST, "use POST"))
                        } else if request.as_reader().read_to_string(&mut body).is_err() {
                            Some(error_response(Value::Null, PARSE_ERROR, "body is not UTF-8"))
                        } else {
                            server.handle_text(&body)
                        };
                        let response = match reply {
                            Some(v) => {
                                let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
                                    .expect("static header");
                                tiny_http::Response::from_string(v.to_string()).with_header(header).boxed()
                            }
                            None => tiny_http::Response::empty(202).boxed(),
                        };
                        let _ = request.respond(response);
                    }
                })
            })
            .collect();
        for w in workers {
            let _ = w.join();
        }
        Ok(())
    }
}

/// Whether a message carries a `tools/call` (alone or inside a batch).
fn is_call(message: &Value) -> bool {
    match message {
        Value::Array(batch) => batch.iter().any(is_call),
        Value::Object(obj) => obj.get("method").and_then(Value::as_str) == Some("tools/call"),
        _ => false,
    }
}

struct FrameReader<R> {
    input: R,
    framing: Framing,
}

impl<R: BufRead> FrameReader<R> {
    /// Next message text, or `None` at end of stream.
    fn next_frame(&mut self) -> io::Result<Option<String>> {
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        if self.framing == Framing::Auto && !line.trim().is_empty() {
            self.framing = if header_value(&line).is_some() { Framing::ContentLength } else { Framing::Lines };
        }
        if self.framing != Framing::ContentLength {
            return Ok(Some(line));
        }
        if line.trim().is_empty() {
            return Ok(Some(String::new()));
        }
        let mut length = header_value(&line);
        loop {
            let mut header = String::new();
            if self.input.read_line(&mut header)? == 0 {
                return Ok(None);
            }
            if header.trim().is_empty() {
                break;
            }
            length = length.or(header_value(&header));
        }
        let length =
            length.ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "missing Content-Length header"))?;
        let mut body = vec![0; length];
        self.input.read_exact(&mut body)?;
        String::from_utf8(body)
            .map(Some)
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "message is not UTF-8"))
    }
}

fn header_value(line: &str) -> Option<usize> {
    let (name, value) = line.split_once(':')?;
    name.trim().eq_ignore_ascii_case("content-length").then(|| value.trim().parse().ok()).flatten()
}

struct FrameWriter<W> {
    output: W,
    framing: Framing,
}

impl<W: Write> FrameWriter<W> {
    fn send(&mut self, message: &Value) -> io::Result<()> {
        let text = message.to_string();
        if self.framing == Framing::ContentLength {
            write!(self.output, "Content-Length: {}\r\n\r\n{text}", text.len())?;
        } else {
            writeln!(self.output, "{text}")?;
        }
        self.output.flush()
    }
}
