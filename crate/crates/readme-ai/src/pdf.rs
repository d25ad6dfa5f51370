//! Text extraction from PDF payloads.
//!
//! [`PdfTextExtractor`] is a deliberately small reader: it scans indirect
//! objects (including those packed in object streams), walks the page tree,
//! decodes Flate / ASCIIHex content streams and interprets the text-showing
//! operators. Fonts with a `ToUnicode` CMap are mapped through it; other
//! strings are read as Latin-1. Anything fancier can be plugged in through
//! [`TextExtractor`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;

use flate2::read::{DeflateDecoder, ZlibDecoder};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("not a PDF document")]
    NotPdf,
    #[error("corrupt PDF: {0}")]
    Corrupt(String),
}

pub trait TextExtractor: Send + Sync {
    fn extract(&self, bytes: &[u8]) -> Result<String, ExtractError>;
}

/// Whether the payload carries the `%PDF-` signature near its start.
pub fn looks_like_pdf(bytes: &[u8]) -> bool {
    find(&bytes[..bytes.len().min(1024)], b"%PDF-", 0).is_some()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct PdfTextExtractor;

/// Decompressed streams larger than this are rejected.
const MAX_DECODED: u64 = 64 * 1024 * 1024;
const MAX_TREE_DEPTH: usize = 64;

impl TextExtractor for PdfTextExtractor {
    fn extract(&self, bytes: &[u8]) -> Result<String, ExtractError> {
        if !looks_like_pdf(bytes) {
            return Err(ExtractError::NotPdf);
        }
        let doc = Document::load(bytes)?;
        let pages = doc.pages();
        if pages.is_empty() {
            return Err(ExtractError::Corrupt("no pages found".into()));
        }
        let mut out = Vec::new();
        for page in pages {
            let fonts = doc.fonts(&page.resources);
            let mut content = Vec::new();
            for stream in doc.contents(&page.dict) {
                content.extend_from_slice(&stream);
                content.push(b'\n');
            }
            let text = interpret(&content, &fonts);
            out.push(tidy(&text));
        }
        Ok(out.join("\n").trim().to_string())
    }
}

// ---------------------------------------------------------------------------
// Object model

#[derive(Debug, Clone, PartialEq)]
enum Obj {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Name(Vec<u8>),
    Str(Vec<u8>),
    Array(Vec<Obj>),
    Dict(Dict),
    Ref(u32),
    Stream(Dict, Vec<u8>),
}

type Dict = Vec<(Vec<u8>, Obj)>;

fn dict_get<'a>(d: &'a Dict, key: &[u8]) -> Option<&'a Obj> {
    d.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v)
}

impl Obj {
    fn as_dict(&self) -> Option<&Dict> {
        match self {
            Obj::Dict(d) | Obj::Stream(d, _) => Some(d),
            _ => None,
        }
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Obj::Int(i) => Some(*i as f64),
            Obj::Real(r) => Some(*r),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(i64),
    Real(f64),
    Name(Vec<u8>),
    Str(Vec<u8>),
    ArrayOpen,
    ArrayClose,
    DictOpen,
    DictClose,
    Keyword(Vec<u8>),
}

fn is_ws(b: u8) -> bool {
    matches!(b, b'\0' | b'\t' | b'\n' | b'\x0c' | b'\r' | b' ')
}

fn is_delim(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%')
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a [u8], pos: usize) -> Self {
        Lexer { src, pos }
    }

    fn skip_ws(&mut self) {
        while let Some(&b) = self.src.get(self.pos) {
            if is_ws(b) {
                self.pos += 1;
            } else if b == b'%' {
                while let Some(&c) = self.src.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Option<Token> {
        self.skip_ws();
        let b = *self.src.get(self.pos)?;
        match b {
            b'[' => {
                self.pos += 1;
                Some(Token::ArrayOpen)
            }
            b']' => {
                self.pos += 1;
                Some(Token::ArrayClose)
            }
            b'<' if self.src.get(self.pos + 1) == Some(&b'<') => {
                self.pos += 2;
                Some(Token::DictOpen)
            }
            b'>' if self.src.get(self.pos + 1) == Some(&b'>') => {
                self.pos += 2;
                Some(Token::DictClose)
            }
            b'<' => Some(Token::Str(self.hex_string())),
            b'(' => Some(Token::Str(self.literal_string())),
            b'/' => {
                self.pos += 1;
                Some(Token::Name(self.name()))
            }
            b'{' | b'}' | b')' | b'>' => {
                self.pos += 1;
                Some(Token::Keyword(vec![b]))
            }
            _ => {
                let start = self.pos;
                while let Some(&c) = self.src.get(self.pos) {
                    if is_ws(c) || is_delim(c) {
                        break;
                    }
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                Some(number(word).unwrap_or_else(|| Token::Keyword(word.to_vec())))
            }
        }
    }

    fn name(&mut self) -> Vec<u8> {
        let mut out = Vec::new();
        while let Some(&c) = self.src.get(self.pos) {
            if is_ws(c) || is_delim(c) {
                break;
            }
            if c == b'#' {
                if let Some(v) = self.src.get(self.pos + 1..self.pos + 3).and_then(hex_pair) {
                    out.push(v);
                    self.pos += 3;
                    continue;
                }
            }
            out.push(c);
            self.pos += 1;
        }
        out
    }

    fn hex_string(&mut self) -> Vec<u8> {
        self.pos += 1;
        let mut digits = Vec::new();
        while let Some(&c) = self.src.get(self.pos) {
            self.pos += 1;
            if c == b'>' {
                break;
            }
            if c.is_ascii_hexdigit() {
                digits.push(c);
            }
        }
        if digits.len() % 2 == 1 {
            digits.push(b'0');
        }
        digits.chunks(2).filter_map(hex_pair).collect()
    }

    fn literal_string(&mut self) -> Vec<u8> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut depth = 1;
        while let Some(&c) = self.src.get(self.pos) {
            self.pos += 1;
            match c {
                b'(' => {
                    depth += 1;
                    out.push(c);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                    out.push(c);
                }
                b'\\' => {
                    let Some(&e) = self.src.get(self.pos) else { break };
                    self.pos += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(8),
                        b'f' => out.push(12),
                        b'0'..=b'7' => {
                            let mut v = u32::from(e - b'0');
                            for _ in 0..2 {
                                match self.src.get(self.pos) {
                                    Some(&d @ b'0'..=b'7') => {
                                        v = v * 8 + u32::from(d - b'0');
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push(v as u8);
                        }
                        b'\r' => {
                            if self.src.get(self.pos) == Some(&b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'\n' => {}
                        other => out.push(other),
                    }
                }
                _ => out.push(c),
            }
        }
        out
    }
}

fn hex_pair(p: &[u8]) -> Option<u8> {
    let s = std::str::from_utf8(p).ok()?;
    u8::from_str_radix(s, 16).ok()
}

fn number(word: &[u8]) -> Option<Token> {
    let s = std::str::from_utf8(word).ok()?;
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.')) {
        return None;
    }
    if let Ok(i) = s.parse::<i64>() {
        return Some(Token::Int(i));
    }
    let r = if let Some(rest) = s.strip_prefix('.') {
        format!("0.{rest}").parse::<f64>().ok()
    } else if let Some(rest) = s.strip_prefix("-.") {
        format!("-0.{rest}").parse::<f64>().ok()
    } else {
        s.parse::<f64>().ok()
    };
    r.map(Token::Real)
}

/// Reads one object; `None` at end of input or on a stray closing token.
fn parse_obj(lx: &mut Lexer, depth: usize) -> Option<Obj> {
    if depth > MAX_TREE_DEPTH {
        return None;
    }
    let tok = lx.next()?;
    Some(match tok {
        Token::Int(i) => {
            // `N G R` is a reference; look ahead without consuming otherwise.
            let save = lx.pos;
            if let (Some(Token::Int(_)), Some(Token::Keyword(k))) = (lx.next(), lx.next()) {
                if k == b"R" && i >= 0 {
                    return Some(Obj::Ref(i as u32));
                }
            }
            lx.pos = save;
            Obj::Int(i)
        }
        Token::Real(r) => Obj::Real(r),
        Token::Name(n) => Obj::Name(n),
        Token::Str(s) => Obj::Str(s),
        Token::ArrayOpen => {
            let mut items = Vec::new();
            loop {
                let save = lx.pos;
                match lx.next() {
                    Some(Token::ArrayClose) | None => break,
                    _ => {
                        lx.pos = save;
                        match parse_obj(lx, depth + 1) {
                            Some(o) => items.push(o),
                            None => break,
                        }
                    }
                }
            }
            Obj::Array(items)
        }
        Token::DictOpen => {
            let mut d = Vec::new();
            loop {
                match lx.next() {
                    Some(Token::Name(k)) => match parse_obj(lx, depth + 1) {
                        Some(v) => d.push((k, v)),
                        None => break,
                    },
                    Some(Token::DictClose) | None => break,
                    Some(_) => {}
                }
            }
            Obj::Dict(d)
        }
        Token::Keyword(k) => match k.as_slice() {
            b"true" => Obj::Bool(true),
            b"false" => Obj::Bool(false),
            _ => Obj::Null,
        },
        Token::ArrayClose | Token::DictClose => return None,
    })
}

// ---------------------------------------------------------------------------
// Document

struct Document {
    objects: HashMap<u32, Obj>,
    order: Vec<u32>,
}

struct PageRef {
    dict: Dict,
    resources: Dict,
}

impl Document {
    fn load(bytes: &[u8]) -> Result<Self, ExtractError> {
        let mut objects = HashMap::new();
        let mut order = Vec::new();
        let mut at = 0;
        while let Some(k) = find(bytes, b"obj", at) {
            at = k + 3;
            if k >= 3 && &bytes[k - 3..k] == b"end" {
                continue;
            }
            if bytes.get(k + 3).is_some_and(|&b| !is_ws(b) && !is_delim(b)) {
                continue;
            }
            let Some(num) = header_number(bytes, k) else { continue };
            let mut lx = Lexer::new(bytes, k + 3);
            let Some(mut obj) = parse_obj(&mut lx, 0) else { continue };
            let after = lx.pos;
            if let Obj::Dict(d) = &obj {
                if let Some((data, end)) = stream_body(bytes, after, d) {
                    obj = Obj::Stream(d.clone(), data.to_vec());
                    at = end;
                } else {
                    at = after;
                }
            } else {
                at = after;
            }
            if objects.insert(num, obj).is_none() {
                order.push(num);
            }
        }
        if objects.is_empty() {
            return Err(ExtractError::Corrupt("no objects found".into()));
        }
        let mut doc = Document { objects, order };
        doc.unpack_object_streams();
        Ok(doc)
    }

    fn unpack_object_streams(&mut self) {
        let streams: Vec<(Dict, Vec<u8>)> = self
            .objects
            .values()
            .filter_map(|o| match o {
                Obj::Stream(d, data) if dict_get(d, b"Type") == Some(&Obj::Name(b"ObjStm".to_vec())) => {
                    Some((d.clone(), data.clone()))
                }
                _ => None,
            })
            .collect();
        for (d, raw) in streams {
            let Ok(data) = decode_stream(&d, &raw) else { continue };
            let n = dict_get(&d, b"N").and_then(Obj::as_num).unwrap_or(0.0) as usize;
            let first = dict_get(&d, b"First").and_then(Obj::as_num).unwrap_or(0.0) as usize;
            let mut lx = Lexer::new(&data, 0);
            let mut header = Vec::new();
            for _ in 0..n {
                match (lx.next(), lx.next()) {
                    (Some(Token::Int(num)), Some(Token::Int(off))) if num >= 0 && off >= 0 => {
                        header.push((num as u32, off as usize))
                    }
                    _ => break,
                }
            }
            for (num, off) in header {
                if self.objects.contains_key(&num) || first + off >= data.len() {
                    continue;
                }
                let mut lx = Lexer::new(&data, first + off);
                if let Some(obj) = parse_obj(&mut lx, 0) {
                    self.objects.insert(num, obj);
                    self.order.push(num);
                }
            }
        }
    }

    fn resolve<'a>(&'a self, obj: &'a Obj) -> &'a Obj {
        let mut cur = obj;
        for _ in 0..8 {
            match cur {
                Obj::Ref(n) => match self.objects.get(n) {
                    Some(o) => cur = o,
                    None => return &Obj::Null,
                },
                _ => return cur,
            }
        }
        &Obj::Null
    }

    fn get<'a>(&'a self, d: &'a Dict, key: &[u8]) -> Option<&'a Obj> {
        dict_get(d, key).map(|o| self.resolve(o))
    }

    /// Pages in document order, with inherited resources.
    fn pages(&self) -> Vec<PageRef> {
        let catalog = self.order.iter().rev().filter_map(|n| self.objects.get(n)).find_map(|o| match o {
            Obj::Dict(d) | Obj::Stream(d, _) if is_type(d, b"Catalog") => Some(d),
            _ => None,
        });
        let mut pages = Vec::new();
        if let Some(root) = catalog.and_then(|c| self.get(c, b"Pages")).and_then(Obj::as_dict) {
            let mut seen = HashSet::new();
            self.walk_pages(root, &Vec::new(), 0, &mut seen, &mut pages);
        }
        if pages.is_empty() {
            for n in &self.order {
                if let Some(Obj::Dict(d)) = self.objects.get(n) {
                    if is_type(d, b"Page") {
                        let resources = self.get(d, b"Resources").and_then(Obj::as_dict).cloned().unwrap_or_default();
                        pages.push(PageRef { dict: d.clone(), resources });
                    }
                }
            }
        }
        pages
    }

    fn walk_pages(&self, node: &Dict, inherited: &Dict, depth: usize, seen: &mut HashSet<u32>, out: &mut Vec<PageRef>) {
        if depth > MAX_TREE_DEPTH {
            return;
        }
        let resources =
            self.get(node, b"Resources").and_then(Obj::as_dict).cloned().unwrap_or_else(|| inherited.clone());
        match self.get(node, b"Kids") {
            Some(Obj::Array(kids)) => {
                for kid in kids {
                    if let Obj::Ref(n) = kid {
                        if !seen.insert(*n) {
                            continue;
                        }
                    }
                    if let Some(d) = self.resolve(kid).as_dict() {
                        self.walk_pages(d, &resources, depth + 1, seen, out);
                    }
                }
            }
            _ => out.push(PageRef { dict: node.clone(), resources }),
        }
    }

    fn contents(&self, page: &Dict) -> Vec<Vec<u8>> {
        let streams: Vec<&Obj> = match dict_get(page, b"Contents") {
            Some(Obj::Array(items)) => items.iter().map(|o| self.resolve(o)).collect(),
            Some(o) => match self.resolve(o) {
                Obj::Array(items) => items.iter().map(|o| self.resolve(o)).collect(),
                other => vec![other],
            },
            None => Vec::new(),
        };
        streams
            .into_iter()
            .filter_map(|o| match o {
                Obj::Stream(d, raw) => decode_stream(d, raw).ok(),
                _ => None,
            })
            .collect()
    }

    fn fonts(&self, resources: &Dict) -> HashMap<Vec<u8>, CMap> {
        let mut out = HashMap::new();
        let Some(fonts) = self.get(resources, b"Font").and_then(Obj::as_dict) else { return out };
        for (name, font) in fonts {
            let Some(font) = self.resolve(font).as_dict() else { continue };
            if let Some(Obj::Stream(d, raw)) = self.get(font, b"ToUnicode") {
                if let Ok(data) = decode_stream(d, raw) {
                    out.insert(name.clone(), CMap::parse(&data));
                }
            }
        }
        out
    }
}

fn is_type(d: &Dict, ty: &[u8]) -> bool {
    matches!(dict_get(d, b"Type"), Some(Obj::Name(n)) if n == ty)
}

/// Reads `N G` backwards from the `obj` keyword at `k`.
fn header_number(bytes: &[u8], k: usize) -> Option<u32> {
    let mut i = k;
    let skip_ws = |i: &mut usize| {
        while *i > 0 && is_ws(bytes[*i - 1]) {
            *i -= 1;
        }
    };
    let digits = |i: &mut usize| {
        let end = *i;
        while *i > 0 && bytes[*i - 1].is_ascii_digit() {
            *i -= 1;
        }
        (*i < end).then(|| std::str::from_utf8(&bytes[*i..end]).ok()?.parse::<u32>().ok()).flatten()
    };
    skip_ws(&mut i);
    digits(&mut i)?;
    let before_gen = i;
    skip_ws(&mut i);
    if i == before_gen {
        return None;
    }
    let num = digits(&mut i)?;
    if i > 0 && !is_ws(bytes[i - 1]) && !is_delim(bytes[i - 1]) {
        return None;
    }
    Some(num)
}

/// Locates stream data following a dictionary ending at `after`.
fn stream_body<'a>(bytes: &'a [u8], after: usize, d: &Dict) -> Option<(&'a [u8], usize)> {
    let mut lx = Lexer::new(bytes, after);
    lx.skip_ws();
    if !bytes[lx.pos..].starts_with(b"stream") {
        return None;
    }
    let mut start = lx.pos + 6;
    if bytes.get(start) == Some(&b'\r') {
        start += 1;
    }
    if bytes.get(start) == Some(&b'\n') {
        start += 1;
    }
    if let Some(Obj::Int(len)) = dict_get(d, b"Length") {
        let end = start.checked_add(usize::try_from(*len).ok()?)?;
        if end <= bytes.len() {
            let mut e = end;
            while e < bytes.len() && is_ws(bytes[e]) {
                e += 1;
            }
            if bytes[e..].starts_with(b"endstream") {
                return Some((&bytes[start..end], e + 9));
            }
        }
    }
    let end = find(bytes, b"endstream", start)?;
    let mut data_end = end;
    if data_end > start && bytes[data_end - 1] == b'\n' {
        data_end -= 1;
    }
    if data_end > start && bytes[data_end - 1] == b'\r' {
        data_end -= 1;
    }
    Some((&bytes[start..data_end], end + 9))
}

fn decode_stream(d: &Dict, raw: &[u8]) -> Result<Vec<u8>, ExtractError> {
    let filters: Vec<Vec<u8>> = match dict_get(d, b"Filter") {
        Some(Obj::Name(n)) => vec![n.clone()],
        Some(Obj::Array(items)) => items
            .iter()
            .filter_map(|o| match o {
                Obj::Name(n) => Some(n.clone()),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    };
    let mut data = raw.to_vec();
    for f in filters {
        data = match f.as_slice() {
            b"FlateDecode" | b"Fl" => inflate(&data)?,
            b"ASCIIHexDecode" | b"AHx" => {
                let mut wrapped = Vec::with_capacity(data.len() + 2);
                wrapped.push(b'<');
                wrapped.extend_from_slice(&data);
                wrapped.push(b'>');
                Lexer::new(&wrapped, 0).hex_string()
            }
            other => {
                return Err(ExtractError::Corrupt(format!(
                    "unsupported stream filter {}",
                    String::from_utf8_lossy(other)
                )))
            }
        };
    }
    Ok(data)
}

fn inflate(data: &[u8]) -> Result<Vec<u8>, ExtractError> {
    let mut out = Vec::new();
    let zlib = ZlibDecoder::new(data).take(MAX_DECODED).read_to_end(&mut out);
    if zlib.is_ok() && !out.is_empty() {
        return Ok(out);
    }
    // Some writers emit raw deflate, or streams truncated before the checksum.
    let partial = out.clone();
    out.clear();
    match DeflateDecoder::new(data).take(MAX_DECODED).read_to_end(&mut out) {
        Ok(_) if !out.is_empty() => Ok(out),
        _ if !partial.is_empty() => Ok(partial),
        _ => Err(ExtractError::Corrupt("undecodable Flate stream".into())),
    }
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from >= hay.len() {
        return None;
    }
    hay[from..].windows(needle.len()).position(|w| w == needle).map(|p| p + from)
}

// ---------------------------------------------------------------------------
// ToUnicode CMaps

#[derive(Debug, Default, Clone)]
struct CMap {
    map: BTreeMap<u32, String>,
    code_bytes: usize,
}

impl CMap {
    fn parse(data: &[u8]) -> CMap {
        let mut cmap = CMap { map: BTreeMap::new(), code_bytes: 0 };
        let mut lx = Lexer::new(data, 0);
        let mut pending: Vec<Token> = Vec::new();
        let mut mode = None;
        while let Some(tok) = lx.next() {
            match &tok {
                Token::Keyword(k) => match k.as_slice() {
                    b"begincodespacerange" | b"beginbfchar" | b"beginbfrange" => {
                        mode = Some(k.clone());
                        pending.clear();
                    }
                    b"endcodespacerange" | b"endbfchar" | b"endbfrange" => {
                        mode = None;
                    }
                    _ => {}
                },
                _ if mode.is_some() => {
                    if tok == Token::ArrayOpen {
                        let mut arr = Vec::new();
                        while let Some(t) = lx.next() {
                            match t {
                                Token::ArrayClose => break,
                                Token::Str(s) => arr.push(s),
                                _ => {}
                            }
                        }
                        // Arrays only appear as bfrange destinations.
                        if let [Token::Str(lo), Token::Str(_)] = pending.as_slice() {
                            cmap.code_bytes = cmap.code_bytes.max(lo.len());
                            let lo = be(lo);
                            for (i, dst) in arr.iter().enumerate() {
                                cmap.map.insert(lo + i as u32, utf16be(dst));
                            }
                        }
                        pending.clear();
                        continue;
                    }
                    pending.push(tok.clone());
                    match mode.as_deref() {
                        Some(b"begincodespacerange") if pending.len() == 2 => {
                            if let Token::Str(lo) = &pending[0] {
                                cmap.code_bytes = cmap.code_bytes.max(lo.len());
                            }
                            pending.clear();
                        }
                        Some(b"beginbfchar") if pending.len() == 2 => {
                            if let (Token::Str(src), Token::Str(dst)) = (&pending[0], &pending[1]) {
                                cmap.code_bytes = cmap.code_bytes.max(src.len());
                                cmap.map.insert(be(src), utf16be(dst));
                            }
                            pending.clear();
                        }
                        Some(b"beginbfrange") if pending.len() == 3 => {
                            if let (Token::Str(lo), Token::Str(hi), Token::Str(dst)) =
                                (&pending[0], &pending[1], &pending[2])
                            {
                                cmap.code_bytes = cmap.code_bytes.max(lo.len());
                                let (lo, hi) = (be(lo), be(hi));
                                let mut units = utf16_units(dst);
                                for code in lo..=hi.min(lo.saturating_add(0xFFFF)) {
                                    cmap.map.insert(code, String::from_utf16_lossy(&units));
                                    if let Some(last) = units.last_mut() {
                                        *last = last.wrapping_add(1);
                                    }
                                }
                            }
                            pending.clear();
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
        }
        if cmap.code_bytes == 0 {
            cmap.code_bytes = 1;
        }
        cmap
    }

    fn decode(&self, bytes: &[u8]) -> String {
        let mut out = String::new();
        for chunk in bytes.chunks(self.code_bytes.max(1)) {
            match self.map.get(&be(chunk)) {
                Some(s) => out.push_str(s),
                None if self.code_bytes == 1 => out.push(char::from(chunk[0])),
                None => {}
            }
        }
        out
    }
}

fn be(bytes: &[u8]) -> u32 {
    bytes.iter().take(4).fold(0u32, |acc, b| (acc << 8) | u32::from(*b))
}

fn utf16_units(bytes: &[u8]) -> Vec<u16> {
    bytes.chunks(2).map(|c| if c.len() == 2 { u16::from_be_bytes([c[0], c[1]]) } else { u16::from(c[0]) }).collect()
}

fn utf16be(bytes: &[u8]) -> String {
    String::from_utf16_lossy(&utf16_units(bytes))
}

// ---------------------------------------------------------------------------
// Content stream interpretation

fn decode_text(bytes: &[u8], font: Option<&CMap>) -> String {
    match font {
        Some(cmap) => cmap.decode(bytes),
        None => bytes.iter().map(|&b| char::from(b)).collect(),
    }
}

fn interpret(content: &[u8], fonts: &HashMap<Vec<u8>, CMap>) -> String {
    let mut out = String::new();
    let mut lx = Lexer::new(content, 0);
    let mut operands: Vec<Obj> = Vec::new();
    let mut font: Option<&CMap> = None;
    let mut line_y: Option<f64> = None;
    let newline = |out: &mut String| {
        if !out.is_empty() && !out.ends_with('\n') {
            out.push('\n');
        }
    };
    loop {
        let save = lx.pos;
        let Some(tok) = lx.next() else { break };
        let op = match tok {
            Token::Keyword(k) => k,
            _ => {
                lx.pos = save;
                match parse_obj(&mut lx, 0) {
                    Some(o) => operands.push(o),
                    None => {
                        lx.pos = save + 1;
                    }
                }
                continue;
            }
        };
        match op.as_slice() {
            b"Tf" => {
                font = operands.iter().rev().find_map(|o| match o {
                    Obj::Name(n) => fonts.get(n),
                    _ => None,
                });
            }
            b"Tj" => {
                if let Some(Obj::Str(s)) = operands.last() {
                    out.push_str(&decode_text(s, font));
                }
            }
            b"'" | b"\"" => {
                newline(&mut out);
                if let Some(Obj::Str(s)) = operands.last() {
                    out.push_str(&decode_text(s, font));
                }
            }
            b"TJ" => {
                if let Some(Obj::Array(items)) = operands.last() {
                    for item in items {
                        match item {
                            Obj::Str(s) => out.push_str(&decode_text(s, font)),
                            other => {
                                if other.as_num().is_some_and(|n| n < -200.0) && !out.ends_with([' ', '\n']) {
                                    out.push(' ');
                                }
                            }
                        }
                    }
                }
            }
            b"Td" | b"TD" => {
                let ty = operands.get(1).and_then(Obj::as_num).unwrap_or(0.0);
                if ty.abs() > 0.01 {
                    newline(&mut out);
                } else if !out.is_empty() && !out.ends_with([' ', '\n']) {
                    out.push(' ');
                }
            }
            b"Tm" => {
                let y = operands.get(5).and_then(Obj::as_num);
                if y.is_some() && line_y.is_some() && y != line_y {
                    newline(&mut out);
                }
                line_y = y;
            }
            b"T*" => newline(&mut out),
            b"ET" => {
                if !out.is_empty() && !out.ends_with([' ', '\n']) {
                    out.push(' ');
                }
            }
            b"BI" => {
                // Inline image: skip binary data up to `EI`.
                if let Some(id) = find(content, b"ID", lx.pos) {
                    let mut at = id + 2;
                    while let Some(ei) = find(content, b"EI", at) {
                        at = ei + 2;
                        let before = ei.checked_sub(1).map(|i| content[i]);
                        let after = content.get(ei + 2).copied();
                        if before.is_some_and(is_ws) && after.is_none_or(|b| is_ws(b) || is_delim(b)) {
                            break;
                        }
                    }
                    lx.pos = at;
                }
            }
            _ => {}
        }
        operands.clear();
    }
    out
}

fn tidy(text: &str) -> String {
    text.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}
