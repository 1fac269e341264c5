//! `CITATION.cff` reading.
//!
//! CFF documents use a narrow YAML profile, so this module carries its own
//! parser for that subset instead of a full YAML implementation:
//!
//! * block mappings and block sequences (including `- key: value` items and
//!   sequences indented at the same level as their parent key),
//! * plain, single-quoted and double-quoted scalars,
//! * literal (`|`) and folded (`>`) block scalars with chomping indicators,
//! * single- or multi-line flow collections (`[a, b]`, `{k: v}`),
//! * comments and `---` / `...` document markers.
//!
//! Plain scalars resolve to booleans, null and integers; everything else,
//! including decimal numbers such as `1.10`, stays text so that version
//! strings survive unchanged. Anchors, aliases and tags are not interpreted.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{Map, Number, Value};

use crate::harvest::{RecordWarning, SourceRecord};
use crate::model::SourceKind;

/// Structure error in a CFF document, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed CFF at line {line}: {message}")]
pub struct MalformedCff {
    pub line: usize,
    pub message: String,
}

/// Parses a CFF document into a [`SourceRecord`] that mirrors it key for key.
pub fn parse_cff(text: &str) -> Result<SourceRecord, MalformedCff> {
    let data = parse_yaml_subset(text)?;
    let data = match data {
        Value::Object(map) => Value::Object(map),
        Value::Null => Value::Object(Map::new()),
        _ => return Err(MalformedCff { line: 1, message: "top level must be a mapping".into() }),
    };
    let mut warnings = Vec::new();
    if data.get("cff-version").is_none() {
        warnings.push(RecordWarning::MissingCffVersion);
    }
    Ok(SourceRecord { source: SourceKind::CffFile, data, warnings })
}

#[derive(Debug, Clone)]
struct Line<'a> {
    no: usize,
    indent: usize,
    /// Content after indentation, comment stripped, trailing space trimmed.
    text: &'a str,
    /// Whole line without its terminator.
    raw: &'a str,
    tab_indent: bool,
}

impl Line<'_> {
    fn is_blank(&self) -> bool {
        self.text.is_empty()
    }
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, MalformedCff> {
    Err(MalformedCff { line, message: message.into() })
}

/// Byte offset where a trailing comment starts, if any.
fn comment_start(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut quote: Option<u8> = None;
    let mut prev: u8 = b' ';
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(b'\'') => {
                if b == b'\'' {
                    if bytes.get(i + 1) == Some(&b'\'') {
                        i += 1;
                    } else {
                        quote = None;
                    }
                }
            }
            Some(_) => {
                if b == b'\\' {
                    i += 1;
                } else if b == b'"' {
                    quote = None;
                }
            }
            None => {
                if b == b'#' && (prev == b' ' || prev == b'\t' || i == 0) {
                    return Some(i);
                }
                if (b == b'"' || b == b'\'')
                    && (i == 0 || matches!(prev, b' ' | b'\t' | b'[' | b'{' | b',' | b':' | b'-'))
                {
                    quote = Some(b);
                }
            }
        }
        prev = bytes.get(i).copied().unwrap_or(b' ');
        i += 1;
    }
    None
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    text.split('\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            let body_start = raw.find(|c: char| c != ' ' && c != '\t').unwrap_or(raw.len());
            let lead = &raw[..body_start];
            let indent = lead.len();
            let body = &raw[body_start..];
            let body = match comment_start(body) {
                Some(at) => &body[..at],
                None => body,
            };
            Line { no: i + 1, indent, text: body.trim_end(), raw, tab_indent: lead.contains('\t') }
        })
        .collect()
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ") || text.starts_with("-\t")
}

/// End of a quoted scalar starting at byte 0 of `s` (index past the quote).
fn quoted_end(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let q = *bytes.first()?;
    let mut i = 1;
    while i < bytes.len() {
        let b = bytes[i];
        if q == b'\'' && b == b'\'' {
            if bytes.get(i + 1) == Some(&b'\'') {
                i += 2;
                continue;
            }
            return Some(i + 1);
        }
        if q == b'"' {
            if b == b'\\' {
                i += 2;
                continue;
            }
            if b == b'"' {
                return Some(i + 1);
            }
        }
        i += 1;
    }
    None
}

/// Splits `key: rest` at the first mapping colon. Returns the key text
/// (unquoted) and the trimmed remainder.
fn split_key(text: &str) -> Option<(String, &str)> {
    if text.starts_with('"') || text.starts_with('\'') {
        let end = quoted_end(text)?;
        let after = text[end..].trim_start();
        let rest = after.strip_prefix(':')?;
        if !(rest.is_empty() || rest.starts_with(' ') || rest.starts_with('\t')) {
            return None;
        }
        let key = unquote(&text[..end]).ok()?;
        return Some((key, rest.trim()));
    }
    if text.starts_with('[') || text.starts_with('{') || is_seq_item(text) {
        return None;
    }
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b':' && matches!(bytes.get(i + 1), None | Some(b' ') | Some(b'\t')) {
            let key = text[..i].trim_end();
            if key.is_empty() {
                return None;
            }
            return Some((key.to_string(), text[i + 1..].trim()));
        }
    }
    None
}

fn hex_escape(chars: &mut core::str::Chars<'_>, digits: usize) -> Option<char> {
    let mut code = 0u32;
    for _ in 0..digits {
        code = code * 16 + chars.next()?.to_digit(16)?;
    }
    char::from_u32(code)
}

/// Decodes a complete quoted scalar (quotes included).
fn unquote(s: &str) -> Result<String, String> {
    let q = s.chars().next().ok_or("empty scalar")?;
    let inner = s
        .get(1..s.len().saturating_sub(1))
        .filter(|_| s.len() >= 2 && s.ends_with(q))
        .ok_or("unterminated quoted scalar")?;
    if q == '\'' {
        return Ok(inner.replace("''", "'"));
    }
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let decoded = match chars.next() {
            Some('n') => '\n',
            Some('t') => '\t',
            Some('r') => '\r',
            Some('0') => '\0',
            Some('"') => '"',
            Some('\\') => '\\',
            Some('/') => '/',
            Some(' ') => ' ',
            Some('x') => hex_escape(&mut chars, 2).ok_or("bad \\x escape")?,
            Some('u') => hex_escape(&mut chars, 4).ok_or("bad \\u escape")?,
            Some('U') => hex_escape(&mut chars, 8).ok_or("bad \\U escape")?,
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("dangling backslash".into()),
        };
        out.push(decoded);
    }
    Ok(out)
}

fn resolve_plain(s: &str) -> Value {
    match s {
        "" | "~" | "null" | "Null" | "NULL" => return Value::Null,
        "true" | "True" | "TRUE" => return Value::Bool(true),
        "false" | "False" | "FALSE" => return Value::Bool(false),
        _ => {}
    }
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(n) = s.parse::<i64>() {
            return Value::Number(Number::from(n));
        }
    }
    Value::String(s.into())
}

struct FlowParser<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> FlowParser<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: &str) -> Result<T, MalformedCff> {
        err(self.line, format!("flow collection: {message}"))
    }

    fn value(&mut self) -> Result<Value, MalformedCff> {
        self.skip_ws();
        let rest = self.rest();
        if rest.starts_with('[') {
            self.pos += 1;
            let mut items = Vec::new();
            loop {
                if self.eat(']') {
                    break;
                }
                items.push(self.value()?);
                if self.eat(',') {
                    continue;
                }
                if self.eat(']') {
                    break;
                }
                return self.fail("expected `,` or `]`");
            }
            Ok(Value::Array(items))
        } else if rest.starts_with('{') {
            self.pos += 1;
            let mut map = Map::new();
            loop {
                if self.eat('}') {
                    break;
                }
                let key = match self.scalar(true)? {
                    Value::String(s) => s,
                    Value::Null => return self.fail("empty key"),
                    other => other.to_string(),
                };
                let value = if self.eat(':') { self.value()? } else { Value::Null };
                map.insert(key, value);
                if self.eat(',') {
                    continue;
                }
                if self.eat('}') {
                    break;
                }
                return self.fail("expected `,` or `}`");
            }
            Ok(Value::Object(map))
        } else {
            self.scalar(false)
        }
    }

    fn scalar(&mut self, is_key: bool) -> Result<Value, MalformedCff> {
        self.skip_ws();
        let rest = self.rest();
        if rest.starts_with('"') || rest.starts_with('\'') {
            let Some(end) = quoted_end(rest) else {
                return self.fail("unterminated quoted scalar");
            };
            self.pos += end;
            return unquote(&rest[..end]).map(Value::String).or_else(|m| self.fail(&m));
        }
        let bytes = rest.as_bytes();
        let mut end = bytes.len();
        for (i, &b) in bytes.iter().enumerate() {
            let colon = b == b':' && matches!(bytes.get(i + 1), None | Some(b' ') | Some(b',') | Some(b'}'));
            if matches!(b, b',' | b']' | b'}') || (is_key && colon) {
                end = i;
                break;
            }
        }
        self.pos += end;
        Ok(resolve_plain(rest[..end].trim()))
    }
}

fn parse_flow(s: &str, line: usize) -> Result<Value, MalformedCff> {
    let mut parser = FlowParser { s, pos: 0, line };
    let value = parser.value()?;
    parser.skip_ws();
    if !parser.rest().is_empty() {
        return err(line, "unexpected text after flow collection");
    }
    Ok(value)
}

fn flow_balanced(s: &str) -> bool {
    let mut depth = 0i32;
    let mut rest = s;
    while let Some(c) = rest.chars().next() {
        if c == '"' || c == '\'' {
            match quoted_end(rest) {
                Some(end) => {
                    rest = &rest[end..];
                    continue;
                }
                None => return false,
            }
        }
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            _ => {}
        }
        rest = &rest[c.len_utf8()..];
    }
    depth <= 0
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    /// Next structural line, skipping blanks and comments.
    fn peek(&mut self) -> Result<Option<Line<'a>>, MalformedCff> {
        while let Some(line) = self.lines.get(self.pos) {
            if line.is_blank() {
                self.pos += 1;
                continue;
            }
            if line.tab_indent {
                return err(line.no, "tab characters are not allowed in indentation");
            }
            if line.indent == 0 && (line.text == "..." || line.text.starts_with("... ")) {
                self.pos = self.lines.len();
                return Ok(None);
            }
            return Ok(Some(line.clone()));
        }
        Ok(None)
    }

    fn parse_document(&mut self) -> Result<Value, MalformedCff> {
        if let Some(first) = self.peek()? {
            if first.indent == 0 && (first.text == "---" || first.text.starts_with("--- ")) {
                let rest = first.text[3..].trim_start();
                if rest.is_empty() {
                    self.pos += 1;
                } else {
                    let line = &mut self.lines[self.pos];
                    line.indent = 4;
                    line.text = rest;
                }
            }
        }
        let Some(first) = self.peek()? else {
            return Ok(Value::Null);
        };
        let value = self.parse_block(first.indent, None)?;
        if let Some(extra) = self.peek()? {
            return err(extra.no, "unexpected content after document");
        }
        Ok(value)
    }

    /// Parses the node starting at the current line, whose indentation is
    /// `indent`. `parent` is the indentation of the owning collection.
    fn parse_block(&mut self, indent: usize, parent: Option<usize>) -> Result<Value, MalformedCff> {
        let line = self.peek()?.expect("caller checked a line exists");
        if is_seq_item(line.text) {
            self.parse_seq(indent)
        } else if split_key(line.text).is_some() {
            self.parse_map(indent)
        } else {
            self.pos += 1;
            self.parse_inline(line.text, line.no, parent.map_or(0, |p| p + 1).min(indent))
        }
    }

    fn parse_map(&mut self, indent: usize) -> Result<Value, MalformedCff> {
        let mut map = Map::new();
        while let Some(line) = self.peek()? {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return err(line.no, "unexpected indentation");
            }
            let Some((key, rest)) = split_key(line.text) else {
                if is_seq_item(line.text) {
                    return err(line.no, "sequence item where a mapping key was expected");
                }
                return err(line.no, "expected `key: value`");
            };
            self.pos += 1;
            let value = if rest.is_empty() {
                match self.peek()? {
                    Some(next) if next.indent > indent => self.parse_block(next.indent, Some(indent))?,
                    Some(next) if next.indent == indent && is_seq_item(next.text) => self.parse_seq(indent)?,
                    _ => Value::Null,
                }
            } else {
                self.parse_inline(rest, line.no, indent + 1)?
            };
            if map.contains_key(&key) {
                return err(line.no, format!("duplicate key `{key}`"));
            }
            map.insert(key, value);
        }
        Ok(Value::Object(map))
    }

    fn parse_seq(&mut self, indent: usize) -> Result<Value, MalformedCff> {
        let mut items = Vec::new();
        while let Some(line) = self.peek()? {
            if line.indent < indent || !is_seq_item(line.text) {
                if line.indent > indent {
                    return err(line.no, "unexpected indentation");
                }
                break;
            }
            if line.indent > indent {
                return err(line.no, "unexpected indentation");
            }
            let after_dash = &line.text[1..];
            let rest = after_dash.trim_start();
            if rest.is_empty() {
                self.pos += 1;
                let item = match self.peek()? {
                    Some(next) if next.indent > indent => self.parse_block(next.indent, Some(indent))?,
                    _ => Value::Null,
                };
                items.push(item);
            } else {
                // Re-read the remainder as a node indented past the dash.
                let offset = 1 + after_dash.len() - rest.len();
                let virtual_indent = indent + offset;
                let current = &mut self.lines[self.pos];
                current.indent = virtual_indent;
                current.text = rest;
                items.push(self.parse_block(virtual_indent, Some(indent))?);
            }
        }
        Ok(Value::Array(items))
    }

    /// Parses an inline value (scalar, flow collection or block scalar
    /// header). Continuation lines must be indented at least `min_indent`.
    fn parse_inline(&mut self, text: &'a str, line_no: usize, min_indent: usize) -> Result<Value, MalformedCff> {
        if text.starts_with('|') || text.starts_with('>') {
            return self.block_scalar(text, line_no, min_indent);
        }
        if text.starts_with('[') || text.starts_with('{') {
            let mut joined = String::from(text);
            while !flow_balanced(&joined) {
                match self.peek()? {
                    Some(next) if next.indent >= min_indent => {
                        joined.push(' ');
                        joined.push_str(next.text);
                        self.pos += 1;
                    }
                    _ => return err(line_no, "unterminated flow collection"),
                }
            }
            return parse_flow(&joined, line_no);
        }
        if text.starts_with('"') || text.starts_with('\'') {
            let mut joined = String::from(text);
            while quoted_end(&joined).is_none() {
                match self.peek()? {
                    Some(next) if next.indent >= min_indent => {
                        joined.push(' ');
                        joined.push_str(next.text);
                        self.pos += 1;
                    }
                    _ => return err(line_no, "unterminated quoted scalar"),
                }
            }
            let end = quoted_end(&joined).unwrap_or(joined.len());
            if !joined[end..].trim().is_empty() {
                return err(line_no, "unexpected text after quoted scalar");
            }
            return unquote(&joined[..end]).map(Value::String).or_else(|m| err(line_no, m));
        }
        let mut joined = String::from(text);
        while let Some(next) = self.peek()? {
            if next.indent < min_indent || next.indent == 0 {
                break;
            }
            if split_key(next.text).is_some() || is_seq_item(next.text) {
                break;
            }
            joined.push(' ');
            joined.push_str(next.text);
            self.pos += 1;
        }
        Ok(resolve_plain(joined.trim()))
    }

    fn block_scalar(&mut self, header: &str, line_no: usize, min_indent: usize) -> Result<Value, MalformedCff> {
        let folded = header.starts_with('>');
        let mut keep = false;
        let mut strip = false;
        let mut explicit: Option<usize> = None;
        for c in header[1..].trim().chars() {
            match c {
                '+' => keep = true,
                '-' => strip = true,
                '1'..='9' => explicit = c.to_digit(10).map(|d| d as usize),
                _ => return err(line_no, "bad block scalar header"),
            }
        }
        let parent = min_indent.saturating_sub(1);
        let mut content_indent = explicit.map(|d| parent + d);
        let mut raw_lines: Vec<&str> = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            let blank = line.raw.trim().is_empty();
            if !blank {
                let indent = line.raw.len() - line.raw.trim_start_matches(' ').len();
                let required = *content_indent.get_or_insert(indent);
                if indent < required || indent <= parent {
                    break;
                }
                raw_lines.push(&line.raw[required..]);
            } else {
                raw_lines.push("");
            }
            self.pos += 1;
        }
        // Trailing blank lines belong to the scalar only for chomping.
        let mut trailing = 0;
        while raw_lines.last() == Some(&"") {
            raw_lines.pop();
            trailing += 1;
        }
        let mut body = String::new();
        if folded {
            let mut prev_blank = true;
            for line in &raw_lines {
                if line.is_empty() {
                    body.push('\n');
                    prev_blank = true;
                } else {
                    if !prev_blank && !body.ends_with('\n') {
                        body.push(' ');
                    }
                    body.push_str(line);
                    prev_blank = false;
                }
            }
        } else {
            body = raw_lines.join("\n");
        }
        if !raw_lines.is_empty() && !strip {
            body.push('\n');
            if keep {
                for _ in 0..trailing {
                    body.push('\n');
                }
            }
        }
        Ok(Value::String(body))
    }
}

/// Parses the supported YAML subset into a JSON value tree.
pub fn parse_yaml_subset(text: &str) -> Result<Value, MalformedCff> {
    let mut parser = Parser { lines: split_lines(text), pos: 0 };
    parser.parse_document()
}
