//! Recursive-descent parser and serializer for the Suricata rule dialect.
//!
//! Fidelity goals over completeness: every option is kept in source order
//! (unknown keywords included), quoted values keep their escape sequences
//! verbatim, and `serialize_rule` emits a canonical single-line form that
//! reparses to an equal [`Rule`]. Rules commented out with `#` parse as
//! normal rules with the `disabled` flag set, since tuned-out rules still
//! matter for ruleset audits.

mod ast;
mod threshold;

pub use ast::{Action, AddressSpec, Direction, OptionValue, PortSpec, Rule, RuleModifier, RuleOption};
pub use threshold::{parse_threshold, ThresholdKind, ThresholdSpec, TrackBy};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("col {col}: {message}")]
pub struct ParseError {
    /// 1-based logical line in the source file; 1 when parsing a bare string.
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

/// Parse result for a whole `.rules` file. Parsing continues past bad lines;
/// every failure lands in `diagnostics` with its line number.
#[derive(Debug, Clone, Serialize)]
pub struct Ruleset {
    pub rules: Vec<Rule>,
    pub source_path: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl Ruleset {
    pub fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error).count()
    }
}

/// Sticky buffer keywords: zero-value options that scope every following
/// content/pcre until the next buffer keyword.
const STICKY_BUFFERS: &[&str] = &[
    "dns.query",
    "file.data",
    "file.name",
    "http.accept",
    "http.accept_enc",
    "http.accept_lang",
    "http.connection",
    "http.content_len",
    "http.content_type",
    "http.cookie",
    "http.header",
    "http.header.raw",
    "http.header_names",
    "http.host",
    "http.host.raw",
    "http.location",
    "http.method",
    "http.protocol",
    "http.referer",
    "http.request_body",
    "http.request_header",
    "http.request_line",
    "http.response_body",
    "http.response_header",
    "http.response_line",
    "http.server",
    "http.start",
    "http.stat_code",
    "http.stat_msg",
    "http.uri",
    "http.uri.raw",
    "http.user_agent",
    "ja3.hash",
    "ja3.string",
    "ja3s.hash",
    "ja3s.string",
    "tls.cert_fingerprint",
    "tls.cert_issuer",
    "tls.cert_serial",
    "tls.cert_subject",
    "tls.certs",
    "tls.sni",
];

/// Modifier keywords that bind to the nearest preceding content/pcre.
const MATCH_MODIFIERS: &[&str] = &[
    "nocase",
    "depth",
    "offset",
    "distance",
    "within",
    "startswith",
    "endswith",
    "fast_pattern",
    "rawbytes",
];

pub fn is_sticky_buffer(keyword: &str) -> bool {
    STICKY_BUFFERS.contains(&keyword)
}

pub fn is_match_modifier(keyword: &str) -> bool {
    MATCH_MODIFIERS.contains(&keyword)
}

/// Maps legacy modifier-style buffer keywords (`http_uri`) onto the sticky
/// buffer names used for normalized buffer resolution.
pub fn legacy_buffer(keyword: &str) -> Option<&'static str> {
    Some(match keyword {
        "http_uri" => "http.uri",
        "http_raw_uri" => "http.uri.raw",
        "http_method" => "http.method",
        "http_user_agent" => "http.user_agent",
        "http_header" => "http.header",
        "http_raw_header" => "http.header.raw",
        "http_cookie" => "http.cookie",
        "http_host" => "http.host",
        "http_raw_host" => "http.host.raw",
        "http_client_body" => "http.request_body",
        "http_server_body" => "http.response_body",
        "http_stat_code" => "http.stat_code",
        "http_stat_msg" => "http.stat_msg",
        "http_referer" => "http.referer",
        _ => return None,
    })
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(text: &str) -> Cursor {
        Cursor { chars: text.chars().collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn eof(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn eat_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        self.err_at(self.col(), message)
    }

    fn err_at(&self, col: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: 1, col, message: message.into() }
    }

    fn expect(&mut self, c: char, context: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected '{c}' {context}, found '{got}'"))),
            None => Err(self.err(format!("expected '{c}' {context}, found end of input"))),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if pred(c)) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn take_ident(&mut self) -> String {
        self.take_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    }

    fn take_option_keyword(&mut self) -> String {
        self.take_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
    }
}

struct RawOption {
    keyword: String,
    value: Option<OptionValue>,
    negated: bool,
    col: usize,
}

/// Parses one logical rule line. Leading `#` markers flag the rule disabled.
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    let mut cur = Cursor::new(text);
    cur.eat_ws();

    let mut disabled = false;
    while cur.peek() == Some('#') {
        disabled = true;
        cur.bump();
        cur.eat_ws();
    }

    let col = cur.col();
    let word = cur.take_ident();
    if word.is_empty() {
        return Err(cur.err_at(col, "expected rule action"));
    }
    let action = Action::from_keyword(&word.to_ascii_lowercase())
        .ok_or_else(|| cur.err_at(col, format!("unknown action '{word}'")))?;

    cur.eat_ws();
    let col = cur.col();
    let protocol = cur.take_ident().to_ascii_lowercase();
    if protocol.is_empty() {
        return Err(cur.err_at(col, "expected protocol"));
    }

    let src_addr = parse_addr_spec(&mut cur)?;
    let src_port = parse_port_spec(&mut cur)?;

    cur.eat_ws();
    let col = cur.col();
    let direction = match (cur.bump(), cur.bump()) {
        (Some('-'), Some('>')) => Direction::Forward,
        (Some('<'), Some('>')) => Direction::Bidirectional,
        _ => return Err(cur.err_at(col, "expected '->' or '<>'")),
    };

    let dst_addr = parse_addr_spec(&mut cur)?;
    let dst_port = parse_port_spec(&mut cur)?;

    cur.eat_ws();
    cur.expect('(', "to open rule options")?;

    let raw_options = parse_raw_options(&mut cur)?;

    cur.eat_ws();
    if !cur.eof() {
        let col = cur.col();
        let trailing = cur.take_while(|_| true);
        return Err(cur.err_at(col, format!("unexpected trailing text '{trailing}'")));
    }

    let options = bind_options(raw_options, &cur)?;
    let (sid, rev, msg) = extract_meta(&options, &cur)?;

    Ok(Rule {
        action,
        protocol,
        src_addr,
        src_port,
        direction,
        dst_addr,
        dst_port,
        options,
        sid,
        rev,
        msg,
        disabled,
        line: 1,
        raw: text.to_string(),
    })
}

fn parse_addr_spec(cur: &mut Cursor) -> Result<AddressSpec, ParseError> {
    cur.eat_ws();
    match cur.peek() {
        Some('!') => {
            cur.bump();
            Ok(AddressSpec::Negated(Box::new(parse_addr_spec(cur)?)))
        }
        Some('[') => {
            cur.bump();
            let mut items = Vec::new();
            loop {
                items.push(parse_addr_spec(cur)?);
                cur.eat_ws();
                match cur.bump() {
                    Some(',') => continue,
                    Some(']') => break,
                    Some(c) => return Err(cur.err(format!("expected ',' or ']' in address group, found '{c}'"))),
                    None => return Err(cur.err("unterminated address group")),
                }
            }
            Ok(AddressSpec::Group(items))
        }
        Some('$') => {
            cur.bump();
            let col = cur.col();
            let name = cur.take_ident();
            if name.is_empty() {
                return Err(cur.err_at(col, "expected variable name after '$'"));
            }
            Ok(AddressSpec::Var(name))
        }
        _ => {
            let col = cur.col();
            let tok = cur.take_while(|c| !c.is_whitespace() && c != ',' && c != ']' && c != '(');
            if tok.is_empty() {
                return Err(cur.err_at(col, "expected address"));
            }
            if tok.eq_ignore_ascii_case("any") {
                Ok(AddressSpec::Any)
            } else if tok.chars().all(|c| c.is_ascii_hexdigit() || c == '.' || c == ':' || c == '/') {
                Ok(AddressSpec::Literal(tok))
            } else {
                Err(cur.err_at(col, format!("invalid address '{tok}'")))
            }
        }
    }
}

fn parse_port_number(cur: &mut Cursor) -> Result<u16, ParseError> {
    let col = cur.col();
    let digits = cur.take_while(|c| c.is_ascii_digit());
    if digits.is_empty() {
        return Err(cur.err_at(col, "expected port number"));
    }
    digits
        .parse::<u32>()
        .ok()
        .and_then(|n| u16::try_from(n).ok())
        .ok_or_else(|| cur.err_at(col, format!("port '{digits}' out of range 0-65535")))
}

fn parse_port_spec(cur: &mut Cursor) -> Result<PortSpec, ParseError> {
    cur.eat_ws();
    match cur.peek() {
        Some('!') => {
            cur.bump();
            Ok(PortSpec::Negated(Box::new(parse_port_spec(cur)?)))
        }
        Some('[') => {
            cur.bump();
            let mut items = Vec::new();
            loop {
                items.push(parse_port_spec(cur)?);
                cur.eat_ws();
                match cur.bump() {
                    Some(',') => continue,
                    Some(']') => break,
                    Some(c) => return Err(cur.err(format!("expected ',' or ']' in port group, found '{c}'"))),
                    None => return Err(cur.err("unterminated port group")),
                }
            }
            Ok(PortSpec::Group(items))
        }
        Some('$') => {
            cur.bump();
            let col = cur.col();
            let name = cur.take_ident();
            if name.is_empty() {
                return Err(cur.err_at(col, "expected variable name after '$'"));
            }
            Ok(PortSpec::Var(name))
        }
        Some(':') => {
            cur.bump();
            let hi = parse_port_number(cur)?;
            Ok(PortSpec::Range(None, Some(hi)))
        }
        Some(c) if c.is_ascii_digit() => {
            let col = cur.col();
            let lo = parse_port_number(cur)?;
            if cur.peek() == Some(':') {
                cur.bump();
                if matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                    let hi = parse_port_number(cur)?;
                    if lo > hi {
                        return Err(cur.err_at(col, format!("port range {lo}:{hi} is inverted")));
                    }
                    Ok(PortSpec::Range(Some(lo), Some(hi)))
                } else {
                    Ok(PortSpec::Range(Some(lo), None))
                }
            } else {
                Ok(PortSpec::Single(lo))
            }
        }
        _ => {
            let col = cur.col();
            let tok = cur.take_while(|c| !c.is_whitespace() && c != ',' && c != ']' && c != '(');
            if tok.eq_ignore_ascii_case("any") {
                Ok(PortSpec::Any)
            } else if tok.is_empty() {
                Err(cur.err_at(col, "expected port"))
            } else {
                Err(cur.err_at(col, format!("invalid port '{tok}'")))
            }
        }
    }
}

fn take_quoted(cur: &mut Cursor) -> Result<String, ParseError> {
    let open_col = cur.col();
    cur.expect('"', "to open quoted value")?;
    let mut out = String::new();
    loop {
        match cur.bump() {
            None => return Err(cur.err_at(open_col, "unterminated quoted value")),
            Some('"') => return Ok(out),
            Some('\\') => {
                out.push('\\');
                match cur.bump() {
                    Some(c) => out.push(c),
                    None => return Err(cur.err_at(open_col, "unterminated escape in quoted value")),
                }
            }
            Some(c) => out.push(c),
        }
    }
}

fn parse_raw_options(cur: &mut Cursor) -> Result<Vec<RawOption>, ParseError> {
    let mut out = Vec::new();
    loop {
        cur.eat_ws();
        match cur.peek() {
            None => return Err(cur.err("unterminated rule options, expected ')'")),
            Some(')') => {
                cur.bump();
                return Ok(out);
            }
            _ => {}
        }

        let col = cur.col();
        let keyword = cur.take_option_keyword().to_ascii_lowercase();
        if keyword.is_empty() {
            return Err(cur.err(format!("expected option keyword, found '{}'", cur.peek().unwrap())));
        }
        cur.eat_ws();
        match cur.peek() {
            Some(';') => {
                cur.bump();
                out.push(RawOption { keyword, value: None, negated: false, col });
            }
            Some(':') => {
                cur.bump();
                cur.eat_ws();
                let mut negated = false;
                if cur.peek() == Some('!') {
                    let mark = cur.pos;
                    cur.bump();
                    cur.eat_ws();
                    if cur.peek() == Some('"') {
                        negated = true;
                    } else {
                        cur.pos = mark;
                    }
                }
                let value = if cur.peek() == Some('"') {
                    let text = take_quoted(cur)?;
                    cur.eat_ws();
                    cur.expect(';', &format!("after value of option '{keyword}'"))?;
                    OptionValue::Quoted(text)
                } else {
                    let text = cur.take_while(|c| c != ';' && c != ')');
                    match cur.peek() {
                        Some(';') => {
                            cur.bump();
                        }
                        _ => return Err(cur.err(format!("option '{keyword}' is missing its ';' terminator"))),
                    }
                    let text = text.trim().to_string();
                    if text.is_empty() {
                        return Err(cur.err_at(col, format!("empty value for option '{keyword}'")));
                    }
                    OptionValue::Bare(text)
                };
                out.push(RawOption { keyword, value: Some(value), negated, col });
            }
            Some(c) => {
                return Err(cur.err(format!("expected ':' or ';' after option '{keyword}', found '{c}'")));
            }
            None => return Err(cur.err(format!("expected ':' or ';' after option '{keyword}'"))),
        }
    }
}

/// Attaches modifiers to their matches and resolves sticky buffer scope.
fn bind_options(raw: Vec<RawOption>, cur: &Cursor) -> Result<Vec<RuleOption>, ParseError> {
    let mut out: Vec<RuleOption> = Vec::new();
    let mut current_buffer: Option<String> = None;
    let mut last_match: Option<usize> = None;

    for opt in raw {
        let kw = opt.keyword.as_str();
        if opt.negated && kw != "content" && kw != "pcre" {
            return Err(cur.err_at(opt.col, format!("negation is not allowed for option '{kw}'")));
        }
        if is_sticky_buffer(kw) {
            if opt.value.is_some() {
                return Err(cur.err_at(opt.col, format!("buffer keyword '{kw}' takes no value")));
            }
            current_buffer = Some(kw.to_string());
            last_match = None;
            out.push(RuleOption {
                keyword: opt.keyword,
                value: None,
                negated: false,
                modifiers: Vec::new(),
                buffer: None,
            });
        } else if is_match_modifier(kw) {
            let target = last_match
                .ok_or_else(|| cur.err_at(opt.col, format!("modifier '{kw}' has no preceding content/pcre")))?;
            out[target].modifiers.push(RuleModifier {
                keyword: opt.keyword,
                value: opt.value.map(|v| v.text().to_string()),
            });
        } else if let Some(normalized) = legacy_buffer(kw) {
            let target = last_match
                .ok_or_else(|| cur.err_at(opt.col, format!("buffer modifier '{kw}' has no preceding content")))?;
            out[target].buffer = Some(normalized.to_string());
            out[target].modifiers.push(RuleModifier {
                keyword: opt.keyword,
                value: opt.value.map(|v| v.text().to_string()),
            });
        } else if kw == "content" || kw == "pcre" {
            if opt.value.is_none() {
                return Err(cur.err_at(opt.col, format!("option '{kw}' requires a value")));
            }
            out.push(RuleOption {
                keyword: opt.keyword,
                value: opt.value,
                negated: opt.negated,
                modifiers: Vec::new(),
                buffer: current_buffer.clone(),
            });
            last_match = Some(out.len() - 1);
        } else {
            out.push(RuleOption {
                keyword: opt.keyword,
                value: opt.value,
                negated: false,
                modifiers: Vec::new(),
                buffer: None,
            });
        }
    }
    Ok(out)
}

fn extract_meta(options: &[RuleOption], cur: &Cursor) -> Result<(u32, u32, String), ParseError> {
    let mut sid = None;
    let mut rev = None;
    let mut msg = None;

    for opt in options {
        match opt.keyword.as_str() {
            "sid" => {
                let text = opt.value_text().unwrap_or("");
                let n: u32 = text
                    .trim()
                    .parse()
                    .map_err(|_| cur.err_at(1, format!("invalid sid '{text}'")))?;
                if n == 0 {
                    return Err(cur.err_at(1, "sid must be positive"));
                }
                if sid.replace(n).is_some() {
                    return Err(cur.err_at(1, "duplicate sid option"));
                }
            }
            "rev" => {
                let text = opt.value_text().unwrap_or("");
                let n: u32 = text
                    .trim()
                    .parse()
                    .map_err(|_| cur.err_at(1, format!("invalid rev '{text}'")))?;
                if n == 0 {
                    return Err(cur.err_at(1, "rev must be positive"));
                }
                if rev.replace(n).is_some() {
                    return Err(cur.err_at(1, "duplicate rev option"));
                }
            }
            "msg" => {
                match &opt.value {
                    Some(OptionValue::Quoted(text)) => {
                        if msg.replace(unescape(text)).is_some() {
                            return Err(cur.err_at(1, "duplicate msg option"));
                        }
                    }
                    _ => return Err(cur.err_at(1, "msg value must be quoted")),
                }
            }
            _ => {}
        }
    }

    let sid = sid.ok_or_else(|| cur.err_at(1, "missing sid option"))?;
    let msg = msg.ok_or_else(|| cur.err_at(1, "missing msg option"))?;
    Ok((sid, rev.unwrap_or(1), msg))
}

fn unescape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Canonical single-line form; reparses to a Rule equal to the input.
pub fn serialize_rule(rule: &Rule) -> String {
    use std::fmt::Write;

    let mut s = String::new();
    if rule.disabled {
        s.push_str("# ");
    }
    let _ = write!(
        s,
        "{} {} {} {} {} {} {} (",
        rule.action, rule.protocol, rule.src_addr, rule.src_port, rule.direction, rule.dst_addr, rule.dst_port
    );
    for opt in &rule.options {
        s.push_str(&opt.keyword);
        if let Some(v) = &opt.value {
            s.push(':');
            if opt.negated {
                s.push('!');
            }
            match v {
                OptionValue::Quoted(text) => {
                    let _ = write!(s, "\"{text}\"");
                }
                OptionValue::Bare(text) => s.push_str(text),
            }
        }
        s.push_str("; ");
        for m in &opt.modifiers {
            s.push_str(&m.keyword);
            if let Some(v) = &m.value {
                let _ = write!(s, ":{v}");
            }
            s.push_str("; ");
        }
    }
    if s.ends_with(' ') {
        s.pop();
    }
    s.push(')');
    s
}

/// Splits a pcre option value into (pattern body, trailing flags).
/// Returns `None` when the value is not `/.../<flags>` shaped.
pub fn split_pcre(value: &str) -> Option<(&str, &str)> {
    let rest = value.strip_prefix('/')?;
    let last = rest.rfind('/')?;
    let (body, flags) = (&rest[..last], &rest[last + 1..]);
    if flags.chars().all(|c| c.is_ascii_alphanumeric()) {
        Some((body, flags))
    } else {
        None
    }
}

/// Decodes a content literal: `|..|` hex blocks become bytes, `\x` escapes
/// collapse to the escaped character, everything else passes through as UTF-8.
pub fn decode_content_literal(raw: &str) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut chars = raw.chars();
    let mut buf = [0u8; 4];
    while let Some(c) = chars.next() {
        match c {
            '|' => {
                let mut hex = String::new();
                loop {
                    match chars.next() {
                        None => return Err("unterminated |hex| block".to_string()),
                        Some('|') => break,
                        Some(w) if w.is_ascii_whitespace() => {}
                        Some(h) if h.is_ascii_hexdigit() => hex.push(h),
                        Some(bad) => return Err(format!("invalid hex digit '{bad}' in |hex| block")),
                    }
                }
                if hex.len() % 2 != 0 {
                    return Err("odd number of hex digits in |hex| block".to_string());
                }
                for pair in hex.as_bytes().chunks(2) {
                    let s = std::str::from_utf8(pair).unwrap();
                    out.push(u8::from_str_radix(s, 16).unwrap());
                }
            }
            '\\' => match chars.next() {
                Some(esc) => out.extend_from_slice(esc.encode_utf8(&mut buf).as_bytes()),
                None => return Err("trailing backslash in content literal".to_string()),
            },
            other => out.extend_from_slice(other.encode_utf8(&mut buf).as_bytes()),
        }
    }
    Ok(out)
}

/// Parses a whole rules file. `#` lines that do not start with a rule action
/// are comments and are skipped; `#alert ...` style lines are disabled rules.
pub fn parse_ruleset(input: &str, source_path: &str) -> Ruleset {
    let mut rules = Vec::new();
    let mut diagnostics = Vec::new();
    let mut pending: Option<(String, usize)> = None;

    let handle_logical = |text: String, line: usize, rules: &mut Vec<Rule>, diagnostics: &mut Vec<Diagnostic>| {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return;
        }
        if trimmed.starts_with('#') && !is_disabled_rule_line(trimmed) {
            return;
        }
        match parse_rule(trimmed) {
            Ok(mut rule) => {
                rule.line = line;
                rules.push(rule);
            }
            Err(e) => diagnostics.push(Diagnostic {
                line,
                message: format!("col {}: {}", e.col, e.message),
                severity: Severity::Error,
            }),
        }
    };

    for (idx, phys) in input.lines().enumerate() {
        let lineno = idx + 1;
        let (mut text, start) = match pending.take() {
            Some((buf, s)) => (buf, s),
            None => (String::new(), lineno),
        };
        text.push_str(phys);
        let trimmed_end = text.trim_end();
        if let Some(stripped) = trimmed_end.strip_suffix('\\') {
            pending = Some((format!("{stripped} "), start));
            continue;
        }
        handle_logical(text, start, &mut rules, &mut diagnostics);
    }
    if let Some((text, start)) = pending {
        handle_logical(text, start, &mut rules, &mut diagnostics);
    }

    let mut seen = std::collections::HashSet::new();
    for rule in &rules {
        if !seen.insert((rule.sid, rule.rev)) {
            diagnostics.push(Diagnostic {
                line: rule.line,
                message: format!("duplicate sid:rev {}:{}", rule.sid, rule.rev),
                severity: Severity::Warning,
            });
        }
    }

    Ruleset { rules, source_path: source_path.to_string(), diagnostics }
}

/// A `#` line counts as a disabled rule (rather than a comment) when the text
/// after the `#` markers starts with a rule action keyword.
fn is_disabled_rule_line(trimmed: &str) -> bool {
    let body = trimmed.trim_start_matches(|c: char| c == '#' || c.is_whitespace());
    let word: String = body.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let after = body.chars().nth(word.chars().count());
    Action::from_keyword(&word.to_ascii_lowercase()).is_some() && matches!(after, Some(c) if c.is_whitespace())
}
