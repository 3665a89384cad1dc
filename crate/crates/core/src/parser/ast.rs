//! Rule data model. Parsed rules keep every option in source order, with
//! content/pcre modifiers nested under the match they qualify.

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Alert,
    Drop,
    Pass,
    Reject,
}

impl Action {
    pub fn from_keyword(kw: &str) -> Option<Action> {
        match kw {
            "alert" => Some(Action::Alert),
            "drop" => Some(Action::Drop),
            "pass" => Some(Action::Pass),
            "reject" => Some(Action::Reject),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Alert => "alert",
            Action::Drop => "drop",
            Action::Pass => "pass",
            Action::Reject => "reject",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `->`
    Forward,
    /// `<>`
    Bidirectional,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "->",
            Direction::Bidirectional => "<>",
        })
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Address side of a rule header. `Var` holds the name without the `$`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AddressSpec {
    Any,
    Var(String),
    /// IP or CIDR kept as written, e.g. `10.0.0.0/8` or `2001:db8::1`.
    Literal(String),
    Negated(Box<AddressSpec>),
    Group(Vec<AddressSpec>),
}

impl AddressSpec {
    /// True if the spec or any nested part is negated.
    pub fn has_negation(&self) -> bool {
        match self {
            AddressSpec::Negated(_) => true,
            AddressSpec::Group(items) => items.iter().any(AddressSpec::has_negation),
            _ => false,
        }
    }

    /// True if the spec mentions the variable `name` (without `$`), at any depth.
    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            AddressSpec::Var(v) => v == name,
            AddressSpec::Negated(inner) => inner.mentions_var(name),
            AddressSpec::Group(items) => items.iter().any(|a| a.mentions_var(name)),
            _ => false,
        }
    }

    /// True if the spec contains a literal IP or CIDR at any depth.
    pub fn has_literal(&self) -> bool {
        match self {
            AddressSpec::Literal(_) => true,
            AddressSpec::Negated(inner) => inner.has_literal(),
            AddressSpec::Group(items) => items.iter().any(AddressSpec::has_literal),
            _ => false,
        }
    }

    pub fn is_any(&self) -> bool {
        matches!(self, AddressSpec::Any)
    }
}

impl fmt::Display for AddressSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AddressSpec::Any => f.write_str("any"),
            AddressSpec::Var(name) => write!(f, "${name}"),
            AddressSpec::Literal(text) => f.write_str(text),
            AddressSpec::Negated(inner) => write!(f, "!{inner}"),
            AddressSpec::Group(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl Serialize for AddressSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortSpec {
    Any,
    Var(String),
    Single(u16),
    /// `low:high`; either bound may be open.
    Range(Option<u16>, Option<u16>),
    Negated(Box<PortSpec>),
    Group(Vec<PortSpec>),
}

impl PortSpec {
    pub fn has_negation(&self) -> bool {
        match self {
            PortSpec::Negated(_) => true,
            PortSpec::Group(items) => items.iter().any(PortSpec::has_negation),
            _ => false,
        }
    }

    /// True for a plain single port, e.g. `53`.
    pub fn is_specific(&self) -> bool {
        matches!(self, PortSpec::Single(_))
    }

    /// True if port `p` is syntactically covered by this spec (negations ignored
    /// at the top: `!53` still "mentions" 53 for categorization purposes).
    pub fn mentions(&self, p: u16) -> bool {
        match self {
            PortSpec::Any | PortSpec::Var(_) => false,
            PortSpec::Single(x) => *x == p,
            PortSpec::Range(lo, hi) => lo.map_or(true, |l| l <= p) && hi.map_or(true, |h| p <= h),
            PortSpec::Negated(inner) => inner.mentions(p),
            PortSpec::Group(items) => items.iter().any(|x| x.mentions(p)),
        }
    }
}

impl fmt::Display for PortSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortSpec::Any => f.write_str("any"),
            PortSpec::Var(name) => write!(f, "${name}"),
            PortSpec::Single(p) => write!(f, "{p}"),
            PortSpec::Range(Some(lo), Some(hi)) => write!(f, "{lo}:{hi}"),
            PortSpec::Range(Some(lo), None) => write!(f, "{lo}:"),
            PortSpec::Range(None, Some(hi)) => write!(f, ":{hi}"),
            PortSpec::Range(None, None) => f.write_str("any"),
            PortSpec::Negated(inner) => write!(f, "!{inner}"),
            PortSpec::Group(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl Serialize for PortSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Value of a rule option. Quoted values keep the raw text between the quotes
/// with escape sequences untouched, so serialization round-trips exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptionValue {
    Quoted(String),
    Bare(String),
}

impl OptionValue {
    pub fn text(&self) -> &str {
        match self {
            OptionValue::Quoted(t) | OptionValue::Bare(t) => t,
        }
    }

    pub fn is_quoted(&self) -> bool {
        matches!(self, OptionValue::Quoted(_))
    }
}

/// Position or transform qualifier attached to a content/pcre match
/// (`nocase`, `depth:6`, legacy `http_uri`, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleModifier {
    pub keyword: String,
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOption {
    /// Keyword normalized to lowercase.
    pub keyword: String,
    pub value: Option<OptionValue>,
    /// `content:!"..."` / `pcre:!"..."`.
    pub negated: bool,
    /// Modifiers that followed this match, in source order.
    pub modifiers: Vec<RuleModifier>,
    /// Resolved sticky buffer for content/pcre; `None` means raw payload.
    pub buffer: Option<String>,
}

impl RuleOption {
    pub fn is_match(&self) -> bool {
        self.keyword == "content" || self.keyword == "pcre"
    }

    pub fn has_modifier(&self, kw: &str) -> bool {
        self.modifiers.iter().any(|m| m.keyword == kw)
    }

    pub fn value_text(&self) -> Option<&str> {
        self.value.as_ref().map(OptionValue::text)
    }
}

impl Serialize for RuleOption {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("keyword", &self.keyword)?;
        if let Some(v) = &self.value {
            m.serialize_entry("value", v.text())?;
        }
        if self.negated {
            m.serialize_entry("negated", &true)?;
        }
        if !self.modifiers.is_empty() {
            let mods: Vec<serde_json::Value> = self
                .modifiers
                .iter()
                .map(|md| match &md.value {
                    Some(v) => serde_json::json!({"keyword": md.keyword, "value": v}),
                    None => serde_json::json!({"keyword": md.keyword}),
                })
                .collect();
            m.serialize_entry("modifiers", &mods)?;
        }
        if let Some(b) = &self.buffer {
            m.serialize_entry("buffer", b)?;
        }
        m.end()
    }
}

/// One parsed rule. Equality is structural and ignores `raw` and `line`, so a
/// rule compares equal to the reparse of its own serialization.
#[derive(Debug, Clone)]
pub struct Rule {
    pub action: Action,
    /// Lowercased protocol keyword (`http`, `udp`, `dns`, ...).
    pub protocol: String,
    pub src_addr: AddressSpec,
    pub src_port: PortSpec,
    pub direction: Direction,
    pub dst_addr: AddressSpec,
    pub dst_port: PortSpec,
    pub options: Vec<RuleOption>,
    pub sid: u32,
    pub rev: u32,
    pub msg: String,
    /// True for rules commented out with `#` in the source.
    pub disabled: bool,
    /// 1-based source line, 1 for rules parsed outside a file.
    pub line: usize,
    /// Original source text.
    pub raw: String,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.action == other.action
            && self.protocol == other.protocol
            && self.src_addr == other.src_addr
            && self.src_port == other.src_port
            && self.direction == other.direction
            && self.dst_addr == other.dst_addr
            && self.dst_port == other.dst_port
            && self.options == other.options
            && self.sid == other.sid
            && self.rev == other.rev
            && self.msg == other.msg
            && self.disabled == other.disabled
    }
}

impl Eq for Rule {}

impl Rule {
    /// Content and pcre options, in source order.
    pub fn matches(&self) -> impl Iterator<Item = &RuleOption> {
        self.options.iter().filter(|o| o.is_match())
    }

    /// Positive (non-negated) content/pcre options.
    pub fn positive_matches(&self) -> impl Iterator<Item = &RuleOption> {
        self.matches().filter(|o| !o.negated)
    }

    pub fn negated_match_count(&self) -> usize {
        self.matches().filter(|o| o.negated).count()
    }

    pub fn find_option(&self, keyword: &str) -> Option<&RuleOption> {
        self.options.iter().find(|o| o.keyword == keyword)
    }

    pub fn options_named<'a>(&'a self, keyword: &'a str) -> impl Iterator<Item = &'a RuleOption> {
        self.options.iter().filter(move |o| o.keyword == keyword)
    }

    /// Option keywords flattened back into source order, modifiers included.
    pub fn flat_keywords(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for opt in &self.options {
            out.push(opt.keyword.as_str());
            for m in &opt.modifiers {
                out.push(m.keyword.as_str());
            }
        }
        out
    }

    /// Comma-separated flow tokens, trimmed, lowercased. Empty if no flow option.
    pub fn flow_tokens(&self) -> Vec<String> {
        self.find_option("flow")
            .and_then(|o| o.value_text())
            .map(|v| {
                v.split(',')
                    .map(|t| t.trim().to_ascii_lowercase())
                    .filter(|t| !t.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rule", 11)?;
        st.serialize_field("action", &self.action)?;
        st.serialize_field("protocol", &self.protocol)?;
        st.serialize_field("src_addr", &self.src_addr)?;
        st.serialize_field("src_port", &self.src_port)?;
        st.serialize_field("direction", &self.direction)?;
        st.serialize_field("dst_addr", &self.dst_addr)?;
        st.serialize_field("dst_port", &self.dst_port)?;
        st.serialize_field("options", &self.options)?;
        st.serialize_field("sid", &self.sid)?;
        st.serialize_field("rev", &self.rev)?;
        st.serialize_field("disabled", &self.disabled)?;
        st.end()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::serialize_rule(self))
    }
}
