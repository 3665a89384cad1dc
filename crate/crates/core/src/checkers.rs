//! Design-principle checks for parsed rules.
//!
//! Six checks, each producing an adherence verdict with evidence strings.
//! Three are syntactically decidable (throttling, successful action,
//! exceptions) and carry deterministic confidence; the other three
//! (limited proxy, generalized characteristic, generalized position) are
//! operationalized heuristics and may be overridden by a trained model
//! (see `classifier::merge_assessment`).

use crate::features::{extract_features, ThresholdType};
use crate::parser::{decode_content_literal, split_pcre, Rule, RuleOption};
use crate::principles::Principle;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Deterministic,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub adheres: bool,
    pub evidence: Vec<String>,
    pub confidence: Confidence,
}

impl Verdict {
    fn new(adheres: bool, confidence: Confidence, evidence: Vec<String>) -> Verdict {
        debug_assert!(adheres || !evidence.is_empty(), "false verdicts need evidence");
        Verdict { adheres, evidence, confidence }
    }
}

/// All six verdicts for one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipleAssessment {
    pub sid: u32,
    pub rev: u32,
    pub disabled: bool,
    verdicts: [Verdict; 6],
}

impl PrincipleAssessment {
    pub fn verdict(&self, p: Principle) -> &Verdict {
        &self.verdicts[p.index()]
    }

    pub fn verdict_mut(&mut self, p: Principle) -> &mut Verdict {
        &mut self.verdicts[p.index()]
    }

    pub fn verdicts(&self) -> impl Iterator<Item = (Principle, &Verdict)> {
        Principle::ALL.iter().map(move |p| (*p, &self.verdicts[p.index()]))
    }
}

impl Serialize for PrincipleAssessment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("sid", &self.sid)?;
        m.serialize_entry("rev", &self.rev)?;
        m.serialize_entry("disabled", &self.disabled)?;
        let verdicts: BTreeMap<&str, &Verdict> =
            self.verdicts().map(|(p, v)| (p.name(), v)).collect();
        m.serialize_entry("verdicts", &verdicts)?;
        m.end()
    }
}

/// Buffers that identify the actor or channel rather than the malicious
/// payload itself.
fn is_proxy_buffer(buffer: &str) -> bool {
    matches!(
        buffer,
        "http.user_agent"
            | "http.header"
            | "http.header.raw"
            | "http.header_names"
            | "http.request_header"
            | "http.response_header"
            | "http.host"
            | "http.host.raw"
    ) || buffer.starts_with("ja3")
        || buffer.starts_with("tls.")
}

/// Buffers carrying the malicious payload or its direct outcome. `None` is
/// the raw packet payload.
fn is_direct_buffer(buffer: Option<&str>) -> bool {
    match buffer {
        None => true,
        Some(b) => matches!(
            b,
            "http.uri" | "http.uri.raw" | "http.request_body" | "http.response_body" | "http.stat_code" | "dns.query" | "file.data"
        ),
    }
}

fn describe_match(opt: &RuleOption) -> String {
    let buffer = opt.buffer.as_deref().unwrap_or("raw payload");
    format!("{}:\"{}\" (buffer: {})", opt.keyword, opt.value_text().unwrap_or(""), buffer)
}

/// Adheres when at least one positive match targets the malicious payload
/// directly; fails when every positive match (or the lack of any) leaves only
/// proxy evidence such as user-agent or header fingerprints.
pub fn check_limited_proxy(rule: &Rule) -> Verdict {
    let positives: Vec<&RuleOption> = rule.positive_matches().collect();
    let direct: Vec<&&RuleOption> = positives.iter().filter(|m| is_direct_buffer(m.buffer.as_deref())).collect();
    let all_proxy = positives.iter().all(|m| m.buffer.as_deref().map_or(false, is_proxy_buffer));

    if positives.is_empty() {
        return Verdict::new(
            false,
            Confidence::Heuristic,
            vec!["no positive content/pcre match ties alerts to observed malicious payload".to_string()],
        );
    }
    if all_proxy && direct.is_empty() {
        let evidence = positives
            .iter()
            .map(|m| format!("{} inspects a proxy for the behavior", describe_match(m)))
            .collect();
        return Verdict::new(false, Confidence::Heuristic, evidence);
    }
    let cite = direct
        .first()
        .map(|m| format!("{} targets the payload directly", describe_match(m)))
        .unwrap_or_else(|| {
            format!("{} matches outside proxy buffers", describe_match(positives[0]))
        });
    Verdict::new(true, Confidence::Heuristic, vec![cite])
}

/// Adheres when the rule keys on evidence that the action succeeded:
/// response-direction flow, a status-code match, cross-event flowbits/xbits
/// state, or a header that pins traffic as server→client.
pub fn check_successful_action(rule: &Rule) -> Verdict {
    let flow = rule.flow_tokens();
    let to_client = flow.iter().any(|t| t == "to_client" || t == "from_server");
    let to_server = flow.iter().any(|t| t == "to_server" || t == "from_client");

    if to_client {
        return Verdict::new(
            true,
            Confidence::Deterministic,
            vec![format!(
                "flow:{} inspects server responses",
                rule.find_option("flow").and_then(|o| o.value_text()).unwrap_or("")
            )],
        );
    }
    if let Some(m) = rule.positive_matches().find(|m| m.buffer.as_deref() == Some("http.stat_code")) {
        return Verdict::new(
            true,
            Confidence::Deterministic,
            vec![format!("{} checks the server status code", describe_match(m))],
        );
    }
    if let Some(opt) = rule
        .options
        .iter()
        .find(|o| matches!(o.keyword.as_str(), "flowbits" | "xbits") && first_clause_is(o, "isset"))
    {
        return Verdict::new(
            true,
            Confidence::Deterministic,
            vec![format!(
                "{}:{} requires state set by an earlier match in the flow",
                opt.keyword,
                opt.value_text().unwrap_or("")
            )],
        );
    }
    // Header heuristic: response traffic flows from a specific service port or
    // from the server group; only meaningful when flow does not pin to_server.
    let inspects_payload =
        rule.positive_matches().next().is_some() || rule.find_option("byte_test").is_some();
    if !to_server && inspects_payload {
        if rule.src_port.is_specific() {
            return Verdict::new(
                true,
                Confidence::Deterministic,
                vec![format!(
                    "header src port {} implies the match applies to service responses",
                    rule.src_port
                )],
            );
        }
        if rule.src_addr.mentions_var("HTTP_SERVERS") {
            return Verdict::new(
                true,
                Confidence::Deterministic,
                vec![format!("header src {} implies server-originated traffic", rule.src_addr)],
            );
        }
    }

    let cited = rule
        .find_option("flow")
        .and_then(|o| o.value_text())
        .map(|v| format!("flow:{v} triggers on attempt-side traffic"))
        .unwrap_or_else(|| "no flow direction, status-code match, or flowbits/xbits isset gate".to_string());
    Verdict::new(false, Confidence::Deterministic, vec![cited])
}

fn first_clause_is(opt: &RuleOption, verb: &str) -> bool {
    opt.value_text()
        .and_then(|v| v.split(',').next())
        .map(|c| c.trim().eq_ignore_ascii_case(verb))
        .unwrap_or(false)
}

/// Adheres when the rule carves out known-benign cases: negated content/pcre
/// matches or negated address specs.
pub fn check_exceptions(rule: &Rule) -> Verdict {
    let negated: Vec<&RuleOption> = rule.matches().filter(|m| m.negated).collect();
    if !negated.is_empty() {
        let evidence = negated
            .iter()
            .map(|m| format!("negated match {} excludes known-benign traffic", describe_match(m)))
            .collect();
        return Verdict::new(true, Confidence::Deterministic, evidence);
    }
    if rule.src_addr.has_negation() || rule.dst_addr.has_negation() {
        return Verdict::new(
            true,
            Confidence::Deterministic,
            vec![format!(
                "negated address spec ({} -> {}) excludes known-benign hosts",
                rule.src_addr, rule.dst_addr
            )],
        );
    }
    Verdict::new(
        false,
        Confidence::Deterministic,
        vec!["no negated content/pcre options and no negated address specs".to_string()],
    )
}

/// Adheres when a threshold/detection_filter option with count ≥ 1 parses.
pub fn check_alert_throttling(rule: &Rule) -> Verdict {
    let opt = rule
        .options
        .iter()
        .find(|o| o.keyword == "threshold" || o.keyword == "detection_filter");
    match opt {
        Some(o) => match o.value_text().map(crate::parser::parse_threshold) {
            Some(Ok(spec)) => Verdict::new(
                true,
                Confidence::Deterministic,
                vec![format!(
                    "{}:{} caps alert volume ({} per {}s tracked {})",
                    o.keyword,
                    o.value_text().unwrap_or(""),
                    spec.count,
                    spec.seconds,
                    spec.track
                )],
            ),
            _ => Verdict::new(
                false,
                Confidence::Deterministic,
                vec![format!(
                    "{} option present but its value \"{}\" does not parse",
                    o.keyword,
                    o.value_text().unwrap_or("")
                )],
            ),
        },
        None => Verdict::new(
            false,
            Confidence::Deterministic,
            vec!["no threshold or detection_filter option".to_string()],
        ),
    }
}

/// True when a regex body contains an unescaped character class, quantifier,
/// or alternation. Group-introducer `?` as in `(?:` does not count.
fn has_variability(body: &str) -> bool {
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 1,
            '[' | '*' | '+' | '|' => return true,
            '{' => {
                if matches!(chars.get(i + 1), Some(c) if c.is_ascii_digit()) {
                    return true;
                }
            }
            '?' => {
                if i == 0 || chars[i - 1] != '(' {
                    return true;
                }
            }
            _ => {}
        }
        i += 1;
    }
    false
}

/// Adheres when the match abstracts over variable parts of the
/// characteristic: a pcre with classes/quantifiers/alternation, or a
/// shortened content refined by a pcre on the same buffer.
pub fn check_generalized_characteristic(rule: &Rule) -> Verdict {
    for m in rule.positive_matches().filter(|m| m.keyword == "pcre") {
        if let Some((body, _flags)) = m.value_text().and_then(split_pcre) {
            if has_variability(body) {
                return Verdict::new(
                    true,
                    Confidence::Heuristic,
                    vec![format!(
                        "pcre:\"{}\" abstracts the characteristic with classes/quantifiers/alternation",
                        m.value_text().unwrap_or("")
                    )],
                );
            }
        }
    }
    let contents: Vec<&RuleOption> =
        rule.positive_matches().filter(|m| m.keyword == "content").collect();
    for pcre in rule.positive_matches().filter(|m| m.keyword == "pcre") {
        if let Some(content) = contents.iter().find(|c| c.buffer == pcre.buffer) {
            return Verdict::new(
                true,
                Confidence::Heuristic,
                vec![format!(
                    "{} is refined by {} on the same buffer",
                    describe_match(content),
                    describe_match(pcre)
                )],
            );
        }
    }

    let evidence = if let Some(m) = rule.positive_matches().next() {
        format!("{} matches one fixed literal; no variability construct present", describe_match(m))
    } else {
        "no content/pcre generalizes the matched characteristic".to_string()
    };
    Verdict::new(false, Confidence::Heuristic, vec![evidence])
}

const POSITION_SEPARATORS: [u8; 4] = [b'?', b'&', b'=', b' '];

/// Number of non-empty tokens when splitting the decoded literal at
/// query/whitespace separators.
fn separable_tokens(literal: &[u8]) -> usize {
    literal
        .split(|b| POSITION_SEPARATORS.contains(b))
        .filter(|t| !t.is_empty())
        .count()
}

/// Adheres when content literals stay single-token (position-independent);
/// fails when one literal bundles several separable tokens, which pins their
/// relative layout to one variant of the traffic.
pub fn check_generalized_position(rule: &Rule) -> Verdict {
    let mut violations = Vec::new();
    for m in rule.positive_matches().filter(|m| m.keyword == "content") {
        let raw = m.value_text().unwrap_or("");
        let Ok(decoded) = decode_content_literal(raw) else { continue };
        let tokens = separable_tokens(&decoded);
        if tokens >= 2 {
            let anchored = m.has_modifier("offset") || m.has_modifier("depth") || m.has_modifier("startswith");
            let mut note = format!(
                "content:\"{raw}\" bundles {tokens} separable tokens into one literal"
            );
            if anchored {
                note.push_str(" and pins them at an absolute position");
            }
            violations.push(note);
        }
    }
    if !violations.is_empty() {
        return Verdict::new(false, Confidence::Heuristic, violations);
    }

    let contents = rule.positive_matches().filter(|m| m.keyword == "content").count();
    let relative_pcre = rule
        .positive_matches()
        .filter(|m| m.keyword == "pcre")
        .any(|m| m.value_text().and_then(split_pcre).map_or(false, |(_, flags)| flags.contains('R')));
    let evidence = if contents > 1 {
        "tokens are split across multiple content matches".to_string()
    } else if relative_pcre {
        "pcre with R flag matches relative to the previous content".to_string()
    } else {
        "content literals are single tokens; nothing pins a composite layout".to_string()
    };
    Verdict::new(true, Confidence::Heuristic, vec![evidence])
}

/// Runs all six checks.
pub fn assess(rule: &Rule) -> PrincipleAssessment {
    PrincipleAssessment {
        sid: rule.sid,
        rev: rule.rev,
        disabled: rule.disabled,
        verdicts: [
            check_limited_proxy(rule),
            check_successful_action(rule),
            check_exceptions(rule),
            check_alert_throttling(rule),
            check_generalized_characteristic(rule),
            check_generalized_position(rule),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipleBreakdown {
    /// Rules with adheres=false for the principle.
    pub violations: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationSummary {
    pub total_rules: usize,
    /// Keyed by principle name, canonical order.
    pub per_principle: BTreeMap<String, PrincipleBreakdown>,
}

/// Per-principle violation counts and proportions over a set of assessments.
pub fn summarize(assessments: &[PrincipleAssessment]) -> ViolationSummary {
    let total = assessments.len();
    let per_principle = Principle::ALL
        .iter()
        .map(|p| {
            let violations = assessments.iter().filter(|a| !a.verdict(*p).adheres).count();
            let proportion = if total == 0 { 0.0 } else { violations as f64 / total as f64 };
            (p.name().to_string(), PrincipleBreakdown { violations, proportion })
        })
        .collect();
    ViolationSummary { total_rules: total, per_principle }
}

/// Matches the consistency invariant between this module and feature
/// extraction: throttling adherence iff the threshold feature is populated.
pub fn throttling_consistent_with_features(rule: &Rule) -> bool {
    check_alert_throttling(rule).adheres == (extract_features(rule).threshold_type != ThresholdType::None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bundled_rules;
    use crate::parser::parse_rule;
    use std::collections::HashMap;

    fn by_sid_rev() -> HashMap<(u32, u32), PrincipleAssessment> {
        bundled_rules().iter().map(|r| ((r.sid, r.rev), assess(r))).collect()
    }

    /// Expected verdicts for the bundled rules, per principle in canonical
    /// order (proxy, successful, exceptions, throttling, gen-char, gen-pos),
    /// derived by applying the six checks by hand to the rule texts.
    const EXPECTED: [((u32, u32), [bool; 6]); 10] = [
        ((2024897, 1), [false, false, false, false, false, true]),
        ((2018316, 1), [true, true, false, true, true, true]),
        ((2012726, 1), [false, false, false, false, false, true]),
        ((2016184, 1), [true, false, false, false, false, true]),
        ((2016184, 2), [true, false, false, false, false, true]),
        ((1000001, 1), [true, true, false, false, false, true]),
        ((2019714, 1), [true, false, true, false, true, true]),
        ((2025756, 1), [true, false, false, false, true, false]),
        ((2033101, 1), [true, false, false, true, false, true]),
        ((2016183, 1), [true, false, false, false, false, true]),
    ];

    #[test]
    fn bundled_corpus_verdict_table() {
        let assessments = by_sid_rev();
        for (key, expected) in EXPECTED {
            let a = &assessments[&key];
            for (p, want) in Principle::ALL.iter().zip(expected.iter()) {
                assert_eq!(
                    a.verdict(*p).adheres,
                    *want,
                    "sid {}:{} principle {}",
                    key.0,
                    key.1,
                    p
                );
            }
        }
    }

    #[test]
    fn evidence_present_on_every_false_verdict() {
        for rule in bundled_rules() {
            let a = assess(&rule);
            for (p, v) in a.verdicts() {
                if !v.adheres {
                    assert!(!v.evidence.is_empty(), "sid {} {}", rule.sid, p);
                    assert!(
                        v.evidence.iter().all(|e| !e.trim().is_empty()),
                        "sid {} {}",
                        rule.sid,
                        p
                    );
                }
            }
        }
    }

    #[test]
    fn minimal_rule_all_false_except_position() {
        let r = parse_rule("alert http any any -> any any (msg:\"x\"; sid:1;)").unwrap();
        let a = assess(&r);
        assert!(!a.verdict(Principle::LimitedProxy).adheres);
        assert!(!a.verdict(Principle::SuccessfulAction).adheres);
        assert!(!a.verdict(Principle::Exceptions).adheres);
        assert!(!a.verdict(Principle::AlertThrottling).adheres);
        assert!(!a.verdict(Principle::GeneralizedCharacteristic).adheres);
        assert!(a.verdict(Principle::GeneralizedPosition).adheres);
    }

    #[test]
    fn confidence_levels_are_fixed_per_principle() {
        let r = parse_rule("alert http any any -> any any (msg:\"x\"; sid:1;)").unwrap();
        let a = assess(&r);
        assert_eq!(a.verdict(Principle::LimitedProxy).confidence, Confidence::Heuristic);
        assert_eq!(a.verdict(Principle::SuccessfulAction).confidence, Confidence::Deterministic);
        assert_eq!(a.verdict(Principle::Exceptions).confidence, Confidence::Deterministic);
        assert_eq!(a.verdict(Principle::AlertThrottling).confidence, Confidence::Deterministic);
        assert_eq!(a.verdict(Principle::GeneralizedCharacteristic).confidence, Confidence::Heuristic);
        assert_eq!(a.verdict(Principle::GeneralizedPosition).confidence, Confidence::Heuristic);
    }

    #[test]
    fn address_negation_counts_as_exception() {
        let r = parse_rule("alert tcp !$HOME_NET any -> any any (msg:\"x\"; sid:2;)").unwrap();
        assert!(check_exceptions(&r).adheres);
    }

    #[test]
    fn literal_regex_is_not_generalized() {
        let r = parse_rule("alert http any any -> any any (msg:\"x\"; pcre:\"/^abc$/\"; sid:3;)").unwrap();
        assert!(!check_generalized_characteristic(&r).adheres);
    }

    #[test]
    fn group_construct_question_mark_is_not_variability() {
        assert!(!has_variability("^abc$"));
        assert!(!has_variability("(?:abc)"));
        assert!(has_variability("(?:abc)?"));
        assert!(has_variability("ab?c"));
        assert!(has_variability("a[bc]d"));
        assert!(has_variability("ab{2}c"));
        assert!(!has_variability("ab\\{2}c"));
        assert!(has_variability("a|b"));
        assert!(!has_variability("a\\|b\\[c\\]"));
    }

    #[test]
    fn split_content_tokens_adhere_but_bundled_do_not() {
        let bundled = parse_rule(
            "alert http any any -> $HOME_NET any (msg:\"x\"; http.uri; content:\"/login.cgi?cli=\"; sid:4;)",
        )
        .unwrap();
        assert!(!check_generalized_position(&bundled).adheres);

        let split = parse_rule(
            "alert http any any -> $HOME_NET any (msg:\"x\"; http.uri; content:\"/login.cgi?\"; content:\"cli=\"; sid:5;)",
        )
        .unwrap();
        assert!(check_generalized_position(&split).adheres);
    }

    #[test]
    fn hex_block_bytes_are_not_separators() {
        let r = parse_rule("alert udp any any -> any any (msg:\"x\"; content:\"|00 01 00 20|\"; sid:6;)").unwrap();
        assert!(check_generalized_position(&r).adheres);

        let r = parse_rule("alert udp any any -> any any (msg:\"x\"; content:\"a|20|b\"; sid:7;)").unwrap();
        assert!(!check_generalized_position(&r).adheres);
    }

    #[test]
    fn stat_code_match_counts_as_successful() {
        let r = parse_rule(
            "alert http any any -> any any (msg:\"x\"; http.stat_code; content:\"200\"; sid:8;)",
        )
        .unwrap();
        assert!(check_successful_action(&r).adheres);
    }

    #[test]
    fn flowbits_isset_counts_but_set_does_not() {
        let set = parse_rule(
            "alert http any any -> any any (msg:\"x\"; flowbits:set, s; flowbits:noalert; sid:9;)",
        )
        .unwrap();
        assert!(!check_successful_action(&set).adheres);

        let isset = parse_rule("alert http any any -> any any (msg:\"x\"; flowbits:isset, s; sid:10;)").unwrap();
        assert!(check_successful_action(&isset).adheres);
    }

    #[test]
    fn specific_src_port_with_payload_counts_as_response_side() {
        let r = parse_rule("alert udp any 53 -> $HOME_NET any (msg:\"x\"; content:\"abc\"; sid:11;)").unwrap();
        assert!(check_successful_action(&r).adheres);

        // Same header without any payload inspection: nothing ties the alert
        // to a response, so the heuristic stays conservative.
        let bare = parse_rule("alert udp any 53 -> $HOME_NET any (msg:\"x\"; sid:12;)").unwrap();
        assert!(!check_successful_action(&bare).adheres);

        // to_server flow overrides the header heuristic.
        let to_server =
            parse_rule("alert udp any 53 -> $HOME_NET any (msg:\"x\"; flow:to_server; content:\"abc\"; sid:13;)").unwrap();
        assert!(!check_successful_action(&to_server).adheres);
    }

    #[test]
    fn throttling_agrees_with_feature_extraction() {
        for rule in bundled_rules() {
            assert!(throttling_consistent_with_features(&rule), "sid {}", rule.sid);
        }
    }

    #[test]
    fn summary_counts_violations() {
        let assessments: Vec<PrincipleAssessment> = bundled_rules().iter().map(assess).collect();
        let summary = summarize(&assessments);
        assert_eq!(summary.total_rules, 10);
        let throttling = &summary.per_principle["alert_throttling"];
        assert_eq!(throttling.violations, 8);
        assert!((throttling.proportion - 0.8).abs() < 1e-12);
        let position = &summary.per_principle["generalized_position"];
        assert_eq!(position.violations, 1);
    }

    #[test]
    fn disabled_rules_are_assessed_with_flag() {
        let r = parse_rule("# alert http any any -> any any (msg:\"x\"; sid:14;)").unwrap();
        let a = assess(&r);
        assert!(a.disabled);
        assert!(a.verdict(Principle::GeneralizedPosition).adheres);
    }
}
