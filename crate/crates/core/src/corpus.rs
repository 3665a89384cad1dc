//! Bundled rule corpus: ten real ET ruleset excerpts plus a seeded synthetic
//! extension used for desk-scale classifier and regression experiments.
//!
//! The synthetic generator builds rules whose syntax realizes a chosen
//! adherence profile per design principle, so checker verdicts on the
//! generated rules are known by construction. Group sizes and per-principle
//! adherence counts follow a fixed mix typical of a production SOC ruleset
//! (six comparison groups, 182 rules total).

use crate::parser::{parse_rule, parse_ruleset, Rule};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Raw text of the bundled example rules.
pub const RULES_TEXT: &str = include_str!("../testdata/bundled.rules");

/// Comparison group tokens, in corpus order.
pub const GROUPS: [&str; 6] = [
    "active_scanning",
    "log4j",
    "other_exploits",
    "process_injection",
    "drive_by_compromise",
    "command_and_control",
];

/// Parses the bundled example rules. Panics if the bundled text has rotted.
pub fn bundled_rules() -> Vec<Rule> {
    let rs = parse_ruleset(RULES_TEXT, "bundled:bundled.rules");
    assert!(
        rs.diagnostics.is_empty(),
        "bundled corpus failed to parse: {:?}",
        rs.diagnostics
    );
    rs.rules
}

/// Comparison group for each bundled rule.
pub fn bundled_group(sid: u32) -> &'static str {
    match sid {
        2012726 | 2033101 => "active_scanning",
        2016184 | 1000001 | 2025756 | 2016183 => "other_exploits",
        2019714 => "drive_by_compromise",
        2024897 | 2018316 => "command_and_control",
        _ => panic!("sid {sid} is not part of the bundled corpus"),
    }
}

/// Adherence profile a synthetic rule should realize, in canonical principle
/// order: limited_proxy, successful_action, exceptions, alert_throttling,
/// generalized_characteristic, generalized_position.
#[derive(Debug, Clone, Copy)]
struct Profile {
    direct: bool,
    successful: bool,
    exceptions: bool,
    throttled: bool,
    gen_char: bool,
    gen_pos: bool,
}

struct GroupPlan {
    name: &'static str,
    n: usize,
    /// Rules that should adhere, per principle in canonical order.
    adhere: [usize; 6],
    /// Header template: (src, dst).
    header: (&'static str, &'static str),
    sid_base: u32,
}

/// Synthetic group sizes top up each comparison group past its bundled
/// members, so the combined corpus lands on the fixed totals (182 rules
/// overall).
const PLANS: [GroupPlan; 6] = [
    GroupPlan {
        name: "active_scanning",
        n: 19,
        adhere: [0, 1, 1, 1, 8, 8],
        header: ("$EXTERNAL_NET any", "$HOME_NET any"),
        sid_base: 8_100_000,
    },
    GroupPlan {
        name: "log4j",
        n: 9,
        adhere: [0, 2, 0, 6, 2, 9],
        header: ("any any", "$HTTP_SERVERS any"),
        sid_base: 8_200_000,
    },
    GroupPlan {
        name: "other_exploits",
        n: 76,
        adhere: [1, 0, 2, 0, 26, 68],
        header: ("$EXTERNAL_NET any", "$HOME_NET any"),
        sid_base: 8_300_000,
    },
    GroupPlan {
        name: "process_injection",
        n: 33,
        adhere: [0, 0, 1, 0, 5, 32],
        header: ("$HOME_NET any", "$EXTERNAL_NET any"),
        sid_base: 8_400_000,
    },
    GroupPlan {
        name: "drive_by_compromise",
        n: 18,
        adhere: [4, 2, 0, 0, 4, 16],
        header: ("$HOME_NET any", "$EXTERNAL_NET any"),
        sid_base: 8_500_000,
    },
    GroupPlan {
        name: "command_and_control",
        n: 17,
        adhere: [17, 14, 3, 0, 14, 3],
        header: ("$HOME_NET any", "$EXTERNAL_NET any"),
        sid_base: 8_600_000,
    },
];

const URI_TOKENS: [&str; 8] = [
    "/cgi-bin/status",
    "/wp-json/v2",
    "/manager/html",
    "/owa/auth.owa",
    "/.env",
    "/phpmyadmin",
    "/solr/admin",
    "/vpn/index.html",
];

const UA_TOKENS: [&str; 8] = [
    "zgrab",
    "python-requests",
    "masscan-agent",
    "WinHttpClient",
    "EvilBeacon",
    "UpdaterSvc",
    "sqlmap",
    "CensysInspect",
];

const QUERY_KEYS: [&str; 4] = ["cmd", "cli", "id", "q"];

const EXCEPTION_TOKENS: [&str; 4] = ["internal-scanner", "patch-mirror", "backup-agent", "healthcheck"];

const PCRE_BODIES: [&str; 4] = [
    "/[a-z0-9]{8,16}\\.bin$/",
    "/(?:stage|load)[0-9]{2}/",
    "/id=[0-9a-f]+&token/",
    "/\\/[a-z]{3,6}\\.(?:php|jsp)/",
];

/// Principle `j` is realized by rule `i` iff `(i + 3*j) % n < k`; spreads the
/// `k` positive labels over the group while decorrelating principles.
fn slot(i: usize, j: usize, n: usize, k: usize) -> bool {
    (i + 3 * j) % n < k
}

fn build_rule(plan: &GroupPlan, i: usize, p: Profile, rng: &mut ChaCha8Rng) -> String {
    let mut opts: Vec<String> = Vec::new();
    opts.push(format!("msg:\"SYN {} variant {}\"", plan.name, i));
    opts.push(format!(
        "flow:established,{}",
        if p.successful { "to_client" } else { "to_server" }
    ));

    let uri: &str = URI_TOKENS.choose(rng).unwrap();
    let ua: &str = UA_TOKENS.choose(rng).unwrap();
    let key: &str = QUERY_KEYS.choose(rng).unwrap();

    if p.direct {
        opts.push("http.uri".to_string());
        if p.gen_pos {
            opts.push(format!("content:\"{uri}\""));
            if rng.gen_bool(0.5) {
                opts.push(format!("content:\"{key}=\""));
            }
        } else {
            opts.push(format!("content:\"{uri}?{key}=\""));
        }
    } else {
        opts.push("http.user_agent".to_string());
        if p.gen_pos {
            opts.push(format!("content:\"{ua}\""));
        } else {
            opts.push(format!("content:\"{ua} compatible build={i}\""));
        }
    }

    if p.gen_char {
        let body: &str = PCRE_BODIES.choose(rng).unwrap();
        opts.push(format!("pcre:\"{body}\""));
    }

    if p.exceptions {
        let benign: &str = EXCEPTION_TOKENS.choose(rng).unwrap();
        opts.push("http.header".to_string());
        opts.push(format!("content:!\"{benign}\""));
    }

    if p.throttled {
        let count = *[1u32, 5, 10].choose(rng).unwrap();
        let seconds = *[60u32, 120, 3600].choose(rng).unwrap();
        opts.push(format!("threshold:type limit, track by_src, count {count}, seconds {seconds}"));
    }

    opts.push(format!("sid:{}", plan.sid_base + i as u32));
    opts.push("rev:1".to_string());

    format!(
        "alert http {} -> {} ({};)",
        plan.header.0,
        plan.header.1,
        opts.join("; ")
    )
}

/// Generates the synthetic corpus extension: (rule, group) pairs,
/// deterministic for a given seed.
pub fn synthetic_rules(seed: u64) -> Vec<(Rule, &'static str)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for plan in &PLANS {
        for i in 0..plan.n {
            let get = |j: usize| slot(i, j, plan.n, plan.adhere[j]);
            let p = Profile {
                direct: get(0),
                successful: get(1),
                exceptions: get(2),
                throttled: get(3),
                gen_char: get(4),
                gen_pos: get(5),
            };
            let text = build_rule(plan, i, p, &mut rng);
            let rule = parse_rule(&text)
                .unwrap_or_else(|e| panic!("synthetic rule failed to parse: {e}\n{text}"));
            out.push((rule, plan.name));
        }
    }
    out
}

/// Classifier-ready view of [`labeled_corpus`]: checker verdicts become the
/// per-principle adherence labels.
pub fn labeled_dataset(seed: u64) -> Vec<crate::classifier::LabeledRule> {
    labeled_corpus(seed)
        .into_iter()
        .map(|(rule, group)| {
            let assessment = crate::checkers::assess(&rule);
            let mut labels = crate::principles::PrincipleSet::default();
            for (p, v) in assessment.verdicts() {
                labels.set(p, v.adheres);
            }
            crate::classifier::LabeledRule {
                sid: rule.sid,
                rev: rule.rev,
                group: group.to_string(),
                features: crate::features::extract_features(&rule),
                labels,
            }
        })
        .collect()
}

/// Bundled rules plus the synthetic extension: 182 (rule, group) pairs.
pub fn labeled_corpus(seed: u64) -> Vec<(Rule, &'static str)> {
    let mut out: Vec<(Rule, &'static str)> = bundled_rules()
        .into_iter()
        .map(|r| {
            let group = bundled_group(r.sid);
            (r, group)
        })
        .collect();
    out.extend(synthetic_rules(seed));
    out
}
