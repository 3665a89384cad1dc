//! Grammar-driven round-trip and invariant checks across the library
//! surface: parser fixpoints, feature-vector consistency, assessment
//! evidence, ECDF shape, and KS test symmetries.

use proptest::prelude::*;
use rulecheck_core::analytics::{ecdf, RuleRevisionStats};
use rulecheck_core::checkers::assess;
use rulecheck_core::features::{extract_features, vectorize, VECTOR_DIM};
use rulecheck_core::parser::{parse_rule, parse_threshold, ThresholdKind, ThresholdSpec, TrackBy};
use rulecheck_core::stats::ks_two_sample;

fn action() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("alert"), Just("drop"), Just("pass"), Just("reject")]
}

fn protocol() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("tcp"), Just("udp"), Just("http"), Just("dns"), Just("tls"), Just("ip")]
}

fn address() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just("any"),
        Just("$HOME_NET"),
        Just("$EXTERNAL_NET"),
        Just("$HTTP_SERVERS"),
        Just("192.0.2.7"),
        Just("10.0.0.0/8"),
        Just("!$HOME_NET"),
        Just("[$HOME_NET,!192.0.2.9]"),
        Just("[10.0.0.0/8,172.16.0.0/12]"),
    ]
}

fn port() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just("any"),
        Just("53"),
        Just("80"),
        Just("$HTTP_PORTS"),
        Just("1024:"),
        Just(":1023"),
        Just("!445"),
        Just("[80,443]"),
        Just("8080:8090"),
    ]
}

fn direction() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("->"), Just("<>")]
}

fn buffer_prefix() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just(""),
        Just("http.uri; "),
        Just("http.user_agent; "),
        Just("http.method; "),
        Just("dns.query; "),
        Just("http.header; "),
    ]
}

/// Payload text that needs no escaping inside a quoted value.
fn plain_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Z0-9_./= -]{1,14}").expect("valid regex")
}

fn content_text() -> impl Strategy<Value = String> {
    prop_oneof![
        plain_text(),
        // embedded hex block
        plain_text().prop_map(|t| format!("{t}|0d 0a|")),
        // escaped semicolon and quote
        plain_text().prop_map(|t| format!("{t}\\;x\\\"y")),
    ]
}

fn content_modifiers() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        Just("nocase; ".to_string()),
        Just("depth:10; ".to_string()),
        Just("offset:2; depth:64; ".to_string()),
        Just("startswith; ".to_string()),
        Just("fast_pattern; ".to_string()),
        Just("http_uri; ".to_string()),
    ]
}

fn match_chunk() -> impl Strategy<Value = String> {
    let content = (buffer_prefix(), any::<bool>(), content_text(), content_modifiers()).prop_map(
        |(buf, negated, text, mods)| {
            let bang = if negated { "!" } else { "" };
            format!("{buf}content:{bang}\"{text}\"; {mods}")
        },
    );
    let pcre = (buffer_prefix(), proptest::string::string_regex("[a-z0-9]{1,8}").unwrap())
        .prop_map(|(buf, body)| format!("{buf}pcre:\"/{body}[0-9]+/i\"; "));
    prop_oneof![4 => content, 1 => pcre]
}

fn flow_chunk() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just(""),
        Just("flow:established,to_server; "),
        Just("flow:established,to_client; "),
        Just("flow:to_server; "),
    ]
}

fn throttle_chunk() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just(""),
        Just("threshold:type limit, track by_src, count 1, seconds 60; "),
        Just("threshold:type both, track by_dst, count 12, seconds 120; "),
        Just("detection_filter:track by_src, count 5, seconds 30; "),
    ]
}

prop_compose! {
    fn rule_text()(
        action in action(),
        protocol in protocol(),
        src_addr in address(),
        src_port in port(),
        dir in direction(),
        dst_addr in address(),
        dst_port in port(),
        flow in flow_chunk(),
        matches in prop::collection::vec(match_chunk(), 0..4),
        throttle in throttle_chunk(),
        sid in 1u32..10_000_000,
        rev in 1u32..50,
    ) -> String {
        format!(
            "{action} {protocol} {src_addr} {src_port} {dir} {dst_addr} {dst_port} \
             (msg:\"fuzz case\"; {flow}{}{throttle}sid:{sid}; rev:{rev};)",
            matches.concat()
        )
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn generated_rules_parse_and_reserialize_to_a_fixpoint(text in rule_text()) {
        let first = parse_rule(&text).expect("generated rule must parse");
        let canonical = first.to_string();
        let second = parse_rule(&canonical).expect("canonical text must parse");
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(canonical, second.to_string());
    }

    #[test]
    fn feature_vectors_stay_consistent_with_the_ast(text in rule_text()) {
        let rule = parse_rule(&text).expect("generated rule must parse");
        let fv = extract_features(&rule);
        let v = vectorize(&fv);
        prop_assert_eq!(v.len(), VECTOR_DIM);
        prop_assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        prop_assert_eq!(v[8] as usize, rule.negated_match_count());
        prop_assert_eq!(v[0] as u32, fv.counts[0]);
        // one-hot block holds exactly one flag
        prop_assert_eq!(v[17] + v[18] + v[19] + v[20], 1.0);
    }

    #[test]
    fn violations_always_carry_evidence(text in rule_text()) {
        let rule = parse_rule(&text).expect("generated rule must parse");
        let assessment = assess(&rule);
        for (principle, verdict) in assessment.verdicts() {
            if !verdict.adheres {
                prop_assert!(
                    !verdict.evidence.is_empty(),
                    "{} violated without evidence",
                    principle.name()
                );
            }
        }
    }

    #[test]
    fn ecdf_is_monotone_and_ends_at_one(
        workloads in prop::collection::vec(0.0f64..1000.0, 1..200)
    ) {
        let stats: Vec<RuleRevisionStats> = workloads
            .iter()
            .enumerate()
            .map(|(i, &w)| RuleRevisionStats {
                sid: i as u32,
                rev: 1,
                alert_count: 0,
                incident_count: 0,
                active_days: 1,
                unnecessary_workload_per_day: w,
            })
            .collect();
        let points = ecdf(&stats).unwrap();
        prop_assert_eq!(points.last().unwrap().cumulative_fraction, 1.0);
        for pair in points.windows(2) {
            prop_assert!(pair[0].workload < pair[1].workload);
            prop_assert!(pair[0].cumulative_fraction < pair[1].cumulative_fraction);
        }
    }

    #[test]
    fn ks_distance_is_bounded_and_transform_invariant(
        a in prop::collection::vec(-50.0f64..50.0, 1..60),
        b in prop::collection::vec(-50.0f64..50.0, 1..60),
    ) {
        let ks = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks.d));
        prop_assert!((0.0..=1.0).contains(&ks.p_value));

        let self_test = ks_two_sample(&a, &a).unwrap();
        prop_assert_eq!(self_test.d, 0.0);
        prop_assert_eq!(self_test.p_value, 1.0);

        let ta: Vec<f64> = a.iter().map(|x| x.exp()).collect();
        let tb: Vec<f64> = b.iter().map(|x| x.exp()).collect();
        prop_assert_eq!(ks_two_sample(&ta, &tb).unwrap().d, ks.d);

        let aa: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        let ab: Vec<f64> = b.iter().map(|x| 2.0 * x + 3.0).collect();
        prop_assert_eq!(ks_two_sample(&aa, &ab).unwrap().d, ks.d);
    }

    #[test]
    fn threshold_values_round_trip(
        kind in prop_oneof![
            Just(ThresholdKind::Limit),
            Just(ThresholdKind::Threshold),
            Just(ThresholdKind::Both)
        ],
        track in prop_oneof![
            Just(TrackBy::BySrc),
            Just(TrackBy::ByDst),
            Just(TrackBy::ByRule),
            Just(TrackBy::ByBoth)
        ],
        count in 1u32..100_000,
        seconds in 1u32..1_000_000,
    ) {
        let spec = ThresholdSpec { kind, track, count, seconds };
        let text = format!(
            "type {}, track {}, count {}, seconds {}",
            kind.as_str(),
            track.as_str(),
            count,
            seconds
        );
        prop_assert_eq!(parse_threshold(&text).unwrap(), spec);
    }
}
