//! End-to-end acceptance checks: each test exercises one externally stated
//! guarantee of the toolkit, from parser fixpoints through byte-identical
//! pipeline reruns. Oracles here are written from first principles rather
//! than by calling back into the code under test wherever feasible.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rulecheck_core::analytics::{
    self, ecdf, AlertRecord, CollectionWindow, IncidentRecord, RevisionRecord, RuleRevisionStats,
};
use rulecheck_core::checkers::assess;
use rulecheck_core::classifier::{
    cross_validate, grid_search, quick_grid, train_matrix, weighted_f1, HyperParams, LabelRow,
    LabeledRule, Node, F1_PRECISION_WEIGHT, F1_RECALL_WEIGHT,
};
use rulecheck_core::corpus;
use rulecheck_core::features::{extract_features, VECTOR_DIM};
use rulecheck_core::parser::{
    parse_ruleset, parse_threshold, serialize_rule, Rule, ThresholdKind, TrackBy,
};
use rulecheck_core::principles::{Principle, PrincipleSet};
use rulecheck_core::stats::{
    build_design_matrix, fit_robust, ks_two_sample, run_group_regression, vif, DropReason,
    Observation,
};

fn bundled_rules() -> Vec<Rule> {
    let ruleset = parse_ruleset(corpus::RULES_TEXT, "bundled.rules");
    assert!(
        ruleset.diagnostics.is_empty(),
        "bundled ruleset produced diagnostics: {:?}",
        ruleset.diagnostics
    );
    ruleset.rules
}

fn by_key(rules: &[Rule]) -> BTreeMap<(u32, u32), &Rule> {
    rules.iter().map(|r| ((r.sid, r.rev), r)).collect()
}

#[test]
fn bundled_rules_parse_cleanly_and_reserialize_to_a_fixpoint() {
    let started = Instant::now();
    let rules = bundled_rules();
    assert_eq!(rules.len(), 10, "expected ten bundled rules");

    for rule in &rules {
        let first = serialize_rule(rule);
        let reparsed = parse_ruleset(&first, "roundtrip");
        assert!(reparsed.diagnostics.is_empty(), "serialized form must reparse cleanly: {first}");
        assert_eq!(reparsed.rules.len(), 1);
        let second = serialize_rule(&reparsed.rules[0]);
        assert_eq!(first, second, "serialize(parse(serialize(r))) must be a fixpoint");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "parse + fixpoint took {elapsed:?}, expected under 1s");
}

#[test]
fn threshold_specs_and_negated_match_counts_extract_exactly() {
    let rules = bundled_rules();
    let index = by_key(&rules);

    let negations = extract_features(index[&(2019714, 1)]).negated_match_count;
    assert_eq!(negations, 6, "sid 2019714 carries six negated matches");

    let threshold_of = |rule: &Rule| {
        let opt = rule
            .options
            .iter()
            .find(|o| o.keyword == "threshold")
            .expect("rule has a threshold option");
        parse_threshold(opt.value.as_ref().expect("threshold has a value").text())
            .expect("threshold value parses")
    };

    let limit = threshold_of(index[&(2033101, 1)]);
    assert_eq!(limit.kind, ThresholdKind::Limit);
    assert_eq!(limit.track, TrackBy::BySrc);
    assert_eq!(limit.count, 1);
    assert_eq!(limit.seconds, 60);

    let both = threshold_of(index[&(2018316, 1)]);
    assert_eq!(both.kind, ThresholdKind::Both);
    assert_eq!(both.track, TrackBy::ByDst);
    assert_eq!(both.count, 12);
    assert_eq!(both.seconds, 120);
}

#[test]
fn bundled_rule_verdicts_match_the_frozen_table() {
    // Adherence per rule in canonical principle order, frozen by hand from
    // reading each rule against the six craftsmanship principles.
    let expected: [((u32, u32), [bool; 6]); 10] = [
        ((1000001, 1), [true, true, false, false, false, true]),
        ((2012726, 1), [false, false, false, false, false, true]),
        ((2016183, 1), [true, false, false, false, false, true]),
        ((2016184, 1), [true, false, false, false, false, true]),
        ((2016184, 2), [true, false, false, false, false, true]),
        ((2018316, 1), [true, true, false, true, true, true]),
        ((2019714, 1), [true, false, true, false, true, true]),
        ((2024897, 1), [false, false, false, false, false, true]),
        ((2025756, 1), [true, false, false, false, true, false]),
        ((2033101, 1), [true, false, false, true, false, true]),
    ];

    let rules = bundled_rules();
    let index = by_key(&rules);
    assert_eq!(index.len(), expected.len());

    for (key, verdicts) in expected {
        let assessment = assess(index[&key]);
        for (principle, want) in Principle::ALL.iter().zip(verdicts.iter()) {
            let got = assessment.verdict(*principle).adheres;
            assert_eq!(
                got, *want,
                "sid {} rev {} principle {principle}: got {got}, expected {want}",
                key.0, key.1
            );
        }
    }
}

/// Brute-force recomputation of per-revision workload stats: activity spans
/// from scratch, then full scans over alerts and incidents per revision.
fn oracle_workload(
    revisions: &[RevisionRecord],
    window: &CollectionWindow,
    alerts: &[AlertRecord],
    incidents: &[IncidentRecord],
) -> Vec<RuleRevisionStats> {
    let mut by_sid: BTreeMap<u32, Vec<&RevisionRecord>> = BTreeMap::new();
    for r in revisions {
        by_sid.entry(r.sid).or_default().push(r);
    }

    let mut stats = Vec::new();
    for (sid, revs) in &by_sid {
        for (i, r) in revs.iter().enumerate() {
            let introduced = r.updated_at.max(window.start);
            let terminated = match revs.get(i + 1) {
                Some(next) => (next.updated_at - chrono::Days::new(1)).min(window.end),
                None => window.end,
            };
            if introduced > terminated {
                continue;
            }
            let active_days = (terminated - introduced).num_days() + 1;

            let alert_count =
                alerts.iter().filter(|a| a.sid == *sid && a.rev == r.rev).count() as u64;

            let mut incident_count = 0u64;
            for incident in incidents {
                let detects = incident.detecting_sids.contains(sid);
                if detects && introduced <= incident.date && incident.date <= terminated {
                    incident_count += 1;
                }
            }

            let workload = if incident_count > alert_count {
                0.0
            } else {
                (alert_count - incident_count) as f64 / active_days as f64
            };
            stats.push(RuleRevisionStats {
                sid: *sid,
                rev: r.rev,
                alert_count,
                incident_count,
                active_days,
                unnecessary_workload_per_day: workload,
            });
        }
    }
    stats.sort_by_key(|s| (s.sid, s.rev));
    stats
}

#[test]
fn workload_stats_match_an_independent_quadratic_reference() {
    let day = |base: NaiveDate, offset: i64| {
        if offset >= 0 {
            base + chrono::Days::new(offset as u64)
        } else {
            base - chrono::Days::new(offset.unsigned_abs())
        }
    };
    let base = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();

    for fixture in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + fixture);
        let start = day(base, rng.gen_range(0..60));
        let end = day(start, rng.gen_range(30..400));
        let window = CollectionWindow::new(start, end).unwrap();

        let mut revisions = Vec::new();
        for sid in 1..=rng.gen_range(1..=8u32) {
            let mut updated = day(start, rng.gen_range(-30..0));
            for rev in 1..=rng.gen_range(1..=4u32) {
                revisions.push(RevisionRecord { sid, rev, updated_at: updated });
                updated = day(updated, rng.gen_range(1..250));
            }
        }

        // Every 97th fixture is bulk-sized; all stay within 10^4 alerts.
        let cap = if fixture % 97 == 0 { 1_000 } else { 40 };
        let mut alerts = Vec::new();
        for r in &revisions {
            for _ in 0..rng.gen_range(0..=cap) {
                let date = day(start, rng.gen_range(0..=(end - start).num_days()));
                let timestamp = date
                    .and_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0)
                    .unwrap()
                    .and_utc();
                alerts.push(AlertRecord {
                    timestamp,
                    sid: r.sid,
                    rev: r.rev,
                    src_ip: "10.0.0.1".to_string(),
                    dst_ip: "10.0.0.2".to_string(),
                });
            }
        }
        // A few alerts reference unknown revisions and must not be counted.
        for _ in 0..rng.gen_range(0..5) {
            alerts.push(AlertRecord {
                timestamp: start.and_hms_opt(0, 0, 0).unwrap().and_utc(),
                sid: 9_999,
                rev: 1,
                src_ip: "10.0.0.1".to_string(),
                dst_ip: "10.0.0.2".to_string(),
            });
        }

        let mut incidents = Vec::new();
        for k in 0..rng.gen_range(0..=6) {
            let mut detecting_sids = Vec::new();
            for _ in 0..rng.gen_range(1..=4) {
                let sid = rng.gen_range(1..=9u32);
                detecting_sids.push(sid);
                if rng.gen_bool(0.3) {
                    detecting_sids.push(sid);
                }
            }
            incidents.push(IncidentRecord {
                incident_id: format!("INC-{k}"),
                date: day(start, rng.gen_range(0..=(end - start).num_days())),
                detecting_sids,
            });
        }

        let derivation = analytics::derive_activity(&revisions, &window).unwrap();
        let result = analytics::compute_workload(&derivation.activities, &alerts, &incidents);
        let expected = oracle_workload(&revisions, &window, &alerts, &incidents);

        assert_eq!(result.stats.len(), expected.len(), "fixture {fixture}: row count");
        for (got, want) in result.stats.iter().zip(&expected) {
            assert_eq!(got, want, "fixture {fixture}: stats row diverged from oracle");
            assert_eq!(
                got.unnecessary_workload_per_day.to_bits(),
                want.unnecessary_workload_per_day.to_bits(),
                "fixture {fixture}: workload must match bit for bit"
            );
        }

        let counted: u64 = result.stats.iter().map(|s| s.alert_count).sum();
        assert!(counted <= alerts.len() as u64, "fixture {fixture}: counts must conserve");

        if !result.stats.is_empty() {
            let points = ecdf(&result.stats).unwrap();
            for pair in points.windows(2) {
                assert!(pair[0].workload < pair[1].workload, "fixture {fixture}: x strictly asc");
                assert!(
                    pair[0].cumulative_fraction <= pair[1].cumulative_fraction,
                    "fixture {fixture}: ecdf must be monotone"
                );
            }
            let last = points.last().unwrap().cumulative_fraction;
            assert_eq!(last, 1.0, "fixture {fixture}: ecdf must end at 1.0");
        }
    }
}

enum OracleStump {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: f64, right: f64 },
}

/// Exhaustive best-stump search on logistic gradients at p = 0.5, scanning
/// features in index order and candidate cuts in ascending value order,
/// keeping the first strictly best gain.
fn oracle_stump(x: &[[f64; VECTOR_DIM]], y: &[bool]) -> OracleStump {
    let g: Vec<f64> = y.iter().map(|&v| if v { -0.5 } else { 0.5 }).collect();
    let h = 0.25f64;
    let g_sum: f64 = g.iter().sum();
    let h_sum = h * x.len() as f64;
    let score = |gs: f64, hs: f64| gs * gs / hs;

    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..VECTOR_DIM {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap().then(a.cmp(&b)));
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        for w in 0..order.len() - 1 {
            g_left += g[order[w]];
            h_left += h;
            let v = x[order[w]][f];
            let v_next = x[order[w + 1]][f];
            if v == v_next {
                continue;
            }
            let gain = 0.5
                * (score(g_left, h_left) + score(g_sum - g_left, h_sum - h_left)
                    - score(g_sum, h_sum));
            if best.map_or(true, |(bg, _, _)| gain > bg) {
                best = Some((gain, f, 0.5 * (v + v_next)));
            }
        }
    }

    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            for (i, row) in x.iter().enumerate() {
                if row[feature] < threshold {
                    gl += g[i];
                    hl += h;
                } else {
                    gr += g[i];
                    hr += h;
                }
            }
            OracleStump::Split { feature, threshold, left: -gl / hl, right: -gr / hr }
        }
        _ => OracleStump::Leaf(-g_sum / h_sum),
    }
}

fn toy_corpus() -> Vec<LabeledRule> {
    let mut out = Vec::new();
    for i in 0..60u32 {
        let throttled = i % 2 == 0;
        let mut options = format!("msg:\"toy {i}\"; content:\"alpha\"; ");
        for _ in 0..(i % 3) {
            options.push_str("content:\"beta\"; ");
        }
        if throttled {
            let count = 1 + i % 5;
            options.push_str(&format!(
                "threshold:type limit, track by_src, count {count}, seconds 60; "
            ));
        }
        options.push_str(&format!("sid:{}; rev:1;", 50_000 + i));
        let text = format!("alert http $EXTERNAL_NET any -> $HOME_NET any ({options})");
        let parsed = parse_ruleset(&text, "toy");
        assert!(parsed.diagnostics.is_empty(), "toy rule must parse: {text}");
        let rule = &parsed.rules[0];
        let mut labels = PrincipleSet::default();
        labels.set(Principle::AlertThrottling, throttled);
        out.push(LabeledRule {
            sid: rule.sid,
            rev: rule.rev,
            group: "toy".to_string(),
            features: extract_features(rule),
            labels,
        });
    }
    out
}

#[test]
fn boosted_training_matches_an_exhaustive_stump_oracle_and_reproduces() {
    let stump_params = HyperParams {
        n_trees: 1,
        eta: 1.0,
        feature_sampling_rate: 1.0,
        sample_weight_scaling: 1.0,
        max_depth: 1,
        min_child_weight: 0.0,
        gamma: 0.0,
        lambda_l2: 0.0,
        alpha_l1: 0.0,
    };

    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + case);
        let n = rng.gen_range(2..=64);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = [0.0f64; VECTOR_DIM];
            for v in row.iter_mut() {
                // Coarse values provoke duplicates, exercising tie handling.
                *v = f64::from(rng.gen_range(0..6u8)) * 0.5;
            }
            x.push(row);
            // Force one sample of each class so training never degenerates.
            y.push(if i == 0 {
                true
            } else if i == 1 {
                false
            } else {
                rng.gen_bool(0.5)
            });
        }

        let model = train_matrix(&x, &y, &stump_params, case).unwrap();
        assert_eq!(model.trees.len(), 1, "case {case}: one boosting round requested");

        let expected = match oracle_stump(&x, &y) {
            OracleStump::Leaf(value) => Node::Leaf { leaf_value: value },
            OracleStump::Split { feature, threshold, left, right } => Node::Split {
                feature,
                threshold,
                left: Box::new(Node::Leaf { leaf_value: left }),
                right: Box::new(Node::Leaf { leaf_value: right }),
            },
        };
        assert_eq!(model.trees[0], expected, "case {case}: fitted stump diverged from oracle");
        for row in &x {
            assert_eq!(
                model.trees[0].output(row).to_bits(),
                expected.output(row).to_bits(),
                "case {case}: stump outputs must agree bit for bit"
            );
        }
    }

    let toy = toy_corpus();
    let hp = quick_grid()[0];
    let once = cross_validate(&toy, Principle::AlertThrottling, &hp, 10, 2, 99).unwrap();
    let twice = cross_validate(&toy, Principle::AlertThrottling, &hp, 10, 2, 99).unwrap();
    assert_eq!(once, twice, "same seed must reproduce cross-validation bit for bit");

    let started = Instant::now();
    let (_, report) = grid_search(&toy, Principle::AlertThrottling, &quick_grid(), 7).unwrap();
    assert_eq!(report.precision, 1.0, "separable toy must validate at full precision");
    assert_eq!(report.recall, 1.0, "separable toy must validate at full recall");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "toy grid search took {elapsed:?}, expected under 60s");
}

#[test]
fn weighted_f1_matches_direct_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4_242);
    for _ in 0..20 {
        let p: f64 = rng.gen_range(0.01..1.0);
        let r: f64 = rng.gen_range(0.01..1.0);
        let direct = 11.0 * p * r / (10.0 * r + p);
        let got = weighted_f1(p, r, F1_PRECISION_WEIGHT, F1_RECALL_WEIGHT);
        assert!(
            (got - direct).abs() <= 1e-12,
            "weighted f1 mismatch at p={p} r={r}: {got} vs {direct}"
        );
    }
    assert_eq!(weighted_f1(0.0, 0.5, 10.0, 1.0), 0.0);
    assert_eq!(weighted_f1(0.5, 0.0, 10.0, 1.0), 0.0);
}

fn factorial_observations() -> Vec<Observation> {
    // Full 2^3 factorial over three principles, two replicates: columns are
    // balanced and mutually orthogonal after centering.
    let mut observations = Vec::new();
    for _ in 0..2 {
        for bits in 0..8u8 {
            let a = bits & 1 != 0;
            let b = bits & 2 != 0;
            let c = bits & 4 != 0;
            let mut labels = PrincipleSet::default();
            labels.set(Principle::SuccessfulAction, a);
            labels.set(Principle::AlertThrottling, b);
            labels.set(Principle::GeneralizedCharacteristic, c);
            let response = 2.0 + 1.5 * f64::from(u8::from(a)) - 0.75 * f64::from(u8::from(b))
                + 0.25 * f64::from(u8::from(c));
            observations.push(Observation { labels, response });
        }
    }
    observations
}

#[test]
fn regression_building_blocks_behave_on_known_inputs() {
    // Noiseless responses are recovered to within numerical round-off.
    let observations = factorial_observations();
    let design = build_design_matrix(&observations).unwrap();
    let fit = fit_robust(&design).unwrap();
    let expected = [
        ("intercept", 2.0),
        ("successful_action", 1.5),
        ("alert_throttling", -0.75),
        ("generalized_characteristic", 0.25),
    ];
    for (name, want) in expected {
        let i = design.columns.iter().position(|c| c == name).unwrap();
        assert!(
            (fit.coefficients[i] - want).abs() <= 1e-9,
            "{name}: {} vs {want}",
            fit.coefficients[i]
        );
    }

    // Balanced orthogonal columns carry no mutual inflation.
    for (name, value) in vif(&design).unwrap() {
        assert!((value - 1.0).abs() <= 1e-9, "vif({name}) = {value}, expected 1");
    }

    // One wild response: the robust slope holds while plain least squares
    // drifts past twenty percent.
    let mut corrupted = Vec::new();
    for i in 0..50 {
        let flag = i % 2 == 0;
        let mut labels = PrincipleSet::default();
        labels.set(Principle::AlertThrottling, flag);
        let mut response = 1.0 + 4.0 * f64::from(u8::from(flag)) + (i as f64) * 1e-3;
        if i == 0 {
            response += 100.0;
        }
        corrupted.push(Observation { labels, response });
    }
    let design = build_design_matrix(&corrupted).unwrap();
    let slope_index = design.columns.iter().position(|c| c == "alert_throttling").unwrap();

    let (mut s_y, mut s_x, mut s_xy, mut s_xx) = (0.0, 0.0, 0.0, 0.0);
    for (row, y) in design.rows.iter().zip(&design.response) {
        let x = row[slope_index];
        s_y += y;
        s_x += x;
        s_xy += x * y;
        s_xx += x * x;
    }
    let n = design.rows.len() as f64;
    let ols_slope = (n * s_xy - s_x * s_y) / (n * s_xx - s_x * s_x);
    assert!(
        (ols_slope - 4.0).abs() / 4.0 > 0.20,
        "plain least squares should chase the outlier: slope {ols_slope}"
    );

    let robust = fit_robust(&design).unwrap();
    let robust_slope = robust.coefficients[slope_index];
    assert!(
        (robust_slope - 4.0).abs() / 4.0 < 0.05,
        "robust slope should hold near 4: got {robust_slope}"
    );

    // Distribution distance: identical samples score zero, disjoint ones max.
    let a: Vec<f64> = (0..10).map(f64::from).collect();
    let same = ks_two_sample(&a, &a).unwrap();
    assert_eq!(same.d, 0.0);
    assert_eq!(same.p_value, 1.0);

    let b: Vec<f64> = (100..110).map(f64::from).collect();
    let apart = ks_two_sample(&a, &b).unwrap();
    assert_eq!(apart.d, 1.0);
    assert!(apart.p_value < 0.001, "disjoint samples: p = {}", apart.p_value);
}

#[test]
fn grouped_regression_recovers_planted_coefficients() {
    let started = Instant::now();
    let observations = rulecheck_core::stats::fixtures::log4j_group(4, 0.1, 42);
    let regression = run_group_regression(&observations).unwrap();

    let expected = [
        ("intercept", 7.45),
        ("successful_action", -2.71),
        ("alert_throttling", -7.39),
        ("generalized_characteristic", 0.82),
    ];
    for (name, want) in expected {
        let got = regression.coefficients[name];
        assert!(
            (got - want).abs() <= 0.15 * want.abs(),
            "{name}: {got} vs {want} (beyond 15%)"
        );
    }

    let significant: Vec<&str> = regression.significant();
    assert_eq!(
        significant,
        vec!["alert_throttling", "generalized_characteristic", "intercept", "successful_action"],
        "exactly the planted effects must test significant"
    );

    assert!(
        regression.ks.p_value > 0.05,
        "fit residual shape should be compatible: p = {}",
        regression.ks.p_value
    );
    for (name, value) in &regression.vif {
        assert!(*value < 20.0, "vif({name}) = {value}");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "group regression took {elapsed:?}, expected under 10s");
}

#[test]
fn near_constant_indicator_columns_are_dropped_as_degenerate() {
    let mut observations = Vec::new();
    for i in 0..10 {
        let mut labels = PrincipleSet::default();
        labels.set(Principle::AlertThrottling, i % 2 == 0);
        // A single adhering rule cannot support a coefficient.
        labels.set(Principle::LimitedProxy, i == 0);
        observations.push(Observation { labels, response: f64::from(i) });
    }

    let design = build_design_matrix(&observations).unwrap();
    assert_eq!(design.dropped.get("limited_proxy"), Some(&DropReason::Degenerate));
    assert!(!design.columns.iter().any(|c| c == "limited_proxy"));
    assert!(design.columns.iter().any(|c| c == "alert_throttling"));
    // Untouched principles are constant-false and must be led to the ledger.
    assert_eq!(design.dropped.get("exceptions"), Some(&DropReason::Degenerate));
    assert_eq!(design.columns.len() + design.dropped.len(), 1 + Principle::ALL.len());
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rulecheck")).args(args).output().expect("binary must launch")
}

fn collect_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let name = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(name, std::fs::read(&path).expect("readable artifact"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn cli_pipeline_is_byte_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Fixture corpus: bundled + synthetic rules, their labels, and a year of
    // synthetic alert/incident/revision logs.
    let corpus_rules = corpus::labeled_corpus(7);
    let rules_text: String =
        corpus_rules.iter().map(|(r, _)| serialize_rule(r) + "\n").collect();
    let rules_path = root.join("corpus.rules");
    std::fs::write(&rules_path, &rules_text).unwrap();

    let label_rows: Vec<LabelRow> = corpus::labeled_dataset(7)
        .into_iter()
        .map(|r| LabelRow { sid: r.sid, rev: r.rev, group: r.group, labels: r.labels })
        .collect();
    let labels_path = root.join("labels.csv");
    let mut labels_file = std::fs::File::create(&labels_path).unwrap();
    rulecheck_core::classifier::write_labels_csv(&mut labels_file, &label_rows).unwrap();
    drop(labels_file);

    let window = CollectionWindow::new(
        NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
        NaiveDate::from_ymd_opt(2021, 12, 31).unwrap(),
    )
    .unwrap();
    let keys: Vec<(u32, u32)> = corpus_rules.iter().map(|(r, _)| (r.sid, r.rev)).collect();
    let (alerts, incidents, revisions) = analytics::synth::generate_logs(&keys, &window, 11);

    let alerts_path = root.join("alerts.jsonl");
    let mut alerts_file = std::fs::File::create(&alerts_path).unwrap();
    analytics::write_alerts_jsonl(&mut alerts_file, &alerts).unwrap();
    drop(alerts_file);

    let incidents_path = root.join("incidents.csv");
    let mut incidents_file = std::fs::File::create(&incidents_path).unwrap();
    analytics::write_incidents_csv(&mut incidents_file, &incidents).unwrap();
    drop(incidents_file);

    let revisions_path = root.join("revisions.csv");
    let mut revisions_file = std::fs::File::create(&revisions_path).unwrap();
    analytics::write_revisions_csv(&mut revisions_file, &revisions).unwrap();
    drop(revisions_file);

    let rules = rules_path.to_str().unwrap();
    let labels = labels_path.to_str().unwrap();
    let alerts = alerts_path.to_str().unwrap();
    let incidents = incidents_path.to_str().unwrap();
    let revisions = revisions_path.to_str().unwrap();

    let run_pipeline = |out_root: &Path| {
        let out = |stage: &str| out_root.join(stage).to_str().unwrap().to_string();

        let output = run_cli(&["parse", "--rules", rules, "--out", &out("parse")]);
        assert_eq!(output.status.code(), Some(0), "parse must succeed");

        let output = run_cli(&["features", "--rules", rules, "--out", &out("features")]);
        assert_eq!(output.status.code(), Some(0), "features must succeed");

        // The fixture corpus intentionally violates deterministic checks.
        let output = run_cli(&["lint", "--rules", rules, "--out", &out("lint")]);
        assert_eq!(output.status.code(), Some(2), "lint must gate on deterministic violations");

        let output = run_cli(&[
            "train",
            "--rules",
            rules,
            "--labels",
            labels,
            "--seed",
            "1",
            "--grid",
            "quick",
            "--principle",
            "generalized_characteristic",
            "--out",
            &out("train"),
        ]);
        assert_eq!(output.status.code(), Some(0), "train must succeed");

        let output = run_cli(&[
            "workload",
            "--alerts",
            alerts,
            "--incidents",
            incidents,
            "--revisions",
            revisions,
            "--rules",
            rules,
            "--window-start",
            "2021-01-01",
            "--window-end",
            "2021-12-31",
            "--out",
            &out("workload"),
        ]);
        assert_eq!(output.status.code(), Some(0), "workload must succeed");

        let output = run_cli(&[
            "regress",
            "--labels",
            labels,
            "--alerts",
            alerts,
            "--incidents",
            incidents,
            "--revisions",
            revisions,
            "--window-start",
            "2021-01-01",
            "--window-end",
            "2021-12-31",
            "--out",
            &out("regress"),
        ]);
        assert_eq!(output.status.code(), Some(0), "regress must succeed");
    };

    let run_a = root.join("run-a");
    let run_b = root.join("run-b");
    run_pipeline(&run_a);
    run_pipeline(&run_b);

    let files_a = collect_files(&run_a);
    let files_b = collect_files(&run_b);
    let names_a: Vec<&String> = files_a.keys().collect();
    let names_b: Vec<&String> = files_b.keys().collect();
    assert_eq!(names_a, names_b, "both runs must emit the same artifact set");
    assert!(
        files_a.keys().any(|k| k.ends_with("run_manifest.json")),
        "every stage records a manifest"
    );

    for (name, bytes_a) in &files_a {
        let bytes_b = &files_b[name];
        assert_eq!(bytes_a, bytes_b, "artifact {name} differs between identical runs");
    }
}
