//! Subcommand implementations. Every command writes machine-readable
//! artifacts plus a run manifest into `--out` and prints a short human
//! summary to stdout; `--format json` echoes the primary artifact instead.

use crate::manifest::RunManifest;
use crate::{GridChoice, OutputFormat};
use anyhow::{bail, Context};
use rulecheck_core::analytics::{
    categorize_rule, compute_workload, derive_activity, ecdf, filter_to_window,
    read_alerts_jsonl, read_incidents_csv, read_revisions_csv, top_noise, write_ecdf_csv,
    write_stats_csv, CollectionWindow, RuleRevisionStats,
};
use rulecheck_core::checkers::{assess, summarize, Confidence, PrincipleAssessment};
use rulecheck_core::classifier::{
    grid_search, join_labels, full_grid, quick_grid, read_labels_csv, train, CVReport,
    HyperParams, ModelBundle,
};
use rulecheck_core::features::{extract_features, schema_hash, vectorize, VECTOR_SCHEMA};
use rulecheck_core::parser::{parse_ruleset, serialize_rule, Rule, Ruleset};
use rulecheck_core::principles::Principle;
use rulecheck_core::stats::{run_group_regression, render_text, Observation};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Heuristic principles are the ones a trained model may override.
const HEURISTIC_PRINCIPLES: [Principle; 3] =
    [Principle::LimitedProxy, Principle::GeneralizedCharacteristic, Principle::GeneralizedPosition];

fn prepare_out(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn save_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    manifest: &mut RunManifest,
) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), &text).with_context(|| format!("writing {name}"))?;
    manifest.record_output(name);
    Ok(text)
}

fn save_bytes(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    manifest: &mut RunManifest,
) -> anyhow::Result<()> {
    fs::write(dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
    manifest.record_output(name);
    Ok(())
}

fn load_ruleset(path: &Path) -> anyhow::Result<Ruleset> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_ruleset(&text, &path.display().to_string()))
}

fn parse_window(start: &str, end: &str) -> anyhow::Result<CollectionWindow> {
    let start = start.parse().with_context(|| format!("--window-start {start:?}"))?;
    let end = end.parse().with_context(|| format!("--window-end {end:?}"))?;
    CollectionWindow::new(start, end).map_err(Into::into)
}

pub fn cmd_parse(
    rules: PathBuf,
    out: PathBuf,
    format: OutputFormat,
) -> anyhow::Result<u8> {
    prepare_out(&out)?;
    let mut manifest = RunManifest::new(
        "parse",
        serde_json::json!({ "rules": rules.display().to_string() }),
    );
    manifest.record_input(&rules)?;
    let ruleset = load_ruleset(&rules)?;

    save_json(&out, "rules.json", &ruleset.rules, &mut manifest)?;
    let diagnostics_text = save_json(&out, "diagnostics.json", &ruleset.diagnostics, &mut manifest)?;
    let canonical: String =
        ruleset.rules.iter().map(|r| serialize_rule(r) + "\n").collect();
    save_bytes(&out, "canonical.rules", canonical.as_bytes(), &mut manifest)?;
    manifest.write(&out)?;

    match format {
        OutputFormat::Json => print!("{diagnostics_text}"),
        OutputFormat::Text => {
            println!(
                "parsed {} rules from {} ({} diagnostics)",
                ruleset.rules.len(),
                rules.display(),
                ruleset.diagnostics.len()
            );
            for d in &ruleset.diagnostics {
                println!("  line {}: {}", d.line, d.message);
            }
        }
    }
    Ok(0)
}

pub fn cmd_lint(
    rules: PathBuf,
    model: Option<PathBuf>,
    out: PathBuf,
    format: OutputFormat,
) -> anyhow::Result<u8> {
    prepare_out(&out)?;
    let mut manifest = RunManifest::new(
        "lint",
        serde_json::json!({
            "rules": rules.display().to_string(),
            "model": model.as_ref().map(|p| p.display().to_string()),
        }),
    );
    manifest.record_input(&rules)?;
    let ruleset = load_ruleset(&rules)?;

    let bundle: Option<ModelBundle> = match &model {
        Some(path) => {
            manifest.record_input(path)?;
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let bundle: ModelBundle = serde_json::from_str(&text)
                .with_context(|| format!("parsing model bundle {}", path.display()))?;
            if bundle.schema != schema_hash() {
                bail!(
                    "model bundle was trained on schema {} but this build expects {}",
                    bundle.schema,
                    schema_hash()
                );
            }
            Some(bundle)
        }
        None => None,
    };

    let mut assessments: Vec<PrincipleAssessment> = Vec::with_capacity(ruleset.rules.len());
    for rule in &ruleset.rules {
        let mut assessment = assess(rule);
        if let Some(bundle) = &bundle {
            let fv = extract_features(rule);
            for p in HEURISTIC_PRINCIPLES {
                if let Some(m) = bundle.get(p) {
                    let probability = m.predict(&fv)?;
                    rulecheck_core::classifier::merge_assessment(
                        &mut assessment,
                        p,
                        probability,
                    );
                }
            }
        }
        assessments.push(assessment);
    }

    let summary = summarize(&assessments);
    save_json(&out, "assessments.json", &assessments, &mut manifest)?;
    let summary_text = save_json(&out, "summary.json", &summary, &mut manifest)?;
    manifest.write(&out)?;

    // Only firm verdicts on enabled rules gate the exit code; heuristic
    // findings and disabled rules are advisory.
    let gating: usize = assessments
        .iter()
        .filter(|a| !a.disabled)
        .map(|a| {
            a.verdicts()
                .filter(|(_, v)| !v.adheres && v.confidence == Confidence::Deterministic)
                .count()
        })
        .sum();

    match format {
        OutputFormat::Json => print!("{summary_text}"),
        OutputFormat::Text => {
            println!("assessed {} rules", summary.total_rules);
            for (name, breakdown) in &summary.per_principle {
                println!(
                    "  {:<28} {:>4} violations ({:.1}%)",
                    name,
                    breakdown.violations,
                    100.0 * breakdown.proportion
                );
            }
            println!("deterministic gate: {gating} violations in enabled rules");
        }
    }
    Ok(if gating > 0 { 2 } else { 0 })
}

pub fn cmd_features(
    rules: PathBuf,
    out: PathBuf,
    format: OutputFormat,
) -> anyhow::Result<u8> {
    prepare_out(&out)?;
    let mut manifest = RunManifest::new(
        "features",
        serde_json::json!({
            "rules": rules.display().to_string(),
            "schema": schema_hash(),
        }),
    );
    manifest.record_input(&rules)?;
    let ruleset = load_ruleset(&rules)?;

    #[derive(Serialize)]
    struct FeatureRow {
        sid: u32,
        rev: u32,
        vector: Vec<f64>,
    }
    let rows: Vec<FeatureRow> = ruleset
        .rules
        .iter()
        .map(|r| FeatureRow {
            sid: r.sid,
            rev: r.rev,
            vector: vectorize(&extract_features(r)).to_vec(),
        })
        .collect();

    let mut csv_text = String::from("sid,rev,");
    csv_text.push_str(&VECTOR_SCHEMA.join(","));
    csv_text.push('\n');
    for row in &rows {
        csv_text.push_str(&format!("{},{}", row.sid, row.rev));
        for v in &row.vector {
            csv_text.push(',');
            csv_text.push_str(&v.to_string());
        }
        csv_text.push('\n');
    }
    save_bytes(&out, "features.csv", csv_text.as_bytes(), &mut manifest)?;
    let json_text = save_json(&out, "features.json", &rows, &mut manifest)?;
    manifest.write(&out)?;

    match format {
        OutputFormat::Json => print!("{json_text}"),
        OutputFormat::Text => println!(
            "extracted {} feature vectors (dim {}, schema {})",
            rows.len(),
            VECTOR_SCHEMA.len(),
            schema_hash()
        ),
    }
    Ok(0)
}

pub fn cmd_train(
    rules: PathBuf,
    labels: PathBuf,
    seed: u64,
    grid: GridChoice,
    principle: Option<String>,
    out: PathBuf,
    format: OutputFormat,
) -> anyhow::Result<u8> {
    prepare_out(&out)?;
    let mut manifest = RunManifest::new(
        "train",
        serde_json::json!({
            "rules": rules.display().to_string(),
            "labels": labels.display().to_string(),
            "seed": seed,
            "grid": match grid { GridChoice::Full => "full", GridChoice::Quick => "quick" },
            "principle": principle,
            "schema": schema_hash(),
        }),
    );
    manifest.record_input(&rules)?;
    manifest.record_input(&labels)?;

    let ruleset = load_ruleset(&rules)?;
    let label_rows = {
        let file = fs::File::open(&labels)
            .with_context(|| format!("reading {}", labels.display()))?;
        read_labels_csv(BufReader::new(file))?
    };
    let data = join_labels(&ruleset.rules, &label_rows)?;

    let targets: Vec<Principle> = match principle.as_deref() {
        None | Some("heuristic") => HEURISTIC_PRINCIPLES.to_vec(),
        Some("all") => Principle::ALL.to_vec(),
        Some(name) => vec![Principle::from_name(name)
            .ok_or_else(|| anyhow::anyhow!("unknown principle {name:?}"))?],
    };
    let grid_points = match grid {
        GridChoice::Full => full_grid(),
        GridChoice::Quick => quick_grid(),
    };

    #[derive(Serialize)]
    struct TrainedEntry {
        principle: Principle,
        hyperparams: HyperParams,
        cv: CVReport,
    }
    let mut bundle = ModelBundle::new();
    let mut report = Vec::new();
    for p in targets {
        let (best, cv) = grid_search(&data, p, &grid_points, seed)?;
        let model = train(&data, p, &best, seed)?;
        bundle.insert(p, model);
        report.push(TrainedEntry { principle: p, hyperparams: best, cv });
    }

    save_json(&out, "model.json", &bundle, &mut manifest)?;
    let report_text = save_json(&out, "cv_report.json", &report, &mut manifest)?;
    manifest.write(&out)?;

    match format {
        OutputFormat::Json => print!("{report_text}"),
        OutputFormat::Text => {
            println!(
                "trained {} model(s) on {} labeled rules ({} grid points, seed {})",
                report.len(),
                data.len(),
                grid_points.len(),
                seed
            );
            for entry in &report {
                println!(
                    "  {:<28} wF1 {:.4} (precision {:.4}, recall {:.4}) eta {} depth {} lambda {} weight {}",
                    entry.principle.name(),
                    entry.cv.weighted_f1,
                    entry.cv.precision,
                    entry.cv.recall,
                    entry.hyperparams.eta,
                    entry.hyperparams.max_depth,
                    entry.hyperparams.lambda_l2,
                    entry.hyperparams.sample_weight_scaling,
                );
            }
        }
    }
    Ok(0)
}

struct WorkloadInputs {
    stats: Vec<RuleRevisionStats>,
    diagnostics: Vec<String>,
    alerts_in_window: usize,
    alerts_filtered: usize,
    incidents: usize,
}

fn compute_workload_from_files(
    alerts: &Path,
    incidents: &Path,
    revisions: &Path,
    window: &CollectionWindow,
    manifest: &mut RunManifest,
) -> anyhow::Result<WorkloadInputs> {
    manifest.record_input(alerts)?;
    manifest.record_input(incidents)?;
    manifest.record_input(revisions)?;

    let alert_file =
        fs::File::open(alerts).with_context(|| format!("reading {}", alerts.display()))?;
    let (all_alerts, mut diagnostics) = read_alerts_jsonl(BufReader::new(alert_file));
    let total = all_alerts.len();
    let kept = filter_to_window(all_alerts, window);
    let filtered = total - kept.len();
    if filtered > 0 {
        diagnostics.push(format!("{filtered} alerts fell outside the collection window"));
    }

    let incident_file =
        fs::File::open(incidents).with_context(|| format!("reading {}", incidents.display()))?;
    let incident_rows = read_incidents_csv(BufReader::new(incident_file))?;
    let revision_file =
        fs::File::open(revisions).with_context(|| format!("reading {}", revisions.display()))?;
    let revision_rows = read_revisions_csv(BufReader::new(revision_file))?;

    let derivation = derive_activity(&revision_rows, window)?;
    diagnostics.extend(derivation.diagnostics);
    let result = compute_workload(&derivation.activities, &kept, &incident_rows);
    diagnostics.extend(result.diagnostics);

    Ok(WorkloadInputs {
        stats: result.stats,
        diagnostics,
        alerts_in_window: kept.len(),
        alerts_filtered: filtered,
        incidents: incident_rows.len(),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_workload(
    alerts: PathBuf,
    incidents: PathBuf,
    revisions: PathBuf,
    rules: Option<PathBuf>,
    window_start: String,
    window_end: String,
    out: PathBuf,
    format: OutputFormat,
) -> anyhow::Result<u8> {
    prepare_out(&out)?;
    let window = parse_window(&window_start, &window_end)?;
    let mut manifest = RunManifest::new(
        "workload",
        serde_json::json!({
            "alerts": alerts.display().to_string(),
            "incidents": incidents.display().to_string(),
            "revisions": revisions.display().to_string(),
            "rules": rules.as_ref().map(|p| p.display().to_string()),
            "window_start": window_start,
            "window_end": window_end,
        }),
    );
    let inputs =
        compute_workload_from_files(&alerts, &incidents, &revisions, &window, &mut manifest)?;

    let mut stats_csv = Vec::new();
    write_stats_csv(&mut stats_csv, &inputs.stats)?;
    save_bytes(&out, "stats.csv", &stats_csv, &mut manifest)?;
    let stats_text = save_json(&out, "stats.json", &inputs.stats, &mut manifest)?;

    // The distribution covers revisions that actually fired; silent rules
    // would pile a meaningless spike at zero.
    let triggered: Vec<RuleRevisionStats> =
        inputs.stats.iter().filter(|s| s.alert_count > 0).cloned().collect();
    let mut ecdf_csv = Vec::new();
    let mut diagnostics = inputs.diagnostics;
    if triggered.is_empty() {
        write_ecdf_csv(&mut ecdf_csv, &[])?;
        diagnostics.push("no revision fired inside the window; ECDF is empty".to_string());
    } else {
        write_ecdf_csv(&mut ecdf_csv, &ecdf(&triggered)?)?;
    }
    save_bytes(&out, "ecdf.csv", &ecdf_csv, &mut manifest)?;

    let top = top_noise(&inputs.stats, 10);
    save_json(&out, "top_noise.json", &top, &mut manifest)?;

    if let Some(rules_path) = &rules {
        manifest.record_input(rules_path)?;
        let ruleset = load_ruleset(rules_path)?;
        let by_sid: BTreeMap<u32, String> = ruleset
            .rules
            .iter()
            .map(|r: &Rule| (r.sid, categorize_rule(r).to_string()))
            .collect();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for category in by_sid.values() {
            *counts.entry(category.clone()).or_default() += 1;
        }
        save_json(
            &out,
            "categories.json",
            &serde_json::json!({ "counts": counts, "by_sid": by_sid }),
            &mut manifest,
        )?;
    }

    save_json(&out, "diagnostics.json", &diagnostics, &mut manifest)?;
    manifest.write(&out)?;

    match format {
        OutputFormat::Json => print!("{stats_text}"),
        OutputFormat::Text => {
            println!(
                "{} alerts in window ({} filtered out), {} incidents, {} rule revisions",
                inputs.alerts_in_window,
                inputs.alerts_filtered,
                inputs.incidents,
                inputs.stats.len()
            );
            let fired = triggered.len();
            let quiet = triggered
                .iter()
                .filter(|s| s.unnecessary_workload_per_day < 1.0)
                .count();
            if fired > 0 {
                println!(
                    "{} revisions fired; {} of them ({:.0}%) stayed under one alert/day",
                    fired,
                    quiet,
                    100.0 * quiet as f64 / fired as f64
                );
            }
            for s in top.iter().take(3) {
                println!(
                    "  top noise: sid {} rev {} at {:.3} alerts/day ({} alerts, {} incidents)",
                    s.sid, s.rev, s.unnecessary_workload_per_day, s.alert_count, s.incident_count
                );
            }
            if !diagnostics.is_empty() {
                println!("{} diagnostics (see diagnostics.json)", diagnostics.len());
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_regress(
    labels: PathBuf,
    alerts: PathBuf,
    incidents: PathBuf,
    revisions: PathBuf,
    window_start: String,
    window_end: String,
    out: PathBuf,
    format: OutputFormat,
) -> anyhow::Result<u8> {
    prepare_out(&out)?;
    let window = parse_window(&window_start, &window_end)?;
    let mut manifest = RunManifest::new(
        "regress",
        serde_json::json!({
            "labels": labels.display().to_string(),
            "alerts": alerts.display().to_string(),
            "incidents": incidents.display().to_string(),
            "revisions": revisions.display().to_string(),
            "window_start": window_start,
            "window_end": window_end,
        }),
    );
    manifest.record_input(&labels)?;
    let inputs =
        compute_workload_from_files(&alerts, &incidents, &revisions, &window, &mut manifest)?;
    let mut diagnostics = inputs.diagnostics;

    let label_rows = {
        let file = fs::File::open(&labels)
            .with_context(|| format!("reading {}", labels.display()))?;
        read_labels_csv(BufReader::new(file))?
    };
    let workload_by_key: BTreeMap<(u32, u32), f64> = inputs
        .stats
        .iter()
        .map(|s| ((s.sid, s.rev), s.unnecessary_workload_per_day))
        .collect();

    let mut groups: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
    for row in &label_rows {
        match workload_by_key.get(&(row.sid, row.rev)) {
            Some(&response) => groups
                .entry(row.group.clone())
                .or_default()
                .push(Observation { labels: row.labels, response }),
            None => diagnostics.push(format!(
                "label row sid {} rev {} has no workload statistic; skipped",
                row.sid, row.rev
            )),
        }
    }

    let mut results: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let mut tables = String::new();
    for (group, observations) in &groups {
        match run_group_regression(observations) {
            Ok(report) => {
                tables.push_str(&format!("group {group} ({} observations)\n", report.n_obs));
                tables.push_str(&render_text(&report));
                tables.push('\n');
                results.insert(group.clone(), serde_json::to_value(&report)?);
            }
            Err(e) => {
                tables.push_str(&format!("group {group}: {e}\n\n"));
                results.insert(group.clone(), serde_json::json!({ "error": e.to_string() }));
            }
        }
    }

    let report_text = save_json(
        &out,
        "regression.json",
        &serde_json::json!({ "groups": results, "diagnostics": diagnostics }),
        &mut manifest,
    )?;
    save_bytes(&out, "regression.txt", tables.as_bytes(), &mut manifest)?;
    manifest.write(&out)?;

    match format {
        OutputFormat::Json => print!("{report_text}"),
        OutputFormat::Text => {
            print!("{tables}");
            if !diagnostics.is_empty() {
                println!("{} diagnostics (see regression.json)", diagnostics.len());
            }
        }
    }
    Ok(0)
}
