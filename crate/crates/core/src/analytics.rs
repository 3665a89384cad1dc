//! Alert-log analytics: revision activity periods, the unnecessary-workload
//! metric, ECDFs, rule categories, and top-noise reports.
//!
//! Workload per day for a rule revision is (alerts − detected incidents)
//! divided by the days the revision was active inside the collection window.
//! Inconsistent inputs (orphaned alerts, unattributable incidents, more
//! incidents than alerts) surface as diagnostics, never as crashes.

use crate::parser::Rule;
use chrono::{DateTime, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl CollectionWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<CollectionWindow, AnalyticsError> {
        if start > end {
            return Err(AnalyticsError::InvalidWindow { start, end });
        }
        Ok(CollectionWindow { start, end })
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }

    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlertRecord {
    pub timestamp: DateTime<Utc>,
    pub sid: u32,
    pub rev: u32,
    pub src_ip: String,
    pub dst_ip: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidentRecord {
    pub incident_id: String,
    pub date: NaiveDate,
    pub detecting_sids: Vec<u32>,
}

/// One row of the rule-revision metadata input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevisionRecord {
    pub sid: u32,
    pub rev: u32,
    pub updated_at: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevisionActivity {
    pub sid: u32,
    pub rev: u32,
    pub introduced: NaiveDate,
    pub terminated: NaiveDate,
    pub active_days: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleRevisionStats {
    pub sid: u32,
    pub rev: u32,
    pub alert_count: u64,
    pub incident_count: u64,
    pub active_days: i64,
    pub unnecessary_workload_per_day: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("collection window starts {start} after it ends {end}")]
    InvalidWindow { start: NaiveDate, end: NaiveDate },
    #[error("sid {sid}: revisions out of order near rev {rev} (revs must increase, dates must not decrease)")]
    OutOfOrderRevisions { sid: u32, rev: u32 },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

#[derive(Debug, Error)]
pub enum LogFormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityDerivation {
    pub activities: Vec<RevisionActivity>,
    /// Revisions that never overlap the window, with the reason.
    pub diagnostics: Vec<String>,
}

/// Derives each revision's activity span inside the window: a revision is
/// active from its update (clamped to the window start) until the day before
/// the next revision appears; the newest revision runs to the window end.
pub fn derive_activity(
    revisions: &[RevisionRecord],
    window: &CollectionWindow,
) -> Result<ActivityDerivation, AnalyticsError> {
    let mut by_sid: BTreeMap<u32, Vec<RevisionRecord>> = BTreeMap::new();
    for r in revisions {
        by_sid.entry(r.sid).or_default().push(*r);
    }

    let mut activities = Vec::new();
    let mut diagnostics = Vec::new();
    for (sid, revs) in &by_sid {
        for pair in revs.windows(2) {
            if pair[1].rev <= pair[0].rev || pair[1].updated_at < pair[0].updated_at {
                return Err(AnalyticsError::OutOfOrderRevisions { sid: *sid, rev: pair[1].rev });
            }
        }
        for (i, r) in revs.iter().enumerate() {
            let introduced = r.updated_at.max(window.start);
            let terminated = match revs.get(i + 1) {
                Some(next) => (next.updated_at - chrono::Days::new(1)).min(window.end),
                None => window.end,
            };
            if introduced > terminated {
                diagnostics.push(format!(
                    "sid {} rev {}: never active inside the window ({} .. {})",
                    r.sid, r.rev, window.start, window.end
                ));
                continue;
            }
            activities.push(RevisionActivity {
                sid: r.sid,
                rev: r.rev,
                introduced,
                terminated,
                active_days: (terminated - introduced).num_days() + 1,
            });
        }
    }
    Ok(ActivityDerivation { activities, diagnostics })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadResult {
    pub stats: Vec<RuleRevisionStats>,
    pub diagnostics: Vec<String>,
}

/// Counts alerts per (sid, rev), attributes incidents to the revision active
/// on the incident date, and computes workload per active day.
pub fn compute_workload(
    activities: &[RevisionActivity],
    alerts: &[AlertRecord],
    incidents: &[IncidentRecord],
) -> WorkloadResult {
    let mut index: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut spans: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, a) in activities.iter().enumerate() {
        index.insert((a.sid, a.rev), i);
        spans.entry(a.sid).or_default().push(i);
    }

    let mut alert_counts = vec![0u64; activities.len()];
    let mut orphans: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for alert in alerts {
        match index.get(&(alert.sid, alert.rev)) {
            Some(&i) => alert_counts[i] += 1,
            None => *orphans.entry((alert.sid, alert.rev)).or_default() += 1,
        }
    }

    let mut incident_counts = vec![0u64; activities.len()];
    let mut unattributed: Vec<String> = Vec::new();
    for incident in incidents {
        // A sid listed twice still detects the incident once.
        let mut seen = std::collections::BTreeSet::new();
        for &sid in &incident.detecting_sids {
            if !seen.insert(sid) {
                continue;
            }
            let hit = spans.get(&sid).and_then(|idxs| {
                idxs.iter().find(|&&i| {
                    activities[i].introduced <= incident.date
                        && incident.date <= activities[i].terminated
                })
            });
            match hit {
                Some(&i) => incident_counts[i] += 1,
                None => unattributed.push(format!(
                    "incident {} on {}: no active revision of sid {}",
                    incident.incident_id, incident.date, sid
                )),
            }
        }
    }

    let mut diagnostics: Vec<String> = orphans
        .iter()
        .map(|((sid, rev), n)| format!("{n} alerts for sid {sid} rev {rev} match no derived activity"))
        .collect();
    diagnostics.extend(unattributed);

    let mut stats = Vec::with_capacity(activities.len());
    for (i, a) in activities.iter().enumerate() {
        let (alert_count, incident_count) = (alert_counts[i], incident_counts[i]);
        let workload = if incident_count > alert_count {
            diagnostics.push(format!(
                "sid {} rev {}: {} incidents exceed {} alerts; workload clamped to 0",
                a.sid, a.rev, incident_count, alert_count
            ));
            0.0
        } else {
            (alert_count - incident_count) as f64 / a.active_days as f64
        };
        stats.push(RuleRevisionStats {
            sid: a.sid,
            rev: a.rev,
            alert_count,
            incident_count,
            active_days: a.active_days,
            unnecessary_workload_per_day: workload,
        });
    }
    stats.sort_by_key(|s| (s.sid, s.rev));
    WorkloadResult { stats, diagnostics }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcdfPoint {
    pub workload: f64,
    pub cumulative_fraction: f64,
    /// True when any revision at this workload value detected an incident.
    pub incident_marker: bool,
}

/// Empirical CDF over workloads, one point per distinct value.
pub fn ecdf(stats: &[RuleRevisionStats]) -> Result<Vec<EcdfPoint>, AnalyticsError> {
    if stats.is_empty() {
        return Err(AnalyticsError::EmptyInput("ecdf"));
    }
    let mut rows: Vec<(f64, bool)> = stats
        .iter()
        .map(|s| (s.unnecessary_workload_per_day, s.incident_count > 0))
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("workloads are finite"));

    let n = rows.len() as f64;
    let mut points: Vec<EcdfPoint> = Vec::new();
    for (i, (w, marker)) in rows.iter().enumerate() {
        match points.last_mut() {
            Some(last) if last.workload == *w => {
                last.cumulative_fraction = (i + 1) as f64 / n;
                last.incident_marker |= marker;
            }
            _ => points.push(EcdfPoint {
                workload: *w,
                cumulative_fraction: (i + 1) as f64 / n,
                incident_marker: *marker,
            }),
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleCategory {
    Dns,
    Ip,
    Threshold,
    Content,
    Other,
}

impl std::fmt::Display for RuleCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RuleCategory::Dns => "DNS",
            RuleCategory::Ip => "IP",
            RuleCategory::Threshold => "Threshold",
            RuleCategory::Content => "Content",
            RuleCategory::Other => "Other",
        };
        f.write_str(name)
    }
}

/// First matching category in a fixed priority order; the classes overlap
/// (a DNS rule may also throttle), so the order is part of the contract.
pub fn categorize_rule(rule: &Rule) -> RuleCategory {
    let dns = rule.protocol == "dns"
        || rule.src_port.mentions(53)
        || rule.dst_port.mentions(53)
        || rule
            .options
            .iter()
            .any(|o| o.buffer.as_deref().map_or(false, |b| b.starts_with("dns.")));
    if dns {
        return RuleCategory::Dns;
    }
    let has_positive_match = rule.positive_matches().next().is_some();
    if (rule.src_addr.has_literal() || rule.dst_addr.has_literal()) && !has_positive_match {
        return RuleCategory::Ip;
    }
    if rule.options.iter().any(|o| o.keyword == "threshold" || o.keyword == "detection_filter") {
        return RuleCategory::Threshold;
    }
    if has_positive_match {
        return RuleCategory::Content;
    }
    RuleCategory::Other
}

/// The `n` noisiest revisions: descending workload, ties by ascending sid
/// then rev.
pub fn top_noise(stats: &[RuleRevisionStats], n: usize) -> Vec<RuleRevisionStats> {
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| {
        b.unnecessary_workload_per_day
            .partial_cmp(&a.unnecessary_workload_per_day)
            .expect("workloads are finite")
            .then(a.sid.cmp(&b.sid))
            .then(a.rev.cmp(&b.rev))
    });
    sorted.truncate(n);
    sorted
}

#[derive(Debug, Serialize, Deserialize)]
struct EveLine {
    timestamp: String,
    alert: EveAlertBody,
    src_ip: String,
    dest_ip: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct EveAlertBody {
    signature_id: u32,
    rev: u32,
}

fn parse_eve_timestamp(text: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    // EVE logs commonly write offsets without a colon: +0200.
    DateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f%z")
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

/// Reads EVE-style JSON Lines. Malformed lines become diagnostics and are
/// skipped; the parse never aborts mid-stream.
pub fn read_alerts_jsonl<R: BufRead>(reader: R) -> (Vec<AlertRecord>, Vec<String>) {
    let mut alerts = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                diagnostics.push(format!("line {line_no}: unreadable: {e}"));
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Result<EveLine, _> = serde_json::from_str(&line);
        match parsed {
            Ok(eve) => match parse_eve_timestamp(&eve.timestamp) {
                Some(timestamp) => alerts.push(AlertRecord {
                    timestamp,
                    sid: eve.alert.signature_id,
                    rev: eve.alert.rev,
                    src_ip: eve.src_ip,
                    dst_ip: eve.dest_ip,
                }),
                None => diagnostics
                    .push(format!("line {line_no}: unparseable timestamp {:?}", eve.timestamp)),
            },
            Err(e) => diagnostics.push(format!("line {line_no}: {e}")),
        }
    }
    (alerts, diagnostics)
}

/// Keeps alerts whose UTC calendar day falls inside the window.
pub fn filter_to_window(alerts: Vec<AlertRecord>, window: &CollectionWindow) -> Vec<AlertRecord> {
    alerts.into_iter().filter(|a| window.contains(a.timestamp.date_naive())).collect()
}

pub fn write_alerts_jsonl<W: Write>(mut writer: W, alerts: &[AlertRecord]) -> std::io::Result<()> {
    for a in alerts {
        let eve = EveLine {
            timestamp: a.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
            alert: EveAlertBody { signature_id: a.sid, rev: a.rev },
            src_ip: a.src_ip.clone(),
            dest_ip: a.dst_ip.clone(),
        };
        serde_json::to_writer(&mut writer, &eve)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Incidents CSV: incident_id,date,sids with semicolon-separated sids.
pub fn read_incidents_csv<R: Read>(reader: R) -> Result<Vec<IncidentRecord>, LogFormatError> {
    let mut rdr = csv::Reader::from_reader(reader);
    expect_header(&mut rdr, &["incident_id", "date", "sids"])?;
    let mut incidents = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let incident_id = get(&record, 0, row, "incident_id")?.to_string();
        let date = parse_date(get(&record, 1, row, "date")?, row)?;
        let sids_field = get(&record, 2, row, "sids")?;
        let detecting_sids: Vec<u32> = sids_field
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim().parse().map_err(|_| LogFormatError::Malformed {
                    row,
                    message: format!("sid {s:?} is not an integer"),
                })
            })
            .collect::<Result<_, _>>()?;
        if detecting_sids.is_empty() {
            return Err(LogFormatError::Malformed { row, message: "empty sids list".to_string() });
        }
        incidents.push(IncidentRecord { incident_id, date, detecting_sids });
    }
    Ok(incidents)
}

pub fn write_incidents_csv<W: Write>(
    writer: W,
    incidents: &[IncidentRecord],
) -> Result<(), LogFormatError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["incident_id", "date", "sids"])?;
    for i in incidents {
        let sids =
            i.detecting_sids.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
        wtr.write_record([i.incident_id.as_str(), &i.date.to_string(), &sids])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Revisions CSV: sid,rev,updated_at.
pub fn read_revisions_csv<R: Read>(reader: R) -> Result<Vec<RevisionRecord>, LogFormatError> {
    let mut rdr = csv::Reader::from_reader(reader);
    expect_header(&mut rdr, &["sid", "rev", "updated_at"])?;
    let mut revisions = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2;
        revisions.push(RevisionRecord {
            sid: parse_int(get(&record, 0, row, "sid")?, row, "sid")?,
            rev: parse_int(get(&record, 1, row, "rev")?, row, "rev")?,
            updated_at: parse_date(get(&record, 2, row, "updated_at")?, row)?,
        });
    }
    Ok(revisions)
}

pub fn write_revisions_csv<W: Write>(
    writer: W,
    revisions: &[RevisionRecord],
) -> Result<(), LogFormatError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sid", "rev", "updated_at"])?;
    for r in revisions {
        wtr.write_record([&r.sid.to_string(), &r.rev.to_string(), &r.updated_at.to_string()])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_stats_csv<W: Write>(
    writer: W,
    stats: &[RuleRevisionStats],
) -> Result<(), LogFormatError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "sid",
        "rev",
        "alert_count",
        "incident_count",
        "active_days",
        "unnecessary_workload_per_day",
    ])?;
    for s in stats {
        wtr.write_record([
            &s.sid.to_string(),
            &s.rev.to_string(),
            &s.alert_count.to_string(),
            &s.incident_count.to_string(),
            &s.active_days.to_string(),
            &format_float(s.unnecessary_workload_per_day),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Stats CSV reader (the regression input path).
pub fn read_stats_csv<R: Read>(reader: R) -> Result<Vec<RuleRevisionStats>, LogFormatError> {
    let mut rdr = csv::Reader::from_reader(reader);
    expect_header(
        &mut rdr,
        &["sid", "rev", "alert_count", "incident_count", "active_days", "unnecessary_workload_per_day"],
    )?;
    let mut stats = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let workload_text = get(&record, 5, row, "unnecessary_workload_per_day")?;
        let unnecessary_workload_per_day =
            workload_text.trim().parse().map_err(|_| LogFormatError::Malformed {
                row,
                message: format!("workload {workload_text:?} is not a number"),
            })?;
        stats.push(RuleRevisionStats {
            sid: parse_int(get(&record, 0, row, "sid")?, row, "sid")?,
            rev: parse_int(get(&record, 1, row, "rev")?, row, "rev")?,
            alert_count: parse_int(get(&record, 2, row, "alert_count")?, row, "alert_count")?,
            incident_count: parse_int(
                get(&record, 3, row, "incident_count")?,
                row,
                "incident_count",
            )?,
            active_days: parse_int(get(&record, 4, row, "active_days")?, row, "active_days")?,
            unnecessary_workload_per_day,
        });
    }
    Ok(stats)
}

pub fn write_ecdf_csv<W: Write>(writer: W, points: &[EcdfPoint]) -> Result<(), LogFormatError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["workload", "cumulative_fraction", "incident_marker"])?;
    for p in points {
        wtr.write_record([
            format_float(p.workload).as_str(),
            format_float(p.cumulative_fraction).as_str(),
            if p.incident_marker { "1" } else { "0" },
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Display for f64 is the shortest decimal that reparses exactly, so rereads
/// are lossless.
fn format_float(x: f64) -> String {
    x.to_string()
}

fn expect_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<(), LogFormatError> {
    let headers = rdr.headers()?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(LogFormatError::Malformed {
            row: 1,
            message: format!("expected header {:?}, got {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn get<'a>(
    record: &'a csv::StringRecord,
    i: usize,
    row: usize,
    name: &str,
) -> Result<&'a str, LogFormatError> {
    record
        .get(i)
        .ok_or_else(|| LogFormatError::Malformed { row, message: format!("missing column {name}") })
}

fn parse_int<T: std::str::FromStr>(
    text: &str,
    row: usize,
    name: &str,
) -> Result<T, LogFormatError> {
    text.trim().parse().map_err(|_| LogFormatError::Malformed {
        row,
        message: format!("column {name} value {text:?} is not an integer"),
    })
}

fn parse_date(text: &str, row: usize) -> Result<NaiveDate, LogFormatError> {
    text.trim().parse().map_err(|_| LogFormatError::Malformed {
        row,
        message: format!("date {text:?} is not YYYY-MM-DD"),
    })
}

/// Deterministic synthetic log streams for demos and end-to-end runs.
pub mod synth {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Alert/incident/revision streams for the given (sid, rev) pairs:
    /// heavy-tailed alert volumes spread over each revision's activity span,
    /// with an incident attributed to roughly every tenth revision.
    pub fn generate_logs(
        keys: &[(u32, u32)],
        window: &CollectionWindow,
        seed: u64,
    ) -> (Vec<AlertRecord>, Vec<IncidentRecord>, Vec<RevisionRecord>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut by_sid: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &(sid, rev) in keys {
            by_sid.entry(sid).or_default().push(rev);
        }

        let mut revisions = Vec::new();
        for (sid, revs) in &mut by_sid {
            revs.sort_unstable();
            let gap = (window.days() / (revs.len() as i64 + 1)).max(1);
            for (i, &rev) in revs.iter().enumerate() {
                revisions.push(RevisionRecord {
                    sid: *sid,
                    rev,
                    updated_at: window.start + chrono::Days::new((i as i64 * gap) as u64),
                });
            }
        }

        let derivation = derive_activity(&revisions, window).expect("generated in order");
        let mut alerts = Vec::new();
        let mut incidents = Vec::new();
        for (i, a) in derivation.activities.iter().enumerate() {
            // log-uniform volume: many quiet revisions, a loud tail
            let volume = (rng.gen_range(0.0f64..6.0)).exp() as u64 % 400;
            for k in 0..volume {
                let day_offset = (k as i64 * a.active_days / volume.max(1) as i64)
                    .clamp(0, a.active_days - 1);
                let day = a.introduced + chrono::Days::new(day_offset as u64);
                let secs = rng.gen_range(0..86_400u32);
                let timestamp = Utc
                    .from_utc_datetime(&day.and_hms_opt(0, 0, 0).expect("midnight exists"))
                    + chrono::Duration::seconds(secs as i64);
                alerts.push(AlertRecord {
                    timestamp,
                    sid: a.sid,
                    rev: a.rev,
                    src_ip: format!("10.0.{}.{}", rng.gen_range(0..255), rng.gen_range(1..255)),
                    dst_ip: format!("192.0.2.{}", rng.gen_range(1..255)),
                });
            }
            if volume > 0 && i % 10 == 0 {
                let day = a.introduced
                    + chrono::Days::new(rng.gen_range(0..a.active_days.max(1)) as u64);
                incidents.push(IncidentRecord {
                    incident_id: format!("INC-{:04}", incidents.len() + 1),
                    date: day.min(a.terminated),
                    detecting_sids: vec![a.sid],
                });
            }
        }
        (alerts, incidents, revisions)
    }
}
