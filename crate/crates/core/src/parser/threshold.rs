//! `threshold` / `detection_filter` option values.

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdKind {
    Limit,
    Threshold,
    Both,
}

impl ThresholdKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdKind::Limit => "limit",
            ThresholdKind::Threshold => "threshold",
            ThresholdKind::Both => "both",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackBy {
    BySrc,
    ByDst,
    ByRule,
    ByBoth,
}

impl TrackBy {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackBy::BySrc => "by_src",
            TrackBy::ByDst => "by_dst",
            TrackBy::ByRule => "by_rule",
            TrackBy::ByBoth => "by_both",
        }
    }
}

impl fmt::Display for TrackBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThresholdSpec {
    #[serde(rename = "type")]
    pub kind: ThresholdKind,
    pub track: TrackBy,
    pub count: u32,
    pub seconds: u32,
}

/// Parses a `threshold` or `detection_filter` option value such as
/// `type both, track by_dst, count 12, seconds 120`. A missing `type` clause
/// (always the case for `detection_filter`) defaults to `threshold`.
pub fn parse_threshold(value: &str) -> Result<ThresholdSpec, String> {
    let mut kind = None;
    let mut track = None;
    let mut count = None;
    let mut seconds = None;

    for clause in value.split(',') {
        let clause = clause.trim();
        if clause.is_empty() {
            return Err("empty clause in threshold value".to_string());
        }
        let mut words = clause.split_whitespace();
        let key = words.next().unwrap();
        let arg = words.next().ok_or_else(|| format!("clause '{clause}' is missing its argument"))?;
        if words.next().is_some() {
            return Err(format!("clause '{clause}' has trailing tokens"));
        }
        match key {
            "type" => {
                let k = match arg {
                    "limit" => ThresholdKind::Limit,
                    "threshold" => ThresholdKind::Threshold,
                    "both" => ThresholdKind::Both,
                    other => return Err(format!("unknown threshold type '{other}'")),
                };
                if kind.replace(k).is_some() {
                    return Err("duplicate type clause".to_string());
                }
            }
            "track" => {
                let t = match arg {
                    "by_src" => TrackBy::BySrc,
                    "by_dst" => TrackBy::ByDst,
                    "by_rule" => TrackBy::ByRule,
                    "by_both" => TrackBy::ByBoth,
                    other => return Err(format!("unknown track target '{other}'")),
                };
                if track.replace(t).is_some() {
                    return Err("duplicate track clause".to_string());
                }
            }
            "count" => {
                let n: u32 = arg.parse().map_err(|_| format!("invalid count '{arg}'"))?;
                if n < 1 {
                    return Err("count must be >= 1".to_string());
                }
                if count.replace(n).is_some() {
                    return Err("duplicate count clause".to_string());
                }
            }
            "seconds" => {
                let n: u32 = arg.parse().map_err(|_| format!("invalid seconds '{arg}'"))?;
                if n < 1 {
                    return Err("seconds must be >= 1".to_string());
                }
                if seconds.replace(n).is_some() {
                    return Err("duplicate seconds clause".to_string());
                }
            }
            other => return Err(format!("unknown threshold clause '{other}'")),
        }
    }

    Ok(ThresholdSpec {
        kind: kind.unwrap_or(ThresholdKind::Threshold),
        track: track.ok_or("missing track clause")?,
        count: count.ok_or("missing count clause")?,
        seconds: seconds.ok_or("missing seconds clause")?,
    })
}
