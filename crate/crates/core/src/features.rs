//! Structural feature extraction for rules: option usage counts, negation
//! count, header group flags, throttling shape, and flow direction.

use crate::parser::{parse_threshold, AddressSpec, Rule, ThresholdKind};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Option keywords whose occurrences are counted, in vector order. Modifier
/// occurrences (depth, startswith) count the same as top-level options.
pub const COUNTED_OPTIONS: [&str; 8] =
    ["content", "depth", "http.uri", "http.method", "urilen", "startswith", "pcre", "bsize"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GroupFlags {
    pub home_net: bool,
    pub http_servers: bool,
    pub external_net: bool,
    pub any: bool,
}

impl GroupFlags {
    fn from_spec(spec: &AddressSpec) -> GroupFlags {
        fn walk(spec: &AddressSpec, out: &mut GroupFlags) {
            match spec {
                AddressSpec::Any => out.any = true,
                AddressSpec::Var(name) => match name.as_str() {
                    "HOME_NET" => out.home_net = true,
                    "HTTP_SERVERS" => out.http_servers = true,
                    "EXTERNAL_NET" => out.external_net = true,
                    _ => {}
                },
                AddressSpec::Literal(_) => {}
                AddressSpec::Negated(inner) => walk(inner, out),
                AddressSpec::Group(items) => items.iter().for_each(|i| walk(i, out)),
            }
        }
        let mut out = GroupFlags::default();
        walk(spec, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdType {
    None,
    Limit,
    Threshold,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Occurrence counts aligned with [`COUNTED_OPTIONS`].
    pub counts: [u32; 8],
    pub negated_match_count: u32,
    pub src_group_flags: GroupFlags,
    pub dst_group_flags: GroupFlags,
    pub threshold_type: ThresholdType,
    /// 0 exactly when `threshold_type` is `None`.
    pub threshold_count: u32,
    pub flow_to_server: bool,
    pub flow_to_client: bool,
}

impl FeatureVector {
    pub fn count(&self, option: &str) -> u32 {
        COUNTED_OPTIONS
            .iter()
            .position(|o| *o == option)
            .map(|i| self.counts[i])
            .unwrap_or(0)
    }
}

/// Names of the vectorized dimensions, aligned with [`vectorize`].
/// Width of the numeric feature vector.
pub const VECTOR_DIM: usize = 24;

pub const VECTOR_SCHEMA: [&str; VECTOR_DIM] = [
    "content",
    "depth",
    "http.uri",
    "http.method",
    "urilen",
    "startswith",
    "pcre",
    "bsize",
    "negated_match_count",
    "src_home_net",
    "src_http_servers",
    "src_external_net",
    "src_any",
    "dst_home_net",
    "dst_http_servers",
    "dst_external_net",
    "dst_any",
    "threshold_none",
    "threshold_limit",
    "threshold_threshold",
    "threshold_both",
    "threshold_count",
    "flow_to_server",
    "flow_to_client",
];

/// Counts option usage and derives header flags. Pure: equal rules give
/// equal vectors.
pub fn extract_features(rule: &Rule) -> FeatureVector {
    let mut counts = [0u32; 8];
    let mut bump = |keyword: &str| {
        if let Some(i) = COUNTED_OPTIONS.iter().position(|o| *o == keyword) {
            counts[i] += 1;
        }
    };
    for opt in &rule.options {
        bump(&opt.keyword);
        for m in &opt.modifiers {
            bump(&m.keyword);
        }
    }

    let (threshold_type, threshold_count) = rule
        .options
        .iter()
        .find(|o| o.keyword == "threshold" || o.keyword == "detection_filter")
        .and_then(|o| o.value_text())
        .and_then(|v| parse_threshold(v).ok())
        .map(|t| {
            let kind = match t.kind {
                ThresholdKind::Limit => ThresholdType::Limit,
                ThresholdKind::Threshold => ThresholdType::Threshold,
                ThresholdKind::Both => ThresholdType::Both,
            };
            (kind, t.count)
        })
        .unwrap_or((ThresholdType::None, 0));

    let flow = rule.flow_tokens();
    let flow_to_server = flow.iter().any(|t| t == "to_server" || t == "from_client");
    let flow_to_client = flow.iter().any(|t| t == "to_client" || t == "from_server");

    FeatureVector {
        counts,
        negated_match_count: rule.negated_match_count() as u32,
        src_group_flags: GroupFlags::from_spec(&rule.src_addr),
        dst_group_flags: GroupFlags::from_spec(&rule.dst_addr),
        threshold_type,
        threshold_count,
        flow_to_server,
        flow_to_client,
    }
}

/// Fixed 24-dimensional numeric layout documented by [`VECTOR_SCHEMA`]:
/// the eight option counts, negation count, 2×4 header group flags,
/// threshold type one-hot, threshold count, and the two flow flags.
pub fn vectorize(fv: &FeatureVector) -> [f64; VECTOR_DIM] {
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    let mut v = [0.0; VECTOR_DIM];
    for (i, c) in fv.counts.iter().enumerate() {
        v[i] = *c as f64;
    }
    v[8] = fv.negated_match_count as f64;
    v[9] = b(fv.src_group_flags.home_net);
    v[10] = b(fv.src_group_flags.http_servers);
    v[11] = b(fv.src_group_flags.external_net);
    v[12] = b(fv.src_group_flags.any);
    v[13] = b(fv.dst_group_flags.home_net);
    v[14] = b(fv.dst_group_flags.http_servers);
    v[15] = b(fv.dst_group_flags.external_net);
    v[16] = b(fv.dst_group_flags.any);
    v[17] = b(fv.threshold_type == ThresholdType::None);
    v[18] = b(fv.threshold_type == ThresholdType::Limit);
    v[19] = b(fv.threshold_type == ThresholdType::Threshold);
    v[20] = b(fv.threshold_type == ThresholdType::Both);
    v[21] = fv.threshold_count as f64;
    v[22] = b(fv.flow_to_server);
    v[23] = b(fv.flow_to_client);
    v
}

/// Hex digest of the vector schema; stored in trained models so stale models
/// cannot be applied to differently shaped vectors.
pub fn schema_hash() -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for name in VECTOR_SCHEMA {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON Lines row: `{"sid": .., "rev": .., "<feature>": ..}` with features in
/// schema order.
pub struct FeatureRow<'a> {
    pub sid: u32,
    pub rev: u32,
    pub features: &'a FeatureVector,
}

impl Serialize for FeatureRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = vectorize(self.features);
        let mut m = s.serialize_map(Some(2 + v.len()))?;
        m.serialize_entry("sid", &self.sid)?;
        m.serialize_entry("rev", &self.rev)?;
        for (name, x) in VECTOR_SCHEMA.iter().zip(v.iter()) {
            if x.fract() == 0.0 {
                m.serialize_entry(name, &(*x as i64))?;
            } else {
                m.serialize_entry(name, x)?;
            }
        }
        m.end()
    }
}
