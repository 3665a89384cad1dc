//! Static analysis toolkit for Suricata IDS rulesets.
//!
//! The pipeline: parse rules ([`parser`]), extract structural feature vectors
//! ([`features`]), check rules against six design principles ([`checkers`]),
//! train gradient-boosted classifiers on labeled rules ([`classifier`]),
//! compute per-rule alert workload from SOC telemetry ([`analytics`]), and
//! relate principle adherence to workload with robust regression ([`stats`]).

pub mod analytics;
pub mod checkers;
pub mod classifier;
pub mod corpus;
pub mod features;
pub mod parser;
pub mod principles;
pub mod stats;
