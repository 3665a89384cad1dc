//! rulecheck: static analysis, adherence models, and alert-log analytics
//! for Suricata rulesets.
//!
//! Exit codes: 0 on success, 1 on operational errors (unreadable inputs,
//! malformed files), 2 when `lint` finds deterministic principle violations
//! in enabled rules. `RULECHECK_THREADS` caps worker threads; results do
//! not depend on the thread count.

mod commands;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rulecheck", version, about = "Static analysis and alert analytics for Suricata rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridChoice {
    /// Full 3024-point sweep; slow, for offline tuning runs.
    Full,
    /// 27-point sweep over the axes that matter most; CI-friendly.
    Quick,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Echo the primary artifact as JSON on stdout.
    Json,
    /// Short human summary on stdout (default).
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a ruleset, emit the normalized AST and parse diagnostics.
    Parse {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Assess every rule against the six design principles.
    Lint {
        #[arg(long)]
        rules: PathBuf,
        /// Trained model bundle; overrides heuristic verdicts when present.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Extract the numeric feature vector of every rule.
    Features {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Grid-search hyperparameters and train adherence models.
    Train {
        #[arg(long)]
        rules: PathBuf,
        /// Ground-truth labels CSV (sid,rev,group + one column per principle).
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GridChoice::Quick)]
        grid: GridChoice,
        /// Principle name, `heuristic` (default) or `all`.
        #[arg(long)]
        principle: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Per-revision workload statistics from EVE alerts and incident logs.
    Workload {
        /// EVE-style alert log, one JSON object per line.
        #[arg(long)]
        alerts: PathBuf,
        /// Incidents CSV: incident_id,date,sids (sids separated by `;`).
        #[arg(long)]
        incidents: PathBuf,
        /// Revision metadata CSV: sid,rev,updated_at.
        #[arg(long)]
        revisions: PathBuf,
        /// Optional ruleset for per-category breakdowns.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        window_start: String,
        #[arg(long)]
        window_end: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Robust regression of group workload on principle adherence.
    Regress {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        alerts: PathBuf,
        #[arg(long)]
        incidents: PathBuf,
        #[arg(long)]
        revisions: PathBuf,
        #[arg(long)]
        window_start: String,
        #[arg(long)]
        window_end: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("RULECHECK_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Parse { rules, out, format } => commands::cmd_parse(rules, out, format),
        Command::Lint { rules, model, out, format } => {
            commands::cmd_lint(rules, model, out, format)
        }
        Command::Features { rules, out, format } => commands::cmd_features(rules, out, format),
        Command::Train { rules, labels, seed, grid, principle, out, format } => {
            commands::cmd_train(rules, labels, seed, grid, principle, out, format)
        }
        Command::Workload {
            alerts,
            incidents,
            revisions,
            rules,
            window_start,
            window_end,
            out,
            format,
        } => commands::cmd_workload(
            alerts,
            incidents,
            revisions,
            rules,
            window_start,
            window_end,
            out,
            format,
        ),
        Command::Regress {
            labels,
            alerts,
            incidents,
            revisions,
            window_start,
            window_end,
            out,
            format,
        } => commands::cmd_regress(
            labels,
            alerts,
            incidents,
            revisions,
            window_start,
            window_end,
            out,
            format,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
