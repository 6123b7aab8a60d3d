//! Pipeline orchestration, configuration, and report emission.
//!
//! [`run`] executes the whole analysis for one repository — walk,
//! snapshots, detectors, interval/trends, miner — and writes the outputs
//! selected by the configuration: `report.json` (the full report,
//! stable key order, LF line endings), `evolution.csv` (the per-commit
//! language series) and `itemsets.csv` (frequent change patterns).
//!
//! Reports contain no wall-clock data; two runs over the same repository
//! and configuration produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ast::UnifiedKind;
use crate::detect::{
    self, classify_app, compute_interval, compute_trends, file_migration_proportion, AppStatus,
    CommitScripts, Evidence, EvolutionTrend, MigrationClass, MigrationEvent, MigrationInterval,
    MigrationKind, ParseSkip, RecentBaselineMode, TrendError,
};
use crate::diff::DiffParams;
use crate::metrics::{snapshot_series, write_evolution_csv, GeneratedTestPolicy, LanguageSnapshot};
use crate::mine::{self, write_itemsets_csv, FrequentItemset, Transaction};
use crate::par::maybe_par_map;
use crate::ratio::Ratio;
use crate::repo::{open_repository, CommitRecord, RepoError};

pub const SCHEMA_VERSION: u32 = 1;

/// Which of the three detectors run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetectorSet {
    pub file: bool,
    pub method: bool,
    pub update_insert: bool,
}

impl Default for DetectorSet {
    fn default() -> Self {
        DetectorSet { file: true, method: true, update_insert: true }
    }
}

impl DetectorSet {
    pub fn any(&self) -> bool {
        self.file || self.method || self.update_insert
    }
}

/// Output formats to emit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { json: true, csv: true }
    }
}

/// Everything one analysis run needs.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub repo_path: PathBuf,
    pub branch: Option<String>,
    pub detectors: DetectorSet,
    pub exclude_generated_tests: bool,
    pub match_method_names: bool,
    pub min_support: Ratio,
    pub max_itemset_size: usize,
    pub recent_baseline_mode: RecentBaselineMode,
    pub output_dir: PathBuf,
    pub formats: Formats,
    pub diff: DiffParams,
    pub parallel: bool,
}

impl AnalysisConfig {
    pub fn new(repo_path: impl Into<PathBuf>) -> Self {
        AnalysisConfig {
            repo_path: repo_path.into(),
            branch: None,
            detectors: DetectorSet::default(),
            exclude_generated_tests: true,
            match_method_names: false,
            min_support: Ratio::new(4, 1000),
            max_itemset_size: 4,
            recent_baseline_mode: RecentBaselineMode::KotlinEra,
            output_dir: PathBuf::from("."),
            formats: Formats::default(),
            diff: DiffParams::default(),
            parallel: cfg!(feature = "parallel"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error("no detector enabled")]
    NoDetectorEnabled,
    #[error("cannot write output to {path}: {source}")]
    UnwritableOutput { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit code: errors are machine-distinguishable.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Repo(RepoError::NotARepository { .. }) => 2,
            RunError::UnwritableOutput { .. } => 3,
            _ => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RunError::Repo(RepoError::NotARepository { .. }) => "not_a_repository",
            RunError::Repo(RepoError::UnknownBranch { .. }) => "unknown_branch",
            RunError::Repo(_) => "repository_error",
            RunError::NoDetectorEnabled => "no_detector_enabled",
            RunError::UnwritableOutput { .. } => "unwritable_output",
        }
    }
}

/// Echo of the effective configuration, embedded in the report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub repo_path: String,
    pub branch: Option<String>,
    pub detectors: DetectorSet,
    pub exclude_generated_tests: bool,
    pub match_method_names: bool,
    pub min_support: Ratio,
    pub max_itemset_size: usize,
    pub recent_baseline_mode: RecentBaselineMode,
    pub merge_handling: &'static str,
    pub diff: DiffParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommitReport {
    pub order_index: usize,
    pub id: String,
    pub parent_ids: Vec<String>,
    pub timestamp: i64,
    pub author_name: String,
    pub author_email: String,
    pub message: String,
    pub snapshot: LanguageSnapshot,
    pub events: Vec<MigrationEvent>,
    pub transaction_items: Vec<String>,
    pub parse_skips: Vec<ParseSkip>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuthorReport {
    pub author_name: String,
    pub author_email: String,
    pub event_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub total_commits: usize,
    pub app_status: AppStatus,
    pub migration_interval: Option<MigrationInterval>,
    pub migration_class: Option<MigrationClass>,
    pub file_migration_proportion: Option<Ratio>,
    pub trends: Vec<EvolutionTrend>,
    pub trends_unavailable: Option<String>,
    pub migration_authors: Vec<AuthorReport>,
    pub event_counts: EventCounts,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EventCounts {
    pub file_level: usize,
    pub method_level: usize,
    pub update_insert: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ConfigEcho,
    pub commits: Vec<CommitReport>,
    pub summary: Summary,
    pub frequent_itemsets: Vec<FrequentItemset>,
}

/// Counts events per distinct `(name, email)` author over commits with at
/// least one migration event, most active first, ties by name then email.
pub fn list_migration_authors(
    commits: &[CommitRecord],
    events_per_commit: &[Vec<MigrationEvent>],
) -> Vec<AuthorReport> {
    let mut counts: std::collections::BTreeMap<(String, String), usize> = std::collections::BTreeMap::new();
    for (commit, events) in commits.iter().zip(events_per_commit) {
        if events.is_empty() {
            continue;
        }
        *counts
            .entry((commit.author_name.clone(), commit.author_email.clone()))
            .or_insert(0) += events.len();
    }
    let mut rows: Vec<AuthorReport> = counts
        .into_iter()
        .map(|((author_name, author_email), event_count)| AuthorReport {
            author_name,
            author_email,
            event_count,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.event_count
            .cmp(&a.event_count)
            .then_with(|| a.author_name.cmp(&b.author_name))
            .then_with(|| a.author_email.cmp(&b.author_email))
    });
    rows
}

/// Runs the full pipeline and writes the selected outputs into
/// `config.output_dir`.
pub fn run(config: &AnalysisConfig) -> Result<AnalysisReport, RunError> {
    if !config.detectors.any() {
        return Err(RunError::NoDetectorEnabled);
    }
    let handle = open_repository(&config.repo_path)?.with_branch(config.branch.clone());
    let commits = handle.walk_history()?;

    let policy = if config.exclude_generated_tests {
        GeneratedTestPolicy::default()
    } else {
        GeneratedTestPolicy::disabled()
    };
    let snapshots = snapshot_series(&commits, &policy)?;

    // Per-commit analysis: detectors plus the miner's transaction, sharing
    // one set of AST diffs per commit.
    struct PerCommit {
        events: Vec<MigrationEvent>,
        transaction: Option<Transaction>,
        skips: Vec<ParseSkip>,
    }
    let per_commit: Vec<PerCommit> = maybe_par_map(config.parallel, &commits, |commit| {
        // The miner wants the scripts even when both script-based detectors
        // are off, so they are always computed.
        let scripts = CommitScripts::compute(commit, &config.diff);
        let mut events = Vec::new();
        if config.detectors.file {
            events.extend(detect::detect_file_migration(commit));
        }
        if config.detectors.method {
            events.extend(detect::detect_method_migration_with(
                commit,
                &scripts,
                config.match_method_names,
            ));
        }
        if config.detectors.update_insert {
            events.extend(detect::detect_update_insert_migration_with(commit, &scripts));
        }
        let transaction = mine::transaction_from_scripts(commit, &scripts);
        PerCommit { events, transaction, skips: scripts.skips }
    });

    let events_per_commit: Vec<Vec<MigrationEvent>> =
        per_commit.iter().map(|p| p.events.clone()).collect();
    let all_events: Vec<MigrationEvent> = events_per_commit.iter().flatten().cloned().collect();
    let transactions: Vec<Transaction> =
        per_commit.iter().filter_map(|p| p.transaction.clone()).collect();

    let app_status = classify_app(&snapshots);
    let interval = compute_interval(&snapshots);
    let migration_class = interval.map(|i| MigrationClass::from_length(i.length));
    let proportion = interval.and_then(|i| file_migration_proportion(&all_events, &i).ok());
    let (trends, trends_unavailable) = match compute_trends(&snapshots, config.recent_baseline_mode)
    {
        Ok(trends) => (trends, None),
        Err(e @ TrendError::NoKotlinCommit) | Err(e @ TrendError::DegenerateHistory) => {
            (Vec::new(), Some(e.to_string()))
        }
    };
    let migration_authors = list_migration_authors(&commits, &events_per_commit);
    let mut event_counts = EventCounts::default();
    for event in &all_events {
        match event.kind {
            MigrationKind::FileLevel => event_counts.file_level += 1,
            MigrationKind::MethodLevel => event_counts.method_level += 1,
            MigrationKind::UpdateInsert => event_counts.update_insert += 1,
        }
    }

    let frequent_itemsets = mine::apriori(
        &transactions,
        config.min_support,
        config.max_itemset_size,
        config.parallel,
    );

    let commit_reports: Vec<CommitReport> = commits
        .iter()
        .zip(per_commit)
        .zip(&snapshots)
        .map(|((commit, per), snapshot)| CommitReport {
            order_index: commit.order_index,
            id: commit.id.clone(),
            parent_ids: commit.parent_ids.clone(),
            timestamp: commit.timestamp,
            author_name: commit.author_name.clone(),
            author_email: commit.author_email.clone(),
            message: commit.message.clone(),
            snapshot: snapshot.clone(),
            events: per.events,
            transaction_items: per
                .transaction
                .map(|t| t.items.iter().map(|i| i.to_string()).collect())
                .unwrap_or_default(),
            parse_skips: per.skips,
        })
        .collect();

    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: ConfigEcho {
            repo_path: config.repo_path.display().to_string(),
            branch: config.branch.clone(),
            detectors: config.detectors,
            exclude_generated_tests: config.exclude_generated_tests,
            match_method_names: config.match_method_names,
            min_support: config.min_support,
            max_itemset_size: config.max_itemset_size,
            recent_baseline_mode: config.recent_baseline_mode,
            merge_handling: "first_parent",
            diff: config.diff,
        },
        commits: commit_reports,
        summary: Summary {
            total_commits: commits.len(),
            app_status,
            migration_interval: interval,
            migration_class,
            file_migration_proportion: proportion,
            trends,
            trends_unavailable,
            migration_authors,
            event_counts,
        },
        frequent_itemsets,
    };

    write_outputs(config, &report)?;
    Ok(report)
}

/// Renders the report as pretty JSON (UTF-8, LF, fixed key order) with a
/// trailing newline.
pub fn report_json(report: &AnalysisReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

fn write_outputs(config: &AnalysisConfig, report: &AnalysisReport) -> Result<(), RunError> {
    let dir = &config.output_dir;
    let wrap = |source: std::io::Error, path: &Path| RunError::UnwritableOutput {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| wrap(e, dir))?;
    if config.formats.json {
        let path = dir.join("report.json");
        let mut file = fs::File::create(&path).map_err(|e| wrap(e, &path))?;
        file.write_all(report_json(report).as_bytes())
            .map_err(|e| wrap(e, &path))?;
    }
    if config.formats.csv {
        let snapshots: Vec<LanguageSnapshot> =
            report.commits.iter().map(|c| c.snapshot.clone()).collect();
        let path = dir.join("evolution.csv");
        let file = fs::File::create(&path).map_err(|e| wrap(e, &path))?;
        write_evolution_csv(&snapshots, file).map_err(|e| csv_io(e, &path))?;
        let path = dir.join("itemsets.csv");
        let file = fs::File::create(&path).map_err(|e| wrap(e, &path))?;
        write_itemsets_csv(&report.frequent_itemsets, file).map_err(|e| csv_io(e, &path))?;
    }
    Ok(())
}

fn csv_io(e: csv::Error, path: &Path) -> RunError {
    RunError::UnwritableOutput {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Events cross-reference check used by the test suites: every event in the
/// summary must point at an existing commit record.
pub fn events_cross_reference(report: &AnalysisReport) -> bool {
    report.commits.iter().enumerate().all(|(i, c)| c.order_index == i)
        && report.commits.iter().all(|c| {
            c.events
                .iter()
                .all(|e| e.commit_index == c.order_index && e.commit_id == c.id)
        })
}

/// Which unified kinds may appear in items. Kept public so fixtures can
/// sanity-check their vocabulary coverage.
pub fn item_vocabulary_seed() -> Vec<UnifiedKind> {
    vec![
        UnifiedKind::Invocation,
        UnifiedKind::Method,
        UnifiedKind::Property,
        UnifiedKind::LocalVariable,
        UnifiedKind::If,
        UnifiedKind::Assignment,
    ]
}
