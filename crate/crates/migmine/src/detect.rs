//! Migration-commit detection and app-level characterization.
//!
//! Three per-commit detectors run independently (one commit can emit events
//! of several kinds):
//!
//! - **file-level** — a removed `.java` file paired with an added Kotlin
//!   file of the same basename (extension aside);
//! - **method-level** — a commit that modifies files of both languages,
//!   deleting a method from a Java file while inserting a function into a
//!   Kotlin file (method names are not matched unless asked to);
//! - **update-insert** — a commit that deletes a method from a modified
//!   Java file while adding a brand-new Kotlin file.
//!
//! On top of the per-commit events, this module derives the app-level
//! measures: status classification, the migration interval with its
//! one-step/staggered/anomalous class, the proportion of interval commits
//! that migrate files, and the evolution trends against the first-Kotlin
//! and "recent" baselines.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::ast::{self, AstTree, UnifiedKind};
use crate::diff::{tree_diff, DiffParams, EditAction, EditOp, EditScript};
use crate::lang::{detect_language, Language};
use crate::metrics::LanguageSnapshot;
use crate::ratio::Ratio;
use crate::repo::{CommitRecord, FileChange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MigrationKind {
    FileLevel,
    MethodLevel,
    UpdateInsert,
}

/// Supporting evidence for a migration event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Evidence {
    /// File-level: the shared basename (without extension).
    Basename { basename: String },
    /// Method-level / update-insert: the method names involved.
    Methods {
        deleted_java_methods: Vec<String>,
        inserted_kotlin_methods: Vec<String>,
    },
}

/// One detected migration commit, with the files and evidence behind it.
#[derive(Debug, Clone, Serialize)]
pub struct MigrationEvent {
    pub commit_index: usize,
    pub commit_id: String,
    pub kind: MigrationKind,
    pub java_paths: Vec<String>,
    pub kotlin_paths: Vec<String>,
    pub evidence: Evidence,
}

/// A modified source file's parsed versions and edit script.
pub struct FileDiff {
    pub path: String,
    pub language: Language,
    pub old_tree: AstTree,
    pub new_tree: AstTree,
    pub script: EditScript,
}

/// A file whose content could not be analyzed (binary or undecodable).
#[derive(Debug, Clone, Serialize)]
pub struct ParseSkip {
    pub path: String,
    pub reason: String,
}

/// Edit scripts of the Java/Kotlin files modified by one commit, computed
/// once and shared by the method/update-insert detectors and the pattern
/// miner.
pub struct CommitScripts {
    pub diffs: Vec<FileDiff>,
    pub skips: Vec<ParseSkip>,
}

impl CommitScripts {
    /// Diffs every modified Java/Kotlin file of the commit against its
    /// previous version. Undecodable versions are skipped and recorded.
    pub fn compute(commit: &CommitRecord, params: &DiffParams) -> Self {
        let mut diffs = Vec::new();
        let mut skips = Vec::new();
        for change in &commit.changes {
            let FileChange::Modified { path, old, new } = change else {
                continue;
            };
            let language = detect_language(path);
            if language == Language::Other {
                continue;
            }
            let old_bytes = match old.read() {
                Ok(b) => b,
                Err(e) => {
                    skips.push(ParseSkip { path: path.clone(), reason: e.to_string() });
                    continue;
                }
            };
            let new_bytes = match new.read() {
                Ok(b) => b,
                Err(e) => {
                    skips.push(ParseSkip { path: path.clone(), reason: e.to_string() });
                    continue;
                }
            };
            let (old_tree, new_tree) = match (
                ast::parse_bytes(&old_bytes, language),
                ast::parse_bytes(&new_bytes, language),
            ) {
                (Ok(o), Ok(n)) => (o, n),
                _ => {
                    skips.push(ParseSkip {
                        path: path.clone(),
                        reason: "content is not decodable text".to_string(),
                    });
                    continue;
                }
            };
            let script = tree_diff(&old_tree, &new_tree, params);
            diffs.push(FileDiff { path: path.clone(), language, old_tree, new_tree, script });
        }
        CommitScripts { diffs, skips }
    }

    fn modified_languages(&self) -> (bool, bool) {
        let java = self.diffs.iter().any(|d| d.language == Language::Java);
        let kotlin = self.diffs.iter().any(|d| d.language == Language::Kotlin);
        (java, kotlin)
    }
}

/// Actions collapsed to the topmost inserted/deleted node: an action
/// survives unless it inserts (deletes) a node whose parent is also
/// inserted (deleted). Updates and moves pass through.
pub fn collapsed_actions<'s>(diff: &'s FileDiff) -> impl Iterator<Item = &'s EditAction> + 's {
    let inserted: BTreeSet<_> = diff
        .script
        .iter()
        .filter(|a| a.op() == EditOp::Insert)
        .filter_map(|a| a.new_id())
        .collect();
    let deleted: BTreeSet<_> = diff
        .script
        .iter()
        .filter(|a| a.op() == EditOp::Delete)
        .filter_map(|a| a.old_id())
        .collect();
    diff.script.iter().filter(move |a| match a.op() {
        EditOp::Insert => {
            let id = a.new_id().expect("inserts have a new id");
            match diff.new_tree.parent(id) {
                Some(p) => !inserted.contains(&p),
                None => true,
            }
        }
        EditOp::Delete => {
            let id = a.old_id().expect("deletes have an old id");
            match diff.old_tree.parent(id) {
                Some(p) => !deleted.contains(&p),
                None => true,
            }
        }
        _ => true,
    })
}

fn method_name(action: &EditAction) -> String {
    action.value().unwrap_or("constructor").to_string()
}

/// Topmost deleted methods of a Java file diff.
fn deleted_methods(diff: &FileDiff) -> Vec<String> {
    collapsed_actions(diff)
        .filter(|a| a.op() == EditOp::Delete && a.kind() == UnifiedKind::Method)
        .map(method_name)
        .collect()
}

/// Topmost inserted methods of a Kotlin file diff.
fn inserted_methods(diff: &FileDiff) -> Vec<String> {
    collapsed_actions(diff)
        .filter(|a| a.op() == EditOp::Insert && a.kind() == UnifiedKind::Method)
        .map(method_name)
        .collect()
}

fn basename(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

fn stem(path: &str) -> &str {
    let base = basename(path);
    base.rsplit_once('.').map(|(s, _)| s).unwrap_or(base)
}

fn dir_of(path: &str) -> &str {
    path.rsplit_once('/').map(|(d, _)| d).unwrap_or("")
}

/// File-level detector: pairs removed Java files with added Kotlin files
/// sharing a basename. Pairing is directory-insensitive, but same-directory
/// pairs win first; remaining ambiguity resolves in lexicographic path
/// order. Each file joins at most one pair.
pub fn detect_file_migration(commit: &CommitRecord) -> Vec<MigrationEvent> {
    let mut removed_java: Vec<&str> = Vec::new();
    let mut added_kotlin: Vec<&str> = Vec::new();
    for change in &commit.changes {
        match change {
            FileChange::Removed { path, .. } if detect_language(path) == Language::Java => {
                removed_java.push(path);
            }
            FileChange::Added { path, .. } if detect_language(path) == Language::Kotlin => {
                added_kotlin.push(path);
            }
            _ => {}
        }
    }
    removed_java.sort_unstable();
    added_kotlin.sort_unstable();

    let mut used_added = vec![false; added_kotlin.len()];
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    // Same-directory pairs take precedence globally, then the leftovers
    // match in lexicographic order.
    for same_dir_pass in [true, false] {
        for &java in &removed_java {
            if pairs.iter().any(|&(j, _)| j == java) {
                continue;
            }
            let slot = added_kotlin
                .iter()
                .enumerate()
                .filter(|&(i, k)| {
                    !used_added[i]
                        && stem(k) == stem(java)
                        && (!same_dir_pass || dir_of(k) == dir_of(java))
                })
                .map(|(i, _)| i)
                .next();
            if let Some(i) = slot {
                used_added[i] = true;
                pairs.push((java, added_kotlin[i]));
            }
        }
    }
    pairs.sort_unstable();
    pairs
        .into_iter()
        .map(|(java, kotlin)| MigrationEvent {
            commit_index: commit.order_index,
            commit_id: commit.id.clone(),
            kind: MigrationKind::FileLevel,
            java_paths: vec![java.to_string()],
            kotlin_paths: vec![kotlin.to_string()],
            evidence: Evidence::Basename { basename: stem(java).to_string() },
        })
        .collect()
}

/// Method-level detector over precomputed scripts: at least one modified
/// Java file deletes a method and at least one modified Kotlin file inserts
/// one. With `match_names`, some deleted and inserted name must coincide.
pub fn detect_method_migration_with(
    commit: &CommitRecord,
    scripts: &CommitScripts,
    match_names: bool,
) -> Vec<MigrationEvent> {
    let (java_modified, kotlin_modified) = scripts.modified_languages();
    if !java_modified || !kotlin_modified {
        return Vec::new();
    }
    let mut java_paths = Vec::new();
    let mut deleted: Vec<String> = Vec::new();
    let mut kotlin_paths = Vec::new();
    let mut inserted: Vec<String> = Vec::new();
    for diff in &scripts.diffs {
        match diff.language {
            Language::Java => {
                let names = deleted_methods(diff);
                if !names.is_empty() {
                    java_paths.push(diff.path.clone());
                    deleted.extend(names);
                }
            }
            Language::Kotlin => {
                let names = inserted_methods(diff);
                if !names.is_empty() {
                    kotlin_paths.push(diff.path.clone());
                    inserted.extend(names);
                }
            }
            Language::Other => {}
        }
    }
    if deleted.is_empty() || inserted.is_empty() {
        return Vec::new();
    }
    if match_names && !deleted.iter().any(|d| inserted.contains(d)) {
        return Vec::new();
    }
    deleted.sort_unstable();
    deleted.dedup();
    inserted.sort_unstable();
    inserted.dedup();
    java_paths.sort_unstable();
    kotlin_paths.sort_unstable();
    vec![MigrationEvent {
        commit_index: commit.order_index,
        commit_id: commit.id.clone(),
        kind: MigrationKind::MethodLevel,
        java_paths,
        kotlin_paths,
        evidence: Evidence::Methods {
            deleted_java_methods: deleted,
            inserted_kotlin_methods: inserted,
        },
    }]
}

/// Standalone form of the method-level detector (computes the scripts
/// itself).
pub fn detect_method_migration(
    commit: &CommitRecord,
    params: &DiffParams,
    match_names: bool,
) -> Vec<MigrationEvent> {
    let scripts = CommitScripts::compute(commit, params);
    detect_method_migration_with(commit, &scripts, match_names)
}

/// Update-insert detector over precomputed scripts: a modified Java file
/// deletes a method and the same commit adds at least one Kotlin file.
pub fn detect_update_insert_migration_with(
    commit: &CommitRecord,
    scripts: &CommitScripts,
) -> Vec<MigrationEvent> {
    let mut added_kotlin: Vec<String> = commit
        .changes
        .iter()
        .filter_map(|c| match c {
            FileChange::Added { path, .. } if detect_language(path) == Language::Kotlin => {
                Some(path.clone())
            }
            _ => None,
        })
        .collect();
    if added_kotlin.is_empty() {
        return Vec::new();
    }
    let mut java_paths = Vec::new();
    let mut deleted: Vec<String> = Vec::new();
    for diff in scripts.diffs.iter().filter(|d| d.language == Language::Java) {
        let names = deleted_methods(diff);
        if !names.is_empty() {
            java_paths.push(diff.path.clone());
            deleted.extend(names);
        }
    }
    if deleted.is_empty() {
        return Vec::new();
    }
    // The inserted side is a whole new file; list the functions it declares.
    let mut inserted: Vec<String> = Vec::new();
    for change in &commit.changes {
        let FileChange::Added { path, content } = change else {
            continue;
        };
        if !added_kotlin.contains(path) {
            continue;
        }
        if let Ok(bytes) = content.read() {
            if let Ok(tree) = ast::parse_bytes(&bytes, Language::Kotlin) {
                inserted.extend(
                    tree.pre_order()
                        .filter(|&n| tree.kind(n) == UnifiedKind::Method)
                        .map(|n| tree.value(n).unwrap_or("constructor").to_string()),
                );
            }
        }
    }
    deleted.sort_unstable();
    deleted.dedup();
    inserted.sort_unstable();
    inserted.dedup();
    java_paths.sort_unstable();
    added_kotlin.sort_unstable();
    vec![MigrationEvent {
        commit_index: commit.order_index,
        commit_id: commit.id.clone(),
        kind: MigrationKind::UpdateInsert,
        java_paths,
        kotlin_paths: added_kotlin,
        evidence: Evidence::Methods {
            deleted_java_methods: deleted,
            inserted_kotlin_methods: inserted,
        },
    }]
}

/// Standalone form of the update-insert detector.
pub fn detect_update_insert_migration(
    commit: &CommitRecord,
    params: &DiffParams,
) -> Vec<MigrationEvent> {
    let scripts = CommitScripts::compute(commit, params);
    detect_update_insert_migration_with(commit, &scripts)
}

/// How an app's language make-up evolved between its first and last commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AppStatus {
    /// Started Java-only (generated tests aside), ended Kotlin-only.
    FullyMigratedJ2k,
    /// Both languages present in the latest commit.
    MixedLatest,
    /// Never contained a line of Java.
    KotlinOnlyHistory,
    /// Latest commit has Java and no Kotlin.
    JavaOnlyLatest,
    Other,
}

/// Partitions apps by their first and last snapshots.
pub fn classify_app(snapshots: &[LanguageSnapshot]) -> AppStatus {
    let Some(first) = snapshots.first() else {
        return AppStatus::Other;
    };
    let last = snapshots.last().expect("non-empty");
    let fully = first.java_sloc() > 0
        && first.kotlin_sloc() == 0
        && last.java_sloc() == 0
        && last.kotlin_sloc() > 0;
    if fully {
        return AppStatus::FullyMigratedJ2k;
    }
    if snapshots.iter().all(|s| s.java_sloc() == 0) {
        return AppStatus::KotlinOnlyHistory;
    }
    if last.kotlin_sloc() == 0 && last.java_sloc() > 0 {
        return AppStatus::JavaOnlyLatest;
    }
    if last.kotlin_sloc() > 0 && last.java_sloc() > 0 {
        return AppStatus::MixedLatest;
    }
    AppStatus::Other
}

/// The commit span from first Kotlin to last Java, defined for fully
/// migrated apps only.
///
/// `first_kotlin_index` is the first commit whose snapshot contains Kotlin;
/// `last_java_index` is the last commit involved with Java code — the one
/// whose changes removed the final Java lines. A single-commit full swap
/// therefore spans exactly that commit (length 1); when all Java disappears
/// before any Kotlin arrives, the span is empty and `length` drops to zero
/// or below.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MigrationInterval {
    pub first_kotlin_index: usize,
    pub last_java_index: usize,
    pub length: i64,
    pub normalized_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MigrationClass {
    OneStep,
    Staggered,
    Anomalous,
}

impl MigrationClass {
    pub fn from_length(length: i64) -> Self {
        match length {
            1 => MigrationClass::OneStep,
            l if l > 1 => MigrationClass::Staggered,
            _ => MigrationClass::Anomalous,
        }
    }
}

/// Computes the migration interval; absent unless the app is
/// [`AppStatus::FullyMigratedJ2k`].
pub fn compute_interval(snapshots: &[LanguageSnapshot]) -> Option<MigrationInterval> {
    if classify_app(snapshots) != AppStatus::FullyMigratedJ2k {
        return None;
    }
    let first_kotlin_index = snapshots.iter().position(|s| s.kotlin_sloc() > 0)?;
    // The commit after the last Java-bearing snapshot is the one that
    // removed the remaining Java; it exists because the app ends Java-free.
    let last_java_index = snapshots.iter().rposition(|s| s.java_sloc() > 0)? + 1;
    debug_assert!(last_java_index < snapshots.len());
    let length = last_java_index as i64 - first_kotlin_index as i64 + 1;
    Some(MigrationInterval {
        first_kotlin_index,
        last_java_index,
        length,
        normalized_length: length as f64 / snapshots.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("file-migration proportion is undefined for anomalous intervals")]
pub struct UndefinedForAnomalous;

/// Fraction of interval commits with at least one file-level event:
/// distinct commits in `[first_kotlin, last_java]` carrying a FileLevel
/// event, over the interval length.
pub fn file_migration_proportion(
    events: &[MigrationEvent],
    interval: &MigrationInterval,
) -> Result<Ratio, UndefinedForAnomalous> {
    if interval.length < 1 {
        return Err(UndefinedForAnomalous);
    }
    let migrating: BTreeSet<usize> = events
        .iter()
        .filter(|e| {
            e.kind == MigrationKind::FileLevel
                && e.commit_index >= interval.first_kotlin_index
                && e.commit_index <= interval.last_java_index
        })
        .map(|e| e.commit_index)
        .collect();
    Ok(Ratio::new(migrating.len() as u64, interval.length as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    FirstKotlin,
    Recent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Equal,
}

fn direction(later: u64, earlier: u64) -> Direction {
    match later.cmp(&earlier) {
        std::cmp::Ordering::Greater => Direction::Up,
        std::cmp::Ordering::Less => Direction::Down,
        std::cmp::Ordering::Equal => Direction::Equal,
    }
}

/// Kotlin amount/proportion of the latest commit versus one baseline.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionTrend {
    pub baseline: BaselineKind,
    pub baseline_index: usize,
    pub baseline_commit_id: String,
    pub amount_direction: Direction,
    pub proportion_direction: Direction,
}

/// How the "recent" baseline is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecentBaselineMode {
    /// Latest minus 10% of the Kotlin-era commit count (first Kotlin commit
    /// through latest, inclusive).
    KotlinEra,
    /// Latest minus 10% of all commits.
    AllCommits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TrendError {
    #[error("no commit contains Kotlin code")]
    NoKotlinCommit,
    #[error("the first Kotlin commit is the latest commit; trends are undefined")]
    DegenerateHistory,
}

/// Computes the two evolution trends (first-Kotlin and recent baselines).
pub fn compute_trends(
    snapshots: &[LanguageSnapshot],
    mode: RecentBaselineMode,
) -> Result<Vec<EvolutionTrend>, TrendError> {
    let first_kotlin = snapshots
        .iter()
        .position(|s| s.kotlin_sloc() > 0)
        .ok_or(TrendError::NoKotlinCommit)?;
    let latest = snapshots.len() - 1;
    if first_kotlin == latest {
        return Err(TrendError::DegenerateHistory);
    }
    let recent = match mode {
        RecentBaselineMode::KotlinEra => {
            let kotlin_era = latest - first_kotlin + 1;
            latest - kotlin_era / 10
        }
        RecentBaselineMode::AllCommits => latest.saturating_sub(snapshots.len() / 10),
    };
    let trend = |kind: BaselineKind, index: usize| {
        let base = &snapshots[index];
        let last = &snapshots[latest];
        // An undefined proportion (no code at all at that commit) compares
        // as zero.
        let base_prop = base.kotlin_proportion.unwrap_or_else(Ratio::zero);
        let last_prop = last.kotlin_proportion.unwrap_or_else(Ratio::zero);
        let proportion_direction = match last_prop.cmp(&base_prop) {
            std::cmp::Ordering::Greater => Direction::Up,
            std::cmp::Ordering::Less => Direction::Down,
            std::cmp::Ordering::Equal => Direction::Equal,
        };
        EvolutionTrend {
            baseline: kind,
            baseline_index: index,
            baseline_commit_id: base.commit_id.clone(),
            amount_direction: direction(last.kotlin_sloc(), base.kotlin_sloc()),
            proportion_direction,
        }
    };
    Ok(vec![
        trend(BaselineKind::FirstKotlin, first_kotlin),
        trend(BaselineKind::Recent, recent),
    ])
}
