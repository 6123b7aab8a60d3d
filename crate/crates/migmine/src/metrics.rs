//! Per-commit language metrics, maintained incrementally along the walk.
//!
//! One [`LanguageSnapshot`] per commit holds the sLOC and file counts of the
//! *full tree* at that commit, not the diff. The series is computed by
//! applying each commit's changes to a running per-file table, which keeps
//! the walk linear in the number of changes rather than commits × files.
//!
//! Binary files are excluded from content analysis entirely: they count as
//! one `Other` file and zero sLOC regardless of extension.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::Serialize;

use crate::lang::{count_sloc, detect_language, Language};
use crate::ratio::Ratio;
use crate::repo::{CommitRecord, ContentHandle, FileChange, RepoError};

/// Which files to ignore as IDE-generated test stubs.
///
/// The default ignores files whose basename is exactly
/// `ExampleUnitTest.java` or `ApplicationTest.java` *and* that are never
/// modified after the commit that created them — the scaffolding Android
/// Studio drops into new projects. Whether a path qualifies is decided over
/// the whole walk, so the snapshot series runs a pre-pass.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratedTestPolicy {
    pub enabled: bool,
    pub basenames: Vec<String>,
}

impl Default for GeneratedTestPolicy {
    fn default() -> Self {
        GeneratedTestPolicy {
            enabled: true,
            basenames: vec![
                "ExampleUnitTest.java".to_string(),
                "ApplicationTest.java".to_string(),
            ],
        }
    }
}

impl GeneratedTestPolicy {
    pub fn disabled() -> Self {
        GeneratedTestPolicy { enabled: false, basenames: Vec::new() }
    }

    fn matches_basename(&self, path: &str) -> bool {
        let base = path.rsplit('/').next().unwrap_or(path);
        self.basenames.iter().any(|b| b == base)
    }

    /// Paths excluded from metrics: basename matches and the path is never
    /// the target of a Modified change anywhere in the walk.
    pub fn excluded_paths(&self, commits: &[CommitRecord]) -> HashSet<String> {
        if !self.enabled {
            return HashSet::new();
        }
        let mut candidates: HashSet<String> = HashSet::new();
        let mut modified: HashSet<&str> = HashSet::new();
        for commit in commits {
            for change in &commit.changes {
                match change {
                    FileChange::Added { path, .. } if self.matches_basename(path) => {
                        candidates.insert(path.clone());
                    }
                    FileChange::Modified { path, .. } => {
                        modified.insert(path);
                    }
                    _ => {}
                }
            }
        }
        candidates.retain(|p| !modified.contains(p.as_str()));
        candidates
    }
}

/// Totals per language. A total map over the [`Language`] enum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LangTotals {
    pub java: u64,
    pub kotlin: u64,
    pub other: u64,
}

impl LangTotals {
    pub fn get(&self, lang: Language) -> u64 {
        match lang {
            Language::Java => self.java,
            Language::Kotlin => self.kotlin,
            Language::Other => self.other,
        }
    }

    fn add(&mut self, lang: Language, amount: u64) {
        match lang {
            Language::Java => self.java += amount,
            Language::Kotlin => self.kotlin += amount,
            Language::Other => self.other += amount,
        }
    }

    fn sub(&mut self, lang: Language, amount: u64) {
        match lang {
            Language::Java => self.java -= amount,
            Language::Kotlin => self.kotlin -= amount,
            Language::Other => self.other -= amount,
        }
    }
}

/// Language totals of the tree at one commit.
#[derive(Debug, Clone, Serialize)]
pub struct LanguageSnapshot {
    pub commit_index: usize,
    pub commit_id: String,
    pub sloc: LangTotals,
    pub files: LangTotals,
    /// `kotlin_sloc / (kotlin_sloc + java_sloc)`; absent when neither
    /// language has any code.
    pub kotlin_proportion: Option<Ratio>,
}

impl LanguageSnapshot {
    pub fn java_sloc(&self) -> u64 {
        self.sloc.java
    }

    pub fn kotlin_sloc(&self) -> u64 {
        self.sloc.kotlin
    }
}

fn proportion(sloc: &LangTotals) -> Option<Ratio> {
    let den = sloc.kotlin + sloc.java;
    (den > 0).then(|| Ratio::new(sloc.kotlin, den))
}

#[derive(Debug, Clone, Copy)]
struct FileEntry {
    lang: Language,
    sloc: u64,
}

/// Measures one file version: binary blobs count as an `Other` file with no
/// source lines.
fn measure(path: &str, content: &ContentHandle) -> Result<FileEntry, RepoError> {
    let bytes = content.read()?;
    if crate::ast::looks_binary(&bytes) {
        return Ok(FileEntry { lang: Language::Other, sloc: 0 });
    }
    let lang = detect_language(path);
    let text = String::from_utf8_lossy(&bytes);
    Ok(FileEntry { lang, sloc: count_sloc(&text, lang) })
}

/// Computes one snapshot per commit by folding changes into a running
/// per-file table. Files matched by the exclusion policy contribute
/// nothing.
pub fn snapshot_series(
    commits: &[CommitRecord],
    policy: &GeneratedTestPolicy,
) -> Result<Vec<LanguageSnapshot>, RepoError> {
    let excluded = policy.excluded_paths(commits);
    let mut table: HashMap<String, FileEntry> = HashMap::new();
    let mut sloc = LangTotals::default();
    let mut files = LangTotals::default();
    let mut out = Vec::with_capacity(commits.len());

    let remove = |table: &mut HashMap<String, FileEntry>,
                      sloc: &mut LangTotals,
                      files: &mut LangTotals,
                      path: &str| {
        if let Some(entry) = table.remove(path) {
            sloc.sub(entry.lang, entry.sloc);
            files.sub(entry.lang, 1);
        }
    };
    let insert = |table: &mut HashMap<String, FileEntry>,
                      sloc: &mut LangTotals,
                      files: &mut LangTotals,
                      path: &str,
                      entry: FileEntry| {
        if let Some(prev) = table.insert(path.to_string(), entry) {
            sloc.sub(prev.lang, prev.sloc);
            files.sub(prev.lang, 1);
        }
        sloc.add(entry.lang, entry.sloc);
        files.add(entry.lang, 1);
    };

    for commit in commits {
        for change in &commit.changes {
            match change {
                FileChange::Added { path, content } => {
                    if excluded.contains(path) {
                        continue;
                    }
                    let entry = measure(path, content)?;
                    insert(&mut table, &mut sloc, &mut files, path, entry);
                }
                FileChange::Removed { path, .. } => {
                    remove(&mut table, &mut sloc, &mut files, path);
                }
                FileChange::Modified { path, new, .. } => {
                    if excluded.contains(path) {
                        continue;
                    }
                    let entry = measure(path, new)?;
                    insert(&mut table, &mut sloc, &mut files, path, entry);
                }
                FileChange::Renamed { old_path, new_path, new, .. } => {
                    remove(&mut table, &mut sloc, &mut files, old_path);
                    if excluded.contains(new_path) {
                        continue;
                    }
                    let entry = measure(new_path, new)?;
                    insert(&mut table, &mut sloc, &mut files, new_path, entry);
                }
            }
        }
        out.push(LanguageSnapshot {
            commit_index: commit.order_index,
            commit_id: commit.id.clone(),
            sloc,
            files,
            kotlin_proportion: proportion(&sloc),
        });
    }
    Ok(out)
}

/// Writes the snapshot series as CSV with the columns
/// `commit_index,commit_id,java_sloc,kotlin_sloc,java_files,kotlin_files,kotlin_proportion`
/// (proportion empty when undefined).
pub fn write_evolution_csv<W: Write>(snapshots: &[LanguageSnapshot], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "commit_index",
        "commit_id",
        "java_sloc",
        "kotlin_sloc",
        "java_files",
        "kotlin_files",
        "kotlin_proportion",
    ])?;
    for s in snapshots {
        w.write_record([
            s.commit_index.to_string(),
            s.commit_id.clone(),
            s.sloc.java.to_string(),
            s.sloc.kotlin.to_string(),
            s.files.java.to_string(),
            s.files.kotlin.to_string(),
            s.kotlin_proportion.map(|p| p.to_f64().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
