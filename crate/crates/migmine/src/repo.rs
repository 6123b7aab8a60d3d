//! Git history access: opens a repository and yields every commit of the
//! default branch's first-parent chain in chronological order, with
//! file-level changes and lazy content handles.
//!
//! Merges are linearized by following first parents only, the way a release
//! history reads; changes of each commit are computed against its first
//! parent (the empty tree for the root commit). Renames are detected at a
//! 60% similarity threshold, but a rename that changes the file extension is
//! split back into a removal plus an addition so that cross-language file
//! swaps stay visible downstream.
//!
//! The repository is never written to.

use std::cell::RefCell;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use git2::{Delta, DiffFindOptions, DiffOptions, ErrorCode, Oid, Repository, Sort};

/// Similarity (percent) at which a removed+added pair is reported as a
/// rename.
const RENAME_THRESHOLD: u16 = 60;

#[derive(Debug, thiserror::Error)]
pub enum RepoError {
    #[error("not a git repository: {path}")]
    NotARepository { path: PathBuf },
    #[error("repository at {path} is unreadable: {source}")]
    UnreadableRepository { path: PathBuf, source: git2::Error },
    #[error("unknown branch {branch:?}: {source}")]
    UnknownBranch { branch: String, source: git2::Error },
    #[error("corrupt or unreadable history: {0}")]
    CorruptHistory(#[from] git2::Error),
}

/// An open, read-only view of a repository, ready for walking.
pub struct RepositoryHandle {
    repo: Repository,
    path: Arc<PathBuf>,
    branch: Option<String>,
}

impl std::fmt::Debug for RepositoryHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RepositoryHandle")
            .field("path", &self.path)
            .field("branch", &self.branch)
            .finish_non_exhaustive()
    }
}

/// Opens the git repository at `path`.
///
/// The path must contain a repository (worktree or bare); an empty or
/// unrelated directory is `NotARepository`.
pub fn open_repository(path: &Path) -> Result<RepositoryHandle, RepoError> {
    let repo = Repository::open(path).map_err(|e| match e.code() {
        ErrorCode::NotFound => RepoError::NotARepository { path: path.to_path_buf() },
        _ => RepoError::UnreadableRepository { path: path.to_path_buf(), source: e },
    })?;
    let canonical = repo.path().to_path_buf();
    Ok(RepositoryHandle {
        repo,
        path: Arc::new(canonical),
        branch: None,
    })
}

impl RepositoryHandle {
    /// Walks a named local branch instead of the default branch head.
    pub fn with_branch(mut self, branch: Option<String>) -> Self {
        self.branch = branch;
        self
    }

    fn tip(&self) -> Result<Oid, RepoError> {
        match &self.branch {
            Some(name) => {
                let branch = self
                    .repo
                    .find_branch(name, git2::BranchType::Local)
                    .map_err(|e| RepoError::UnknownBranch { branch: name.clone(), source: e })?;
                branch
                    .get()
                    .target()
                    .ok_or_else(|| RepoError::UnknownBranch {
                        branch: name.clone(),
                        source: git2::Error::from_str("branch has no target"),
                    })
            }
            None => {
                let head = self.repo.head()?;
                Ok(head.peel_to_commit()?.id())
            }
        }
    }

    /// Materializes the full first-parent history, oldest first.
    ///
    /// `order_index` runs 0..n in walk order; each record's changes are
    /// diffed against the commit's first parent.
    pub fn walk_history(&self) -> Result<Vec<CommitRecord>, RepoError> {
        let tip = self.tip()?;
        let mut revwalk = self.repo.revwalk()?;
        revwalk.push(tip)?;
        revwalk.simplify_first_parent()?;
        revwalk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;
        let mut records = Vec::new();
        for (order_index, oid) in revwalk.enumerate() {
            let oid = oid?;
            let commit = self.repo.find_commit(oid)?;
            let changes = self.commit_changes(&commit)?;
            let author = commit.author();
            records.push(CommitRecord {
                id: oid.to_string(),
                parent_ids: commit.parent_ids().map(|p| p.to_string()).collect(),
                order_index,
                timestamp: commit.time().seconds(),
                author_name: String::from_utf8_lossy(author.name_bytes()).into_owned(),
                author_email: String::from_utf8_lossy(author.email_bytes()).into_owned(),
                message: String::from_utf8_lossy(commit.message_bytes()).into_owned(),
                changes,
            });
        }
        Ok(records)
    }

    fn commit_changes(&self, commit: &git2::Commit<'_>) -> Result<Vec<FileChange>, RepoError> {
        let new_tree = commit.tree()?;
        let old_tree = match commit.parent(0) {
            Ok(parent) => Some(parent.tree()?),
            Err(_) => None,
        };
        let mut opts = DiffOptions::new();
        opts.ignore_submodules(true);
        let mut diff =
            self.repo
                .diff_tree_to_tree(old_tree.as_ref(), Some(&new_tree), Some(&mut opts))?;
        let mut find = DiffFindOptions::new();
        find.renames(true).rename_threshold(RENAME_THRESHOLD.into());
        diff.find_similar(Some(&mut find))?;

        let mut changes = Vec::new();
        for delta in diff.deltas() {
            let old_file = delta.old_file();
            let new_file = delta.new_file();
            let handle = |f: &git2::DiffFile<'_>| ContentHandle {
                repo_path: Arc::clone(&self.path),
                oid: f.id(),
            };
            let path_of = |f: &git2::DiffFile<'_>| {
                String::from_utf8_lossy(f.path_bytes().unwrap_or_default()).into_owned()
            };
            match delta.status() {
                Delta::Added => {
                    if is_blob(new_file.mode()) {
                        changes.push(FileChange::Added {
                            path: path_of(&new_file),
                            content: handle(&new_file),
                        });
                    }
                }
                Delta::Deleted => {
                    if is_blob(old_file.mode()) {
                        changes.push(FileChange::Removed {
                            path: path_of(&old_file),
                            content: handle(&old_file),
                        });
                    }
                }
                Delta::Modified => {
                    // Pure mode changes keep the same blob; they are not
                    // content modifications.
                    if is_blob(new_file.mode()) && is_blob(old_file.mode()) && old_file.id() != new_file.id() {
                        changes.push(FileChange::Modified {
                            path: path_of(&new_file),
                            old: handle(&old_file),
                            new: handle(&new_file),
                        });
                    }
                }
                Delta::Renamed => {
                    if !is_blob(old_file.mode()) || !is_blob(new_file.mode()) {
                        continue;
                    }
                    let old_path = path_of(&old_file);
                    let new_path = path_of(&new_file);
                    if extension(&old_path) == extension(&new_path) {
                        changes.push(FileChange::Renamed {
                            old_path,
                            new_path,
                            old: handle(&old_file),
                            new: handle(&new_file),
                        });
                    } else {
                        // Cross-extension renames stay visible as a
                        // remove/add pair for the file-level detector.
                        changes.push(FileChange::Removed {
                            path: old_path,
                            content: handle(&old_file),
                        });
                        changes.push(FileChange::Added {
                            path: new_path,
                            content: handle(&new_file),
                        });
                    }
                }
                Delta::Typechange => {
                    if is_blob(old_file.mode()) {
                        changes.push(FileChange::Removed {
                            path: path_of(&old_file),
                            content: handle(&old_file),
                        });
                    }
                    if is_blob(new_file.mode()) {
                        changes.push(FileChange::Added {
                            path: path_of(&new_file),
                            content: handle(&new_file),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(changes)
    }

    /// Lists every blob path in the tree of `commit_id`. Used by callers
    /// that want to cross-check replayed changes against the real tree.
    pub fn tree_paths(&self, commit_id: &str) -> Result<Vec<String>, RepoError> {
        let oid = Oid::from_str(commit_id).map_err(RepoError::CorruptHistory)?;
        let tree = self.repo.find_commit(oid)?.tree()?;
        let mut paths = Vec::new();
        tree.walk(git2::TreeWalkMode::PreOrder, |dir, entry| {
            if entry.kind() == Some(git2::ObjectType::Blob)
                && matches!(entry.filemode(), 0o100644 | 0o100755)
            {
                let name = String::from_utf8_lossy(entry.name_bytes());
                paths.push(format!("{dir}{name}"));
            }
            git2::TreeWalkResult::Ok
        })?;
        paths.sort();
        Ok(paths)
    }
}

fn is_blob(mode: git2::FileMode) -> bool {
    matches!(mode, git2::FileMode::Blob | git2::FileMode::BlobExecutable | git2::FileMode::BlobGroupWritable)
}

fn extension(path: &str) -> Option<&str> {
    path.rsplit('/').next().and_then(|base| base.rsplit_once('.').map(|(_, e)| e))
}

/// One commit of the walked history.
#[derive(Debug, Clone)]
pub struct CommitRecord {
    /// 40-hex commit hash.
    pub id: String,
    pub parent_ids: Vec<String>,
    /// 0-based position in walk order; the authoritative ordering (commit
    /// timestamps may be skewed).
    pub order_index: usize,
    /// Commit time, seconds since epoch (UTC).
    pub timestamp: i64,
    pub author_name: String,
    pub author_email: String,
    pub message: String,
    pub changes: Vec<FileChange>,
}

/// A file-level change within one commit. Paths are repository-relative
/// with forward slashes.
#[derive(Debug, Clone)]
pub enum FileChange {
    Added { path: String, content: ContentHandle },
    Removed { path: String, content: ContentHandle },
    Modified { path: String, old: ContentHandle, new: ContentHandle },
    Renamed { old_path: String, new_path: String, old: ContentHandle, new: ContentHandle },
}

impl FileChange {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FileChange::Added { .. } => "added",
            FileChange::Removed { .. } => "removed",
            FileChange::Modified { .. } => "modified",
            FileChange::Renamed { .. } => "renamed",
        }
    }

    pub fn old_path(&self) -> Option<&str> {
        match self {
            FileChange::Added { .. } => None,
            FileChange::Removed { path, .. } => Some(path),
            FileChange::Modified { path, .. } => Some(path),
            FileChange::Renamed { old_path, .. } => Some(old_path),
        }
    }

    pub fn new_path(&self) -> Option<&str> {
        match self {
            FileChange::Added { path, .. } => Some(path),
            FileChange::Removed { .. } => None,
            FileChange::Modified { path, .. } => Some(path),
            FileChange::Renamed { new_path, .. } => Some(new_path),
        }
    }

    /// The path the file has after this change (old path for removals).
    pub fn effective_path(&self) -> &str {
        match self {
            FileChange::Added { path, .. } => path,
            FileChange::Removed { path, .. } => path,
            FileChange::Modified { path, .. } => path,
            FileChange::Renamed { new_path, .. } => new_path,
        }
    }
}

/// Lazily resolves the exact bytes of one file version.
///
/// Handles are plain data (safe to move across threads); each thread opens
/// its own libgit2 repository on first use.
#[derive(Debug, Clone)]
pub struct ContentHandle {
    repo_path: Arc<PathBuf>,
    oid: Oid,
}

impl ContentHandle {
    pub fn read(&self) -> Result<Vec<u8>, RepoError> {
        self.with_blob(|blob| blob.content().to_vec())
    }

    /// NUL-byte sniff over the blob's leading window, as git does.
    pub fn is_binary(&self) -> Result<bool, RepoError> {
        self.with_blob(|blob| blob.is_binary())
    }

    pub fn oid_hex(&self) -> String {
        self.oid.to_string()
    }

    fn with_blob<T>(&self, f: impl FnOnce(&git2::Blob<'_>) -> T) -> Result<T, RepoError> {
        thread_local! {
            static REPOS: RefCell<HashMap<PathBuf, Repository>> = RefCell::new(HashMap::new());
        }
        REPOS.with(|cell| {
            let mut repos = cell.borrow_mut();
            if !repos.contains_key(self.repo_path.as_ref()) {
                let repo = Repository::open(self.repo_path.as_ref()).map_err(|e| {
                    RepoError::UnreadableRepository {
                        path: self.repo_path.as_ref().clone(),
                        source: e,
                    }
                })?;
                repos.insert(self.repo_path.as_ref().clone(), repo);
            }
            let repo = &repos[self.repo_path.as_ref()];
            let blob = repo.find_blob(self.oid).map_err(RepoError::CorruptHistory)?;
            Ok(f(&blob))
        })
    }
}
