//! Programmatic construction of small git repositories.
//!
//! The test and bench suites script their histories through this builder:
//! deterministic author signatures and timestamps, no reliance on ambient
//! git configuration.

use std::fs;
use std::path::{Path, PathBuf};

use git2::{Oid, Repository, Signature, Time};

/// Seconds between scripted commits.
const TICK: i64 = 60;

/// A writable scratch repository with a linear (or explicitly merged)
/// scripted history.
pub struct RepoFixture {
    repo: Repository,
    workdir: PathBuf,
    clock: i64,
}

/// One author identity, `(name, email)`.
pub type Author<'a> = (&'a str, &'a str);

pub const DEFAULT_AUTHOR: Author<'static> = ("Alex Dev", "alex@example.com");

impl RepoFixture {
    /// Initializes an empty repository in `dir` (which must exist).
    pub fn init(dir: &Path) -> Self {
        let repo = Repository::init(dir).expect("init fixture repo");
        RepoFixture {
            repo,
            workdir: dir.to_path_buf(),
            clock: 1_600_000_000,
        }
    }

    pub fn path(&self) -> &Path {
        &self.workdir
    }

    /// Writes/overwrites `writes`, deletes `deletes`, and commits the result
    /// on the current branch. Returns the commit id hex.
    pub fn commit(&mut self, message: &str, writes: &[(&str, &str)], deletes: &[&str]) -> String {
        self.commit_as(DEFAULT_AUTHOR, message, writes, deletes)
    }

    pub fn commit_as(
        &mut self,
        author: Author<'_>,
        message: &str,
        writes: &[(&str, &str)],
        deletes: &[&str],
    ) -> String {
        for (path, content) in writes {
            let full = self.workdir.join(path);
            if let Some(parent) = full.parent() {
                fs::create_dir_all(parent).expect("mkdir");
            }
            fs::write(&full, content).expect("write fixture file");
        }
        for path in deletes {
            let full = self.workdir.join(path);
            fs::remove_file(&full).expect("delete fixture file");
        }
        let mut index = self.repo.index().expect("index");
        index
            .add_all(["*"], git2::IndexAddOption::DEFAULT, None)
            .expect("add");
        for path in deletes {
            index.remove_path(Path::new(path)).expect("remove from index");
        }
        index.write().expect("index write");
        let tree_id = index.write_tree().expect("write tree");
        let sig = self.signature(author);
        let oid = {
            let tree = self.repo.find_tree(tree_id).expect("tree");
            let parent = self.head_commit();
            let parents: Vec<&git2::Commit<'_>> = parent.iter().collect();
            self.repo
                .commit(Some("HEAD"), &sig, &sig, message, &tree, &parents)
                .expect("commit")
        };
        self.clock += TICK;
        oid.to_string()
    }

    /// Creates a merge commit whose tree is the current work-tree state and
    /// whose parents are HEAD and `other` (in that order).
    pub fn merge_commit(&mut self, message: &str, other: &str, writes: &[(&str, &str)]) -> String {
        for (path, content) in writes {
            let full = self.workdir.join(path);
            if let Some(parent) = full.parent() {
                fs::create_dir_all(parent).expect("mkdir");
            }
            fs::write(&full, content).expect("write fixture file");
        }
        let mut index = self.repo.index().expect("index");
        index
            .add_all(["*"], git2::IndexAddOption::DEFAULT, None)
            .expect("add");
        index.write().expect("index write");
        let tree_id = index.write_tree().expect("write tree");
        let sig = self.signature(DEFAULT_AUTHOR);
        let oid = {
            let tree = self.repo.find_tree(tree_id).expect("tree");
            let first = self.head_commit().expect("merge needs a HEAD");
            let second = self
                .repo
                .find_commit(Oid::from_str(other).expect("oid"))
                .expect("other parent");
            self.repo
                .commit(Some("HEAD"), &sig, &sig, message, &tree, &[&first, &second])
                .expect("merge commit")
        };
        self.clock += TICK;
        oid.to_string()
    }

    /// Starts a new branch at `from` and checks it out.
    pub fn checkout_new_branch(&self, name: &str, from: &str) {
        let commit = self
            .repo
            .find_commit(Oid::from_str(from).expect("oid"))
            .expect("branch base");
        self.repo.branch(name, &commit, false).expect("branch");
        self.checkout(name);
    }

    /// Checks out an existing branch.
    pub fn checkout(&self, name: &str) {
        let refname = format!("refs/heads/{name}");
        let obj = self.repo.revparse_single(&refname).expect("revparse");
        self.repo
            .checkout_tree(&obj, Some(git2::build::CheckoutBuilder::new().force()))
            .expect("checkout tree");
        self.repo.set_head(&refname).expect("set head");
    }

    pub fn head_id(&self) -> String {
        self.head_commit().map(|c| c.id().to_string()).unwrap_or_default()
    }

    fn head_commit(&self) -> Option<git2::Commit<'_>> {
        self.repo
            .head()
            .ok()
            .and_then(|h| h.peel_to_commit().ok())
    }

    fn signature(&self, (name, email): Author<'_>) -> Signature<'static> {
        Signature::new(name, email, &Time::new(self.clock, 0)).expect("signature")
    }
}

/// Minimal Java source with `n` marker methods, used when a fixture only
/// needs plausible-looking content of a controllable size.
pub fn java_class(name: &str, methods: &[&str]) -> String {
    let mut src = format!("public class {name} {{\n");
    for m in methods {
        src.push_str(&format!("    public int {m}() {{\n        return {};\n    }}\n", m.len()));
    }
    src.push_str("}\n");
    src
}

/// Minimal Kotlin source mirroring [`java_class`].
pub fn kotlin_class(name: &str, methods: &[&str]) -> String {
    let mut src = format!("class {name} {{\n");
    for m in methods {
        src.push_str(&format!("    fun {m}(): Int {{\n        return {}\n    }}\n", m.len()));
    }
    src.push_str("}\n");
    src
}
