//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::Path;

use migmine::ast::{build_tree, looks_binary, TreeSpec, UnifiedKind};
use migmine::fixture::RepoFixture;
use migmine::lang::{count_sloc, detect_language, Language};
use migmine::metrics::{GeneratedTestPolicy, LangTotals};
use migmine::mine::{FrequentItemset, Transaction};
use migmine::ratio::Ratio;
use migmine::repo::{CommitRecord, FileChange};
use rand::rngs::StdRng;
use rand::Rng;

/// Java source with exactly `n` source lines (a class header, a closing
/// brace, and n-2 field lines).
pub fn java_lines(class: &str, n: usize) -> String {
    assert!(n >= 2);
    let mut src = format!("public class {class} {{\n");
    for i in 0..n - 2 {
        src.push_str(&format!("    int field{i} = {i};\n"));
    }
    src.push_str("}\n");
    src
}

/// Kotlin source with exactly `n` source lines.
pub fn kotlin_lines(class: &str, n: usize) -> String {
    assert!(n >= 2);
    let mut src = format!("class {class} {{\n");
    for i in 0..n - 2 {
        src.push_str(&format!("    val field{i}: Int = {i}\n"));
    }
    src.push_str("}\n");
    src
}

// ---------------------------------------------------------------------
// Scripted repositories
// ---------------------------------------------------------------------

/// Java-only history, then one commit swaps everything to Kotlin.
pub fn one_step_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit(
        "initial java app",
        &[
            ("app/A.java", &java_lines("A", 10)),
            ("app/B.java", &java_lines("B", 6)),
            ("README.md", "hello\n"),
        ],
        &[],
    );
    fx.commit("tweak A", &[("app/A.java", &java_lines("A", 12))], &[]);
    fx.commit(
        "convert everything to kotlin",
        &[
            ("app/A.kt", &kotlin_lines("A", 11)),
            ("app/B.kt", &kotlin_lines("B", 7)),
        ],
        &["app/A.java", "app/B.java"],
    );
    fx
}

/// Gradual migration: files move one by one, with unrelated commits in
/// between. Interval spans commits 1..=4 (length 4), and commits 1, 3, 4
/// migrate files (proportion 3/4).
pub fn staggered_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit(
        "java app",
        &[
            ("src/A.java", &java_lines("A", 8)),
            ("src/B.java", &java_lines("B", 8)),
            ("src/C.java", &java_lines("C", 8)),
        ],
        &[],
    );
    fx.commit("migrate A", &[("src/A.kt", &kotlin_lines("A", 8))], &["src/A.java"]);
    fx.commit("maintenance on B", &[("src/B.java", &java_lines("B", 9))], &[]);
    fx.commit("migrate B", &[("src/B.kt", &kotlin_lines("B", 8))], &["src/B.java"]);
    fx.commit("migrate C", &[("src/C.kt", &kotlin_lines("C", 8))], &["src/C.java"]);
    fx
}

/// All Java removed first, Kotlin arrives only in the next commit: the
/// interval is empty (length 0).
pub fn anomalous_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit("java app", &[("A.java", &java_lines("A", 8))], &[]);
    fx.commit("tweak", &[("A.java", &java_lines("A", 9))], &[]);
    fx.commit("drop all java", &[], &["A.java"]);
    fx.commit("rewrite in kotlin", &[("A.kt", &kotlin_lines("A", 8))], &[]);
    fx
}

/// File migrations that cross directories, including the ambiguous case
/// where same-directory pairing must win.
pub fn dir_moved_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit(
        "java app",
        &[
            ("src/main/java/com/app/Foo.java", &java_lines("Foo", 10)),
            ("x/Same.java", &java_lines("Same", 6)),
            ("y/Same.java", &java_lines("Same", 7)),
        ],
        &[],
    );
    fx.commit(
        "move Foo to the kotlin tree",
        &[("src/main/kotlin/com/app/Foo.kt", &kotlin_lines("Foo", 10))],
        &["src/main/java/com/app/Foo.java"],
    );
    fx.commit(
        "migrate one of the twins",
        &[("x/Same.kt", &kotlin_lines("Same", 6))],
        &["x/Same.java", "y/Same.java"],
    );
    fx
}

const UTIL_BOTH: &str = "public class Util {\n    public int getX() {\n        return 1;\n    }\n    public int getY() {\n        return 2;\n    }\n}\n";
const UTIL_NO_GETX: &str = "public class Util {\n    public int getY() {\n        return 2;\n    }\n}\n";
const UTIL_EMPTY: &str = "public class Util {\n}\n";
const HELPER_A: &str = "class Helper {\n    fun a(): Int {\n        return 0\n    }\n}\n";
const HELPER_A_GETX: &str = "class Helper {\n    fun a(): Int {\n        return 0\n    }\n    fun getX(): Int {\n        return 1\n    }\n}\n";
const HELPER_A_GETX_COMPUTEY: &str = "class Helper {\n    fun a(): Int {\n        return 0\n    }\n    fun getX(): Int {\n        return 1\n    }\n    fun computeY(): Int {\n        return 2\n    }\n}\n";

/// Method-level migration: commit 1 moves `getX` by name; commit 2 deletes
/// `getY` while inserting `computeY` (a name mismatch, for the matching
/// flag).
pub fn method_level_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit(
        "java and kotlin side by side",
        &[("Util.java", UTIL_BOTH), ("Helper.kt", HELPER_A)],
        &[],
    );
    fx.commit(
        "migrate getX into Helper",
        &[("Util.java", UTIL_NO_GETX), ("Helper.kt", HELPER_A_GETX)],
        &[],
    );
    fx.commit(
        "replace getY with computeY",
        &[("Util.java", UTIL_EMPTY), ("Helper.kt", HELPER_A_GETX_COMPUTEY)],
        &[],
    );
    fx
}

const SERVICE_TWO: &str = "public class Service {\n    public int fetch() {\n        return 1;\n    }\n    public int keep() {\n        return 2;\n    }\n}\n";
const SERVICE_ONE: &str = "public class Service {\n    public int keep() {\n        return 2;\n    }\n}\n";

/// Update-insert migration: a Java method disappears while a brand-new
/// Kotlin file arrives.
pub fn update_insert_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit("java service", &[("Service.java", SERVICE_TWO), ("README.md", "x\n")], &[]);
    fx.commit(
        "extract fetch into kotlin",
        &[
            ("Service.java", SERVICE_ONE),
            ("NewUtil.kt", "class NewUtil {\n    fun fetch(): Int {\n        return 1\n    }\n}\n"),
        ],
        &[],
    );
    fx
}

/// One commit that satisfies both the method-level and the update-insert
/// detectors at once.
pub fn both_kinds_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit(
        "mixed app",
        &[("A.java", UTIL_BOTH), ("B.kt", HELPER_A)],
        &[],
    );
    fx.commit(
        "migrate getX and add a new kotlin file",
        &[
            ("A.java", UTIL_NO_GETX),
            ("B.kt", HELPER_A_GETX),
            ("C.kt", "class C {\n    fun c(): Int {\n        return 3\n    }\n}\n"),
        ],
        &[],
    );
    fx
}

/// The only Java ever present is an IDE-generated test stub that is never
/// modified.
pub fn generated_test_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit(
        "new project",
        &[
            ("app/src/test/ExampleUnitTest.java", &java_lines("ExampleUnitTest", 8)),
            ("app/Main.kt", &kotlin_lines("Main", 10)),
        ],
        &[],
    );
    fx.commit("evolve kotlin", &[("app/Main.kt", &kotlin_lines("Main", 12))], &[]);
    fx
}

/// One three-commit repo per Table-2 trend cell: the first commit is
/// Java-only, the second introduces Kotlin (the first-Kotlin baseline), the
/// third realizes the target directions versus that baseline.
pub fn trend_cell_repo(dir: &Path, baseline: (usize, usize), last: (usize, usize)) -> RepoFixture {
    let (k1, j1) = baseline;
    let (k2, j2) = last;
    let mut fx = RepoFixture::init(dir);
    fx.commit("java start", &[("J.java", &java_lines("J", 4)), ("doc.md", "v1\n")], &[]);
    fx.commit(
        "kotlin arrives",
        &[("J.java", &java_lines("J", j1)), ("K.kt", &kotlin_lines("K", k1))],
        &[],
    );
    fx.commit(
        "latest state",
        &[
            ("J.java", &java_lines("J", j2)),
            ("K.kt", &kotlin_lines("K", k2)),
            ("doc.md", "v2\n"),
        ],
        &[],
    );
    fx
}

/// All nine (amount, proportion) direction combinations, as
/// `(name, baseline (kotlin, java), last (kotlin, java))`. Directions are
/// exact: equality cells keep identical counts or identical proportions.
pub fn trend_grid() -> Vec<(&'static str, (usize, usize), (usize, usize))> {
    vec![
        ("up_up", (5, 10), (10, 10)),
        ("up_equal", (10, 10), (20, 20)),
        ("up_down", (5, 10), (8, 30)),
        ("equal_up", (5, 10), (5, 5)),
        ("equal_equal", (5, 10), (5, 10)),
        ("equal_down", (5, 10), (5, 20)),
        ("down_up", (10, 20), (8, 2)),
        ("down_equal", (20, 20), (10, 10)),
        ("down_down", (10, 10), (5, 10)),
    ]
}

/// The Kotlin-introduction worked example: 110 commits, Kotlin arriving in
/// the 10th, growing towards the end.
pub fn worked_example_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    fx.commit("start", &[("Base.java", &java_lines("Base", 10))], &[]);
    for i in 1..9 {
        fx.commit(&format!("java work {i}"), &[("Base.java", &java_lines("Base", 10 + i))], &[]);
    }
    // Commit #10: Kotlin arrives.
    fx.commit("introduce kotlin", &[("First.kt", &kotlin_lines("First", 10))], &[]);
    for i in 10..109 {
        // Kotlin grows slowly; Java stays. Commit #(i+1).
        if i % 2 == 0 {
            fx.commit(
                &format!("kotlin work {i}"),
                &[("First.kt", &kotlin_lines("First", 10 + i / 2))],
                &[],
            );
        } else {
            fx.commit(&format!("java touch {i}"), &[("Base.java", &java_lines("Base", 18 + i))], &[]);
        }
    }
    // Commit #110.
    fx.commit("latest", &[("First.kt", &kotlin_lines("First", 80))], &[]);
    fx
}

/// A 94-commit repo whose migration interval spans commits 1..=93 with
/// exactly 15 file-migration commits inside it.
pub fn interval_93_repo(dir: &Path) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    let initial: Vec<(String, String)> = (0..20)
        .map(|i| (format!("src/F{i}.java"), java_lines(&format!("F{i}"), 6)))
        .collect();
    let refs: Vec<(&str, &str)> = initial.iter().map(|(p, c)| (p.as_str(), c.as_str())).collect();
    fx.commit("big java app", &refs, &[]);
    let mut migrated = 0usize;
    for i in 1..=92usize {
        if (i - 1) % 6 == 0 && migrated < 15 {
            // Migration commits at 1, 7, 13, ..., 85.
            let name = format!("F{migrated}");
            let kt = kotlin_lines(&name, 6);
            let java_path = format!("src/{name}.java");
            fx.commit(
                &format!("migrate {name}"),
                &[(&format!("src/{name}.kt"), &kt)],
                &[&java_path],
            );
            migrated += 1;
        } else {
            // Interval noise: keep some Java file warm.
            let touched = 15 + (i % 5);
            fx.commit(
                &format!("java maintenance {i}"),
                &[(&format!("src/F{touched}.java"), &java_lines(&format!("F{touched}"), 6 + i % 3))],
                &[],
            );
        }
    }
    assert_eq!(migrated, 15);
    // Commit 93 drops the remaining Java without adding Kotlin.
    let leftovers: Vec<String> = (15..20).map(|i| format!("src/F{i}.java")).collect();
    let refs: Vec<&str> = leftovers.iter().map(|s| s.as_str()).collect();
    fx.commit("drop leftover java", &[], &refs);
    fx
}

/// Merge topology: a side branch whose commit must not appear in the
/// first-parent walk.
pub fn merge_repo(dir: &Path) -> (RepoFixture, String) {
    let mut fx = RepoFixture::init(dir);
    let base = fx.commit("base", &[("A.java", &java_lines("A", 6))], &[]);
    let side_start = base.clone();
    fx.checkout_new_branch("side", &side_start);
    let side = fx.commit(
        "side work",
        &[("S.java", &java_lines("S", 5)), ("A.java", &java_lines("A", 7))],
        &[],
    );
    fx.checkout("master");
    fx.commit("mainline", &[("B.java", &java_lines("B", 6))], &[]);
    fx.merge_commit(
        "merge side",
        &side,
        &[("S.java", &java_lines("S", 5)), ("A.java", &java_lines("A", 7))],
    );
    (fx, side)
}

/// A synthetic repository with roughly `files` source files and `commits`
/// commits mixing Java/Kotlin work, used by the performance floor check and
/// the benchmarks.
pub fn synthetic_repo(dir: &Path, commits: usize, files: usize) -> RepoFixture {
    let mut fx = RepoFixture::init(dir);
    let initial: Vec<(String, String)> = (0..files)
        .map(|i| {
            if i % 2 == 0 {
                (format!("src/j/File{i}.java"), java_lines(&format!("File{i}"), 12))
            } else {
                (format!("src/k/File{i}.kt"), kotlin_lines(&format!("File{i}"), 12))
            }
        })
        .collect();
    let refs: Vec<(&str, &str)> = initial.iter().map(|(p, c)| (p.as_str(), c.as_str())).collect();
    fx.commit("seed", &refs, &[]);
    for c in 1..commits {
        match c % 7 {
            // A both-language modification commit (feeds the miner).
            0 => {
                let j = (c * 2) % files / 2 * 2;
                let k = ((c * 2) % files / 2 * 2 + 1).min(files - 1);
                fx.commit(
                    &format!("cross change {c}"),
                    &[
                        (
                            &format!("src/j/File{j}.java"),
                            &java_lines(&format!("File{j}"), 12 + c % 4),
                        ),
                        (
                            &format!("src/k/File{k}.kt"),
                            &kotlin_lines(&format!("File{k}"), 12 + c % 4),
                        ),
                    ],
                    &[],
                );
            }
            // Occasionally migrate a file wholesale.
            3 => {
                let j = (c * 2) % files / 2 * 2;
                let path = format!("src/j/File{j}.java");
                if dir.join(&path).exists() {
                    let kt = kotlin_lines(&format!("File{j}"), 12);
                    fx.commit(
                        &format!("migrate File{j}"),
                        &[(&format!("src/k/File{j}.kt"), &kt)],
                        &[&path],
                    );
                } else {
                    fx.commit(&format!("noop docs {c}"), &[("README.md", &format!("rev {c}\n"))], &[]);
                }
            }
            r => {
                let i = (c * 3) % files;
                let (path, content) = if i % 2 == 0 {
                    let p = format!("src/j/File{i}.java");
                    if !dir.join(&p).exists() {
                        fx.commit(&format!("docs {c}"), &[("README.md", &format!("r{c}\n"))], &[]);
                        continue;
                    }
                    (p, java_lines(&format!("File{i}"), 12 + r))
                } else {
                    (
                        format!("src/k/File{i}.kt"),
                        kotlin_lines(&format!("File{i}"), 12 + r),
                    )
                };
                fx.commit(&format!("work {c}"), &[(&path, &content)], &[]);
            }
        }
    }
    fx
}

// ---------------------------------------------------------------------
// Snapshot recomputation oracle
// ---------------------------------------------------------------------

/// From-scratch language totals of the full tree at one commit, read
/// directly from the object store (independent of the incremental fold).
pub fn recompute_totals(
    repo_dir: &Path,
    commit_id: &str,
    excluded: &HashSet<String>,
) -> (LangTotals, LangTotals) {
    let repo = git2::Repository::open(repo_dir).expect("open oracle repo");
    let oid = git2::Oid::from_str(commit_id).expect("oid");
    let tree = repo.find_commit(oid).expect("commit").tree().expect("tree");
    let mut sloc = LangTotals::default();
    let mut files = LangTotals::default();
    tree.walk(git2::TreeWalkMode::PreOrder, |dir, entry| {
        if entry.kind() == Some(git2::ObjectType::Blob)
            && matches!(entry.filemode(), 0o100644 | 0o100755)
        {
            let path = format!("{dir}{}", String::from_utf8_lossy(entry.name_bytes()));
            if excluded.contains(&path) {
                return git2::TreeWalkResult::Ok;
            }
            let blob = repo.find_blob(entry.id()).expect("blob");
            let (lang, count) = if looks_binary(blob.content()) {
                (Language::Other, 0)
            } else {
                let lang = detect_language(&path);
                let text = String::from_utf8_lossy(blob.content());
                (lang, count_sloc(&text, lang))
            };
            match lang {
                Language::Java => {
                    sloc.java += count;
                    files.java += 1;
                }
                Language::Kotlin => {
                    sloc.kotlin += count;
                    files.kotlin += 1;
                }
                Language::Other => {
                    sloc.other += count;
                    files.other += 1;
                }
            }
        }
        git2::TreeWalkResult::Ok
    })
    .expect("walk");
    (sloc, files)
}

/// Independent recomputation of the generated-test exclusion set: matching
/// basenames that never appear as a modification target.
pub fn recompute_excluded(commits: &[CommitRecord], policy: &GeneratedTestPolicy) -> HashSet<String> {
    if !policy.enabled {
        return HashSet::new();
    }
    let mut added: HashSet<String> = HashSet::new();
    let mut modified: HashSet<String> = HashSet::new();
    for commit in commits {
        for change in &commit.changes {
            match change {
                FileChange::Added { path, .. } => {
                    let base = path.rsplit('/').next().unwrap_or(path);
                    if policy.basenames.iter().any(|b| b == base) {
                        added.insert(path.clone());
                    }
                }
                FileChange::Modified { path, .. } => {
                    modified.insert(path.clone());
                }
                _ => {}
            }
        }
    }
    added.retain(|p| !modified.contains(p));
    added
}

// ---------------------------------------------------------------------
// Randomized tree-mutation harness
// ---------------------------------------------------------------------

const KIND_POOL: &[UnifiedKind] = &[
    UnifiedKind::Class,
    UnifiedKind::Method,
    UnifiedKind::Block,
    UnifiedKind::Invocation,
    UnifiedKind::If,
    UnifiedKind::Return,
    UnifiedKind::Property,
];

fn random_leaf(rng: &mut StdRng) -> TreeSpec {
    if rng.random_bool(0.6) {
        TreeSpec::valued(UnifiedKind::Identifier, &format!("id{}", rng.random_range(0..10_000)))
    } else {
        TreeSpec::valued(UnifiedKind::Literal, &format!("{}", rng.random_range(0..10_000)))
    }
}

/// Random tree with distinctive leaf values; roots are compilation units.
pub fn random_tree_spec(rng: &mut StdRng, target_size: usize) -> TreeSpec {
    fn grow(rng: &mut StdRng, budget: &mut usize, depth: usize) -> TreeSpec {
        *budget = budget.saturating_sub(1);
        if depth >= 6 || *budget == 0 || rng.random_bool(0.35) {
            return random_leaf(rng);
        }
        let kind = KIND_POOL[rng.random_range(0..KIND_POOL.len())];
        let mut node = TreeSpec::new(kind);
        let children = rng.random_range(1..=4usize);
        for _ in 0..children {
            if *budget == 0 {
                break;
            }
            node.children.push(grow(rng, budget, depth + 1));
        }
        if node.children.is_empty() {
            node.children.push(random_leaf(rng));
        }
        node
    }
    let mut root = TreeSpec::new(UnifiedKind::CompilationUnit);
    let mut budget = target_size;
    while budget > 0 {
        root.children.push(grow(rng, &mut budget, 1));
    }
    root
}

fn spec_size(spec: &TreeSpec) -> usize {
    1 + spec.children.iter().map(spec_size).sum::<usize>()
}

fn paths(spec: &TreeSpec) -> Vec<Vec<usize>> {
    fn rec(spec: &TreeSpec, here: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(here.clone());
        for (i, child) in spec.children.iter().enumerate() {
            let mut p = here.clone();
            p.push(i);
            rec(child, p, out);
        }
    }
    let mut out = Vec::new();
    rec(spec, Vec::new(), &mut out);
    out
}

fn node_at_mut<'a>(spec: &'a mut TreeSpec, path: &[usize]) -> &'a mut TreeSpec {
    let mut cur = spec;
    for &i in path {
        cur = &mut cur.children[i];
    }
    cur
}

/// One random mutation; returns the "size cost" of the operation (the
/// subtree size it touched, with moves counting double since a conservative
/// differ may render them as delete+insert).
pub fn mutate(rng: &mut StdRng, spec: &mut TreeSpec) -> usize {
    loop {
        match rng.random_range(0..4) {
            // Update a value.
            0 => {
                let all = paths(spec);
                let path = &all[rng.random_range(0..all.len())];
                let node = node_at_mut(spec, path);
                if node.value.is_some() {
                    node.value = Some(format!("mut{}", rng.random_range(0..10_000)));
                    return 1;
                }
            }
            // Insert a small subtree.
            1 => {
                let insert = if rng.random_bool(0.5) {
                    let size = rng.random_range(1..6);
                    random_tree_spec(rng, size).children.remove(0)
                } else {
                    random_leaf(rng)
                };
                let cost = spec_size(&insert);
                let all = paths(spec);
                let candidates: Vec<_> = all
                    .iter()
                    .filter(|p| node_at_mut(spec, p).value.is_none() || p.is_empty())
                    .cloned()
                    .collect();
                let path = &candidates[rng.random_range(0..candidates.len())];
                let node = node_at_mut(spec, path);
                let pos = rng.random_range(0..=node.children.len());
                node.children.insert(pos, insert);
                return cost;
            }
            // Delete a subtree (never the root).
            2 => {
                let all = paths(spec);
                let candidates: Vec<_> = all.into_iter().filter(|p| !p.is_empty()).collect();
                if candidates.is_empty() {
                    continue;
                }
                let path = &candidates[rng.random_range(0..candidates.len())];
                let (parent_path, last) = path.split_at(path.len() - 1);
                let parent = node_at_mut(spec, parent_path);
                if parent.children.len() == 1 && parent_path.is_empty() {
                    continue; // keep the root populated
                }
                let removed = parent.children.remove(last[0]);
                return spec_size(&removed);
            }
            // Move a subtree elsewhere.
            _ => {
                let all = paths(spec);
                let candidates: Vec<_> = all.iter().filter(|p| !p.is_empty()).cloned().collect();
                if candidates.len() < 2 {
                    continue;
                }
                let src = candidates[rng.random_range(0..candidates.len())].clone();
                let (parent_path, last) = src.split_at(src.len() - 1);
                let parent = node_at_mut(spec, parent_path);
                let moved = parent.children.remove(last[0]);
                let cost = 2 * spec_size(&moved);
                // Destination: any interior node of what remains.
                let all = paths(spec);
                let dests: Vec<_> = all
                    .iter()
                    .filter(|p| node_at_mut(spec, p).value.is_none())
                    .cloned()
                    .collect();
                let dest = &dests[rng.random_range(0..dests.len())];
                let node = node_at_mut(spec, dest);
                let pos = rng.random_range(0..=node.children.len());
                node.children.insert(pos, moved);
                return cost;
            }
        }
    }
}

/// Builds the (old, new, mutation cost, k) quadruple for one randomized
/// mutation round.
pub fn mutated_pair(rng: &mut StdRng, tree_size: usize, mutations: usize) -> (migmine::ast::AstTree, migmine::ast::AstTree, usize) {
    let old_spec = random_tree_spec(rng, tree_size);
    let mut new_spec = old_spec.clone();
    let mut cost = 0usize;
    for _ in 0..mutations {
        cost += mutate(rng, &mut new_spec);
    }
    let old = build_tree(Language::Java, old_spec);
    let new = build_tree(Language::Java, new_spec);
    (old, new, cost)
}

// ---------------------------------------------------------------------
// Brute-force frequent-itemset oracle
// ---------------------------------------------------------------------

/// Enumerates every itemset up to `max_size` and filters by support; the
/// reference implementation the miner must agree with exactly.
pub fn brute_force_itemsets(
    transactions: &[Transaction],
    min_support: Ratio,
    max_size: usize,
) -> Vec<FrequentItemset> {
    let total = transactions.len() as u64;
    if total == 0 {
        return Vec::new();
    }
    let mut universe: Vec<migmine::mine::PatternItem> = transactions
        .iter()
        .flat_map(|t| t.items.iter().copied())
        .collect();
    universe.sort();
    universe.dedup();
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        universe: &[migmine::mine::PatternItem],
        start: usize,
        stack: &mut Vec<usize>,
        max_size: usize,
        transactions: &[Transaction],
        total: u64,
        min_support: Ratio,
        out: &mut Vec<FrequentItemset>,
    ) {
        if !stack.is_empty() {
            let items: Vec<_> = stack.iter().map(|&i| universe[i]).collect();
            let count = transactions
                .iter()
                .filter(|t| items.iter().all(|i| t.items.contains(i)))
                .count() as u64;
            let support = Ratio::new(count, total);
            if support >= min_support {
                let mut sorted = items.clone();
                sorted.sort_by_key(|i| i.to_string());
                out.push(FrequentItemset { size: sorted.len(), support, items: sorted });
            } else {
                return; // supersets cannot be frequent either
            }
        }
        if stack.len() == max_size {
            return;
        }
        for i in start..universe.len() {
            stack.push(i);
            rec(universe, i + 1, stack, max_size, transactions, total, min_support, out);
            stack.pop();
        }
    }
    rec(&universe, 0, &mut stack, max_size, transactions, total, min_support, &mut out);
    out.sort_by(|a, b| {
        a.size
            .cmp(&b.size)
            .then(b.support.cmp(&a.support))
            .then_with(|| a.canonical_text().cmp(&b.canonical_text()))
    });
    out
}

/// Structural equality of two itemset lists, including exact supports.
pub fn itemsets_equal(a: &[FrequentItemset], b: &[FrequentItemset]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.size == y.size && x.support == y.support && x.items == y.items
        })
}
