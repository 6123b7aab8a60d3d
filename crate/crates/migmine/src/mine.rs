//! Frequent inter-language change-pattern mining.
//!
//! Every commit that modifies files of both languages becomes one
//! transaction whose items are its AST changes, reduced to
//! `action / entity / enclosing context / language` and deduplicated. The
//! Apriori algorithm then surfaces itemsets frequent across the corpus of
//! transactions: each reported set co-occurs in at least `min_support` of
//! them, with every change on the Java side paired with changes on the
//! Kotlin side inside the same commits.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::ast::UnifiedKind;
use crate::detect::CommitScripts;
use crate::diff::{DiffParams, EditOp};
use crate::lang::Language;
use crate::par::maybe_par_map;
use crate::ratio::Ratio;
use crate::repo::CommitRecord;

/// Action tag in the canonical item spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ActionTag {
    INS,
    DEL,
    UPD,
    MOV,
}

impl From<EditOp> for ActionTag {
    fn from(op: EditOp) -> Self {
        match op {
            EditOp::Insert => ActionTag::INS,
            EditOp::Delete => ActionTag::DEL,
            EditOp::Update => ActionTag::UPD,
            EditOp::Move => ActionTag::MOV,
        }
    }
}

/// Language tag in the canonical item spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LangTag {
    J,
    K,
}

/// One AST change as a mining item. Canonical text form:
/// `"UPD-Invocation in Method (J)"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternItem {
    pub action: ActionTag,
    pub entity: UnifiedKind,
    pub parent: UnifiedKind,
    pub language: LangTag,
}

impl fmt::Display for PatternItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}-{} in {} ({:?})",
            self.action, self.entity, self.parent, self.language
        )
    }
}

impl Serialize for PatternItem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The deduplicated change items of one commit touching both languages.
#[derive(Debug, Clone, Serialize)]
pub struct Transaction {
    pub commit_index: usize,
    pub commit_id: String,
    pub items: BTreeSet<PatternItem>,
}

/// Builds the transaction for one commit from its precomputed scripts.
/// Returns nothing unless the commit modified at least one Java and one
/// Kotlin file and produced at least one item on each side.
pub fn transaction_from_scripts(commit: &CommitRecord, scripts: &CommitScripts) -> Option<Transaction> {
    let mut items = BTreeSet::new();
    let mut has_java = false;
    let mut has_kotlin = false;
    for diff in &scripts.diffs {
        let language = match diff.language {
            Language::Java => LangTag::J,
            Language::Kotlin => LangTag::K,
            Language::Other => continue,
        };
        for action in &diff.script {
            items.insert(PatternItem {
                action: action.op().into(),
                entity: action.kind(),
                parent: action.parent_kind(),
                language,
            });
            match language {
                LangTag::J => has_java = true,
                LangTag::K => has_kotlin = true,
            }
        }
    }
    (has_java && has_kotlin).then(|| Transaction {
        commit_index: commit.order_index,
        commit_id: commit.id.clone(),
        items,
    })
}

/// Builds transactions for a whole walk (computing the per-commit scripts).
pub fn build_transactions(
    commits: &[CommitRecord],
    params: &DiffParams,
    parallel: bool,
) -> Vec<Transaction> {
    maybe_par_map(parallel, commits, |commit| {
        let scripts = CommitScripts::compute(commit, params);
        transaction_from_scripts(commit, &scripts)
    })
    .into_iter()
    .flatten()
    .collect()
}

/// A set of items with its corpus support.
#[derive(Debug, Clone, Serialize)]
pub struct FrequentItemset {
    pub items: Vec<PatternItem>,
    pub support: Ratio,
    pub size: usize,
}

impl FrequentItemset {
    /// Items joined in canonical text order.
    pub fn canonical_text(&self) -> String {
        self.items
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Level-wise Apriori over the transactions.
///
/// Returns exactly the itemsets with `support >= min_support` and
/// `size <= max_size`. Candidate generation joins frequent (k-1)-sets
/// sharing a prefix and prunes candidates with an infrequent subset; support
/// counting per level runs data-parallel when enabled. Output is sorted by
/// (size ascending, support descending, canonical item text).
pub fn apriori(
    transactions: &[Transaction],
    min_support: Ratio,
    max_size: usize,
    parallel: bool,
) -> Vec<FrequentItemset> {
    let total = transactions.len() as u64;
    if total == 0 || max_size == 0 {
        return Vec::new();
    }
    // Intern items; ids are ordered by the item's derive order, which is
    // stable for one run.
    let mut universe: BTreeSet<PatternItem> = BTreeSet::new();
    for t in transactions {
        universe.extend(t.items.iter().copied());
    }
    let universe: Vec<PatternItem> = universe.into_iter().collect();
    let id_of = |item: &PatternItem| universe.binary_search(item).expect("interned");
    let tx_sets: Vec<Vec<usize>> = transactions
        .iter()
        .map(|t| {
            let mut ids: Vec<usize> = t.items.iter().map(|i| id_of(i)).collect();
            ids.sort_unstable();
            ids
        })
        .collect();

    // count * min.den >= total * min.num, exact.
    let frequent_enough =
        |count: u64| u128::from(count) * u128::from(min_support.den) >= u128::from(total) * u128::from(min_support.num);

    let count_support = |candidates: &[Vec<usize>]| -> Vec<u64> {
        maybe_par_map(parallel, candidates, |cand| {
            tx_sets
                .iter()
                .filter(|tx| is_subset(cand, tx))
                .count() as u64
        })
    };

    let mut out: Vec<FrequentItemset> = Vec::new();
    // Level 1.
    let singles: Vec<Vec<usize>> = (0..universe.len()).map(|i| vec![i]).collect();
    let counts = count_support(&singles);
    let mut frequent: Vec<(Vec<usize>, u64)> = singles
        .into_iter()
        .zip(counts)
        .filter(|(_, c)| frequent_enough(*c))
        .collect();
    out.extend(frequent.iter().map(|(ids, c)| make_itemset(ids, *c, total, &universe)));

    let mut k = 1;
    while !frequent.is_empty() && k < max_size {
        k += 1;
        let prev: Vec<&Vec<usize>> = frequent.iter().map(|(ids, _)| ids).collect();
        let prev_set: BTreeSet<&Vec<usize>> = prev.iter().copied().collect();
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for i in 0..prev.len() {
            for j in (i + 1)..prev.len() {
                let a = prev[i];
                let b = prev[j];
                if a[..k - 2] != b[..k - 2] {
                    continue;
                }
                let mut cand = a.clone();
                cand.push(b[k - 2]);
                debug_assert!(cand.windows(2).all(|w| w[0] < w[1]));
                // Downward closure: every (k-1)-subset must be frequent.
                let prunable = (0..cand.len()).any(|drop| {
                    let mut sub = cand.clone();
                    sub.remove(drop);
                    !prev_set.contains(&sub)
                });
                if !prunable {
                    candidates.push(cand);
                }
            }
        }
        let counts = count_support(&candidates);
        frequent = candidates
            .into_iter()
            .zip(counts)
            .filter(|(_, c)| frequent_enough(*c))
            .collect();
        out.extend(frequent.iter().map(|(ids, c)| make_itemset(ids, *c, total, &universe)));
    }

    out.sort_by(|a, b| {
        a.size
            .cmp(&b.size)
            .then(b.support.cmp(&a.support))
            .then_with(|| a.canonical_text().cmp(&b.canonical_text()))
    });
    out
}

fn make_itemset(ids: &[usize], count: u64, total: u64, universe: &[PatternItem]) -> FrequentItemset {
    let mut items: Vec<PatternItem> = ids.iter().map(|&i| universe[i]).collect();
    items.sort_by_key(|i| i.to_string());
    FrequentItemset {
        size: items.len(),
        support: Ratio::new(count, total),
        items,
    }
}

/// Both slices sorted ascending.
fn is_subset(needle: &[usize], haystack: &[usize]) -> bool {
    let mut it = haystack.iter();
    'outer: for n in needle {
        for h in it.by_ref() {
            match h.cmp(n) {
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Less => {}
            }
        }
        return false;
    }
    true
}

/// Writes itemsets as CSV: `size,support,items` with support at six decimal
/// places and items semicolon-joined.
pub fn write_itemsets_csv<W: Write>(itemsets: &[FrequentItemset], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "support", "items"])?;
    for set in itemsets {
        w.write_record([
            set.size.to_string(),
            format!("{:.6}", set.support.to_f64()),
            set.canonical_text(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
