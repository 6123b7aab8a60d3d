//! AST differencing: a GumTree-style two-phase matcher followed by
//! Chawathe-style edit-script derivation.
//!
//! # Matching
//!
//! The top-down phase greedily maps isomorphic subtrees of height at least
//! `min_height`, largest first, using structural hashes; ambiguous
//! candidates are ranked by the dice similarity of their parents. The
//! bottom-up phase then maps container nodes whose mapped-descendant dice
//! coefficient reaches `dice_threshold`, and runs a recovery pass inside
//! each newly mapped container (capped at `max_size` nodes) that matches
//! remaining descendants by unique hash, then by unique kind.
//!
//! Matching is deliberately conservative about moves: a node that cannot be
//! paired confidently is left unmapped and becomes a delete plus an insert,
//! never a speculative move.
//!
//! # Edit scripts
//!
//! [`edit_script`] derives an ordered action list (insert, delete, update,
//! move) from a mapping, maintaining a working copy of the old tree so that
//! positions are meaningful at application time. Applying the script to the
//! old tree reproduces the new tree up to node ids; [`apply`] implements
//! that application and the test suites use it as the correctness oracle.

mod matcher;
mod script;

use std::io::Write;

use serde::Serialize;

use crate::ast::{AstTree, NodeId, UnifiedKind};

pub use script::{apply, AppliedTree, ApplyError};

/// Matcher tuning knobs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiffParams {
    /// Minimum subtree height considered by the greedy top-down phase.
    pub min_height: u32,
    /// Dice threshold for bottom-up container matching.
    pub dice_threshold: f64,
    /// Largest container size eligible for the recovery pass.
    pub max_size: u32,
}

impl Default for DiffParams {
    fn default() -> Self {
        DiffParams { min_height: 2, dice_threshold: 0.5, max_size: 100 }
    }
}

/// A one-to-one correspondence between nodes of two trees.
///
/// Every pair has equal kind; values may differ (those pairs are update
/// candidates).
#[derive(Debug, Clone)]
pub struct MappingSet {
    old_to_new: Vec<Option<NodeId>>,
    new_to_old: Vec<Option<NodeId>>,
}

impl MappingSet {
    pub fn new(old_len: usize, new_len: usize) -> Self {
        MappingSet {
            old_to_new: vec![None; old_len],
            new_to_old: vec![None; new_len],
        }
    }

    pub fn insert(&mut self, old: NodeId, new: NodeId) {
        debug_assert!(self.old_to_new[old.index()].is_none());
        debug_assert!(self.new_to_old[new.index()].is_none());
        self.old_to_new[old.index()] = Some(new);
        self.new_to_old[new.index()] = Some(old);
    }

    pub fn has_old(&self, old: NodeId) -> bool {
        self.old_to_new[old.index()].is_some()
    }

    pub fn has_new(&self, new: NodeId) -> bool {
        self.new_to_old[new.index()].is_some()
    }

    pub fn get_new(&self, old: NodeId) -> Option<NodeId> {
        self.old_to_new[old.index()]
    }

    pub fn get_old(&self, new: NodeId) -> Option<NodeId> {
        self.new_to_old[new.index()]
    }

    pub fn len(&self) -> usize {
        self.old_to_new.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mapped pairs in old-id order.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.old_to_new
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.map(|n| (NodeId(i as u32), n)))
    }
}

/// Computes the GumTree-style mapping between two trees.
pub fn match_trees(old: &AstTree, new: &AstTree, params: &DiffParams) -> MappingSet {
    matcher::match_trees(old, new, params)
}

/// Derives the edit script for a mapping produced from these trees.
pub fn edit_script(old: &AstTree, new: &AstTree, mapping: &MappingSet) -> EditScript {
    script::edit_script(old, new, mapping)
}

/// Match + script in one call.
pub fn tree_diff(old: &AstTree, new: &AstTree, params: &DiffParams) -> EditScript {
    let mapping = match_trees(old, new, params);
    edit_script(old, new, &mapping)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Insert,
    Delete,
    Update,
    Move,
}

/// Reference to a node of the working tree: either an old-tree node or a
/// node created by an earlier insert of the same script (identified by its
/// new-tree id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRef {
    Old(NodeId),
    New(NodeId),
}

/// One edit action. `kind`, `value` and `parent_kind` describe the affected
/// node and its enclosing context; the remaining fields carry enough
/// positional detail to apply the script mechanically.
#[derive(Debug, Clone, PartialEq)]
pub enum EditAction {
    Insert {
        /// The created node, by new-tree id.
        new_id: NodeId,
        kind: UnifiedKind,
        value: Option<String>,
        parent: NodeRef,
        position: usize,
        parent_kind: UnifiedKind,
    },
    Delete {
        old_id: NodeId,
        kind: UnifiedKind,
        value: Option<String>,
        parent_kind: UnifiedKind,
    },
    Update {
        old_id: NodeId,
        new_id: NodeId,
        kind: UnifiedKind,
        old_value: Option<String>,
        value: Option<String>,
        parent_kind: UnifiedKind,
    },
    Move {
        node: NodeRef,
        new_id: NodeId,
        kind: UnifiedKind,
        value: Option<String>,
        parent: NodeRef,
        position: usize,
        parent_kind: UnifiedKind,
    },
}

impl EditAction {
    pub fn op(&self) -> EditOp {
        match self {
            EditAction::Insert { .. } => EditOp::Insert,
            EditAction::Delete { .. } => EditOp::Delete,
            EditAction::Update { .. } => EditOp::Update,
            EditAction::Move { .. } => EditOp::Move,
        }
    }

    pub fn kind(&self) -> UnifiedKind {
        match self {
            EditAction::Insert { kind, .. }
            | EditAction::Delete { kind, .. }
            | EditAction::Update { kind, .. }
            | EditAction::Move { kind, .. } => *kind,
        }
    }

    /// The affected node's value; for updates, the value after the change.
    pub fn value(&self) -> Option<&str> {
        match self {
            EditAction::Insert { value, .. }
            | EditAction::Delete { value, .. }
            | EditAction::Update { value, .. }
            | EditAction::Move { value, .. } => value.as_deref(),
        }
    }

    pub fn parent_kind(&self) -> UnifiedKind {
        match self {
            EditAction::Insert { parent_kind, .. }
            | EditAction::Delete { parent_kind, .. }
            | EditAction::Update { parent_kind, .. }
            | EditAction::Move { parent_kind, .. } => *parent_kind,
        }
    }

    /// New-tree node id, where the action has one.
    pub fn new_id(&self) -> Option<NodeId> {
        match self {
            EditAction::Insert { new_id, .. }
            | EditAction::Update { new_id, .. }
            | EditAction::Move { new_id, .. } => Some(*new_id),
            EditAction::Delete { .. } => None,
        }
    }

    /// Old-tree node id, where the action has one.
    pub fn old_id(&self) -> Option<NodeId> {
        match self {
            EditAction::Delete { old_id, .. } | EditAction::Update { old_id, .. } => Some(*old_id),
            EditAction::Move { node: NodeRef::Old(id), .. } => Some(*id),
            _ => None,
        }
    }
}

/// Ordered list of actions transforming the old tree into the new one.
#[derive(Debug, Clone, Default)]
pub struct EditScript {
    pub actions: Vec<EditAction>,
}

impl EditScript {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EditAction> {
        self.actions.iter()
    }

    /// Serializes the script as JSON lines of
    /// `{"op", "kind", "value", "parent_kind"}`.
    pub fn to_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            op: EditOp,
            kind: String,
            value: Option<&'a str>,
            parent_kind: String,
        }
        for action in &self.actions {
            let line = Line {
                op: action.op(),
                kind: action.kind().to_string(),
                value: action.value(),
                parent_kind: action.parent_kind().to_string(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a EditScript {
    type Item = &'a EditAction;
    type IntoIter = std::slice::Iter<'a, EditAction>;

    fn into_iter(self) -> Self::IntoIter {
        self.actions.iter()
    }
}

/// Longest common subsequence of `s1` and `s2` under `eq`, as element pairs.
pub(crate) fn lcs_pairs<A: Copy, B: Copy>(s1: &[A], s2: &[B], eq: impl Fn(A, B) -> bool) -> Vec<(A, B)> {
    let n = s1.len();
    let m = s2.len();
    let mut table = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if eq(s1[i], s2[j]) {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if eq(s1[i], s2[j]) {
            out.push((s1[i], s2[j]));
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Dice coefficient of two containers under a mapping:
/// `2·|mapped common descendant pairs| / (|desc(a)| + |desc(b)|)`.
pub fn dice(old: &AstTree, a: NodeId, new: &AstTree, b: NodeId, mapping: &MappingSet) -> f64 {
    let d1 = old.size(a) as usize - 1;
    let d2 = new.size(b) as usize - 1;
    if d1 + d2 == 0 {
        return 0.0;
    }
    let mut common = 0usize;
    for x in old.subtree(a).skip(1) {
        if let Some(y) = mapping.get_new(x) {
            if new.is_descendant_of(y, b) {
                common += 1;
            }
        }
    }
    2.0 * common as f64 / (d1 + d2) as f64
}
