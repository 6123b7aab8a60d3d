//! Edit-script derivation (and application, used as the test oracle).
//!
//! Script generation walks the new tree breadth-first, maintaining a
//! working copy of the old tree: unmapped new nodes become inserts, mapped
//! pairs with changed values become updates, pairs whose parents' mapping
//! changed become moves, and misordered mapped siblings are realigned with
//! an LCS pass. Unmapped old nodes are deleted in post-order at the end.
//! Because every action is applied to the working copy as it is emitted,
//! recorded positions are valid at application time.
//!
//! Move/insert positions use remove-then-insert semantics: `position` is the
//! child index the node occupies after the action.

use std::collections::{HashMap, VecDeque};

use super::{EditAction, EditScript, MappingSet, NodeRef};
use crate::ast::{AstTree, NodeId, UnifiedKind};

struct WorkNode {
    kind: UnifiedKind,
    value: Option<String>,
    parent: Option<usize>,
    children: Vec<usize>,
    alive: bool,
}

/// A mutable tree: the old tree's nodes at their old indices plus any nodes
/// created by inserts.
pub struct AppliedTree {
    nodes: Vec<WorkNode>,
    root: usize,
}

impl AppliedTree {
    fn from_old(old: &AstTree) -> Self {
        let nodes = old
            .pre_order()
            .map(|n| WorkNode {
                kind: old.kind(n),
                value: old.value(n).map(str::to_string),
                parent: old.parent(n).map(NodeId::index),
                children: old.children(n).iter().map(|c| c.index()).collect(),
                alive: true,
            })
            .collect();
        AppliedTree { nodes, root: 0 }
    }

    fn insert(&mut self, kind: UnifiedKind, value: Option<String>, parent: usize, position: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(WorkNode { kind, value, parent: Some(parent), children: Vec::new(), alive: true });
        let pos = position.min(self.nodes[parent].children.len());
        self.nodes[parent].children.insert(pos, id);
        id
    }

    /// Detaches `node` and re-inserts it as the `position`-th child of
    /// `parent` (index taken after the detach).
    fn move_node(&mut self, node: usize, parent: usize, position: usize) {
        if let Some(old_parent) = self.nodes[node].parent {
            let siblings = &mut self.nodes[old_parent].children;
            if let Some(i) = siblings.iter().position(|&c| c == node) {
                siblings.remove(i);
            }
        }
        let pos = position.min(self.nodes[parent].children.len());
        self.nodes[parent].children.insert(pos, node);
        self.nodes[node].parent = Some(parent);
    }

    fn delete(&mut self, node: usize) {
        debug_assert!(self.nodes[node].children.is_empty(), "deletes must be leaves");
        if let Some(parent) = self.nodes[node].parent {
            let siblings = &mut self.nodes[parent].children;
            if let Some(i) = siblings.iter().position(|&c| c == node) {
                siblings.remove(i);
            }
        }
        self.nodes[node].alive = false;
        self.nodes[node].parent = None;
    }

    fn child_index(&self, node: usize) -> Option<usize> {
        let parent = self.nodes[node].parent?;
        self.nodes[parent].children.iter().position(|&c| c == node)
    }

    /// Structural equality with an [`AstTree`]: kind, value, child order;
    /// node ids ignored.
    pub fn matches(&self, tree: &AstTree) -> bool {
        fn rec(work: &AppliedTree, w: usize, tree: &AstTree, n: NodeId) -> bool {
            let wn = &work.nodes[w];
            wn.kind == tree.kind(n)
                && wn.value.as_deref() == tree.value(n)
                && wn.children.len() == tree.children(n).len()
                && wn
                    .children
                    .iter()
                    .zip(tree.children(n))
                    .all(|(&c, &tc)| rec(work, c, tree, tc))
        }
        self.nodes[self.root].alive && rec(self, self.root, tree, tree.root())
    }

    /// Number of live nodes.
    pub fn live_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ApplyError {
    #[error("action references a node that does not exist")]
    MissingNode,
    #[error("delete target still has children")]
    DeleteNonLeaf,
    #[error("move would place a node inside its own subtree")]
    MoveIntoSelf,
}

/// Applies a script to (a working copy of) the old tree. The result should
/// match the new tree the script was derived from; the test suites assert
/// exactly that.
pub fn apply(old: &AstTree, script: &EditScript) -> Result<AppliedTree, ApplyError> {
    let mut work = AppliedTree::from_old(old);
    let old_len = old.len();
    let mut inserted: HashMap<NodeId, usize> = HashMap::new();
    let resolve = |r: NodeRef, inserted: &HashMap<NodeId, usize>| -> Result<usize, ApplyError> {
        match r {
            NodeRef::Old(id) if id.index() < old_len => Ok(id.index()),
            NodeRef::New(id) => inserted.get(&id).copied().ok_or(ApplyError::MissingNode),
            NodeRef::Old(_) => Err(ApplyError::MissingNode),
        }
    };
    for action in &script.actions {
        match action {
            EditAction::Insert { new_id, kind, value, parent, position, .. } => {
                let p = resolve(*parent, &inserted)?;
                if !work.nodes[p].alive {
                    return Err(ApplyError::MissingNode);
                }
                let w = work.insert(*kind, value.clone(), p, *position);
                inserted.insert(*new_id, w);
            }
            EditAction::Delete { old_id, .. } => {
                let w = old_id.index();
                if w >= old_len || !work.nodes[w].alive {
                    return Err(ApplyError::MissingNode);
                }
                if !work.nodes[w].children.is_empty() {
                    return Err(ApplyError::DeleteNonLeaf);
                }
                work.delete(w);
            }
            EditAction::Update { old_id, value, .. } => {
                let w = old_id.index();
                if w >= old_len || !work.nodes[w].alive {
                    return Err(ApplyError::MissingNode);
                }
                work.nodes[w].value = value.clone();
            }
            EditAction::Move { node, parent, position, .. } => {
                let n = resolve(*node, &inserted)?;
                let p = resolve(*parent, &inserted)?;
                if !work.nodes[n].alive || !work.nodes[p].alive {
                    return Err(ApplyError::MissingNode);
                }
                // Reject a destination inside the moved subtree.
                let mut cur = Some(p);
                while let Some(c) = cur {
                    if c == n {
                        return Err(ApplyError::MoveIntoSelf);
                    }
                    cur = work.nodes[c].parent;
                }
                work.move_node(n, p, *position);
            }
        }
    }
    Ok(work)
}

pub(super) fn edit_script(old: &AstTree, new: &AstTree, mapping: &MappingSet) -> EditScript {
    let old_len = old.len();
    let mut work = AppliedTree::from_old(old);
    // Partner bookkeeping between the new tree and the working tree.
    let mut work_of_new: Vec<Option<usize>> = vec![None; new.len()];
    let mut new_of_work: Vec<Option<NodeId>> = vec![None; old_len];
    for (o, n) in mapping.pairs() {
        work_of_new[n.index()] = Some(o.index());
        new_of_work[o.index()] = Some(n);
    }
    // For work nodes created by inserts: which new-tree node they mirror.
    let mut created_by: Vec<NodeId> = Vec::new();
    let mut in_order_new = vec![false; new.len()];
    let mut in_order_work = vec![false; old_len];
    let mut actions: Vec<EditAction> = Vec::new();

    let root_partner = mapping
        .get_old(new.root())
        .expect("edit_script requires mapped roots (both trees share a compilation-unit root)");
    in_order_new[new.root().index()] = true;
    in_order_work[root_partner.index()] = true;

    let mut queue = VecDeque::new();
    queue.push_back(new.root());
    while let Some(x) = queue.pop_front() {
        for &c in new.children(x) {
            queue.push_back(c);
        }
        let w: usize;
        match work_of_new[x.index()] {
            Some(existing) => {
                w = existing;
                if work.nodes[w].value.as_deref() != new.value(x) {
                    let value = new.value(x).map(str::to_string);
                    actions.push(EditAction::Update {
                        old_id: NodeId(w as u32),
                        new_id: x,
                        kind: new.kind(x),
                        old_value: work.nodes[w].value.clone(),
                        value: value.clone(),
                        parent_kind: enclosing(new, x),
                    });
                    work.nodes[w].value = value;
                }
                if let Some(y) = new.parent(x) {
                    let z = work_of_new[y.index()].expect("BFS visits parents first");
                    if work.nodes[w].parent != Some(z) {
                        let k = find_pos(x, new, &in_order_new, &work_of_new, &work);
                        work.move_node(w, z, k);
                        actions.push(EditAction::Move {
                            node: node_ref(w, old_len, &created_by),
                            new_id: x,
                            kind: new.kind(x),
                            value: new.value(x).map(str::to_string),
                            parent: node_ref(z, old_len, &created_by),
                            position: k,
                            parent_kind: enclosing(new, x),
                        });
                        in_order_work[w] = true;
                        in_order_new[x.index()] = true;
                    }
                }
            }
            None => {
                let y = new.parent(x).expect("unmapped root cannot occur");
                let z = work_of_new[y.index()].expect("BFS visits parents first");
                let k = find_pos(x, new, &in_order_new, &work_of_new, &work);
                let kind = new.kind(x);
                let value = new.value(x).map(str::to_string);
                let w_new = work.insert(kind, value.clone(), z, k);
                created_by.push(x);
                in_order_work.push(true);
                new_of_work.push(Some(x));
                work_of_new[x.index()] = Some(w_new);
                in_order_new[x.index()] = true;
                actions.push(EditAction::Insert {
                    new_id: x,
                    kind,
                    value,
                    parent: node_ref(z, old_len, &created_by),
                    position: k,
                    parent_kind: enclosing(new, x),
                });
                w = w_new;
            }
        }
        align_children(
            w,
            x,
            old_len,
            new,
            &mut work,
            &work_of_new,
            &new_of_work,
            &mut in_order_new,
            &mut in_order_work,
            &created_by,
            &mut actions,
        );
    }

    for o in old.post_order() {
        if new_of_work[o.index()].is_none() {
            actions.push(EditAction::Delete {
                old_id: o,
                kind: old.kind(o),
                value: old.value(o).map(str::to_string),
                parent_kind: old.enclosing_kind(o).unwrap_or(UnifiedKind::CompilationUnit),
            });
            work.delete(o.index());
        }
    }

    EditScript { actions }
}

fn node_ref(w: usize, old_len: usize, created_by: &[NodeId]) -> NodeRef {
    if w < old_len {
        NodeRef::Old(NodeId(w as u32))
    } else {
        NodeRef::New(created_by[w - old_len])
    }
}

fn enclosing(tree: &AstTree, id: NodeId) -> UnifiedKind {
    tree.enclosing_kind(id).unwrap_or(UnifiedKind::CompilationUnit)
}

/// Position for placing the partner of `x`: right after the partner of the
/// rightmost already-in-order left sibling of `x`, or leftmost if there is
/// none. Returned in remove-then-insert semantics for moves, i.e. as the
/// final index of the placed node.
fn find_pos(
    x: NodeId,
    new: &AstTree,
    in_order_new: &[bool],
    work_of_new: &[Option<usize>],
    work: &AppliedTree,
) -> usize {
    let Some(y) = new.parent(x) else {
        return 0;
    };
    let mut v: Option<NodeId> = None;
    for &s in new.children(y) {
        if s == x {
            break;
        }
        if in_order_new[s.index()] {
            v = Some(s);
        }
    }
    let Some(v) = v else {
        return 0;
    };
    let u = work_of_new[v.index()].expect("in-order nodes have partners");
    work.child_index(u).expect("in-order partner is attached") + 1
}

/// For a move within the same parent, converts a raw `find_pos` result into
/// the post-detach index.
fn adjust_for_same_parent(work: &AppliedTree, node: usize, parent: usize, k: usize) -> usize {
    if work.nodes[node].parent == Some(parent) {
        if let Some(i) = work.child_index(node) {
            if i < k {
                return k - 1;
            }
        }
    }
    k
}

#[allow(clippy::too_many_arguments)]
fn align_children(
    w: usize,
    x: NodeId,
    old_len: usize,
    new: &AstTree,
    work: &mut AppliedTree,
    work_of_new: &[Option<usize>],
    new_of_work: &[Option<NodeId>],
    in_order_new: &mut [bool],
    in_order_work: &mut [bool],
    created_by: &[NodeId],
    actions: &mut Vec<EditAction>,
) {
    // Mapped children on each side whose partner is a child of the other.
    let s1: Vec<usize> = work.nodes[w]
        .children
        .iter()
        .copied()
        .filter(|&c| matches!(new_of_work.get(c).copied().flatten(), Some(nc) if new.parent(nc) == Some(x)))
        .collect();
    let s2: Vec<NodeId> = new
        .children(x)
        .iter()
        .copied()
        .filter(|&c| matches!(work_of_new[c.index()], Some(wc) if work.nodes[wc].parent == Some(w)))
        .collect();
    let lcs = lcs_pairs(&s1, &s2, |a, b| work_of_new[b.index()] == Some(a));
    for &(a, b) in &lcs {
        in_order_work[a] = true;
        in_order_new[b.index()] = true;
    }
    let stable: std::collections::HashSet<NodeId> = lcs.iter().map(|&(_, b)| b).collect();
    for &b in &s2 {
        if stable.contains(&b) {
            continue;
        }
        let a = work_of_new[b.index()].expect("s2 members are mapped");
        let raw = find_pos(b, new, in_order_new, work_of_new, work);
        let k = adjust_for_same_parent(work, a, w, raw);
        work.move_node(a, w, k);
        actions.push(EditAction::Move {
            node: node_ref(a, old_len, created_by),
            new_id: b,
            kind: new.kind(b),
            value: new.value(b).map(str::to_string),
            parent: node_ref(w, old_len, created_by),
            position: k,
            parent_kind: enclosing(new, b),
        });
        in_order_work[a] = true;
        in_order_new[b.index()] = true;
    }
}

use super::lcs_pairs;
