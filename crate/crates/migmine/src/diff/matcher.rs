//! The two-phase tree matcher.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use super::{dice, lcs_pairs, DiffParams, MappingSet};
use crate::ast::{AstTree, NodeId};

/// Priority list keyed by subtree height, popping all nodes of maximal
/// height at once (in id order, for determinism).
struct HeightQueue {
    heap: BinaryHeap<(u32, Reverse<u32>)>,
}

impl HeightQueue {
    fn new() -> Self {
        HeightQueue { heap: BinaryHeap::new() }
    }

    fn push(&mut self, id: NodeId, tree: &AstTree) {
        self.heap.push((tree.height(id), Reverse(id.0)));
    }

    fn peek_height(&self) -> Option<u32> {
        self.heap.peek().map(|(h, _)| *h)
    }

    fn pop_max(&mut self) -> Vec<NodeId> {
        let Some(max) = self.peek_height() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        while self.peek_height() == Some(max) {
            let (_, Reverse(id)) = self.heap.pop().expect("peeked");
            out.push(NodeId(id));
        }
        out
    }

    fn open(&mut self, id: NodeId, tree: &AstTree) {
        for &c in tree.children(id) {
            self.push(c, tree);
        }
    }
}

pub(super) fn match_trees(old: &AstTree, new: &AstTree, params: &DiffParams) -> MappingSet {
    let mut mapping = MappingSet::new(old.len(), new.len());
    top_down(old, new, params, &mut mapping);
    bottom_up(old, new, params, &mut mapping);
    mapping
}

/// Maps whole isomorphic subtrees pairwise. Pre-order ids of isomorphic
/// subtrees line up offset by offset.
fn map_subtree(old: &AstTree, new: &AstTree, a: NodeId, b: NodeId, mapping: &mut MappingSet) {
    debug_assert_eq!(old.size(a), new.size(b));
    for off in 0..old.size(a) {
        mapping.insert(NodeId(a.0 + off), NodeId(b.0 + off));
    }
}

fn subtree_unmapped(tree_is_old: bool, tree: &AstTree, root: NodeId, mapping: &MappingSet) -> bool {
    tree.subtree(root).all(|n| {
        if tree_is_old {
            !mapping.has_old(n)
        } else {
            !mapping.has_new(n)
        }
    })
}

fn top_down(old: &AstTree, new: &AstTree, params: &DiffParams, mapping: &mut MappingSet) {
    let mut q1 = HeightQueue::new();
    let mut q2 = HeightQueue::new();
    q1.push(old.root(), old);
    q2.push(new.root(), new);
    let mut ambiguous: Vec<(NodeId, NodeId)> = Vec::new();

    loop {
        let (Some(h1), Some(h2)) = (q1.peek_height(), q2.peek_height()) else {
            break;
        };
        if h1.min(h2) < params.min_height {
            break;
        }
        if h1 > h2 {
            for t in q1.pop_max() {
                q1.open(t, old);
            }
            continue;
        }
        if h2 > h1 {
            for t in q2.pop_max() {
                q2.open(t, new);
            }
            continue;
        }
        let ts1 = q1.pop_max();
        let ts2 = q2.pop_max();
        let mut buckets: HashMap<u64, Vec<NodeId>> = HashMap::new();
        for &t2 in &ts2 {
            buckets.entry(new.hash(t2)).or_default().push(t2);
        }
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
        for &t1 in &ts1 {
            if let Some(cands) = buckets.get(&old.hash(t1)) {
                for &t2 in cands {
                    if old.isomorphic(t1, new, t2) {
                        pairs.push((t1, t2));
                    }
                }
            }
        }
        let mut count1: HashMap<NodeId, u32> = HashMap::new();
        let mut count2: HashMap<NodeId, u32> = HashMap::new();
        for &(a, b) in &pairs {
            *count1.entry(a).or_insert(0) += 1;
            *count2.entry(b).or_insert(0) += 1;
        }
        let mut involved1: HashSet<NodeId> = HashSet::new();
        let mut involved2: HashSet<NodeId> = HashSet::new();
        for &(a, b) in &pairs {
            involved1.insert(a);
            involved2.insert(b);
            if count1[&a] == 1 && count2[&b] == 1 {
                map_subtree(old, new, a, b, mapping);
            } else {
                ambiguous.push((a, b));
            }
        }
        for &t in &ts1 {
            if !involved1.contains(&t) {
                q1.open(t, old);
            }
        }
        for &t in &ts2 {
            if !involved2.contains(&t) {
                q2.open(t, new);
            }
        }
    }

    // Ambiguous isomorphic pairs: rank by the dice similarity of their
    // parents under the mapping so far, then greedily take non-conflicting
    // pairs.
    let scored: Vec<(f64, NodeId, NodeId)> = ambiguous
        .into_iter()
        .map(|(a, b)| (parent_dice(old, new, a, b, mapping), a, b))
        .collect();
    let mut scored = scored;
    scored.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("dice is never NaN")
            .then(x.1 .0.cmp(&y.1 .0))
            .then(x.2 .0.cmp(&y.2 .0))
    });
    for (_, a, b) in scored {
        if subtree_unmapped(true, old, a, mapping) && subtree_unmapped(false, new, b, mapping) {
            map_subtree(old, new, a, b, mapping);
        }
    }
}

fn parent_dice(old: &AstTree, new: &AstTree, a: NodeId, b: NodeId, mapping: &MappingSet) -> f64 {
    match (old.parent(a), new.parent(b)) {
        (Some(pa), Some(pb)) => dice(old, pa, new, pb, mapping),
        _ => 0.0,
    }
}

fn bottom_up(old: &AstTree, new: &AstTree, params: &DiffParams, mapping: &mut MappingSet) {
    for t1 in old.post_order() {
        if mapping.has_old(t1) {
            continue;
        }
        if t1 == old.root() {
            // Roots are mapped unconditionally (same kind by construction:
            // both compilation units).
            let root2 = new.root();
            if !mapping.has_new(root2) && old.kind(t1) == new.kind(root2) {
                mapping.insert(t1, root2);
                recover(old, new, t1, root2, params, mapping);
            }
            continue;
        }
        if old.is_leaf(t1) {
            continue;
        }
        let candidates = container_candidates(old, new, t1, mapping);
        let mut best: Option<(f64, NodeId)> = None;
        for c in candidates {
            let d = dice(old, t1, new, c, mapping);
            let better = match best {
                None => true,
                Some((bd, bid)) => d > bd || (d == bd && c.0 < bid.0),
            };
            if better {
                best = Some((d, c));
            }
        }
        if let Some((d, t2)) = best {
            if d >= params.dice_threshold {
                mapping.insert(t1, t2);
                recover(old, new, t1, t2, params, mapping);
            }
        }
    }
}

/// Unmapped new-tree nodes of the same kind that contain a partner of one of
/// `t1`'s mapped descendants, in id order.
fn container_candidates(
    old: &AstTree,
    new: &AstTree,
    t1: NodeId,
    mapping: &MappingSet,
) -> Vec<NodeId> {
    let mut seen: HashSet<NodeId> = HashSet::new();
    let mut out = Vec::new();
    for d in old.subtree(t1).skip(1) {
        let Some(p) = mapping.get_new(d) else {
            continue;
        };
        let mut anc = new.parent(p);
        while let Some(a) = anc {
            if !seen.insert(a) {
                break; // this ancestor chain was already climbed
            }
            if !mapping.has_new(a) && new.kind(a) == old.kind(t1) {
                out.push(a);
            }
            anc = new.parent(a);
        }
    }
    out.sort_by_key(|n| n.0);
    out
}

/// Recovery inside a freshly mapped container pair: match remaining
/// descendants by unique hash (whole subtrees), then by unique kind
/// (single nodes, which is what turns a renamed leaf into an update).
fn recover(
    old: &AstTree,
    new: &AstTree,
    t1: NodeId,
    t2: NodeId,
    params: &DiffParams,
    mapping: &mut MappingSet,
) {
    if old.size(t1).max(new.size(t2)) > params.max_size {
        return;
    }
    let unmapped1: Vec<NodeId> = old.subtree(t1).skip(1).filter(|&n| !mapping.has_old(n)).collect();
    let unmapped2: Vec<NodeId> = new.subtree(t2).skip(1).filter(|&n| !mapping.has_new(n)).collect();

    let mut by_hash1: HashMap<u64, Vec<NodeId>> = HashMap::new();
    for &n in &unmapped1 {
        by_hash1.entry(old.hash(n)).or_default().push(n);
    }
    let mut by_hash2: HashMap<u64, Vec<NodeId>> = HashMap::new();
    for &n in &unmapped2 {
        by_hash2.entry(new.hash(n)).or_default().push(n);
    }
    for &a in &unmapped1 {
        if mapping.has_old(a) {
            continue;
        }
        let (Some(c1), Some(c2)) = (by_hash1.get(&old.hash(a)), by_hash2.get(&old.hash(a))) else {
            continue;
        };
        if c1.len() == 1 && c2.len() == 1 {
            let b = c2[0];
            if old.isomorphic(a, new, b)
                && subtree_unmapped(true, old, a, mapping)
                && subtree_unmapped(false, new, b, mapping)
            {
                map_subtree(old, new, a, b, mapping);
            }
        }
    }

    let mut by_kind1: HashMap<crate::ast::UnifiedKind, Vec<NodeId>> = HashMap::new();
    for &n in &unmapped1 {
        if !mapping.has_old(n) {
            by_kind1.entry(old.kind(n)).or_default().push(n);
        }
    }
    let mut by_kind2: HashMap<crate::ast::UnifiedKind, Vec<NodeId>> = HashMap::new();
    for &n in &unmapped2 {
        if !mapping.has_new(n) {
            by_kind2.entry(new.kind(n)).or_default().push(n);
        }
    }
    let mut kinds: Vec<_> = by_kind1.keys().copied().collect();
    kinds.sort();
    for kind in kinds {
        let (Some(k1), Some(k2)) = (by_kind1.get(&kind), by_kind2.get(&kind)) else {
            continue;
        };
        if k1.len() == 1 && k2.len() == 1 {
            let (a, b) = (k1[0], k2[0]);
            // A deeper recursion may have claimed either node already.
            if mapping.has_old(a) || mapping.has_new(b) {
                continue;
            }
            mapping.insert(a, b);
            // Recurse so that descendants that were ambiguous at this level
            // (duplicate tokens, repeated kinds) become unique inside the
            // newly mapped pair.
            if !old.is_leaf(a) || !new.is_leaf(b) {
                recover(old, new, a, b, params, mapping);
            }
        }
    }

    align_children_by_kind(old, new, t1, t2, params, mapping);
}

/// Order-preserving alignment of the direct children of a mapped pair:
/// an LCS anchored on already-mapped pairs, where unmapped children of equal
/// kind may pair positionally. This is what keeps repeated tokens (braces,
/// keywords) matched when a sibling is inserted or removed.
fn align_children_by_kind(
    old: &AstTree,
    new: &AstTree,
    t1: NodeId,
    t2: NodeId,
    params: &DiffParams,
    mapping: &mut MappingSet,
) {
    let c1 = old.children(t1).to_vec();
    let c2 = new.children(t2).to_vec();
    if c1.is_empty() || c2.is_empty() {
        return;
    }
    let aligned = lcs_pairs(&c1, &c2, |a, b| {
        if mapping.get_new(a) == Some(b) {
            return true;
        }
        !mapping.has_old(a) && !mapping.has_new(b) && old.kind(a) == new.kind(b)
    });
    for (a, b) in aligned {
        if mapping.has_old(a) || mapping.has_new(b) {
            continue;
        }
        mapping.insert(a, b);
        if !old.is_leaf(a) || !new.is_leaf(b) {
            recover(old, new, a, b, params, mapping);
        }
    }
}
