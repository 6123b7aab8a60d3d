//! Unified abstract syntax trees for Java and Kotlin.
//!
//! Both grammars are parsed with tree-sitter and lowered into one
//! [`AstTree`] model sharing a single [`UnifiedKind`] vocabulary, so the
//! differ and the pattern miner never care which language a file was in.
//! The grammar-kind → unified-kind tables live in `java_kinds.txt` and
//! `kotlin_kinds.txt` next to this module; kinds missing from the tables
//! surface as [`UnifiedKind::Other`].
//!
//! Parsing is error-tolerant: historical commits routinely contain broken
//! code, and a hard failure would silently drop migration evidence. Invalid
//! regions come back as `Other("error")` subtrees instead.
//!
//! Comments and whitespace own no node. All other tokens, punctuation
//! included, are kept as leaves so that leaf spans tile the file.

mod mapping;

use std::fmt;
use std::io::Write;

use serde::Serializer;

use crate::lang::Language;

/// Node kinds shared by both language frontends.
///
/// Grammar kinds without a dedicated variant are carried verbatim in
/// `Other`; the string is the grammar's own node kind (or `"error"` for
/// unparsable regions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnifiedKind {
    CompilationUnit,
    Class,
    Method,
    Property,
    LocalVariable,
    Parameter,
    Invocation,
    If,
    Loop,
    Switch,
    Try,
    Assignment,
    Return,
    Block,
    Identifier,
    Literal,
    Other(&'static str),
}

impl UnifiedKind {
    /// Parses the spelling used in the mapping tables.
    pub(crate) fn from_table_name(name: &str) -> Option<UnifiedKind> {
        Some(match name {
            "CompilationUnit" => UnifiedKind::CompilationUnit,
            "Class" => UnifiedKind::Class,
            "Method" => UnifiedKind::Method,
            "Property" => UnifiedKind::Property,
            "LocalVariable" => UnifiedKind::LocalVariable,
            "Parameter" => UnifiedKind::Parameter,
            "Invocation" => UnifiedKind::Invocation,
            "If" => UnifiedKind::If,
            "Loop" => UnifiedKind::Loop,
            "Switch" => UnifiedKind::Switch,
            "Try" => UnifiedKind::Try,
            "Assignment" => UnifiedKind::Assignment,
            "Return" => UnifiedKind::Return,
            "Block" => UnifiedKind::Block,
            "Identifier" => UnifiedKind::Identifier,
            "Literal" => UnifiedKind::Literal,
            _ => return None,
        })
    }

    /// True for the kinds that provide the "enclosing" context of a change:
    /// declarations and block-level container statements.
    pub fn is_enclosing_context(self) -> bool {
        matches!(
            self,
            UnifiedKind::CompilationUnit
                | UnifiedKind::Class
                | UnifiedKind::Method
                | UnifiedKind::If
                | UnifiedKind::Loop
                | UnifiedKind::Switch
                | UnifiedKind::Try
        )
    }
}

impl fmt::Display for UnifiedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnifiedKind::CompilationUnit => write!(f, "Compilation Unit"),
            UnifiedKind::Class => write!(f, "Class"),
            UnifiedKind::Method => write!(f, "Method"),
            UnifiedKind::Property => write!(f, "Property"),
            UnifiedKind::LocalVariable => write!(f, "Local Variable"),
            UnifiedKind::Parameter => write!(f, "Parameter"),
            UnifiedKind::Invocation => write!(f, "Invocation"),
            UnifiedKind::If => write!(f, "If"),
            UnifiedKind::Loop => write!(f, "Loop"),
            UnifiedKind::Switch => write!(f, "Switch"),
            UnifiedKind::Try => write!(f, "Try"),
            UnifiedKind::Assignment => write!(f, "Assignment"),
            UnifiedKind::Return => write!(f, "Return"),
            UnifiedKind::Block => write!(f, "Block"),
            UnifiedKind::Identifier => write!(f, "Identifier"),
            UnifiedKind::Literal => write!(f, "Literal"),
            UnifiedKind::Other(name) => write!(f, "{name}"),
        }
    }
}

impl serde::Serialize for UnifiedKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Index of a node within one [`AstTree`], assigned in pre-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct NodeData {
    kind: UnifiedKind,
    value: Option<String>,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    span: (usize, usize),
    /// Number of nodes in the subtree, self included.
    size: u32,
    /// Height of the subtree; a leaf has height 1.
    height: u32,
    /// Structural hash over kind, value and children, for isomorphism tests.
    hash: u64,
}

/// An immutable syntax tree with pre-order node ids.
///
/// Pre-order numbering means the descendants of node `n` are exactly the ids
/// in `(n, n + size(n))`, which the differ leans on heavily.
#[derive(Debug, Clone)]
pub struct AstTree {
    language: Language,
    nodes: Vec<NodeData>,
}

impl AstTree {
    pub fn language(&self) -> Language {
        self.language
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn kind(&self, id: NodeId) -> UnifiedKind {
        self.nodes[id.index()].kind
    }

    pub fn value(&self, id: NodeId) -> Option<&str> {
        self.nodes[id.index()].value.as_deref()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn span(&self, id: NodeId) -> (usize, usize) {
        self.nodes[id.index()].span
    }

    /// Subtree size, self included.
    pub fn size(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].size
    }

    /// Subtree height; leaves have height 1.
    pub fn height(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].height
    }

    pub fn hash(&self, id: NodeId) -> u64 {
        self.nodes[id.index()].hash
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id.index()].children.is_empty()
    }

    /// True when `a` lies strictly inside the subtree rooted at `b`.
    pub fn is_descendant_of(&self, a: NodeId, b: NodeId) -> bool {
        a.0 > b.0 && a.0 < b.0 + self.size(b)
    }

    /// All ids in pre-order (which is just `0..len`).
    pub fn pre_order(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Ids of the subtree rooted at `id`, in pre-order, self included.
    pub fn subtree(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (id.0..id.0 + self.size(id)).map(NodeId)
    }

    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root(), 0usize)];
        if self.nodes.is_empty() {
            return out;
        }
        while let Some((id, child_idx)) = stack.pop() {
            let children = self.children(id);
            if child_idx < children.len() {
                stack.push((id, child_idx + 1));
                stack.push((children[child_idx], 0));
            } else {
                out.push(id);
            }
        }
        out
    }

    /// Structural equality of two subtrees: kind, value and child order,
    /// node ids ignored.
    pub fn isomorphic(&self, a: NodeId, other: &AstTree, b: NodeId) -> bool {
        if self.size(a) != other.size(b) || self.hash(a) != other.hash(b) {
            return false;
        }
        // Hash equality is only a candidate test; verify structurally.
        // Pre-order blocks of isomorphic subtrees line up index by index.
        for off in 0..self.size(a) {
            let x = NodeId(a.0 + off);
            let y = NodeId(b.0 + off);
            if self.kind(x) != other.kind(y)
                || self.nodes[x.index()].value != other.nodes[y.index()].value
                || self.children(x).len() != other.children(y).len()
            {
                return false;
            }
        }
        true
    }

    /// Unified kind of the nearest ancestor that is an enclosing context
    /// (method, class, container statement); `CompilationUnit` if none.
    pub fn enclosing_kind(&self, id: NodeId) -> Result<UnifiedKind, UnknownNode> {
        if !self.contains(id) {
            return Err(UnknownNode(id));
        }
        let mut cur = self.parent(id);
        while let Some(p) = cur {
            if self.kind(p).is_enclosing_context() {
                return Ok(self.kind(p));
            }
            cur = self.parent(p);
        }
        Ok(UnifiedKind::CompilationUnit)
    }

    /// Writes the tree as indented `kind value span` lines, one per node.
    /// Debug aid for authoring fixtures.
    pub fn dump<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        fn rec<W: Write>(tree: &AstTree, id: NodeId, depth: usize, out: &mut W) -> std::io::Result<()> {
            let (start, end) = tree.span(id);
            match tree.value(id) {
                Some(v) => writeln!(out, "{}{} {:?} [{start}..{end}]", "  ".repeat(depth), tree.kind(id), v)?,
                None => writeln!(out, "{}{} [{start}..{end}]", "  ".repeat(depth), tree.kind(id))?,
            }
            for &c in tree.children(id) {
                rec(tree, c, depth + 1, out)?;
            }
            Ok(())
        }
        rec(self, self.root(), 0, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("node {0:?} does not exist in this tree")]
pub struct UnknownNode(pub NodeId);

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    /// The bytes are not text (NUL bytes in the leading window).
    #[error("content is not decodable text")]
    UndecodableContent,
    #[error("cannot parse {0} sources")]
    UnsupportedLanguage(Language),
}

/// True when the leading window of `bytes` contains a NUL, mirroring git's
/// binary sniff.
pub fn looks_binary(bytes: &[u8]) -> bool {
    let window = &bytes[..bytes.len().min(8000)];
    window.contains(&0)
}

/// Parses raw blob bytes, decoding lossily; binary content is rejected as
/// [`ParseError::UndecodableContent`].
pub fn parse_bytes(content: &[u8], language: Language) -> Result<AstTree, ParseError> {
    if looks_binary(content) {
        return Err(ParseError::UndecodableContent);
    }
    parse(&String::from_utf8_lossy(content), language)
}

/// Parses Java or Kotlin source into a unified tree.
///
/// The root is always `CompilationUnit`. Syntactically invalid files still
/// produce a tree; error regions appear as `Other("error")`.
pub fn parse(content: &str, language: Language) -> Result<AstTree, ParseError> {
    let ts_language: tree_sitter::Language = match language {
        Language::Java => tree_sitter_java::LANGUAGE.into(),
        Language::Kotlin => tree_sitter_kotlin_ng::LANGUAGE.into(),
        Language::Other => return Err(ParseError::UnsupportedLanguage(language)),
    };
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&ts_language)
        .expect("grammar version mismatch");
    let tree = parser
        .parse(content, None)
        .expect("tree-sitter parse returned no tree");
    Ok(lower(tree.root_node(), content, language))
}

/// Lowers a tree-sitter CST into the unified model, assigning pre-order ids.
fn lower(root: tree_sitter::Node<'_>, src: &str, language: Language) -> AstTree {
    let table = mapping::table(language);
    let mut nodes: Vec<NodeData> = Vec::new();
    build(root, None, src, table, &mut nodes);
    if nodes.is_empty() {
        // Degenerate input (e.g. file of only comments): synthesize the unit.
        nodes.push(NodeData {
            kind: UnifiedKind::CompilationUnit,
            value: None,
            parent: None,
            children: Vec::new(),
            span: (0, src.len()),
            size: 1,
            height: 1,
            hash: 0,
        });
    }
    nodes[0].kind = UnifiedKind::CompilationUnit;
    nodes[0].value = None;
    let mut tree = AstTree { language, nodes };
    finalize(&mut tree);
    tree
}

/// Skip comments (grammar extras) and zero-width MISSING recovery nodes.
/// Error regions are always kept, whatever the grammar flags them as.
fn keep(node: &tree_sitter::Node<'_>) -> bool {
    if node.is_error() {
        return true;
    }
    !node.is_extra() && !node.is_missing() && !node.kind().ends_with("comment")
}

fn build(
    ts: tree_sitter::Node<'_>,
    parent: Option<NodeId>,
    src: &str,
    table: &mapping::KindTable,
    nodes: &mut Vec<NodeData>,
) -> Option<NodeId> {
    if !keep(&ts) {
        return None;
    }
    let id = NodeId(nodes.len() as u32);
    let kind = if ts.is_error() {
        UnifiedKind::Other("error")
    } else {
        table.lookup(ts.kind())
    };
    nodes.push(NodeData {
        kind,
        value: None,
        parent,
        children: Vec::new(),
        span: (ts.start_byte(), ts.end_byte()),
        size: 0,
        height: 0,
        hash: 0,
    });
    let mut children = Vec::new();
    for i in 0..ts.child_count() as u32 {
        if let Some(child) = build(ts.child(i).expect("child in range"), Some(id), src, table, nodes) {
            children.push(child);
        }
    }
    let value = node_value(&ts, kind, children.is_empty(), src);
    let data = &mut nodes[id.index()];
    data.children = children;
    data.value = value;
    Some(id)
}

/// Value rules: leaves carry their token text; named declarations carry the
/// declared name; invocations carry the callee name.
fn node_value(
    ts: &tree_sitter::Node<'_>,
    kind: UnifiedKind,
    is_leaf: bool,
    src: &str,
) -> Option<String> {
    let text = |n: tree_sitter::Node<'_>| src.get(n.byte_range()).map(|s| s.to_string());
    match kind {
        UnifiedKind::Class
        | UnifiedKind::Method
        | UnifiedKind::Property
        | UnifiedKind::LocalVariable
        | UnifiedKind::Parameter => declared_name(ts, src),
        UnifiedKind::Invocation => callee_name(ts, src),
        _ if is_leaf => text(*ts),
        _ => None,
    }
}

fn declared_name(ts: &tree_sitter::Node<'_>, src: &str) -> Option<String> {
    if let Some(name) = ts.child_by_field_name("name") {
        return src.get(name.byte_range()).map(|s| s.to_string());
    }
    // Java field/local declarations name the variable inside a declarator;
    // Kotlin properties inside a variable_declaration. One level down covers
    // both, then fall back to the first direct identifier child.
    for i in 0..ts.named_child_count() as u32 {
        let child = ts.named_child(i)?;
        match child.kind() {
            "variable_declarator" | "variable_declaration" => {
                return declared_name(&child, src);
            }
            "identifier" => return src.get(child.byte_range()).map(|s| s.to_string()),
            _ => {}
        }
    }
    None
}

fn callee_name(ts: &tree_sitter::Node<'_>, src: &str) -> Option<String> {
    let text = |n: tree_sitter::Node<'_>| src.get(n.byte_range()).map(|s| s.to_string());
    if let Some(name) = ts.child_by_field_name("name") {
        return text(name);
    }
    match ts.kind() {
        // new Foo(...) — the constructed type names the callee.
        "object_creation_expression" => ts.child_by_field_name("type").and_then(text),
        // Kotlin call_expression: callee is the first child; for a
        // navigation chain take the rightmost identifier.
        "call_expression" => {
            let callee = ts.child(0)?;
            match callee.kind() {
                "identifier" => text(callee),
                "navigation_expression" => {
                    let mut last = None;
                    for i in 0..callee.named_child_count() as u32 {
                        let c = callee.named_child(i)?;
                        if c.kind() == "identifier" {
                            last = Some(c);
                        }
                    }
                    last.and_then(text)
                }
                _ => None,
            }
        }
        _ => None,
    }
}

/// Computes size, height and structural hash bottom-up (post-order by id
/// descending works because ids are pre-order).
fn finalize(tree: &mut AstTree) {
    for i in (0..tree.nodes.len()).rev() {
        let mut size = 1u32;
        let mut height = 0u32;
        let mut hash = fnv1a(0xcbf29ce484222325, kind_tag(tree.nodes[i].kind));
        if let Some(v) = &tree.nodes[i].value {
            hash = fnv1a_bytes(hash, v.as_bytes());
        }
        for c in tree.nodes[i].children.clone() {
            let child = &tree.nodes[c.index()];
            size += child.size;
            height = height.max(child.height);
            hash = fnv1a(hash, child.hash);
        }
        let node = &mut tree.nodes[i];
        node.size = size;
        node.height = height + 1;
        node.hash = hash;
    }
}

fn kind_tag(kind: UnifiedKind) -> u64 {
    match kind {
        UnifiedKind::CompilationUnit => 1,
        UnifiedKind::Class => 2,
        UnifiedKind::Method => 3,
        UnifiedKind::Property => 4,
        UnifiedKind::LocalVariable => 5,
        UnifiedKind::Parameter => 6,
        UnifiedKind::Invocation => 7,
        UnifiedKind::If => 8,
        UnifiedKind::Loop => 9,
        UnifiedKind::Switch => 10,
        UnifiedKind::Try => 11,
        UnifiedKind::Assignment => 12,
        UnifiedKind::Return => 13,
        UnifiedKind::Block => 14,
        UnifiedKind::Identifier => 15,
        UnifiedKind::Literal => 16,
        UnifiedKind::Other(name) => fnv1a_bytes(0x100, name.as_bytes()),
    }
}

fn fnv1a(state: u64, value: u64) -> u64 {
    let mut h = state;
    for b in value.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn fnv1a_bytes(state: u64, bytes: &[u8]) -> u64 {
    let mut h = state;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Test-oriented constructor: builds a tree directly from nested
/// `(kind, value, children)` tuples. Used by the differ's unit tests and the
/// mutation harness, which need trees that never came from a parser.
pub fn build_tree(language: Language, root: TreeSpec) -> AstTree {
    fn rec(spec: TreeSpec, parent: Option<NodeId>, nodes: &mut Vec<NodeData>) {
        let id = NodeId(nodes.len() as u32);
        nodes.push(NodeData {
            kind: spec.kind,
            value: spec.value,
            parent,
            children: Vec::new(),
            span: (0, 0),
            size: 0,
            height: 0,
            hash: 0,
        });
        let mut children = Vec::new();
        for child in spec.children {
            children.push(NodeId(nodes.len() as u32));
            rec(child, Some(id), nodes);
        }
        nodes[id.index()].children = children;
    }
    let mut nodes = Vec::new();
    rec(root, None, &mut nodes);
    let mut tree = AstTree { language, nodes };
    finalize(&mut tree);
    tree
}

/// Declarative node description for [`build_tree`].
#[derive(Debug, Clone)]
pub struct TreeSpec {
    pub kind: UnifiedKind,
    pub value: Option<String>,
    pub children: Vec<TreeSpec>,
}

impl TreeSpec {
    pub fn new(kind: UnifiedKind) -> Self {
        TreeSpec { kind, value: None, children: Vec::new() }
    }

    pub fn valued(kind: UnifiedKind, value: &str) -> Self {
        TreeSpec { kind, value: Some(value.to_string()), children: Vec::new() }
    }

    pub fn with(mut self, child: TreeSpec) -> Self {
        self.children.push(child);
        self
    }
}
