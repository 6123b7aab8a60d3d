//! Grammar-kind → unified-kind tables, loaded from the versioned resource
//! files shipped next to this module.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::UnifiedKind;
use crate::lang::Language;

const JAVA_TABLE: &str = include_str!("java_kinds.txt");
const KOTLIN_TABLE: &str = include_str!("kotlin_kinds.txt");

pub(crate) struct KindTable {
    map: HashMap<&'static str, UnifiedKind>,
}

impl KindTable {
    fn load(source: &'static str, name: &str) -> Self {
        let mut map = HashMap::new();
        for (lineno, line) in source.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(grammar_kind), Some(unified)) = (parts.next(), parts.next()) else {
                panic!("{name}:{}: malformed mapping line {line:?}", lineno + 1);
            };
            let kind = UnifiedKind::from_table_name(unified)
                .unwrap_or_else(|| panic!("{name}:{}: unknown unified kind {unified:?}", lineno + 1));
            if map.insert(grammar_kind, kind).is_some() {
                panic!("{name}:{}: duplicate mapping for {grammar_kind:?}", lineno + 1);
            }
        }
        KindTable { map }
    }

    /// Unified kind for a grammar node kind; unmapped kinds pass through as
    /// `Other` carrying the grammar's own name.
    pub(crate) fn lookup(&self, grammar_kind: &'static str) -> UnifiedKind {
        self.map
            .get(grammar_kind)
            .copied()
            .unwrap_or(UnifiedKind::Other(grammar_kind))
    }
}

pub(crate) fn table(language: Language) -> &'static KindTable {
    static JAVA: OnceLock<KindTable> = OnceLock::new();
    static KOTLIN: OnceLock<KindTable> = OnceLock::new();
    match language {
        Language::Java => JAVA.get_or_init(|| KindTable::load(JAVA_TABLE, "java_kinds.txt")),
        Language::Kotlin => KOTLIN.get_or_init(|| KindTable::load(KOTLIN_TABLE, "kotlin_kinds.txt")),
        Language::Other => unreachable!("no grammar for Other"),
    }
}
