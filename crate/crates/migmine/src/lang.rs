//! Language classification and source-line counting.

use std::fmt;

use serde::Serialize;

/// The languages tracked by the analysis. Everything that is neither Java
/// nor Kotlin (resources, build scripts, docs, ...) is `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Kotlin,
    Other,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Java => write!(f, "Java"),
            Language::Kotlin => write!(f, "Kotlin"),
            Language::Other => write!(f, "Other"),
        }
    }
}

/// Classifies a repository-relative path by file extension.
///
/// `.java` is Java; `.kt` and `.kts` are Kotlin; everything else (including
/// extensionless paths) is Other. Pure function of the path.
pub fn detect_language(path: &str) -> Language {
    let basename = path.rsplit('/').next().unwrap_or(path);
    match basename.rsplit_once('.').map(|(_, ext)| ext) {
        Some("java") => Language::Java,
        Some("kt") | Some("kts") => Language::Kotlin,
        _ => Language::Other,
    }
}

/// Counts source lines: lines that are neither blank nor comment-only.
///
/// For Java and Kotlin, `//` line comments and `/* */` block comments are
/// recognized by a plain line scanner; an unterminated block comment runs to
/// end of file. The scanner does not lex string literals, so a comment
/// marker inside a string is treated as a comment start — a known
/// approximation. `Other` content counts non-blank lines.
pub fn count_sloc(content: &str, language: Language) -> u64 {
    match language {
        Language::Java | Language::Kotlin => count_commented(content),
        Language::Other => content.lines().filter(|l| !l.trim().is_empty()).count() as u64,
    }
}

fn count_commented(content: &str) -> u64 {
    let mut sloc = 0u64;
    let mut in_block = false;
    for line in content.lines() {
        let mut rest = line;
        let mut has_code = false;
        loop {
            if in_block {
                match rest.find("*/") {
                    Some(i) => {
                        rest = &rest[i + 2..];
                        in_block = false;
                    }
                    None => break,
                }
            } else {
                let line_start = rest.find("//");
                let block_start = rest.find("/*");
                match (line_start, block_start) {
                    (Some(l), Some(b)) if l <= b => {
                        has_code |= !rest[..l].trim().is_empty();
                        break;
                    }
                    (Some(l), None) => {
                        has_code |= !rest[..l].trim().is_empty();
                        break;
                    }
                    (_, Some(b)) => {
                        has_code |= !rest[..b].trim().is_empty();
                        rest = &rest[b + 2..];
                        in_block = true;
                    }
                    (None, None) => {
                        has_code |= !rest.trim().is_empty();
                        break;
                    }
                }
            }
        }
        if has_code {
            sloc += 1;
        }
    }
    sloc
}
