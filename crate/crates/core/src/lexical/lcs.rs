//! Lexical Complexity Score: `1 + N_cf + N_op / 2`, counted with per-language
//! regular expressions after comments and string literals are masked out.

use crate::model::LanguageId;
use crate::scalar::Scalar;
use regex::Regex;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Replacement for every masked character. Neither whitespace nor a word
/// character, so it never creates a word boundary or a spacing match.
pub const MASK_CHAR: char = '\u{1f}';

/// Descriptive LCS histogram edges: below 20 is the common mass, above 80 the
/// long tail.
pub const LCS_BUCKET_EDGES: [u64; 2] = [20, 80];

const DEFAULT_RULES: &str = include_str!("../../assets/lcs_rules.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct StringDelim {
    open: &'static str,
    close: &'static str,
    escapes: bool,
    multiline: bool,
}

const fn delim(open: &'static str, close: &'static str, escapes: bool, multiline: bool) -> StringDelim {
    StringDelim { open, close, escapes, multiline }
}

const DQ: StringDelim = delim("\"", "\"", true, false);
const SQ: StringDelim = delim("'", "'", true, false);
const SQ_RAW: StringDelim = delim("'", "'", false, false);
const TEMPLATE: StringDelim = delim("`", "`", true, true);
const GO_RAW: StringDelim = delim("`", "`", false, true);
const TRIPLE_DQ: StringDelim = delim("\"\"\"", "\"\"\"", true, true);
const TRIPLE_SQ: StringDelim = delim("'''", "'''", true, true);

#[derive(Debug, Clone, Copy)]
struct LexSyntax {
    line_comments: &'static [&'static str],
    block_comments: &'static [(&'static str, &'static str)],
    strings: &'static [StringDelim],
    /// `#` only opens a comment at line start or after whitespace (shells).
    hash_after_space: bool,
    /// `'x'` and `'\n'` are literals; any other `'` is a lifetime or label.
    rust_quotes: bool,
}

const C_BLOCK: &[(&str, &str)] = &[("/*", "*/")];

fn syntax_for(language: LanguageId) -> LexSyntax {
    use LanguageId::*;
    let base = LexSyntax {
        line_comments: &["//"],
        block_comments: C_BLOCK,
        strings: &[DQ, SQ],
        hash_after_space: false,
        rust_quotes: false,
    };
    match language {
        C | Cpp | Java | CSharp | Kotlin | Swift | Scala => base,
        JavaScript | TypeScript => LexSyntax { strings: &[DQ, SQ, TEMPLATE], ..base },
        Go => LexSyntax { strings: &[DQ, SQ, GO_RAW], ..base },
        Rust => LexSyntax { strings: &[DQ], rust_quotes: true, ..base },
        Php => LexSyntax { line_comments: &["//", "#"], ..base },
        Python => LexSyntax {
            line_comments: &["#"],
            block_comments: &[],
            strings: &[TRIPLE_DQ, TRIPLE_SQ, DQ, SQ],
            ..base
        },
        Ruby => LexSyntax { line_comments: &["#"], block_comments: &[("=begin", "=end")], ..base },
        Shell => LexSyntax {
            line_comments: &["#"],
            block_comments: &[],
            strings: &[DQ, SQ_RAW],
            hash_after_space: true,
            ..base
        },
        Sql => LexSyntax {
            line_comments: &["--"],
            strings: &[SQ_RAW],
            ..base
        },
        JupyterNotebook | Html | Css | Markdown | Yaml | Other => LexSyntax { strings: &[DQ], ..base },
    }
}

fn push_masked(out: &mut String, text: &str) {
    out.extend(text.chars().map(|c| if c == '\n' { '\n' } else { MASK_CHAR }));
}

/// Mask comments and string literals of `content` for `language`, keeping
/// line breaks so offsets stay line-aligned.
pub fn mask_comments_and_strings(content: &str, language: LanguageId) -> String {
    let syntax = syntax_for(language);
    let mut out = String::with_capacity(content.len());
    let mut i = 0;
    let mut prev: Option<char> = None;
    while i < content.len() {
        let rest = &content[i..];
        if let Some(len) = comment_len(rest, prev, &syntax) {
            push_masked(&mut out, &rest[..len]);
            i += len;
            prev = Some(MASK_CHAR);
            continue;
        }
        if let Some(len) = string_len(rest, &syntax) {
            push_masked(&mut out, &rest[..len]);
            i += len;
            prev = Some(MASK_CHAR);
            continue;
        }
        let c = rest.chars().next().expect("non-empty");
        out.push(c);
        prev = Some(c);
        i += c.len_utf8();
    }
    out
}

fn comment_len(rest: &str, prev: Option<char>, syntax: &LexSyntax) -> Option<usize> {
    for marker in syntax.line_comments {
        if rest.starts_with(marker) {
            if *marker == "#" && syntax.hash_after_space && !prev.is_none_or(char::is_whitespace) {
                continue;
            }
            return Some(rest.find('\n').unwrap_or(rest.len()));
        }
    }
    for (open, close) in syntax.block_comments {
        if let Some(body) = rest.strip_prefix(open) {
            return Some(body.find(close).map_or(rest.len(), |end| open.len() + end + close.len()));
        }
    }
    None
}

fn string_len(rest: &str, syntax: &LexSyntax) -> Option<usize> {
    if syntax.rust_quotes && rest.starts_with('\'') {
        return rust_char_len(rest);
    }
    let delim = syntax.strings.iter().find(|d| rest.starts_with(d.open))?;
    let bytes = rest.as_bytes();
    let mut j = delim.open.len();
    while j < rest.len() {
        if delim.escapes && bytes[j] == b'\\' {
            // Skip the escaped character, whatever its width.
            j += 1;
            if let Some(c) = rest[j..].chars().next() {
                j += c.len_utf8();
            }
            continue;
        }
        if rest[j..].starts_with(delim.close) {
            return Some(j + delim.close.len());
        }
        if bytes[j] == b'\n' && !delim.multiline {
            return Some(j);
        }
        j += rest[j..].chars().next().map_or(1, char::len_utf8);
    }
    Some(rest.len())
}

fn rust_char_len(rest: &str) -> Option<usize> {
    let mut chars = rest.char_indices().skip(1);
    let (_, first) = chars.next()?;
    if first == '\\' {
        // Escaped char literal: scan to the closing quote on this line.
        let close = rest[1..].find(['\'', '\n'])?;
        return (rest.as_bytes()[1 + close] == b'\'').then_some(close + 2);
    }
    match chars.next() {
        Some((idx, '\'')) => Some(idx + 1),
        _ => None,
    }
}

/// Control-flow and logical-operator patterns for one language.
#[derive(Debug, Clone)]
pub struct LcsRuleSet {
    pub language: LanguageId,
    pub control_flow_patterns: Vec<String>,
    pub logical_op_patterns: Vec<String>,
    control_flow: Vec<Regex>,
    logical_ops: Vec<Regex>,
}

impl LcsRuleSet {
    pub fn new(
        language: LanguageId,
        control_flow_patterns: Vec<String>,
        logical_op_patterns: Vec<String>,
    ) -> Result<Self, LcsRulesError> {
        if control_flow_patterns.is_empty() || logical_op_patterns.is_empty() {
            return Err(LcsRulesError::EmptyPatternList(language));
        }
        let compile = |patterns: &[String]| -> Result<Vec<Regex>, LcsRulesError> {
            patterns
                .iter()
                .map(|p| {
                    Regex::new(p).map_err(|source| LcsRulesError::BadPattern {
                        language,
                        pattern: p.clone(),
                        source,
                    })
                })
                .collect()
        };
        Ok(Self {
            language,
            control_flow: compile(&control_flow_patterns)?,
            logical_ops: compile(&logical_op_patterns)?,
            control_flow_patterns,
            logical_op_patterns,
        })
    }

    fn count(patterns: &[Regex], text: &str) -> u64 {
        patterns.iter().map(|re| re.find_iter(text).count() as u64).sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LcsRulesError {
    #[error("cannot read rule file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed rule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported rule file version {0}")]
    Version(u32),
    #[error("unknown language {0:?} in rule file")]
    UnknownLanguage(String),
    #[error("empty pattern list for {0}")]
    EmptyPatternList(LanguageId),
    #[error("rule file has no fallback rule set for \"other\"")]
    MissingFallback,
    #[error("bad pattern {pattern:?} for {language}: {source}")]
    BadPattern {
        language: LanguageId,
        pattern: String,
        source: regex::Error,
    },
}

#[derive(Deserialize)]
struct RuleFile {
    version: u32,
    languages: BTreeMap<String, RuleEntry>,
}

#[derive(Deserialize)]
struct RuleEntry {
    control_flow: Vec<String>,
    logical_ops: Vec<String>,
}

/// All per-language rule sets plus the fallback used for unlisted languages.
#[derive(Debug, Clone)]
pub struct LcsRules {
    sets: BTreeMap<LanguageId, LcsRuleSet>,
}

impl LcsRules {
    pub const VERSION: u32 = 1;

    /// The rule table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_RULES).expect("shipped rule table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, LcsRulesError> {
        let file: RuleFile = serde_json::from_str(text)?;
        if file.version != Self::VERSION {
            return Err(LcsRulesError::Version(file.version));
        }
        let mut sets = BTreeMap::new();
        for (name, entry) in file.languages {
            let language = LanguageId::parse(&name).ok_or(LcsRulesError::UnknownLanguage(name))?;
            sets.insert(language, LcsRuleSet::new(language, entry.control_flow, entry.logical_ops)?);
        }
        if !sets.contains_key(&LanguageId::Other) {
            return Err(LcsRulesError::MissingFallback);
        }
        Ok(Self { sets })
    }

    pub fn load(path: &Path) -> Result<Self, LcsRulesError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn rule_set(&self, language: LanguageId) -> &LcsRuleSet {
        self.sets
            .get(&language)
            .or_else(|| self.sets.get(&LanguageId::Other))
            .expect("fallback rule set present")
    }

    pub fn languages(&self) -> impl Iterator<Item = LanguageId> + '_ {
        self.sets.keys().copied()
    }

    pub fn profile<S: Scalar>(&self, content: &str, language: LanguageId) -> LexicalProfile<S> {
        let rules = self.rule_set(language);
        let masked = mask_comments_and_strings(content, language);
        LexicalProfile::from_counts(
            LcsRuleSet::count(&rules.control_flow, &masked),
            LcsRuleSet::count(&rules.logical_ops, &masked),
        )
    }
}

impl Default for LcsRules {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalProfile<S> {
    pub n_cf: u64,
    pub n_op: u64,
    pub lcs: S,
}

impl<S: Scalar> LexicalProfile<S> {
    pub fn from_counts(n_cf: u64, n_op: u64) -> Self {
        let lcs = S::one() + S::from_count(n_cf) + S::from_count(n_op) * S::half();
        Self { n_cf, n_op, lcs }
    }
}

/// Profile `content` with the shipped rule table.
pub fn lexical_profile<S: Scalar>(content: &str, language: LanguageId) -> LexicalProfile<S> {
    static RULES: std::sync::OnceLock<LcsRules> = std::sync::OnceLock::new();
    RULES.get_or_init(LcsRules::builtin).profile(content, language)
}
