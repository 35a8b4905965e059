//! Token-scan reference for control-flow and logical-operator counts.
//!
//! Written without regular expressions: a character scanner skips comments
//! and literals, splits the rest into identifier words and operator tokens,
//! and looks words up in per-language keyword lists.

use codeprov_core::model::LanguageId;

struct Lexicon {
    line_comments: &'static [&'static str],
    block_comment: Option<(&'static str, &'static str)>,
    /// (open/close delimiter, backslash escapes, may span lines)
    quotes: &'static [(&'static str, bool, bool)],
    hash_needs_space: bool,
    keywords: &'static [&'static str],
    word_ops: &'static [&'static str],
    symbol_ops: bool,
    ternary: bool,
    case_insensitive: bool,
}

const C_LIKE: Lexicon = Lexicon {
    line_comments: &["//"],
    block_comment: Some(("/*", "*/")),
    quotes: &[("\"", true, false), ("'", true, false)],
    hash_needs_space: false,
    keywords: &["if", "for", "while", "case", "catch"],
    word_ops: &[],
    symbol_ops: true,
    ternary: true,
    case_insensitive: false,
};

fn lexicon(language: LanguageId) -> Lexicon {
    use LanguageId::*;
    match language {
        Python => Lexicon {
            line_comments: &["#"],
            block_comment: None,
            quotes: &[("\"\"\"", true, true), ("'''", true, true), ("\"", true, false), ("'", true, false)],
            keywords: &["if", "elif", "for", "while", "except"],
            word_ops: &["and", "or", "not"],
            symbol_ops: false,
            ternary: false,
            ..C_LIKE
        },
        JavaScript | TypeScript => Lexicon {
            quotes: &[("\"", true, false), ("'", true, false), ("`", true, true)],
            ..C_LIKE
        },
        Java | Cpp => C_LIKE,
        C => Lexicon { keywords: &["if", "for", "while", "case"], ..C_LIKE },
        CSharp => Lexicon { keywords: &["if", "for", "foreach", "while", "case", "catch"], ..C_LIKE },
        Go => Lexicon {
            quotes: &[("\"", true, false), ("'", true, false), ("`", false, true)],
            keywords: &["if", "for", "case"],
            ternary: false,
            ..C_LIKE
        },
        Rust => Lexicon {
            quotes: &[("\"", true, false)],
            keywords: &["if", "for", "while", "loop", "match"],
            ternary: false,
            ..C_LIKE
        },
        Kotlin => Lexicon { keywords: &["if", "for", "while", "when", "catch"], ternary: false, ..C_LIKE },
        Php => Lexicon {
            line_comments: &["//", "#"],
            keywords: &["if", "elseif", "for", "foreach", "while", "case", "catch"],
            word_ops: &["and", "or"],
            ..C_LIKE
        },
        Ruby => Lexicon {
            line_comments: &["#"],
            block_comment: None,
            keywords: &["if", "elsif", "unless", "while", "until", "for", "when", "rescue"],
            word_ops: &["and", "or", "not"],
            ..C_LIKE
        },
        Shell => Lexicon {
            line_comments: &["#"],
            block_comment: None,
            quotes: &[("\"", true, false), ("'", false, false)],
            hash_needs_space: true,
            keywords: &["if", "elif", "for", "while", "until", "case"],
            ternary: false,
            ..C_LIKE
        },
        Sql => Lexicon {
            line_comments: &["--"],
            quotes: &[("'", false, false)],
            keywords: &["when", "while"],
            word_ops: &["and", "or", "not"],
            symbol_ops: false,
            ternary: false,
            case_insensitive: true,
            ..C_LIKE
        },
        other => panic!("no oracle lexicon for {other:?}"),
    }
}

/// Languages the oracle and the snippet generator cover.
pub const ORACLE_LANGUAGES: [LanguageId; 14] = [
    LanguageId::Python,
    LanguageId::JavaScript,
    LanguageId::TypeScript,
    LanguageId::Java,
    LanguageId::C,
    LanguageId::Cpp,
    LanguageId::CSharp,
    LanguageId::Go,
    LanguageId::Rust,
    LanguageId::Kotlin,
    LanguageId::Php,
    LanguageId::Ruby,
    LanguageId::Shell,
    LanguageId::Sql,
];

fn is_word(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// `(control-flow count, logical-operator count)` of `content`.
pub fn oracle_counts(content: &str, language: LanguageId) -> (u64, u64) {
    let lx = lexicon(language);
    let chars: Vec<char> = content.chars().collect();
    let at = |i: usize, token: &str| -> bool {
        let t: Vec<char> = token.chars().collect();
        i + t.len() <= chars.len() && chars[i..i + t.len()] == t[..]
    };
    let (mut cf, mut ops) = (0u64, 0u64);
    let mut i = 0;
    while i < chars.len() {
        let prev_blank = i == 0 || chars[i - 1].is_whitespace();
        if let Some(marker) = lx.line_comments.iter().find(|m| at(i, m)) {
            if !(*marker == "#" && lx.hash_needs_space && !prev_blank) {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
        }
        if let Some((open, close)) = lx.block_comment.filter(|(open, _)| at(i, open)) {
            i += open.chars().count();
            while i < chars.len() && !at(i, close) {
                i += 1;
            }
            i = (i + close.chars().count()).min(chars.len());
            continue;
        }
        if let Some(&(quote, escapes, multiline)) = lx.quotes.iter().find(|(q, _, _)| at(i, q)) {
            i += quote.chars().count();
            while i < chars.len() {
                if escapes && chars[i] == '\\' {
                    i += 2;
                    continue;
                }
                if at(i, quote) {
                    i += quote.chars().count();
                    break;
                }
                if chars[i] == '\n' && !multiline {
                    break;
                }
                i += 1;
            }
            continue;
        }
        let c = chars[i];
        if is_word(c) {
            let start = i;
            while i < chars.len() && is_word(chars[i]) {
                i += 1;
            }
            let mut word: String = chars[start..i].iter().collect();
            if lx.case_insensitive {
                word = word.to_ascii_lowercase();
            }
            if lx.keywords.contains(&word.as_str()) {
                cf += 1;
            } else if lx.word_ops.contains(&word.as_str()) {
                ops += 1;
            }
            continue;
        }
        if lx.symbol_ops && (at(i, "&&") || at(i, "||")) {
            ops += 1;
            i += 2;
            continue;
        }
        if lx.ternary && c == '?' && prev_blank && chars.get(i + 1).is_some_and(|n| n.is_whitespace()) {
            cf += 1;
            // The trailing blank belongs to this token.
            i += 2;
            continue;
        }
        i += 1;
    }
    (cf, ops)
}
