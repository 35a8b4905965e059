//! Language identification, path/language taxonomies and the Lexical
//! Complexity Score.

mod language;
mod lcs;
mod taxonomy;

pub use language::{classify_tech_stack, detect_language, extension, known_extensions, language_for_extension};
pub use lcs::{
    lexical_profile, mask_comments_and_strings, LcsRuleSet, LcsRules, LcsRulesError, LexicalProfile,
    LCS_BUCKET_EDGES, MASK_CHAR,
};
pub use taxonomy::{classify_app_domain, classify_file_function, is_code_extension};
