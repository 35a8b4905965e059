//! Fixtures and reference oracles shared by the codeprov test suites.

pub mod git_fixture;
pub mod lcs_oracle;
pub mod perplexity;
pub mod records;
pub mod snippets;
pub mod synthetic;
