use serde::{Deserialize, Serialize};
use std::fmt;

/// A non-fatal problem found while reading or building data.
///
/// Diagnostics are collected alongside results instead of aborting the whole
/// run; callers decide whether to print, count or fail on them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub subject: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, subject: None, message: message.into() }
    }

    pub fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), subject: None, message: message.into() }
    }

    pub fn about(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self { line: None, subject: Some(subject.into()), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(subject) = &self.subject {
            write!(f, "{subject}: ")?;
        }
        f.write_str(&self.message)
    }
}
