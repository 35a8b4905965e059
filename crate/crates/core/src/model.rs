//! Canonical record types and their JSON Lines encoding.
//!
//! Every line written by this module is a single JSON object whose first key
//! is `"schema"`, followed by the record fields in declaration order. Optional
//! fields are always present (as `null`) so that two serializations of the
//! same record are byte-identical.

use crate::diagnostics::Diagnostic;
use chrono::NaiveDate;
use regex::Regex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::HashSet;
use std::io::{self, BufRead, Write};
use std::sync::OnceLock;

pub const SCHEMA_VERSION: u32 = 1;

macro_rules! string_enum {
    (@common $(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            /// Canonical lowercase serialization string.
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            /// Strict parse of the canonical string.
            pub fn parse(text: &str) -> Option<Self> {
                match text {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
                serializer.serialize_str(self.as_str())
            }
        }
    };
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? } fallback $fallback:ident) => {
        string_enum!(@common $(#[$meta])* $name { $($variant => $text),+ });

        impl $name {
            /// Lenient parse: unknown strings map to the fallback variant.
            pub fn parse_lenient(text: &str) -> Self {
                Self::parse(text).unwrap_or($name::$fallback)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                Ok(Self::parse_lenient(&text))
            }
        }
    };
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        string_enum!(@common $(#[$meta])* $name { $($variant => $text),+ });

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                Self::parse(&text).ok_or_else(|| {
                    serde::de::Error::custom(format!(
                        "unknown {} value {text:?}",
                        stringify!($name)
                    ))
                })
            }
        }
    };
}

string_enum! {
    /// Ground-truth or predicted origin of a piece of code.
    ProvenanceLabel {
        Human => "human",
        Ai => "ai",
        Unknown => "unknown",
    } fallback Unknown
}

string_enum! {
    LanguageId {
        Python => "python",
        JavaScript => "javascript",
        TypeScript => "typescript",
        Java => "java",
        C => "c",
        Cpp => "cpp",
        CSharp => "csharp",
        Go => "go",
        Rust => "rust",
        Php => "php",
        Ruby => "ruby",
        Scala => "scala",
        Kotlin => "kotlin",
        Swift => "swift",
        Shell => "shell",
        JupyterNotebook => "jupyter_notebook",
        Html => "html",
        Css => "css",
        Sql => "sql",
        Markdown => "markdown",
        Yaml => "yaml",
        Other => "other",
    } fallback Other
}

string_enum! {
    /// Functional role of a file, derived from its path.
    FileFunction {
        Documentation => "documentation",
        CoreLogic => "core_logic",
        TestCode => "test_code",
        ConfigData => "config_data",
        Other => "other",
    } fallback Other
}

string_enum! {
    TechStack {
        DynamicScripting => "dynamic_scripting",
        StaticSystem => "static_system",
        Declarative => "declarative",
        Other => "other",
    } fallback Other
}

string_enum! {
    /// Application domain buckets used for dataset composition reports.
    AppDomain {
        WebApplication => "web_application",
        LanguageRuntime => "language_runtime",
        DataManagement => "data_management",
        DataScience => "data_science",
        NetworkSecurity => "network_security",
        Operations => "operations",
        ClientGraphics => "client_graphics",
        PlatformsSystems => "platforms_systems",
        Others => "others",
    } fallback Others
}

impl AppDomain {
    /// Human-readable title as used in dataset composition tables.
    pub fn title(self) -> &'static str {
        match self {
            AppDomain::WebApplication => "Web and application development",
            AppDomain::LanguageRuntime => "Language and runtime",
            AppDomain::DataManagement => "Data management and persistence",
            AppDomain::DataScience => "Data Science and Engineering",
            AppDomain::NetworkSecurity => "Network, Distribution and Security",
            AppDomain::Operations => "Operations and reliability",
            AppDomain::ClientGraphics => "Client and Graphics",
            AppDomain::PlatformsSystems => "Platforms and Systems",
            AppDomain::Others => "Others",
        }
    }
}

string_enum! {
    ChangeKind {
        Added => "added",
        Modified => "modified",
        Deleted => "deleted",
    }
}

string_enum! {
    AttackVector {
        Network => "network",
        Adjacent => "adjacent",
        Local => "local",
        Physical => "physical",
    }
}

string_enum! {
    /// Who introduced or fixed a vulnerability.
    Attribution {
        Human => "human",
        Ai => "ai",
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginMeta {
    #[serde(default)]
    pub repo: Option<String>,
    #[serde(default)]
    pub generator: Option<String>,
    #[serde(default)]
    pub commit: Option<String>,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub timestamp: Option<i64>,
    #[serde(default)]
    pub app_domain: Option<AppDomain>,
    #[serde(default)]
    pub task: Option<String>,
    /// Set when the original bytes were not valid UTF-8 and were decoded lossily.
    #[serde(default)]
    pub lossy_utf8: bool,
}

/// One file-granularity unit of code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSample {
    pub id: String,
    pub content: String,
    pub language: LanguageId,
    pub label: ProvenanceLabel,
    pub origin: OriginMeta,
}

/// Pre/post contents of one file touched by one commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitFileChange {
    pub repo: String,
    pub commit: String,
    pub timestamp: i64,
    pub path: String,
    pub pre_content: Option<String>,
    pub post_content: Option<String>,
    pub change_kind: ChangeKind,
}

impl CommitFileChange {
    /// Identifier shared with samples and verdicts derived from this change.
    pub fn sample_id(&self) -> String {
        format!("{}@{}:{}", self.repo, self.commit, self.path)
    }
}

/// One CVE-linked vulnerable/patched fragment pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnRecord {
    pub cve_id: String,
    pub cwe_id: String,
    pub cvss_base: f64,
    pub attack_vector: AttackVector,
    pub language: LanguageId,
    pub vulnerable_fragment: String,
    pub patched_fragment: String,
    pub intro_source: Attribution,
    pub fix_source: Attribution,
    pub disclosed: NaiveDate,
}

fn cve_grammar() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^CVE-\d{4}-\d{4,}$").expect("valid regex"))
}

fn cwe_grammar() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^CWE-\d+$").expect("valid regex"))
}

pub fn is_valid_cve_id(text: &str) -> bool {
    cve_grammar().is_match(text)
}

pub fn is_valid_cwe_id(text: &str) -> bool {
    cwe_grammar().is_match(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Sample,
    Change,
    Vuln,
    Verdict,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Sample => "sample",
            RecordKind::Change => "change",
            RecordKind::Vuln => "vuln",
            RecordKind::Verdict => "verdict",
        }
    }
}

/// A type that can live in a JSON Lines corpus file.
pub trait Record: Serialize + DeserializeOwned {
    const KIND: RecordKind;
    /// Whether ids must be unique within one file.
    const UNIQUE_IDS: bool;

    fn record_id(&self) -> String;

    /// Check the type invariants; the error describes the violation.
    fn validate(&self) -> Result<(), String>;
}

impl Record for CodeSample {
    const KIND: RecordKind = RecordKind::Sample;
    const UNIQUE_IDS: bool = true;

    fn record_id(&self) -> String {
        self.id.clone()
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        match self.label {
            ProvenanceLabel::Human if self.origin.repo.is_none() => {
                Err("human sample without repository origin".into())
            }
            ProvenanceLabel::Ai if self.origin.generator.is_none() => {
                Err("ai sample without generator origin".into())
            }
            _ => Ok(()),
        }
    }
}

impl Record for CommitFileChange {
    const KIND: RecordKind = RecordKind::Change;
    const UNIQUE_IDS: bool = true;

    fn record_id(&self) -> String {
        self.sample_id()
    }

    fn validate(&self) -> Result<(), String> {
        if self.repo.is_empty() || self.path.is_empty() {
            return Err("empty repo or path".into());
        }
        if self.commit.is_empty() || !self.commit.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("commit {:?} is not a hex hash", self.commit));
        }
        let consistent = match self.change_kind {
            ChangeKind::Added => self.pre_content.is_none() && self.post_content.is_some(),
            ChangeKind::Deleted => self.pre_content.is_some() && self.post_content.is_none(),
            ChangeKind::Modified => self.pre_content.is_some() && self.post_content.is_some(),
        };
        if consistent {
            Ok(())
        } else {
            Err(format!("contents inconsistent with change kind {}", self.change_kind))
        }
    }
}

impl Record for VulnRecord {
    const KIND: RecordKind = RecordKind::Vuln;
    const UNIQUE_IDS: bool = false;

    fn record_id(&self) -> String {
        self.cve_id.clone()
    }

    fn validate(&self) -> Result<(), String> {
        if !is_valid_cve_id(&self.cve_id) {
            return Err(format!("malformed CVE id {:?}", self.cve_id));
        }
        if !is_valid_cwe_id(&self.cwe_id) {
            return Err(format!("malformed CWE id {:?}", self.cwe_id));
        }
        if !(0.0..=10.0).contains(&self.cvss_base) {
            return Err(format!("cvss_base {} outside [0, 10]", self.cvss_base));
        }
        if self.vulnerable_fragment == self.patched_fragment {
            return Err("vulnerable and patched fragments are identical".into());
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid {kind} record {id:?}: {reason}")]
    Invalid { kind: &'static str, id: String, reason: String },
    #[error("duplicate {kind} id {id:?}")]
    Duplicate { kind: &'static str, id: String },
}

/// Records read from a stream plus everything that could not be read cleanly.
#[derive(Debug, Clone)]
pub struct ReadOutcome<T> {
    pub records: Vec<T>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Serialize)]
struct Line<'a, T> {
    schema: u32,
    #[serde(flatten)]
    record: &'a T,
}

/// Canonical single-line encoding of a record (no trailing newline).
pub fn to_line<T: Record>(record: &T) -> String {
    serde_json::to_string(&Line { schema: SCHEMA_VERSION, record })
        .expect("record types always serialize")
}

/// Write records as JSON Lines. Every record is validated first; nothing is
/// written past the first invalid record.
pub fn write_records<'a, T, I, W>(records: I, mut sink: W) -> Result<usize, RecordError>
where
    T: Record + 'a,
    I: IntoIterator<Item = &'a T>,
    W: Write,
{
    let mut seen = HashSet::new();
    let mut count = 0;
    for record in records {
        let id = record.record_id();
        record.validate().map_err(|reason| RecordError::Invalid {
            kind: T::KIND.as_str(),
            id: id.clone(),
            reason,
        })?;
        if T::UNIQUE_IDS && !seen.insert(id.clone()) {
            return Err(RecordError::Duplicate { kind: T::KIND.as_str(), id });
        }
        sink.write_all(to_line(record).as_bytes())?;
        sink.write_all(b"\n")?;
        count += 1;
    }
    sink.flush()?;
    Ok(count)
}

/// Read JSON Lines records. Malformed, invalid or duplicate lines become
/// diagnostics carrying their 1-based line number.
pub fn read_records<T: Record, R: BufRead>(mut source: R) -> io::Result<ReadOutcome<T>> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen = HashSet::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if source.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let text = match std::str::from_utf8(&buf) {
            Ok(text) => std::borrow::Cow::Borrowed(text),
            Err(_) => {
                diagnostics.push(Diagnostic::at_line(line_no, "invalid UTF-8, decoded lossily"));
                String::from_utf8_lossy(&buf)
            }
        };
        let text = text.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            continue;
        }
        match parse_line::<T>(text, line_no, &mut diagnostics) {
            Ok(record) => {
                if let Err(reason) = record.validate() {
                    diagnostics.push(Diagnostic::at_line(
                        line_no,
                        format!("invalid {} record {:?}: {reason}", T::KIND.as_str(), record.record_id()),
                    ));
                    continue;
                }
                if T::UNIQUE_IDS && !seen.insert(record.record_id()) {
                    diagnostics.push(Diagnostic::at_line(
                        line_no,
                        format!("duplicate id {:?}, first occurrence kept", record.record_id()),
                    ));
                    continue;
                }
                records.push(record);
            }
            Err(message) => diagnostics.push(Diagnostic::at_line(line_no, message)),
        }
    }
    Ok(ReadOutcome { records, diagnostics })
}

fn parse_line<T: Record>(text: &str, line_no: usize, diagnostics: &mut Vec<Diagnostic>) -> Result<T, String> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let object = value.as_object_mut().ok_or("line is not a JSON object")?;
    match object.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
        Some(other) => return Err(format!("unsupported schema version {other}")),
        None => return Err("missing schema field".into()),
    }
    let raw = value.clone();
    let record: T = serde_json::from_value(value).map_err(|e| format!("invalid {} record: {e}", T::KIND.as_str()))?;
    // Enum fields read leniently fall back to their catch-all variant; the
    // re-encoded value then differs from the raw string.
    let reencoded = serde_json::to_value(&record).map_err(|e| e.to_string())?;
    if let (Value::Object(raw), Value::Object(typed)) = (&raw, &reencoded) {
        report_fallbacks("", raw, typed, line_no, diagnostics);
    }
    Ok(record)
}

fn report_fallbacks(
    prefix: &str,
    raw: &Map<String, Value>,
    typed: &Map<String, Value>,
    line_no: usize,
    diagnostics: &mut Vec<Diagnostic>,
) {
    for (key, typed_value) in typed {
        let Some(raw_value) = raw.get(key) else { continue };
        match (raw_value, typed_value) {
            (Value::String(r), Value::String(t)) if r != t => diagnostics.push(Diagnostic::at_line(
                line_no,
                format!("unknown value {r:?} for field {prefix}{key}, read as {t:?}"),
            )),
            (Value::Object(r), Value::Object(t)) => {
                report_fallbacks(&format!("{prefix}{key}."), r, t, line_no, diagnostics)
            }
            _ => {}
        }
    }
}

/// Decode file bytes as UTF-8, replacing invalid sequences. The flag reports
/// whether any replacement happened.
pub fn decode_lossy(bytes: &[u8]) -> (String, bool) {
    match String::from_utf8(bytes.to_vec()) {
        Ok(text) => (text, false),
        Err(err) => (String::from_utf8_lossy(err.as_bytes()).into_owned(), true),
    }
}
