//! Measurement suite over verdict-annotated corpora and vulnerability
//! records: adoption rates, time series, repository scale groups, net impact,
//! CWE profiles and severity statistics.

mod stats;
pub mod svg;
mod vulns;

pub use stats::{
    mann_whitney_u, mann_whitney_u_exact, mann_whitney_u_normal, PValueMethod, RankTestResult, DEFAULT_ALPHA,
    EXACT_MAX_N,
};
pub use vulns::{
    attack_vector_distribution, cwe_profile, net_impact, severity_compare, vuln_quarterly_series, AttackVectorRow,
    CategoryShareRow, CweEntry, CweMap, CweProfile, CweProfileRow, LanguageImpactRow, RiskCategory, VulnQuarterRow,
};

use crate::cascade::Verdict;
use crate::corpus::SampleGranularity;
use crate::diagnostics::Diagnostic;
use crate::lexical::{classify_app_domain, classify_file_function, classify_tech_stack, detect_language, LcsRules, LCS_BUCKET_EDGES};
use crate::model::{ChangeKind, CodeSample, CommitFileChange, LanguageId, ProvenanceLabel};
use crate::scalar::Scalar;
use chrono::{DateTime, Datelike};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no files to analyze")]
    EmptyCorpus,
    #[error("rank test needs two non-empty groups")]
    EmptyGroup,
    #[error("rank test input contains a non-finite value")]
    NonFinite,
    #[error("severity comparison needs both ai- and human-introduced records")]
    SingleGroup,
    #[error("CWE map: {0}")]
    CweMap(String),
}

/// A table that can be written as CSV.
pub trait TableRow {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub(crate) fn fmt_scalar<S: Scalar>(v: S) -> String {
    format!("{:.6}", v.to_f64())
}

pub fn to_csv<T: TableRow>(rows: &[T]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(T::HEADER).expect("in-memory write");
    for row in rows {
        writer.write_record(row.cells()).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv of utf-8 cells")
}

fn share<S: Scalar>(num: u64, den: u64) -> S {
    if den == 0 {
        S::zero()
    } else {
        S::ratio(num, den)
    }
}

/// One classified file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedFile {
    pub id: String,
    pub repo: String,
    pub path: String,
    pub timestamp: i64,
    pub language: LanguageId,
    pub is_ai: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Language,
    TechStack,
    FileFunction,
    Repo,
    /// Single group holding every file.
    Overall,
}

impl Dimension {
    pub const ALL: [Dimension; 5] =
        [Dimension::Language, Dimension::TechStack, Dimension::FileFunction, Dimension::Repo, Dimension::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Language => "language",
            Dimension::TechStack => "tech_stack",
            Dimension::FileFunction => "file_function",
            Dimension::Repo => "repo",
            Dimension::Overall => "overall",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == text)
    }

    pub fn key(self, file: &AnnotatedFile) -> String {
        match self {
            Dimension::Language => file.language.as_str().to_string(),
            Dimension::TechStack => classify_tech_stack(file.language).as_str().to_string(),
            Dimension::FileFunction => classify_file_function(&file.path).as_str().to_string(),
            Dimension::Repo => file.repo.clone(),
            Dimension::Overall => "all".to_string(),
        }
    }
}

/// Join changes with verdicts keyed by change sample id. Final-state keeps
/// the last surviving version of each (repo, path); per-commit keeps every
/// added or modified file. Files without a verdict are reported and left out.
pub fn annotate<S: Scalar>(
    changes: &[CommitFileChange],
    verdicts: &[Verdict<S>],
    granularity: SampleGranularity,
) -> (Vec<AnnotatedFile>, Vec<Diagnostic>) {
    let by_id: HashMap<&str, bool> = verdicts.iter().map(|v| (v.sample_id.as_str(), v.is_ai())).collect();
    let selected: Vec<&CommitFileChange> = match granularity {
        SampleGranularity::PerCommit => changes.iter().filter(|c| c.change_kind != ChangeKind::Deleted).collect(),
        SampleGranularity::FinalState => {
            let mut last: BTreeMap<(&str, &str), &CommitFileChange> = BTreeMap::new();
            for c in changes {
                last.insert((&c.repo, &c.path), c);
            }
            last.into_values().filter(|c| c.change_kind != ChangeKind::Deleted).collect()
        }
    };
    let mut files = Vec::new();
    let mut diagnostics = Vec::new();
    for c in selected {
        let id = c.sample_id();
        match by_id.get(id.as_str()) {
            Some(&is_ai) => files.push(AnnotatedFile {
                repo: c.repo.clone(),
                path: c.path.clone(),
                timestamp: c.timestamp,
                language: detect_language(&c.path, c.post_content.as_deref()),
                is_ai,
                id,
            }),
            None => diagnostics.push(Diagnostic::about(id, "no verdict, left out")),
        }
    }
    (files, diagnostics)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionRow<S> {
    pub key: String,
    pub ai_files: u64,
    pub total_files: u64,
    pub ai_file_rate: S,
}

impl<S: Scalar> TableRow for AdoptionRow<S> {
    const HEADER: &'static [&'static str] = &["key", "ai_files", "total_files", "ai_file_rate"];
    fn cells(&self) -> Vec<String> {
        vec![self.key.clone(), self.ai_files.to_string(), self.total_files.to_string(), fmt_scalar(self.ai_file_rate)]
    }
}

fn count_by<'a>(files: impl IntoIterator<Item = &'a AnnotatedFile>, dim: Dimension) -> BTreeMap<String, (u64, u64)> {
    let mut groups: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for f in files {
        let entry = groups.entry(dim.key(f)).or_default();
        entry.0 += u64::from(f.is_ai);
        entry.1 += 1;
    }
    groups
}

/// AI file rate per dimension value, ordered by key.
pub fn adoption_by<S: Scalar>(files: &[AnnotatedFile], dim: Dimension) -> Result<Vec<AdoptionRow<S>>, AnalyticsError> {
    if files.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    Ok(count_by(files, dim)
        .into_iter()
        .map(|(key, (ai, total))| AdoptionRow { key, ai_files: ai, total_files: total, ai_file_rate: S::ratio(ai, total) })
        .collect())
}

/// Calendar quarter in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    pub year: i32,
    /// 1 to 4.
    pub quarter: u32,
}

impl Quarter {
    pub fn of_timestamp(seconds: i64) -> Self {
        let t = DateTime::from_timestamp(seconds, 0).unwrap_or_default();
        Self { year: t.year(), quarter: (t.month() - 1) / 3 + 1 }
    }

    pub fn of_date(date: chrono::NaiveDate) -> Self {
        Self { year: date.year(), quarter: (date.month() - 1) / 3 + 1 }
    }

    pub fn next(self) -> Self {
        if self.quarter == 4 {
            Self { year: self.year + 1, quarter: 1 }
        } else {
            Self { year: self.year, quarter: self.quarter + 1 }
        }
    }

    /// Every quarter from `first` to `last` inclusive.
    pub fn span(first: Self, last: Self) -> Vec<Self> {
        let mut out = Vec::new();
        let mut q = first;
        while q <= last {
            out.push(q);
            q = q.next();
        }
        out
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-Q{}", self.year, self.quarter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarterlyRow<S> {
    pub quarter: Quarter,
    pub key: String,
    pub ai_files: u64,
    pub total_files: u64,
    /// Zero for an empty bucket.
    pub ai_file_rate: S,
}

impl<S: Scalar> TableRow for QuarterlyRow<S> {
    const HEADER: &'static [&'static str] = &["quarter", "key", "ai_files", "total_files", "ai_file_rate"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.quarter.to_string(),
            self.key.clone(),
            self.ai_files.to_string(),
            self.total_files.to_string(),
            fmt_scalar(self.ai_file_rate),
        ]
    }
}

/// Rates per quarter and dimension value over the full quarter span of the
/// data. Every (quarter, key) pair is present; empty buckets have zero
/// counts and rate.
pub fn quarterly_series<S: Scalar>(files: &[AnnotatedFile], dim: Dimension) -> Vec<QuarterlyRow<S>> {
    let mut buckets: BTreeMap<Quarter, Vec<&AnnotatedFile>> = BTreeMap::new();
    for f in files {
        buckets.entry(Quarter::of_timestamp(f.timestamp)).or_default().push(f);
    }
    let (Some(&first), Some(&last)) = (buckets.keys().next(), buckets.keys().next_back()) else {
        return Vec::new();
    };
    let keys: BTreeSet<String> = files.iter().map(|f| dim.key(f)).collect();
    let mut rows = Vec::new();
    for q in Quarter::span(first, last) {
        let counts = buckets.get(&q).map(|fs| count_by(fs.iter().copied(), dim)).unwrap_or_default();
        for key in &keys {
            let (ai, total) = counts.get(key).copied().unwrap_or((0, 0));
            rows.push(QuarterlyRow { quarter: q, key: key.clone(), ai_files: ai, total_files: total, ai_file_rate: share(ai, total) });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStatsRow<S> {
    pub n: usize,
    /// "top" or "bottom".
    pub group: &'static str,
    /// Repositories actually in the group.
    pub repos: usize,
    pub mean_ai_file_rate: S,
    pub mean_total_files: S,
    pub mean_ai_files: S,
}

impl<S: Scalar> TableRow for GroupStatsRow<S> {
    const HEADER: &'static [&'static str] =
        &["n", "group", "repos", "mean_ai_file_rate", "mean_total_files", "mean_ai_files"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.group.to_string(),
            self.repos.to_string(),
            fmt_scalar(self.mean_ai_file_rate),
            fmt_scalar(self.mean_total_files),
            fmt_scalar(self.mean_ai_files),
        ]
    }
}

fn group_means<S: Scalar>(n: usize, group: &'static str, rows: &[&AdoptionRow<S>]) -> GroupStatsRow<S> {
    let count = rows.len().max(1) as u64;
    let rate_sum = rows.iter().fold(S::zero(), |acc, r| acc + r.ai_file_rate);
    GroupStatsRow {
        n,
        group,
        repos: rows.len(),
        mean_ai_file_rate: rate_sum / S::from_count(count),
        mean_total_files: share(rows.iter().map(|r| r.total_files).sum(), count),
        mean_ai_files: share(rows.iter().map(|r| r.ai_files).sum(), count),
    }
}

/// Rank repositories by AI file rate (descending, ties by name ascending) and
/// average the top and bottom `n` for each requested `n`. With fewer than
/// `2n` repositories the groups overlap and a diagnostic says so.
pub fn topn_bottomn<S: Scalar>(repo_rows: &[AdoptionRow<S>], ns: &[usize]) -> (Vec<GroupStatsRow<S>>, Vec<Diagnostic>) {
    let mut ranked: Vec<&AdoptionRow<S>> = repo_rows.iter().collect();
    ranked.sort_by(|a, b| {
        b.ai_file_rate.partial_cmp(&a.ai_file_rate).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.key.cmp(&b.key))
    });
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for &n in ns {
        if ranked.len() < 2 * n {
            diagnostics.push(Diagnostic::about(
                format!("N={n}"),
                format!("only {} repositories, fewer than {}; groups use what is available", ranked.len(), 2 * n),
            ));
        }
        let take = n.min(ranked.len());
        rows.push(group_means(n, "top", &ranked[..take]));
        rows.push(group_means(n, "bottom", &ranked[ranked.len() - take..]));
    }
    (rows, diagnostics)
}

/// LCS histogram bucket label.
pub fn lcs_bucket(lcs: f64) -> &'static str {
    if lcs < LCS_BUCKET_EDGES[0] as f64 {
        "lcs<20"
    } else if lcs <= LCS_BUCKET_EDGES[1] as f64 {
        "20<=lcs<=80"
    } else {
        "lcs>80"
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionRow {
    pub dimension: &'static str,
    pub key: String,
    pub ai: u64,
    pub human: u64,
    pub unknown: u64,
}

impl TableRow for CompositionRow {
    const HEADER: &'static [&'static str] = &["dimension", "key", "ai", "human", "unknown", "total"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.dimension.to_string(),
            self.key.clone(),
            self.ai.to_string(),
            self.human.to_string(),
            self.unknown.to_string(),
            (self.ai + self.human + self.unknown).to_string(),
        ]
    }
}

/// Label counts of a sample corpus by application domain, LCS bucket and
/// language, with LCS measured under `rules`.
pub fn dataset_composition(samples: &[CodeSample], rules: &LcsRules) -> Vec<CompositionRow> {
    let mut counts: BTreeMap<(usize, String), [u64; 3]> = BTreeMap::new();
    const DIMS: [&str; 3] = ["app_domain", "lcs_bucket", "language"];
    for s in samples {
        let domain = s.origin.app_domain.unwrap_or_else(|| classify_app_domain(s));
        let lcs = rules.profile::<f64>(&s.content, s.language).lcs;
        let slot = match s.label {
            ProvenanceLabel::Ai => 0,
            ProvenanceLabel::Human => 1,
            ProvenanceLabel::Unknown => 2,
        };
        for (d, key) in [domain.title().to_string(), lcs_bucket(lcs).to_string(), s.language.as_str().to_string()]
            .into_iter()
            .enumerate()
        {
            counts.entry((d, key)).or_default()[slot] += 1;
        }
    }
    counts
        .into_iter()
        .map(|((d, key), [ai, human, unknown])| CompositionRow { dimension: DIMS[d], key, ai, human, unknown })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;
    use num_rational::Ratio;

    fn file(repo: &str, path: &str, ts: i64, is_ai: bool) -> AnnotatedFile {
        AnnotatedFile {
            id: format!("{repo}:{path}"),
            repo: repo.into(),
            path: path.into(),
            timestamp: ts,
            language: detect_language(path, None),
            is_ai,
        }
    }

    #[test]
    fn adoption_rates() {
        let files = vec![file("r", "a.py", 0, true), file("r", "b.py", 0, false), file("r", "c.py", 0, false), file("r", "d.py", 0, false)];
        let rows = adoption_by::<Exact>(&files, Dimension::Language).unwrap();
        assert_eq!(rows, [AdoptionRow { key: "python".into(), ai_files: 1, total_files: 4, ai_file_rate: Ratio::new(1, 4) }]);
        let all_ai = vec![file("r", "a.rs", 0, true)];
        assert_eq!(adoption_by::<Exact>(&all_ai, Dimension::TechStack).unwrap()[0].ai_file_rate, Ratio::from_integer(1));
        assert_eq!(adoption_by::<f64>(&[], Dimension::Repo).unwrap_err(), AnalyticsError::EmptyCorpus);
    }

    #[test]
    fn quarter_boundaries() {
        // 2022-03-31T23:59:59Z and 2022-04-01T00:00:00Z
        assert_eq!(Quarter::of_timestamp(1_648_771_199).to_string(), "2022-Q1");
        assert_eq!(Quarter::of_timestamp(1_648_771_200).to_string(), "2022-Q2");
    }

    #[test]
    fn quarterly_fills_gaps() {
        let q1 = 1_641_081_600; // 2022-01-02
        let q3 = 1_657_152_000; // 2022-07-07
        let files = vec![file("r", "a.py", q1, true), file("r", "b.py", q3, false)];
        let rows = quarterly_series::<Exact>(&files, Dimension::Overall);
        let labels: Vec<String> = rows.iter().map(|r| r.quarter.to_string()).collect();
        assert_eq!(labels, ["2022-Q1", "2022-Q2", "2022-Q3"]);
        assert_eq!(rows[1].total_files, 0);
        assert_eq!(rows[1].ai_file_rate, Ratio::from_integer(0));
        assert_eq!(rows[0].ai_file_rate, Ratio::from_integer(1));
        let only_q3 = quarterly_series::<f64>(&files[1..], Dimension::Overall);
        assert_eq!(only_q3.len(), 1);
    }

    fn repo_row(key: &str, ai: u64, total: u64) -> AdoptionRow<Exact> {
        AdoptionRow { key: key.into(), ai_files: ai, total_files: total, ai_file_rate: Ratio::new(ai as i128, total as i128) }
    }

    #[test]
    fn top_and_bottom_groups() {
        let rows = vec![repo_row("a", 9, 10), repo_row("b", 7, 10), repo_row("c", 2, 10), repo_row("d", 1, 10)];
        let (stats, diags) = topn_bottomn(&rows, &[2]);
        assert!(diags.is_empty());
        assert_eq!(stats[0].mean_ai_file_rate, Ratio::new(8, 10));
        assert_eq!(stats[1].mean_ai_file_rate, Ratio::new(15, 100));
        assert_eq!(stats[1].mean_total_files, Ratio::from_integer(10));
        let (_, diags) = topn_bottomn(&rows, &[10]);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn ties_break_by_name() {
        let rows = vec![repo_row("zeta", 1, 2), repo_row("alpha", 1, 2), repo_row("mid", 0, 2)];
        let (stats, _) = topn_bottomn(&rows, &[1]);
        // alpha ranks ahead of zeta, so the bottom-1 group is "mid" and top-1 is "alpha".
        assert_eq!(stats[0].mean_ai_file_rate, Ratio::new(1, 2));
        assert_eq!(stats[1].mean_ai_file_rate, Ratio::from_integer(0));
    }

    #[test]
    fn annotate_final_state() {
        let mk = |commit: &str, path: &str, kind: ChangeKind| CommitFileChange {
            repo: "r".into(),
            commit: commit.into(),
            timestamp: 0,
            path: path.into(),
            pre_content: (kind != ChangeKind::Added).then(String::new),
            post_content: (kind != ChangeKind::Deleted).then(|| "x".to_string()),
            change_kind: kind,
        };
        let changes = vec![mk("a1", "x.py", ChangeKind::Added), mk("a2", "x.py", ChangeKind::Modified), mk("a3", "y.py", ChangeKind::Added)];
        let verdict = |id: &str, ai| Verdict::<f64> {
            sample_id: id.into(),
            label: if ai { ProvenanceLabel::Ai } else { ProvenanceLabel::Human },
            final_score: 0.0,
            decision_path: crate::cascade::DecisionPath::Stage2Aggregate,
            component_scores: Default::default(),
        };
        let verdicts = vec![verdict("r@a2:x.py", true), verdict("r@a1:x.py", false)];
        let (files, diags) = annotate(&changes, &verdicts, SampleGranularity::FinalState);
        assert_eq!(files.len(), 1);
        assert!(files[0].is_ai);
        assert_eq!(diags.len(), 1);
        let (per_commit, diags) = annotate(&changes, &verdicts, SampleGranularity::PerCommit);
        assert_eq!(per_commit.len(), 2);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn csv_output() {
        let csv = to_csv(&[repo_row("a,b", 1, 4)]);
        assert_eq!(csv, "key,ai_files,total_files,ai_file_rate\n\"a,b\",1,4,0.250000\n");
    }

    #[test]
    fn lcs_buckets() {
        assert_eq!(lcs_bucket(1.0), "lcs<20");
        assert_eq!(lcs_bucket(20.0), "20<=lcs<=80");
        assert_eq!(lcs_bucket(80.5), "lcs>80");
    }
}
