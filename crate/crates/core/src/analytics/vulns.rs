use super::stats::{mann_whitney_u, RankTestResult};
use super::{fmt_scalar, share, AnalyticsError, Quarter, TableRow};
use crate::diagnostics::Diagnostic;
use crate::model::{AttackVector, Attribution, LanguageId, VulnRecord};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageImpactRow<S> {
    /// Language name, or "overall".
    pub language: String,
    pub records: u64,
    pub intro_ai_share: S,
    pub fix_ai_share: S,
    /// `intro_ai_share - fix_ai_share`.
    pub net_impact: S,
}

impl<S: Scalar> TableRow for LanguageImpactRow<S> {
    const HEADER: &'static [&'static str] = &["language", "records", "intro_ai_share", "fix_ai_share", "net_impact"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.language.clone(),
            self.records.to_string(),
            fmt_scalar(self.intro_ai_share),
            fmt_scalar(self.fix_ai_share),
            fmt_scalar(self.net_impact),
        ]
    }
}

fn impact_row<S: Scalar>(language: String, records: &[&VulnRecord]) -> LanguageImpactRow<S> {
    let n = records.len() as u64;
    let intro: S = share(records.iter().filter(|r| r.intro_source == Attribution::Ai).count() as u64, n);
    let fix: S = share(records.iter().filter(|r| r.fix_source == Attribution::Ai).count() as u64, n);
    LanguageImpactRow { language, records: n, intro_ai_share: intro, fix_ai_share: fix, net_impact: intro - fix }
}

/// AI introduction share minus AI fix share per language, in language order,
/// followed by an "overall" row. Languages without records are skipped with a
/// diagnostic.
pub fn net_impact<S: Scalar>(records: &[VulnRecord]) -> (Vec<LanguageImpactRow<S>>, Vec<Diagnostic>) {
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    if records.is_empty() {
        return (rows, diagnostics);
    }
    for &lang in LanguageId::ALL.iter() {
        let group: Vec<&VulnRecord> = records.iter().filter(|r| r.language == lang).collect();
        if group.is_empty() {
            diagnostics.push(Diagnostic::about(lang.as_str(), "no vulnerability records, skipped"));
        } else {
            rows.push(impact_row(lang.as_str().to_string(), &group));
        }
    }
    rows.push(impact_row("overall".to_string(), &records.iter().collect::<Vec<_>>()));
    (rows, diagnostics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskCategory {
    InputValidationEncoding,
    CodeQualityRiskyApis,
    AccessControlPermissions,
    Other,
}

impl RiskCategory {
    pub const ALL: [RiskCategory; 4] = [
        RiskCategory::InputValidationEncoding,
        RiskCategory::CodeQualityRiskyApis,
        RiskCategory::AccessControlPermissions,
        RiskCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskCategory::InputValidationEncoding => "input_validation_encoding",
            RiskCategory::CodeQualityRiskyApis => "code_quality_risky_apis",
            RiskCategory::AccessControlPermissions => "access_control_permissions",
            RiskCategory::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CweEntry {
    pub cwe_id: String,
    pub category: RiskCategory,
    pub name: String,
    /// Name used for this id by other sources, when it differs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate_name: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CweMapDoc {
    version: u32,
    entries: Vec<CweEntry>,
}

/// CWE id to risk category table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CweMap {
    entries: BTreeMap<String, CweEntry>,
}

const DEFAULT_CWE_MAP: &str = include_str!("../../assets/cwe_map.json");

impl CweMap {
    pub const VERSION: u32 = 1;

    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_CWE_MAP).expect("shipped CWE map parses")
    }

    pub fn from_json(text: &str) -> Result<Self, AnalyticsError> {
        let doc: CweMapDoc = serde_json::from_str(text).map_err(|e| AnalyticsError::CweMap(e.to_string()))?;
        if doc.version != Self::VERSION {
            return Err(AnalyticsError::CweMap(format!("unsupported version {}", doc.version)));
        }
        let mut entries = BTreeMap::new();
        for e in doc.entries {
            if !crate::model::is_valid_cwe_id(&e.cwe_id) {
                return Err(AnalyticsError::CweMap(format!("malformed CWE id {:?}", e.cwe_id)));
            }
            if entries.insert(e.cwe_id.clone(), e).is_some() {
                return Err(AnalyticsError::CweMap("duplicate CWE id".into()));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, AnalyticsError> {
        let text = std::fs::read_to_string(path).map_err(|e| AnalyticsError::CweMap(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn category(&self, cwe_id: &str) -> Option<RiskCategory> {
        self.entries.get(cwe_id).map(|e| e.category)
    }

    pub fn entry(&self, cwe_id: &str) -> Option<&CweEntry> {
        self.entries.get(cwe_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CweProfileRow<S> {
    pub cwe_id: String,
    pub records: u64,
    pub ai_introduced: u64,
    pub ai_share: S,
    pub risk_category: RiskCategory,
}

impl<S: Scalar> TableRow for CweProfileRow<S> {
    const HEADER: &'static [&'static str] = &["cwe_id", "records", "ai_introduced", "ai_share", "risk_category"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.cwe_id.clone(),
            self.records.to_string(),
            self.ai_introduced.to_string(),
            fmt_scalar(self.ai_share),
            self.risk_category.as_str().to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryShareRow<S> {
    pub category: RiskCategory,
    pub ai_introduced: u64,
    /// Share of all AI-introduced records; zero when there are none.
    pub share: S,
}

impl<S: Scalar> TableRow for CategoryShareRow<S> {
    const HEADER: &'static [&'static str] = &["risk_category", "ai_introduced", "share"];
    fn cells(&self) -> Vec<String> {
        vec![self.category.as_str().to_string(), self.ai_introduced.to_string(), fmt_scalar(self.share)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CweProfile<S> {
    /// Ordered by AI share descending, then CWE number.
    pub rows: Vec<CweProfileRow<S>>,
    pub categories: Vec<CategoryShareRow<S>>,
}

fn cwe_number(id: &str) -> u64 {
    id.trim_start_matches("CWE-").parse().unwrap_or(u64::MAX)
}

/// Per-CWE AI introduction share and the split of AI-introduced records
/// across risk categories. Unmapped CWEs fall into `Other` with a diagnostic.
pub fn cwe_profile<S: Scalar>(records: &[VulnRecord], map: &CweMap) -> (CweProfile<S>, Vec<Diagnostic>) {
    let mut by_cwe: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for r in records {
        let e = by_cwe.entry(&r.cwe_id).or_default();
        e.0 += 1;
        e.1 += u64::from(r.intro_source == Attribution::Ai);
    }
    let mut diagnostics = Vec::new();
    let mut category_counts: BTreeMap<RiskCategory, u64> = RiskCategory::ALL.iter().map(|&c| (c, 0)).collect();
    let mut rows: Vec<CweProfileRow<S>> = by_cwe
        .into_iter()
        .map(|(cwe, (n, ai))| {
            let category = map.category(cwe).unwrap_or_else(|| {
                diagnostics.push(Diagnostic::about(cwe, "not in the CWE map, categorized as other"));
                RiskCategory::Other
            });
            *category_counts.get_mut(&category).expect("all categories seeded") += ai;
            CweProfileRow { cwe_id: cwe.to_string(), records: n, ai_introduced: ai, ai_share: S::ratio(ai, n), risk_category: category }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.ai_share
            .partial_cmp(&a.ai_share)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| cwe_number(&a.cwe_id).cmp(&cwe_number(&b.cwe_id)))
    });
    let total_ai: u64 = category_counts.values().sum();
    let categories =
        category_counts.into_iter().map(|(category, ai)| CategoryShareRow { category, ai_introduced: ai, share: share(ai, total_ai) }).collect();
    (CweProfile { rows, categories }, diagnostics)
}

/// Mann-Whitney comparison of CVSS base scores, AI-introduced (group a)
/// against human-introduced (group b).
pub fn severity_compare(records: &[VulnRecord], alpha: f64) -> Result<RankTestResult, AnalyticsError> {
    let pick = |source| records.iter().filter(|r| r.intro_source == source).map(|r| r.cvss_base).collect::<Vec<f64>>();
    let (ai, human) = (pick(Attribution::Ai), pick(Attribution::Human));
    if ai.is_empty() || human.is_empty() {
        return Err(AnalyticsError::SingleGroup);
    }
    mann_whitney_u(&ai, &human, alpha)
}

impl TableRow for RankTestResult {
    const HEADER: &'static [&'static str] = &[
        "n_ai", "n_human", "median_ai", "median_human", "mean_ai", "mean_human", "u_statistic", "p_value", "method",
        "alpha", "reject_null",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            self.n_a.to_string(),
            self.n_b.to_string(),
            format!("{:.6}", self.median_a),
            format!("{:.6}", self.median_b),
            format!("{:.6}", self.mean_a),
            format!("{:.6}", self.mean_b),
            format!("{:.1}", self.u_statistic),
            format!("{:.6}", self.p_value),
            match self.method {
                super::PValueMethod::Exact => "exact".into(),
                super::PValueMethod::Normal => "normal".into(),
            },
            format!("{}", self.alpha),
            self.reject_null.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackVectorRow<S> {
    pub source: Attribution,
    pub vector: AttackVector,
    pub records: u64,
    pub share: S,
}

impl<S: Scalar> TableRow for AttackVectorRow<S> {
    const HEADER: &'static [&'static str] = &["intro_source", "attack_vector", "records", "share"];
    fn cells(&self) -> Vec<String> {
        vec![self.source.as_str().to_string(), self.vector.as_str().to_string(), self.records.to_string(), fmt_scalar(self.share)]
    }
}

/// Share of each attack vector within each introducing source that has
/// records. All four vectors are listed per source, so shares sum to one.
pub fn attack_vector_distribution<S: Scalar>(records: &[VulnRecord]) -> Vec<AttackVectorRow<S>> {
    let mut rows = Vec::new();
    for &source in Attribution::ALL.iter() {
        let group: Vec<&VulnRecord> = records.iter().filter(|r| r.intro_source == source).collect();
        if group.is_empty() {
            continue;
        }
        for &vector in AttackVector::ALL.iter() {
            let n = group.iter().filter(|r| r.attack_vector == vector).count() as u64;
            rows.push(AttackVectorRow { source, vector, records: n, share: S::ratio(n, group.len() as u64) });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct VulnQuarterRow<S> {
    pub quarter: Quarter,
    pub records: u64,
    pub ai_introduced: u64,
    pub ai_fixed: u64,
    pub intro_ai_share: S,
    pub fix_ai_share: S,
}

impl<S: Scalar> TableRow for VulnQuarterRow<S> {
    const HEADER: &'static [&'static str] =
        &["quarter", "records", "ai_introduced", "ai_fixed", "intro_ai_share", "fix_ai_share"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.quarter.to_string(),
            self.records.to_string(),
            self.ai_introduced.to_string(),
            self.ai_fixed.to_string(),
            fmt_scalar(self.intro_ai_share),
            fmt_scalar(self.fix_ai_share),
        ]
    }
}

/// Records per disclosure quarter with AI introduction and fix shares; empty
/// quarters inside the span are listed with zeros.
pub fn vuln_quarterly_series<S: Scalar>(records: &[VulnRecord]) -> Vec<VulnQuarterRow<S>> {
    let mut buckets: BTreeMap<Quarter, (u64, u64, u64)> = BTreeMap::new();
    for r in records {
        let e = buckets.entry(Quarter::of_date(r.disclosed)).or_default();
        e.0 += 1;
        e.1 += u64::from(r.intro_source == Attribution::Ai);
        e.2 += u64::from(r.fix_source == Attribution::Ai);
    }
    let (Some(&first), Some(&last)) = (buckets.keys().next(), buckets.keys().next_back()) else {
        return Vec::new();
    };
    Quarter::span(first, last)
        .into_iter()
        .map(|q| {
            let (n, intro, fix) = buckets.get(&q).copied().unwrap_or_default();
            VulnQuarterRow {
                quarter: q,
                records: n,
                ai_introduced: intro,
                ai_fixed: fix,
                intro_ai_share: share(intro, n),
                fix_ai_share: share(fix, n),
            }
        })
        .collect()
}
