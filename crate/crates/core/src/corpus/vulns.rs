use crate::cascade::{classify, EnsembleConfig};
use crate::detectors::DetectorSet;
use crate::diagnostics::Diagnostic;
use crate::model::{
    AttackVector, Attribution, CodeSample, LanguageId, OriginMeta, ProvenanceLabel, ReadOutcome, Record,
    VulnRecord, SCHEMA_VERSION,
};
use crate::scalar::Scalar;
use chrono::NaiveDate;
use serde::Deserialize;
use std::io::BufRead;

/// Import line: a vulnerability record whose attribution fields may be
/// missing, to be filled by the cascade.
#[derive(Debug, Deserialize)]
struct ImportRow {
    #[serde(default)]
    schema: Option<u32>,
    cve_id: String,
    cwe_id: String,
    cvss_base: f64,
    attack_vector: AttackVector,
    language: LanguageId,
    vulnerable_fragment: String,
    patched_fragment: String,
    #[serde(default)]
    intro_source: Option<Attribution>,
    #[serde(default)]
    fix_source: Option<Attribution>,
    disclosed: NaiveDate,
}

/// Cascade used to attribute fragments whose source is not given.
pub struct Labeler<'a, S> {
    pub config: &'a EnsembleConfig<S>,
    pub detectors: &'a DetectorSet,
}

/// Sample id for the vulnerable (`intro`) or patched (`fix`) fragment of a CVE
/// record; external score files key fragment scores by these ids.
pub fn fragment_sample_id(cve_id: &str, role: &str) -> String {
    format!("{cve_id}:{role}")
}

pub fn fragment_sample(cve_id: &str, role: &str, content: &str, language: LanguageId) -> CodeSample {
    CodeSample {
        id: fragment_sample_id(cve_id, role),
        content: content.to_string(),
        language,
        label: ProvenanceLabel::Unknown,
        origin: OriginMeta::default(),
    }
}

fn attribute<S: Scalar>(labeler: &Labeler<'_, S>, sample: &CodeSample) -> Result<Attribution, String> {
    let verdict = classify(labeler.config, labeler.detectors, sample).map_err(|e| e.to_string())?;
    Ok(if verdict.is_ai() { Attribution::Ai } else { Attribution::Human })
}

/// Read CVE import lines. Pre-labeled rows are taken as they are; missing
/// attributions are produced by `labeler` or, without one, reported and
/// the row skipped. Invalid rows become line-numbered diagnostics.
pub fn import_vuln_records<S: Scalar, R: BufRead>(
    source: R,
    labeler: Option<&Labeler<'_, S>>,
) -> std::io::Result<ReadOutcome<VulnRecord>> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: ImportRow = match serde_json::from_str(&line) {
            Ok(row) => row,
            Err(e) => {
                diagnostics.push(Diagnostic::at_line(line_no, format!("invalid vuln record: {e}")));
                continue;
            }
        };
        if let Some(v) = row.schema.filter(|&v| v != SCHEMA_VERSION) {
            diagnostics.push(Diagnostic::at_line(line_no, format!("unsupported schema version {v}")));
            continue;
        }
        let mut resolve = |given: Option<Attribution>, role: &str, fragment: &str| match (given, labeler) {
            (Some(a), _) => Some(a),
            (None, Some(l)) => match attribute(l, &fragment_sample(&row.cve_id, role, fragment, row.language)) {
                Ok(a) => Some(a),
                Err(e) => {
                    diagnostics.push(Diagnostic::at_line(line_no, format!("{} {role} fragment: {e}", row.cve_id)));
                    None
                }
            },
            (None, None) => {
                diagnostics.push(Diagnostic::at_line(line_no, format!("{} has no {role} attribution", row.cve_id)));
                None
            }
        };
        let intro = resolve(row.intro_source, "intro", &row.vulnerable_fragment);
        let fix = resolve(row.fix_source, "fix", &row.patched_fragment);
        let (Some(intro_source), Some(fix_source)) = (intro, fix) else { continue };
        let record = VulnRecord {
            cve_id: row.cve_id,
            cwe_id: row.cwe_id,
            cvss_base: row.cvss_base,
            attack_vector: row.attack_vector,
            language: row.language,
            vulnerable_fragment: row.vulnerable_fragment,
            patched_fragment: row.patched_fragment,
            intro_source,
            fix_source,
            disclosed: row.disclosed,
        };
        match record.validate() {
            Ok(()) => records.push(record),
            Err(reason) => {
                diagnostics.push(Diagnostic::at_line(line_no, format!("invalid vuln record {:?}: {reason}", record.cve_id)))
            }
        }
    }
    Ok(ReadOutcome { records, diagnostics })
}
