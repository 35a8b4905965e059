use super::{Detector, DetectorError, DetectorScore};
use crate::diagnostics::Diagnostic;
use crate::model::CodeSample;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::process::{Command, Stdio};

/// One line of an external score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalScoreRow {
    pub sample_id: String,
    pub detector_id: String,
    pub score: f64,
}

/// Scores produced outside this crate, looked up by sample id.
#[derive(Debug, Clone, Default)]
pub struct ExternalDetector {
    id: String,
    scores: HashMap<String, f64>,
}

impl ExternalDetector {
    pub fn new(id: impl Into<String>, scores: HashMap<String, f64>) -> Self {
        Self { id: id.into(), scores }
    }

    /// Add the scores of `other`, keeping existing entries on conflict.
    /// Returns how many of `other`'s scores were dropped as duplicates.
    pub fn merge(&mut self, other: ExternalDetector) -> usize {
        let mut dropped = 0;
        for (sample, score) in other.scores {
            match self.scores.entry(sample) {
                std::collections::hash_map::Entry::Occupied(_) => dropped += 1,
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(score);
                }
            }
        }
        dropped
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl Detector for ExternalDetector {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, sample: &CodeSample) -> Result<DetectorScore, DetectorError> {
        self.scores
            .get(&sample.id)
            .map(|&s| DetectorScore::new(&self.id, s))
            .ok_or_else(|| DetectorError::MissingScore { detector: self.id.clone(), sample: sample.id.clone() })
    }
}

/// Read a JSON Lines score file into one detector per `detector_id`.
pub fn load_external_scores<R: BufRead>(
    source: R,
) -> std::io::Result<(BTreeMap<String, ExternalDetector>, Vec<Diagnostic>)> {
    let mut detectors: BTreeMap<String, ExternalDetector> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: ExternalScoreRow = match serde_json::from_str(&line) {
            Ok(row) => row,
            Err(e) => {
                diagnostics.push(Diagnostic::at_line(line_no, format!("malformed score row: {e}")));
                continue;
            }
        };
        if !(0.0..=1.0).contains(&row.score) {
            diagnostics.push(Diagnostic::at_line(line_no, format!("score {} outside [0, 1]", row.score)));
            continue;
        }
        let detector = detectors
            .entry(row.detector_id.clone())
            .or_insert_with(|| ExternalDetector::new(row.detector_id.clone(), HashMap::new()));
        if detector.scores.contains_key(&row.sample_id) {
            diagnostics.push(Diagnostic::at_line(
                line_no,
                format!("duplicate score for ({}, {}), first kept", row.sample_id, row.detector_id),
            ));
            continue;
        }
        detector.scores.insert(row.sample_id, row.score);
    }
    Ok((detectors, diagnostics))
}

/// Run a scoring program: sample ids go to its stdin one per line, one decimal
/// score per line is expected back, and the program must exit with status 0.
pub fn run_score_subprocess(command: &[String], ids: &[String]) -> Result<HashMap<String, f64>, DetectorError> {
    let (program, args) = command.split_first().ok_or_else(|| DetectorError::Subprocess("empty command".into()))?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| DetectorError::Subprocess(format!("cannot start {program}: {e}")))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let input: String = ids.iter().map(|id| format!("{id}\n")).collect();
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
    let output = child.wait_with_output().map_err(|e| DetectorError::Subprocess(e.to_string()))?;
    writer
        .join()
        .map_err(|_| DetectorError::Subprocess("stdin writer panicked".into()))?
        .map_err(|e| DetectorError::Subprocess(format!("writing ids: {e}")))?;
    if !output.status.success() {
        return Err(DetectorError::Subprocess(format!("{program} exited with {}", output.status)));
    }
    let text = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != ids.len() {
        return Err(DetectorError::Subprocess(format!("expected {} scores, got {}", ids.len(), lines.len())));
    }
    ids.iter()
        .zip(lines)
        .map(|(id, line)| {
            let score: f64 = line
                .trim()
                .parse()
                .map_err(|_| DetectorError::Subprocess(format!("bad score {line:?} for {id}")))?;
            if !(0.0..=1.0).contains(&score) {
                return Err(DetectorError::OutOfRange { detector: program.clone(), score });
            }
            Ok((id.clone(), score))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LanguageId, ProvenanceLabel};

    fn sample(id: &str) -> CodeSample {
        CodeSample {
            id: id.into(),
            content: String::new(),
            language: LanguageId::Other,
            label: ProvenanceLabel::Unknown,
            origin: Default::default(),
        }
    }

    #[test]
    fn table_lookup_and_missing_score() {
        let text = r#"{"sample_id":"id42","detector_id":"hcr","score":0.91}
{"sample_id":"id42","detector_id":"hcr","score":0.5}
not json
{"sample_id":"id43","detector_id":"hcr","score":1.2}
"#;
        let (detectors, diags) = load_external_scores(text.as_bytes()).unwrap();
        let hcr = &detectors["hcr"];
        assert_eq!(hcr.score(&sample("id42")).unwrap().score, 0.91);
        assert!(matches!(hcr.score(&sample("id7")), Err(DetectorError::MissingScore { .. })));
        let lines: Vec<_> = diags.iter().map(|d| d.line.unwrap()).collect();
        assert_eq!(lines, [2, 3, 4]);
    }

    #[test]
    fn subprocess_protocol() {
        let cmd: Vec<String> = ["sh", "-c", "while read id; do echo 0.25; done"].map(String::from).to_vec();
        let ids = vec!["a".to_string(), "b".to_string()];
        let scores = run_score_subprocess(&cmd, &ids).unwrap();
        assert_eq!(scores["a"], 0.25);
        assert_eq!(scores["b"], 0.25);
    }

    #[test]
    fn subprocess_failures() {
        let fail: Vec<String> = ["sh", "-c", "cat >/dev/null; exit 3"].map(String::from).to_vec();
        assert!(run_score_subprocess(&fail, &["a".into()]).is_err());
        let short: Vec<String> = ["sh", "-c", "cat >/dev/null; echo 0.1"].map(String::from).to_vec();
        assert!(run_score_subprocess(&short, &["a".into(), "b".into()]).is_err());
        assert!(run_score_subprocess(&[], &[]).is_err());
    }
}
