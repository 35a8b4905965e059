use super::ngram::{calibration_split, Calibration};
use super::{Detector, DetectorError, DetectorScore};
use crate::model::{CodeSample, ProvenanceLabel};
use regex::Regex;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Always returns the same score.
#[derive(Debug, Clone)]
pub struct ConstantDetector {
    id: String,
    value: f64,
}

impl ConstantDetector {
    pub fn new(id: impl Into<String>, value: f64) -> Self {
        Self { id: id.into(), value }
    }
}

impl Detector for ConstantDetector {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, _sample: &CodeSample) -> Result<DetectorScore, DetectorError> {
        Ok(DetectorScore::new(&self.id, self.value))
    }
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_]*|[0-9]+|\S").expect("valid regex"))
}

/// Identifiers, integer literals and single non-space characters.
pub fn tokenize(content: &str) -> impl Iterator<Item = &str> {
    token_regex().find_iter(content).map(|m| m.as_str())
}

/// Shannon entropy in bits of the token frequency distribution.
pub fn token_entropy(content: &str) -> f64 {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    let mut total = 0usize;
    for token in tokenize(content) {
        *freq.entry(token).or_default() += 1;
        total += 1;
    }
    shannon_bits(freq.values().copied(), total)
}

pub(crate) fn shannon_bits(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let mut counts: Vec<usize> = counts.collect();
    counts.sort_unstable();
    let h: f64 = counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Calibrated token-entropy statistic: lower entropy reads as more AI-like.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyModel {
    pub calibration: Calibration,
}

impl EntropyModel {
    pub const DEFAULT_MARGIN: f64 = 1.1;

    pub fn train(corpus: &[CodeSample], seed: u64) -> Result<Self, DetectorError> {
        Self::train_with_margin(corpus, seed, Self::DEFAULT_MARGIN)
    }

    pub fn train_with_margin(corpus: &[CodeSample], seed: u64, margin: f64) -> Result<Self, DetectorError> {
        let ai: Vec<&CodeSample> =
            corpus.iter().filter(|s| s.label == ProvenanceLabel::Ai && !s.content.is_empty()).collect();
        if ai.is_empty() {
            return Err(DetectorError::EmptyCorpus);
        }
        let (_, calib) = calibration_split(ai.len(), seed);
        let values = calib.iter().map(|&i| token_entropy(&ai[i].content)).collect();
        let calibration = Calibration::fit(values, margin).ok_or(DetectorError::EmptyCorpus)?;
        Ok(Self { calibration })
    }
}

#[derive(Debug, Clone)]
pub struct EntropyDetector {
    id: String,
    model: EntropyModel,
}

impl EntropyDetector {
    pub fn new(id: impl Into<String>, model: EntropyModel) -> Self {
        Self { id: id.into(), model }
    }
}

impl Detector for EntropyDetector {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, sample: &CodeSample) -> Result<DetectorScore, DetectorError> {
        if sample.content.is_empty() {
            return Ok(DetectorScore::new(&self.id, 0.5).with_aux("empty", 1.0));
        }
        let h = token_entropy(&sample.content);
        Ok(DetectorScore::new(&self.id, self.model.calibration.score(h)).with_aux("entropy", h))
    }
}
