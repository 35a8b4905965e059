use super::{logistic, median, Detector, DetectorError, DetectorScore};
use crate::model::{CodeSample, ProvenanceLabel};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_ORDER: usize = 4;

/// Multiplier applied to the calibration median to get the logistic midpoint.
pub const DEFAULT_CALIBRATION_MARGIN: f64 = 1.5;

/// Logistic steepness, in units of `1 / midpoint`.
const SLOPE_SCALE: f64 = 4.0;

const PAD: char = '\u{2}';

/// Maps a "lower is more AI-like" statistic to a score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Median of the statistic over the held-out calibration slice.
    pub median: f64,
    pub midpoint: f64,
    pub slope: f64,
}

impl Calibration {
    pub fn fit(mut values: Vec<f64>, margin: f64) -> Option<Self> {
        let median = median(&mut values)?;
        let midpoint = (median * margin).max(f64::MIN_POSITIVE);
        Some(Self { median, midpoint, slope: SLOPE_SCALE / midpoint })
    }

    pub fn score(&self, value: f64) -> f64 {
        logistic((self.midpoint - value) * self.slope)
    }
}

/// Seeded 90/10 split of `n` items into (training, calibration) indices.
/// With a single item, that item serves both roles.
pub(crate) fn calibration_split(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    if n < 2 {
        return (idx.clone(), idx);
    }
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held = (n / 10).max(1);
    let calibration = idx.split_off(n - held);
    (idx, calibration)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    next: BTreeMap<char, u64>,
}

/// Character-level n-gram model with add-one smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    counts: BTreeMap<String, ContextCounts>,
    vocabulary: BTreeSet<char>,
    pub calibration: Calibration,
}

impl NgramModel {
    /// Train on the AI-labeled samples of `corpus`. A seeded tenth of them is
    /// held out to calibrate the score mapping.
    pub fn train(corpus: &[CodeSample], order: usize, seed: u64) -> Result<Self, DetectorError> {
        Self::train_with_margin(corpus, order, seed, DEFAULT_CALIBRATION_MARGIN)
    }

    pub fn train_with_margin(
        corpus: &[CodeSample],
        order: usize,
        seed: u64,
        margin: f64,
    ) -> Result<Self, DetectorError> {
        if order == 0 {
            return Err(DetectorError::ZeroOrder);
        }
        let texts: Vec<&str> =
            corpus.iter().filter(|s| s.label == ProvenanceLabel::Ai).map(|s| s.content.as_str()).collect();
        if texts.is_empty() {
            return Err(DetectorError::EmptyCorpus);
        }
        let chars: usize = texts.iter().map(|t| t.chars().count()).sum();
        if chars < order {
            return Err(DetectorError::CorpusSmallerThanOrder { chars, order });
        }
        let (train_idx, calib_idx) = calibration_split(texts.len(), seed);
        let mut model = Self {
            order,
            counts: BTreeMap::new(),
            vocabulary: BTreeSet::new(),
            calibration: Calibration { median: 1.0, midpoint: 1.0, slope: SLOPE_SCALE },
        };
        for &i in &train_idx {
            model.observe(texts[i]);
        }
        let held_out: Vec<f64> =
            calib_idx.iter().filter(|&&i| !texts[i].is_empty()).map(|&i| model.perplexity(texts[i])).collect();
        let held_out = if held_out.is_empty() {
            train_idx.iter().filter(|&&i| !texts[i].is_empty()).map(|&i| model.perplexity(texts[i])).collect()
        } else {
            held_out
        };
        model.calibration = Calibration::fit(held_out, margin).ok_or(DetectorError::EmptyCorpus)?;
        Ok(model)
    }

    fn observe(&mut self, text: &str) {
        let padded: Vec<char> = std::iter::repeat_n(PAD, self.order - 1).chain(text.chars()).collect();
        for window in padded.windows(self.order) {
            let (context, next) = window.split_at(self.order - 1);
            let entry = self.counts.entry(context.iter().collect()).or_default();
            entry.total += 1;
            *entry.next.entry(next[0]).or_insert(0) += 1;
            self.vocabulary.insert(next[0]);
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Symbols seen in training plus one bucket for unseen symbols.
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len() + 1
    }

    /// Smoothed `P(next | context)`; `context` must hold `order - 1` chars.
    pub fn probability(&self, context: &str, next: char) -> f64 {
        let v = self.vocabulary_size() as f64;
        match self.counts.get(context) {
            Some(c) => (c.next.get(&next).copied().unwrap_or(0) as f64 + 1.0) / (c.total as f64 + v),
            None => 1.0 / v,
        }
    }

    /// Per-character perplexity of `text`; infinite-free since every
    /// probability is positive. Empty text has perplexity 1.
    pub fn perplexity(&self, text: &str) -> f64 {
        let padded: Vec<char> = std::iter::repeat_n(PAD, self.order - 1).chain(text.chars()).collect();
        let mut log_sum = 0.0;
        let mut n = 0usize;
        let mut context = String::new();
        for window in padded.windows(self.order) {
            context.clear();
            context.extend(&window[..self.order - 1]);
            log_sum += self.probability(&context, window[self.order - 1]).ln();
            n += 1;
        }
        if n == 0 {
            1.0
        } else {
            (-log_sum / n as f64).exp()
        }
    }

    pub fn score(&self, id: &str, sample: &CodeSample) -> DetectorScore {
        if sample.content.is_empty() {
            return DetectorScore::new(id, 0.5).with_aux("empty", 1.0);
        }
        let ppl = self.perplexity(&sample.content);
        DetectorScore::new(id, self.calibration.score(ppl)).with_aux("perplexity", ppl)
    }
}

#[derive(Debug, Clone)]
pub struct NgramDetector {
    id: String,
    model: NgramModel,
}

impl NgramDetector {
    pub fn new(id: impl Into<String>, model: NgramModel) -> Self {
        Self { id: id.into(), model }
    }

    pub fn model(&self) -> &NgramModel {
        &self.model
    }
}

impl Detector for NgramDetector {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, sample: &CodeSample) -> Result<DetectorScore, DetectorError> {
        Ok(self.model.score(&self.id, sample))
    }
}
