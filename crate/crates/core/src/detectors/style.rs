use super::builtin::{shannon_bits, tokenize};
use super::{logistic, Detector, DetectorError, DetectorScore};
use crate::lexical::lexical_profile;
use crate::model::{CodeSample, ProvenanceLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

pub const STYLE_FEATURES: [&str; 6] = [
    "lcs",
    "mean_line_length",
    "line_length_std",
    "comment_ratio",
    "identifier_length_entropy",
    "blank_line_ratio",
];

const COMMENT_PREFIXES: &[&str] = &["//", "#", "/*", "*", "--", "<!--"];

pub fn style_features(sample: &CodeSample) -> [f64; 6] {
    let lines: Vec<&str> = sample.content.lines().collect();
    let n = lines.len().max(1) as f64;
    let lengths: Vec<f64> = lines.iter().map(|l| l.chars().count() as f64).collect();
    let mean = lengths.iter().sum::<f64>() / n;
    let var = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    let non_blank: Vec<&str> = lines.iter().map(|l| l.trim()).filter(|l| !l.is_empty()).collect();
    let blank_ratio = if lines.is_empty() { 0.0 } else { (lines.len() - non_blank.len()) as f64 / n };
    let comment_ratio = if non_blank.is_empty() {
        0.0
    } else {
        non_blank.iter().filter(|l| COMMENT_PREFIXES.iter().any(|p| l.starts_with(p))).count() as f64
            / non_blank.len() as f64
    };
    let mut by_length: HashMap<usize, usize> = HashMap::new();
    let mut identifiers = 0;
    for token in tokenize(&sample.content) {
        if token.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
            *by_length.entry(token.len()).or_default() += 1;
            identifiers += 1;
        }
    }
    let lcs: f64 = lexical_profile::<f64>(&sample.content, sample.language).lcs;
    [
        lcs,
        mean,
        var.sqrt(),
        comment_ratio,
        shannon_bits(by_length.into_values(), identifiers),
        blank_ratio,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StyleTraining {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for StyleTraining {
    fn default() -> Self {
        Self { epochs: 500, learning_rate: 0.5, seed: 0 }
    }
}

/// Logistic regression over standardized style features.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleModel {
    pub means: [f64; 6],
    pub scales: [f64; 6],
    pub weights: [f64; 6],
    pub bias: f64,
}

impl StyleModel {
    /// All-zero weights: every input scores 0.5.
    pub fn zero() -> Self {
        Self { means: [0.0; 6], scales: [1.0; 6], weights: [0.0; 6], bias: 0.0 }
    }

    pub fn train(corpus: &[CodeSample], cfg: StyleTraining) -> Result<Self, DetectorError> {
        let (x, y): (Vec<[f64; 6]>, Vec<bool>) = corpus
            .iter()
            .filter(|s| s.label != ProvenanceLabel::Unknown)
            .map(|s| (style_features(s), s.label == ProvenanceLabel::Ai))
            .unzip();
        if x.is_empty() {
            return Err(DetectorError::EmptyCorpus);
        }
        if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
            return Err(DetectorError::SingleClass);
        }
        Ok(Self::train_features(&x, &y, cfg))
    }

    /// Full-batch gradient descent on the log loss, seeded initialization.
    pub fn train_features(x: &[[f64; 6]], y: &[bool], cfg: StyleTraining) -> Self {
        assert_eq!(x.len(), y.len(), "feature and label counts differ");
        let n = x.len().max(1) as f64;
        let mut means = [0.0; 6];
        let mut scales = [1.0; 6];
        for j in 0..6 {
            means[j] = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
            if var > 1e-12 {
                scales[j] = var.sqrt();
            }
        }
        let z: Vec<[f64; 6]> =
            x.iter().map(|r| std::array::from_fn(|j| (r[j] - means[j]) / scales[j])).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut weights: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.01..0.01));
        let mut bias = 0.0;
        for _ in 0..cfg.epochs {
            let mut grad = [0.0; 6];
            let mut grad_b = 0.0;
            for (row, &label) in z.iter().zip(y) {
                let p = logistic(dot(&weights, row) + bias);
                let err = p - if label { 1.0 } else { 0.0 };
                for j in 0..6 {
                    grad[j] += err * row[j];
                }
                grad_b += err;
            }
            for j in 0..6 {
                weights[j] -= cfg.learning_rate * grad[j] / n;
            }
            bias -= cfg.learning_rate * grad_b / n;
        }
        Self { means, scales, weights, bias }
    }

    pub fn predict(&self, features: &[f64; 6]) -> f64 {
        let z: [f64; 6] = std::array::from_fn(|j| (features[j] - self.means[j]) / self.scales[j]);
        logistic(dot(&self.weights, &z) + self.bias)
    }
}

fn dot(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct StyleDetector {
    id: String,
    model: Option<StyleModel>,
}

impl StyleDetector {
    pub fn new(id: impl Into<String>, model: StyleModel) -> Self {
        Self { id: id.into(), model: Some(model) }
    }

    pub fn untrained(id: impl Into<String>) -> Self {
        Self { id: id.into(), model: None }
    }
}

impl Detector for StyleDetector {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, sample: &CodeSample) -> Result<DetectorScore, DetectorError> {
        let model = self.model.as_ref().ok_or_else(|| DetectorError::Untrained(self.id.clone()))?;
        Ok(DetectorScore::new(&self.id, model.predict(&style_features(sample))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LanguageId;

    fn sample(content: &str) -> CodeSample {
        CodeSample {
            id: "s".into(),
            content: content.into(),
            language: LanguageId::Python,
            label: ProvenanceLabel::Unknown,
            origin: Default::default(),
        }
    }

    #[test]
    fn zero_model_is_neutral() {
        let d = StyleDetector::new("style", StyleModel::zero());
        assert_eq!(d.score(&sample("x = 1\n")).unwrap().score, 0.5);
        assert_eq!(d.score(&sample("")).unwrap().score, 0.5);
    }

    #[test]
    fn untrained_is_error() {
        let d = StyleDetector::untrained("style");
        assert_eq!(d.score(&sample("x")).unwrap_err(), DetectorError::Untrained("style".into()));
    }

    #[test]
    fn features_of_simple_file() {
        let f = style_features(&sample("# note\nif a and b:\n\n    x = 1\n"));
        assert_eq!(f[0], 2.5);
        assert!((f[3] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f[5] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn separable_features_train_to_high_accuracy() {
        // Two clusters separated along the comment-ratio and blank-line axes.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let ai = i % 2 == 0;
            let shift = if ai { 1.0 } else { -1.0 };
            x.push(std::array::from_fn(|j| {
                let base: f64 = rng.gen_range(-0.5..0.5);
                if j == 3 || j == 5 {
                    base + shift
                } else {
                    base
                }
            }));
            y.push(ai);
        }
        let model = StyleModel::train_features(&x, &y, StyleTraining::default());
        let correct = x.iter().zip(&y).filter(|(r, &l)| (model.predict(r) >= 0.5) == l).count();
        assert!(correct as f64 / x.len() as f64 >= 0.9);
    }

    #[test]
    fn single_class_corpus_rejected() {
        let mut s = sample("x");
        s.label = ProvenanceLabel::Ai;
        assert_eq!(StyleModel::train(&[s], StyleTraining::default()).unwrap_err(), DetectorError::SingleClass);
    }
}
