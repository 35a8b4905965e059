//! Base detectors feeding the cascade.
//!
//! Each detector maps a [`CodeSample`] to a confidence in `[0, 1]` that the
//! content is AI-generated. Built-in detectors are classical statistics; any
//! other model plugs in through [`ExternalDetector`], either from a score file
//! or from a subprocess.

mod builtin;
mod external;
mod ngram;
mod profile;
mod registry;
mod style;

pub use builtin::{token_entropy, tokenize, ConstantDetector, EntropyDetector, EntropyModel};
pub use external::{load_external_scores, run_score_subprocess, ExternalDetector, ExternalScoreRow};
pub use ngram::{Calibration, NgramDetector, NgramModel, DEFAULT_CALIBRATION_MARGIN, DEFAULT_ORDER};
pub use profile::{
    assemble_config, group_for, profile_detectors, DetectorGroup, DetectorProfile, ProfileError, PROFILE_THRESHOLD,
};
pub use registry::{build_detectors, CafConfig, CafConfigError, DetectorSpec};
pub use style::{style_features, StyleDetector, StyleModel, StyleTraining, STYLE_FEATURES};

use crate::model::CodeSample;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorScore {
    pub detector_id: String,
    pub score: f64,
    pub aux: BTreeMap<String, f64>,
}

impl DetectorScore {
    pub fn new(detector_id: impl Into<String>, score: f64) -> Self {
        Self { detector_id: detector_id.into(), score, aux: BTreeMap::new() }
    }

    pub fn with_aux(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectorError {
    #[error("detector {detector}: no score for sample {sample:?}")]
    MissingScore { detector: String, sample: String },
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training text has {chars} characters, fewer than order {order}")]
    CorpusSmallerThanOrder { chars: usize, order: usize },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("detector {0} is not trained")]
    Untrained(String),
    #[error("corpus must contain both human and ai labels")]
    SingleClass,
    #[error("detector {detector} produced {score}, outside [0, 1]")]
    OutOfRange { detector: String, score: f64 },
    #[error("unknown detector {0:?}")]
    Unknown(String),
    #[error("score subprocess failed: {0}")]
    Subprocess(String),
    #[error("{0}")]
    Setup(String),
}

/// Scoring contract shared by every base detector. Implementations must be
/// deterministic for a fixed state and return scores in `[0, 1]`.
pub trait Detector: Send + Sync {
    fn id(&self) -> &str;

    fn score(&self, sample: &CodeSample) -> Result<DetectorScore, DetectorError>;
}

/// Named collection of detectors, shareable across threads.
#[derive(Clone, Default)]
pub struct DetectorSet {
    detectors: BTreeMap<String, Arc<dyn Detector>>,
}

impl DetectorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<D: Detector + 'static>(&mut self, detector: D) {
        self.detectors.insert(detector.id().to_string(), Arc::new(detector));
    }

    pub fn insert_arc(&mut self, detector: Arc<dyn Detector>) {
        self.detectors.insert(detector.id().to_string(), detector);
    }

    pub fn with<D: Detector + 'static>(mut self, detector: D) -> Self {
        self.insert(detector);
        self
    }

    pub fn get(&self, id: &str) -> Result<&dyn Detector, DetectorError> {
        self.detectors.get(id).map(|d| d.as_ref()).ok_or_else(|| DetectorError::Unknown(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.detectors.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.detectors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Detector> {
        self.detectors.values().map(|d| d.as_ref())
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    /// Score `sample` with detector `id`, enforcing the `[0, 1]` contract.
    pub fn score(&self, id: &str, sample: &CodeSample) -> Result<DetectorScore, DetectorError> {
        let score = self.get(id)?.score(sample)?;
        if !(0.0..=1.0).contains(&score.score) {
            return Err(DetectorError::OutOfRange { detector: id.to_string(), score: score.score });
        }
        Ok(score)
    }
}

impl std::fmt::Debug for DetectorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.detectors.keys()).finish()
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x.is_nan() {
        return 0.5;
    }
    (1.0 / (1.0 + (-x).exp())).clamp(0.0, 1.0)
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) { (values[mid - 1] + values[mid]) / 2.0 } else { values[mid] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_bounded() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(1000.0) <= 1.0);
        assert!(logistic(-1000.0) >= 0.0);
        assert_eq!(logistic(f64::NAN), 0.5);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn set_rejects_unknown_and_out_of_range() {
        let set = DetectorSet::new().with(ConstantDetector::new("bad", 1.5));
        let sample = crate::model::CodeSample {
            id: "x".into(),
            content: String::new(),
            language: crate::model::LanguageId::Other,
            label: crate::model::ProvenanceLabel::Unknown,
            origin: Default::default(),
        };
        assert!(matches!(set.score("bad", &sample), Err(DetectorError::OutOfRange { .. })));
        assert!(matches!(set.score("nope", &sample), Err(DetectorError::Unknown(_))));
    }
}
