use super::{DetectorError, DetectorSet};
use crate::cascade::EnsembleConfig;
use crate::eval::{metrics, require_two_classes, ConfusionCounts, EvalError, Metric, MetricsReport};
use crate::model::{CodeSample, ProvenanceLabel};
use crate::scalar::Scalar;
use rayon::prelude::*;

/// Base-detector decision threshold used while profiling.
pub const PROFILE_THRESHOLD: f64 = 0.5;

const EXCLUSION_F1: (u64, u64) = (1, 5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorGroup {
    HighPrecision,
    HighRecall,
    Excluded,
}

impl DetectorGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorGroup::HighPrecision => "high_precision",
            DetectorGroup::HighRecall => "high_recall",
            DetectorGroup::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorProfile<S> {
    pub detector_id: String,
    pub metrics: MetricsReport<S>,
    pub group: DetectorGroup,
}

/// Excluded when F1 is undefined or below 0.2; otherwise high-precision when
/// precision >= recall (ties included), high-recall otherwise.
pub fn group_for<S: Scalar>(report: &MetricsReport<S>) -> DetectorGroup {
    let floor = S::ratio(EXCLUSION_F1.0, EXCLUSION_F1.1);
    if !matches!(report.f1, Metric::Defined(f1) if f1 >= floor) {
        return DetectorGroup::Excluded;
    }
    match (report.precision, report.recall) {
        (Metric::Defined(p), Metric::Defined(r)) if p >= r => DetectorGroup::HighPrecision,
        _ => DetectorGroup::HighRecall,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("sample {sample}: {source}")]
    Detector { sample: String, source: DetectorError },
    #[error("no high-precision detector available for the master role")]
    NoMaster,
}

/// Metrics of every detector in the set at [`PROFILE_THRESHOLD`], in id order.
pub fn profile_detectors<S: Scalar>(
    detectors: &DetectorSet,
    corpus: &[CodeSample],
) -> Result<Vec<DetectorProfile<S>>, ProfileError> {
    require_two_classes(corpus)?;
    let ids: Vec<&str> = detectors.ids().collect();
    ids.par_iter()
        .map(|&id| {
            let mut counts = ConfusionCounts::default();
            for sample in corpus {
                let score = detectors
                    .score(id, sample)
                    .map_err(|source| ProfileError::Detector { sample: sample.id.clone(), source })?;
                counts.record(score.score >= PROFILE_THRESHOLD, sample.label == ProvenanceLabel::Ai);
            }
            let report = metrics(counts)?;
            Ok(DetectorProfile { detector_id: id.to_string(), group: group_for(&report), metrics: report })
        })
        .collect()
}

/// Master = the high-precision detector with the highest precision (ties by
/// id); every other non-excluded detector becomes an auxiliary, in id order.
pub fn assemble_config<S: Scalar>(profiles: &[DetectorProfile<S>]) -> Result<EnsembleConfig<S>, ProfileError> {
    let mut candidates: Vec<&DetectorProfile<S>> =
        profiles.iter().filter(|p| p.group == DetectorGroup::HighPrecision).collect();
    candidates.sort_by(|a, b| {
        let pa = a.metrics.precision.value().unwrap_or_else(S::zero);
        let pb = b.metrics.precision.value().unwrap_or_else(S::zero);
        pb.partial_cmp(&pa).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.detector_id.cmp(&b.detector_id))
    });
    let master = candidates.first().ok_or(ProfileError::NoMaster)?;
    let mut aux: Vec<&str> = profiles
        .iter()
        .filter(|p| p.group != DetectorGroup::Excluded && p.detector_id != master.detector_id)
        .map(|p| p.detector_id.as_str())
        .collect();
    aux.sort_unstable();
    Ok(EnsembleConfig::new(master.detector_id.clone(), aux))
}
