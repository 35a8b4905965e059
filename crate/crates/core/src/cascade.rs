//! Two-stage cascade–aggregation ensemble.
//!
//! Stage 1 exits early with an AI verdict when the master detector's score is
//! strictly above `tau1`. Otherwise Stage 2 takes the weighted mean of the
//! master and auxiliary scores,
//!
//! ```text
//! score_final = Σ score_i · weight_i / Σ weight_i
//! ```
//!
//! and labels the sample AI when `score_final >= tau2`, human otherwise.

use crate::detectors::{DetectorError, DetectorSet};
use crate::eval::{confusion, metrics, require_two_classes, truth_table, EvalError, MetricsReport};
use crate::model::{CodeSample, ProvenanceLabel, Record, RecordKind};
use crate::scalar::{is_unit, sum, Scalar};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Full,
    /// No early exit; every sample is aggregated.
    NoStage1,
    /// Stop after Stage 1; samples that do not exit are labeled human.
    NoStage2,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Full, Mode::NoStage1, Mode::NoStage2];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::NoStage1 => "no-stage1",
            Mode::NoStage2 => "no-stage2",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == text)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionPath {
    Stage1Exit,
    Stage2Aggregate,
    /// Stage-1 fall-through when Stage 2 is disabled.
    Stage1Reject,
}

impl DecisionPath {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionPath::Stage1Exit => "stage1_exit",
            DecisionPath::Stage2Aggregate => "stage2_aggregate",
            DecisionPath::Stage1Reject => "stage1_reject",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        [DecisionPath::Stage1Exit, DecisionPath::Stage2Aggregate, DecisionPath::Stage1Reject]
            .into_iter()
            .find(|p| p.as_str() == text)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("tau1 must satisfy 0 < tau1 <= 1")]
    Tau1,
    #[error("tau2 must satisfy 0 <= tau2 <= 1")]
    Tau2,
    #[error("master {0:?} is also listed as an auxiliary")]
    MasterIsAuxiliary(String),
    #[error("auxiliary {0:?} listed twice")]
    DuplicateAuxiliary(String),
    #[error("weight for {0:?} must be positive")]
    NonPositiveWeight(String),
    #[error("empty detector id")]
    EmptyId,
    #[error("unknown mode {0:?}, expected full, no-stage1 or no-stage2")]
    UnknownMode(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig<S> {
    pub master_id: String,
    pub aux_ids: Vec<String>,
    pub tau1: S,
    pub tau2: S,
    pub mode: Mode,
    /// Explicit weights; referees without an entry use 2 (master) or 1.
    pub weights: BTreeMap<String, S>,
}

impl<S: Scalar> EnsembleConfig<S> {
    pub fn default_tau1() -> S {
        S::ratio(9, 10)
    }

    pub fn default_tau2() -> S {
        S::ratio(53, 100)
    }

    /// Master weight 2, auxiliaries weight 1, `tau1 = 0.9`, `tau2 = 0.53`.
    pub fn new(master_id: impl Into<String>, aux_ids: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            master_id: master_id.into(),
            aux_ids: aux_ids.into_iter().map(Into::into).collect(),
            tau1: Self::default_tau1(),
            tau2: Self::default_tau2(),
            mode: Mode::Full,
            weights: BTreeMap::new(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_thresholds(mut self, tau1: S, tau2: S) -> Self {
        self.tau1 = tau1;
        self.tau2 = tau2;
        self
    }

    pub fn with_weight(mut self, id: impl Into<String>, weight: S) -> Self {
        self.weights.insert(id.into(), weight);
        self
    }

    pub fn weight(&self, id: &str) -> S {
        self.weights.get(id).copied().unwrap_or_else(|| {
            if id == self.master_id {
                S::from_count(2)
            } else {
                S::one()
            }
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tau1 > S::zero() && self.tau1 <= S::one()) {
            return Err(ConfigError::Tau1);
        }
        if !is_unit(self.tau2) {
            return Err(ConfigError::Tau2);
        }
        if self.master_id.is_empty() || self.aux_ids.iter().any(String::is_empty) {
            return Err(ConfigError::EmptyId);
        }
        let mut seen = BTreeSet::new();
        for aux in &self.aux_ids {
            if *aux == self.master_id {
                return Err(ConfigError::MasterIsAuxiliary(aux.clone()));
            }
            if !seen.insert(aux) {
                return Err(ConfigError::DuplicateAuxiliary(aux.clone()));
            }
        }
        for id in std::iter::once(&self.master_id).chain(&self.aux_ids) {
            if self.weight(id) <= S::zero() {
                return Err(ConfigError::NonPositiveWeight(id.clone()));
            }
        }
        Ok(())
    }

    /// Stage-2 aggregate over `(id, score)` pairs using the configured weights.
    pub fn aggregate(&self, scores: &[(String, S)]) -> S {
        let weighted = sum(scores.iter().map(|(id, s)| *s * self.weight(id)));
        let total = sum(scores.iter().map(|(id, _)| self.weight(id)));
        weighted / total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<S> {
    pub sample_id: String,
    pub label: ProvenanceLabel,
    /// Master score on a Stage-1 decision, the Stage-2 aggregate otherwise.
    pub final_score: S,
    pub decision_path: DecisionPath,
    pub component_scores: BTreeMap<String, S>,
}

impl<S: Scalar> Verdict<S> {
    pub fn is_ai(&self) -> bool {
        self.label == ProvenanceLabel::Ai
    }
}

#[derive(Serialize, Deserialize)]
struct VerdictRepr {
    sample_id: String,
    label: ProvenanceLabel,
    final_score: f64,
    decision_path: String,
    component_scores: BTreeMap<String, f64>,
}

impl<S: Scalar> Serialize for Verdict<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        VerdictRepr {
            sample_id: self.sample_id.clone(),
            label: self.label,
            final_score: self.final_score.to_f64(),
            decision_path: self.decision_path.as_str().to_string(),
            component_scores: self.component_scores.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Verdict<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = VerdictRepr::deserialize(deserializer)?;
        let decision_path = DecisionPath::parse(&repr.decision_path)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown decision path {:?}", repr.decision_path)))?;
        Ok(Verdict {
            sample_id: repr.sample_id,
            label: repr.label,
            final_score: S::from_f64(repr.final_score),
            decision_path,
            component_scores: repr.component_scores.into_iter().map(|(k, v)| (k, S::from_f64(v))).collect(),
        })
    }
}

impl<S: Scalar> Record for Verdict<S> {
    const KIND: RecordKind = RecordKind::Verdict;
    const UNIQUE_IDS: bool = true;

    fn record_id(&self) -> String {
        self.sample_id.clone()
    }

    fn validate(&self) -> Result<(), String> {
        if self.sample_id.is_empty() {
            return Err("empty sample id".into());
        }
        match (self.decision_path, self.label) {
            (_, ProvenanceLabel::Unknown) => Err("verdict label must be ai or human".into()),
            (DecisionPath::Stage1Exit, ProvenanceLabel::Human) => Err("stage-1 exit must be labeled ai".into()),
            (DecisionPath::Stage1Reject, ProvenanceLabel::Ai) => Err("stage-1 reject must be labeled human".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("invalid ensemble configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("detector {detector}: {source}")]
    Detector { detector: String, source: DetectorError },
}

fn component_score<S: Scalar>(detectors: &DetectorSet, id: &str, sample: &CodeSample) -> Result<S, ClassifyError> {
    detectors
        .score(id, sample)
        .map(|s| S::from_f64(s.score))
        .map_err(|source| ClassifyError::Detector { detector: id.to_string(), source })
}

/// Classify one sample. Auxiliary detectors are only invoked when the sample
/// reaches Stage 2.
pub fn classify<S: Scalar>(
    config: &EnsembleConfig<S>,
    detectors: &DetectorSet,
    sample: &CodeSample,
) -> Result<Verdict<S>, ClassifyError> {
    config.validate()?;
    classify_unchecked(config, detectors, sample)
}

fn classify_unchecked<S: Scalar>(
    config: &EnsembleConfig<S>,
    detectors: &DetectorSet,
    sample: &CodeSample,
) -> Result<Verdict<S>, ClassifyError> {
    let master: S = component_score(detectors, &config.master_id, sample)?;
    let mut component_scores = BTreeMap::from([(config.master_id.clone(), master)]);
    let verdict = |label, final_score, decision_path, component_scores| Verdict {
        sample_id: sample.id.clone(),
        label,
        final_score,
        decision_path,
        component_scores,
    };

    if config.mode != Mode::NoStage1 && master > config.tau1 {
        return Ok(verdict(ProvenanceLabel::Ai, master, DecisionPath::Stage1Exit, component_scores));
    }
    if config.mode == Mode::NoStage2 {
        return Ok(verdict(ProvenanceLabel::Human, master, DecisionPath::Stage1Reject, component_scores));
    }

    let mut scores = vec![(config.master_id.clone(), master)];
    for id in &config.aux_ids {
        let s = component_score(detectors, id, sample)?;
        component_scores.insert(id.clone(), s);
        scores.push((id.clone(), s));
    }
    let final_score = config.aggregate(&scores);
    let label = if final_score >= config.tau2 { ProvenanceLabel::Ai } else { ProvenanceLabel::Human };
    Ok(verdict(label, final_score, DecisionPath::Stage2Aggregate, component_scores))
}

/// Element-wise [`classify`] in parallel; output order matches input order and
/// one failing sample does not stop the others.
pub fn classify_batch<S: Scalar>(
    config: &EnsembleConfig<S>,
    detectors: &DetectorSet,
    samples: &[CodeSample],
) -> Vec<Result<Verdict<S>, ClassifyError>> {
    if let Err(e) = config.validate() {
        return samples.iter().map(|_| Err(ClassifyError::Config(e.clone()))).collect();
    }
    samples.par_iter().map(|s| classify_unchecked(config, detectors, s)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("threshold grid value outside [0, 1]")]
    OutOfRange,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("sample {sample}: {source}")]
    Classify { sample: String, source: ClassifyError },
}

/// Full-mode metrics for each `tau2` in `grid`. Detectors run once per
/// sample; Stage-1 exits do not depend on `tau2`.
pub fn threshold_sweep<S: Scalar>(
    config: &EnsembleConfig<S>,
    detectors: &DetectorSet,
    corpus: &[CodeSample],
    grid: &[S],
) -> Result<Vec<(S, MetricsReport<S>)>, SweepError> {
    if grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    if grid.iter().any(|&t| !is_unit(t)) {
        return Err(SweepError::OutOfRange);
    }
    require_two_classes(corpus)?;
    let base = config.clone().with_mode(Mode::Full);
    let verdicts: Vec<Verdict<S>> = classify_batch(&base, detectors, corpus)
        .into_iter()
        .zip(corpus)
        .map(|(r, s)| r.map_err(|source| SweepError::Classify { sample: s.id.clone(), source }))
        .collect::<Result<_, _>>()?;
    let truth = truth_table(corpus);
    grid.iter()
        .map(|&tau2| {
            let relabeled: Vec<Verdict<S>> = verdicts
                .iter()
                .map(|v| {
                    let mut v = v.clone();
                    if v.decision_path == DecisionPath::Stage2Aggregate {
                        v.label = if v.final_score >= tau2 { ProvenanceLabel::Ai } else { ProvenanceLabel::Human };
                    }
                    v
                })
                .collect();
            Ok((tau2, metrics(confusion(&relabeled, &truth)?)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{ConstantDetector, Detector, DetectorScore};
    use crate::model::{LanguageId, OriginMeta};
    use crate::Exact;
    use num_rational::Ratio;

    fn sample(id: &str) -> CodeSample {
        CodeSample {
            id: id.into(),
            content: String::new(),
            language: LanguageId::Other,
            label: ProvenanceLabel::Unknown,
            origin: OriginMeta::default(),
        }
    }

    fn set(master: f64, aux: &[f64]) -> (DetectorSet, EnsembleConfig<Exact>) {
        let mut detectors = DetectorSet::new().with(ConstantDetector::new("m", master));
        let mut ids = Vec::new();
        for (i, &s) in aux.iter().enumerate() {
            let id = format!("a{i}");
            detectors.insert(ConstantDetector::new(id.clone(), s));
            ids.push(id);
        }
        (detectors, EnsembleConfig::new("m", ids))
    }

    struct Panics;
    impl Detector for Panics {
        fn id(&self) -> &str {
            "boom"
        }
        fn score(&self, _: &CodeSample) -> Result<DetectorScore, DetectorError> {
            panic!("auxiliary invoked after early exit")
        }
    }

    #[test]
    fn early_exit_skips_auxiliaries() {
        let detectors = DetectorSet::new().with(ConstantDetector::new("m", 0.95)).with(Panics);
        let cfg = EnsembleConfig::<Exact>::new("m", ["boom"]);
        let v = classify(&cfg, &detectors, &sample("x")).unwrap();
        assert_eq!(v.decision_path, DecisionPath::Stage1Exit);
        assert_eq!(v.label, ProvenanceLabel::Ai);
        assert_eq!(v.final_score, Ratio::new(95, 100));
    }

    #[test]
    fn weighted_aggregate_below_threshold() {
        let (d, cfg) = set(0.6, &[0.4, 0.5, 0.7, 0.3]);
        let v = classify(&cfg, &d, &sample("x")).unwrap();
        assert_eq!(v.final_score, Ratio::new(31, 60));
        assert_eq!(v.label, ProvenanceLabel::Human);
        assert_eq!(v.decision_path, DecisionPath::Stage2Aggregate);
        assert_eq!(v.component_scores.len(), 5);
    }

    #[test]
    fn weighted_aggregate_above_threshold() {
        let (d, cfg) = set(0.6, &[0.5, 0.5, 0.7, 0.4]);
        let v = classify(&cfg, &d, &sample("x")).unwrap();
        assert_eq!(v.final_score, Ratio::new(55, 100));
        assert_eq!(v.label, ProvenanceLabel::Ai);
    }

    #[test]
    fn no_stage2_labels_non_exits_human() {
        let (d, cfg) = set(0.6, &[1.0, 1.0, 1.0, 1.0]);
        let v = classify(&cfg.with_mode(Mode::NoStage2), &d, &sample("x")).unwrap();
        assert_eq!(v.label, ProvenanceLabel::Human);
        assert_eq!(v.decision_path, DecisionPath::Stage1Reject);
    }

    #[test]
    fn no_stage1_always_aggregates() {
        let (d, cfg) = set(0.95, &[0.0, 0.0, 0.0, 0.0]);
        let v = classify(&cfg.with_mode(Mode::NoStage1), &d, &sample("x")).unwrap();
        assert_eq!(v.decision_path, DecisionPath::Stage2Aggregate);
        assert_eq!(v.final_score, Ratio::new(95 * 2, 600));
        assert_eq!(v.label, ProvenanceLabel::Human);
    }

    #[test]
    fn stage1_boundary_is_strict() {
        let (d, cfg) = set(0.9, &[0.9]);
        let v = classify(&cfg, &d, &sample("x")).unwrap();
        assert_eq!(v.decision_path, DecisionPath::Stage2Aggregate);
    }

    #[test]
    fn stage2_boundary_is_inclusive() {
        let (d, cfg) = set(0.53, &[0.53]);
        assert_eq!(classify(&cfg, &d, &sample("x")).unwrap().label, ProvenanceLabel::Ai);
    }

    #[test]
    fn detector_failure_names_detector() {
        let cfg = EnsembleConfig::<f64>::new("m", ["missing"]);
        let d = DetectorSet::new().with(ConstantDetector::new("m", 0.1));
        match classify(&cfg, &d, &sample("x")).unwrap_err() {
            ClassifyError::Detector { detector, .. } => assert_eq!(detector, "missing"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let ok = EnsembleConfig::<Exact>::new("m", ["a"]);
        assert!(ok.validate().is_ok());
        assert_eq!(EnsembleConfig::<Exact>::new("m", ["m"]).validate(), Err(ConfigError::MasterIsAuxiliary("m".into())));
        assert_eq!(ok.clone().with_thresholds(Ratio::from_integer(0), Ratio::new(1, 2)).validate(), Err(ConfigError::Tau1));
        assert_eq!(ok.clone().with_thresholds(Ratio::new(9, 10), Ratio::new(11, 10)).validate(), Err(ConfigError::Tau2));
        assert_eq!(
            ok.clone().with_weight("a", Ratio::from_integer(0)).validate(),
            Err(ConfigError::NonPositiveWeight("a".into()))
        );
        assert_eq!(EnsembleConfig::<Exact>::new("m", ["a", "a"]).validate(), Err(ConfigError::DuplicateAuxiliary("a".into())));
    }

    #[test]
    fn batch_preserves_order_and_isolates_errors() {
        let (d, cfg) = set(0.6, &[0.5]);
        assert!(classify_batch(&cfg, &d, &[]).is_empty());
        let samples = vec![sample("a"), sample("b")];
        let out = classify_batch(&cfg, &d, &samples);
        assert_eq!(out[0].as_ref().unwrap().sample_id, "a");
        assert_eq!(out[1].as_ref().unwrap(), &classify(&cfg, &d, &samples[1]).unwrap());
    }

    #[test]
    fn verdict_round_trips_through_json() {
        let (d, cfg) = set(0.6, &[0.5, 0.25]);
        let v: Verdict<f64> = classify(
            &EnsembleConfig::<f64>::new("m", cfg.aux_ids.clone()),
            &d,
            &sample("x"),
        )
        .unwrap();
        let line = crate::model::to_line(&v);
        assert!(line.starts_with("{\"schema\":1,\"sample_id\":\"x\""));
        let back = crate::model::read_records::<Verdict<f64>, _>(line.as_bytes()).unwrap();
        assert_eq!(back.records, vec![v]);
    }

    #[test]
    fn sweep_grid_preconditions() {
        let (d, cfg) = set(0.6, &[0.5]);
        let mut a = sample("a");
        a.label = ProvenanceLabel::Ai;
        let mut h = sample("h");
        h.label = ProvenanceLabel::Human;
        let corpus = vec![a, h];
        assert!(matches!(threshold_sweep(&cfg, &d, &corpus, &[]), Err(SweepError::EmptyGrid)));
        assert!(matches!(
            threshold_sweep(&cfg, &d, &corpus, &[Ratio::new(101, 100)]),
            Err(SweepError::OutOfRange)
        ));
        let curve = threshold_sweep(&cfg, &d, &corpus, &[Ratio::from_integer(0), Ratio::from_integer(1)]).unwrap();
        // tau2 = 0 labels every Stage-2 sample AI.
        assert_eq!(curve[0].1.counts.tp + curve[0].1.counts.fp, 2);
        assert_eq!(curve[1].1.counts.tp + curve[1].1.counts.fp, 0);
    }
}
