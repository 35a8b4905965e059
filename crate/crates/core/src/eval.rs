//! Splits, confusion counting and classification metrics, with AI-generated
//! as the positive class.

use crate::cascade::{classify_batch, ClassifyError, EnsembleConfig, Mode, Verdict};
use crate::detectors::DetectorSet;
use crate::model::{CodeSample, ProvenanceLabel};
use crate::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Add one (predicted, actual) observation.
    pub fn record(&mut self, predicted_ai: bool, actual_ai: bool) {
        match (predicted_ai, actual_ai) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut counts = Self::default();
        for (predicted, actual) in pairs {
            counts.record(predicted, actual);
        }
        counts
    }
}

/// A ratio metric whose denominator may be zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric<S> {
    Defined(S),
    Undefined,
}

impl<S: Scalar> Metric<S> {
    fn ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            Metric::Undefined
        } else {
            Metric::Defined(S::ratio(num, den))
        }
    }

    pub fn value(self) -> Option<S> {
        match self {
            Metric::Defined(v) => Some(v),
            Metric::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Defined(_))
    }
}

impl<S: Scalar> fmt::Display for Metric<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Defined(v) => write!(f, "{:.6}", v.to_f64()),
            Metric::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport<S> {
    pub accuracy: S,
    pub precision: Metric<S>,
    pub recall: Metric<S>,
    pub f1: Metric<S>,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("metrics need at least one observation")]
    EmptyCounts,
    #[error("split fraction {0} must lie strictly between 0 and 1")]
    BadFraction(String),
    #[error("corpus of {0} samples is too small to split")]
    CorpusTooSmall(usize),
    #[error("verdict for {0:?} has no ground-truth label")]
    UnknownVerdict(String),
    #[error("sample {0:?} has no verdict")]
    MissingVerdict(String),
    #[error("sample {0:?} has no usable ground-truth label")]
    Unlabeled(String),
    #[error("corpus must contain both human and ai labels")]
    SingleClass,
}

/// Accuracy, precision, recall and F1 from confusion counts.
///
/// F1 is `2tp / (2tp + fp + fn)`, which equals the harmonic mean of precision
/// and recall whenever both are defined and positive, and is 0 when both are
/// defined and zero. It is undefined whenever precision or recall is.
pub fn metrics<S: Scalar>(counts: ConfusionCounts) -> Result<MetricsReport<S>, EvalError> {
    let total = counts.total();
    if total == 0 {
        return Err(EvalError::EmptyCounts);
    }
    let precision = Metric::ratio(counts.tp, counts.tp + counts.fp);
    let recall = Metric::ratio(counts.tp, counts.tp + counts.fn_);
    let f1 = if precision.is_defined() && recall.is_defined() {
        Metric::ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn_)
    } else {
        Metric::Undefined
    };
    Ok(MetricsReport { accuracy: S::ratio(counts.tp + counts.tn, total), precision, recall, f1, counts })
}

fn truth_is_ai(label: ProvenanceLabel) -> Option<bool> {
    match label {
        ProvenanceLabel::Ai => Some(true),
        ProvenanceLabel::Human => Some(false),
        ProvenanceLabel::Unknown => None,
    }
}

/// Count verdicts against ground truth. Both sides must cover the same ids.
pub fn confusion<S: Scalar>(
    verdicts: &[Verdict<S>],
    truth: &HashMap<String, ProvenanceLabel>,
) -> Result<ConfusionCounts, EvalError> {
    let mut counts = ConfusionCounts::default();
    let mut seen = std::collections::HashSet::new();
    for verdict in verdicts {
        let label = truth.get(&verdict.sample_id).ok_or_else(|| EvalError::UnknownVerdict(verdict.sample_id.clone()))?;
        let actual = truth_is_ai(*label).ok_or_else(|| EvalError::Unlabeled(verdict.sample_id.clone()))?;
        counts.record(verdict.label == ProvenanceLabel::Ai, actual);
        seen.insert(verdict.sample_id.as_str());
    }
    let mut missing: Vec<&String> = truth.keys().filter(|id| !seen.contains(id.as_str())).collect();
    missing.sort();
    if let Some(id) = missing.first() {
        return Err(EvalError::MissingVerdict((*id).clone()));
    }
    Ok(counts)
}

pub fn truth_table(samples: &[CodeSample]) -> HashMap<String, ProvenanceLabel> {
    samples.iter().map(|s| (s.id.clone(), s.label)).collect()
}

/// Seeded stratified split. `part_a` receives `round(fraction * n)` items,
/// allocated across labels by largest remainder so every label's share is
/// within one item of its exact proportion. Both parts keep input order.
pub fn split<T: Clone>(
    items: &[T],
    label_of: impl Fn(&T) -> ProvenanceLabel,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), EvalError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::BadFraction(fraction.to_string()));
    }
    if items.len() < 2 {
        return Err(EvalError::CorpusTooSmall(items.len()));
    }
    let mut strata: BTreeMap<ProvenanceLabel, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        strata.entry(label_of(item)).or_default().push(i);
    }
    let target = (fraction * items.len() as f64).round() as usize;
    let mut quotas: Vec<(ProvenanceLabel, usize, f64)> = strata
        .iter()
        .map(|(label, idx)| {
            let exact = fraction * idx.len() as f64;
            let floor = exact.floor() as usize;
            (*label, floor, exact - floor as f64)
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.total_cmp(&quotas[a].2).then(a.cmp(&b)));
    for &k in order.iter().cycle().take(target.saturating_sub(assigned)) {
        quotas[k].1 += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_a = vec![false; items.len()];
    for (label, quota, _) in &quotas {
        let mut idx = strata[label].clone();
        idx.shuffle(&mut rng);
        for &i in idx.iter().take(*quota) {
            in_a[i] = true;
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (item, chosen) in items.iter().zip(in_a) {
        if chosen {
            a.push(item.clone());
        } else {
            b.push(item.clone());
        }
    }
    Ok((a, b))
}

pub fn split_samples(corpus: &[CodeSample], fraction: f64, seed: u64) -> Result<(Vec<CodeSample>, Vec<CodeSample>), EvalError> {
    split(corpus, |s| s.label, fraction, seed)
}

#[derive(Debug, thiserror::Error)]
pub enum EnsembleEvalError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("sample {sample}: {source}")]
    Classify { sample: String, source: ClassifyError },
}

pub(crate) fn require_two_classes(corpus: &[CodeSample]) -> Result<(), EvalError> {
    if let Some(s) = corpus.iter().find(|s| s.label == ProvenanceLabel::Unknown) {
        return Err(EvalError::Unlabeled(s.id.clone()));
    }
    let ai = corpus.iter().any(|s| s.label == ProvenanceLabel::Ai);
    let human = corpus.iter().any(|s| s.label == ProvenanceLabel::Human);
    if ai && human {
        Ok(())
    } else {
        Err(EvalError::SingleClass)
    }
}

/// Classify the corpus under each requested mode and score the verdicts.
pub fn evaluate_ensemble<S: Scalar>(
    config: &EnsembleConfig<S>,
    detectors: &DetectorSet,
    corpus: &[CodeSample],
    modes: &[Mode],
) -> Result<Vec<(Mode, MetricsReport<S>)>, EnsembleEvalError> {
    require_two_classes(corpus)?;
    let truth = truth_table(corpus);
    modes
        .iter()
        .map(|&mode| {
            let cfg = config.clone().with_mode(mode);
            let verdicts = classify_batch(&cfg, detectors, corpus)
                .into_iter()
                .zip(corpus)
                .map(|(r, s)| r.map_err(|source| EnsembleEvalError::Classify { sample: s.id.clone(), source }))
                .collect::<Result<Vec<_>, _>>()?;
            let counts = confusion(&verdicts, &truth)?;
            Ok((mode, metrics(counts)?))
        })
        .collect()
}

/// CSV rows in `mode,accuracy,precision,recall,f1,tp,fp,fn,tn` layout.
pub fn metrics_csv<S: Scalar>(rows: &[(String, MetricsReport<S>)]) -> String {
    let mut out = String::from("mode,accuracy,precision,recall,f1,tp,fp,fn,tn\n");
    for (name, m) in rows {
        out.push_str(&format!(
            "{name},{:.6},{},{},{},{},{},{},{}\n",
            m.accuracy.to_f64(),
            m.precision,
            m.recall,
            m.f1,
            m.counts.tp,
            m.counts.fp,
            m.counts.fn_,
            m.counts.tn
        ));
    }
    out
}
