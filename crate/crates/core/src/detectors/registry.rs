use super::{
    run_score_subprocess, ConstantDetector, DetectorError, DetectorSet, EntropyDetector, EntropyModel,
    ExternalDetector, NgramDetector, NgramModel, StyleDetector, StyleModel, StyleTraining, DEFAULT_ORDER,
};
use crate::cascade::{ConfigError, EnsembleConfig, Mode};
use crate::model::{read_records, CodeSample};
use crate::scalar::Scalar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// How to build one detector. Relative corpus paths resolve against the
/// directory of the config file that names them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    Constant {
        value: f64,
    },
    /// Scores from a score file, or from a program speaking the line protocol.
    External {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        command: Option<Vec<String>>,
    },
    Ngram {
        train_corpus: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Entropy {
        train_corpus: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Style {
        train_corpus: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epochs: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        learning_rate: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// On-disk ensemble configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CafConfig {
    pub master: String,
    #[serde(default)]
    pub auxiliaries: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub detectors: BTreeMap<String, DetectorSpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum CafConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

impl CafConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, CafConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CafConfigError::Io { path: path.into(), source })?;
        Self::from_json(&text).map_err(|source| CafConfigError::Parse { path: path.into(), source })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn ensemble<S: Scalar>(&self) -> Result<EnsembleConfig<S>, ConfigError> {
        let mut cfg = EnsembleConfig::new(self.master.clone(), self.auxiliaries.clone());
        if let Some(t) = self.tau1 {
            cfg.tau1 = S::from_f64(t);
        }
        if let Some(t) = self.tau2 {
            cfg.tau2 = S::from_f64(t);
        }
        if let Some(mode) = &self.mode {
            cfg.mode = Mode::parse(mode).ok_or_else(|| ConfigError::UnknownMode(mode.clone()))?;
        }
        for (id, &w) in &self.weights {
            cfg.weights.insert(id.clone(), S::from_f64(w));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_ensemble<S: Scalar>(cfg: &EnsembleConfig<S>) -> Self {
        Self {
            master: cfg.master_id.clone(),
            auxiliaries: cfg.aux_ids.clone(),
            tau1: Some(cfg.tau1.to_f64()),
            tau2: Some(cfg.tau2.to_f64()),
            mode: Some(cfg.mode.as_str().to_string()),
            weights: cfg.weights.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
            detectors: BTreeMap::new(),
        }
    }
}

fn load_corpus(path: &Path) -> Result<Vec<CodeSample>, DetectorError> {
    let file = std::fs::File::open(path)
        .map_err(|e| DetectorError::Setup(format!("training corpus {}: {e}", path.display())))?;
    let outcome = read_records::<CodeSample, _>(std::io::BufReader::new(file))
        .map_err(|e| DetectorError::Setup(format!("training corpus {}: {e}", path.display())))?;
    for d in &outcome.diagnostics {
        log::warn!("{}: {d}", path.display());
    }
    Ok(outcome.records)
}

/// Build every detector in `specs`. External detectors without a command are
/// taken from `external`, which is keyed by detector id; score tables whose
/// id has no spec are added as well. Subprocess detectors are queried once
/// for all of `samples`. `seed` is the default for specs without one.
pub fn build_detectors(
    specs: &BTreeMap<String, DetectorSpec>,
    base_dir: &Path,
    external: &BTreeMap<String, ExternalDetector>,
    samples: &[CodeSample],
    seed: u64,
) -> Result<DetectorSet, DetectorError> {
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
    let mut corpora: BTreeMap<PathBuf, Arc<Vec<CodeSample>>> = BTreeMap::new();
    for spec in specs.values() {
        if let DetectorSpec::Ngram { train_corpus, .. }
        | DetectorSpec::Entropy { train_corpus, .. }
        | DetectorSpec::Style { train_corpus, .. } = spec
        {
            let path = resolve(train_corpus);
            if let std::collections::btree_map::Entry::Vacant(slot) = corpora.entry(path) {
                let corpus = load_corpus(slot.key())?;
                slot.insert(Arc::new(corpus));
            }
        }
    }

    let entries: Vec<(&String, &DetectorSpec)> = specs.iter().collect();
    let built: Vec<Arc<dyn super::Detector>> = entries
        .par_iter()
        .map(|&(id, spec)| -> Result<Arc<dyn super::Detector>, DetectorError> {
            let corpus = |p: &PathBuf| corpora[&resolve(p)].clone();
            Ok(match spec {
                DetectorSpec::Constant { value } => {
                    if !(0.0..=1.0).contains(value) {
                        return Err(DetectorError::OutOfRange { detector: id.clone(), score: *value });
                    }
                    Arc::new(ConstantDetector::new(id.clone(), *value))
                }
                DetectorSpec::External { command: Some(cmd) } => {
                    let ids: Vec<String> = samples.iter().map(|s| s.id.clone()).collect();
                    Arc::new(ExternalDetector::new(id.clone(), run_score_subprocess(cmd, &ids)?))
                }
                DetectorSpec::External { command: None } => Arc::new(
                    external
                        .get(id)
                        .cloned()
                        .ok_or_else(|| DetectorError::Setup(format!("no external scores for detector {id:?}")))?,
                ),
                DetectorSpec::Ngram { train_corpus, order, seed: s } => {
                    let model = NgramModel::train(&corpus(train_corpus), order.unwrap_or(DEFAULT_ORDER), s.unwrap_or(seed))?;
                    Arc::new(NgramDetector::new(id.clone(), model))
                }
                DetectorSpec::Entropy { train_corpus, seed: s } => {
                    Arc::new(EntropyDetector::new(id.clone(), EntropyModel::train(&corpus(train_corpus), s.unwrap_or(seed))?))
                }
                DetectorSpec::Style { train_corpus, epochs, learning_rate, seed: s } => {
                    let defaults = StyleTraining::default();
                    let training = StyleTraining {
                        epochs: epochs.unwrap_or(defaults.epochs),
                        learning_rate: learning_rate.unwrap_or(defaults.learning_rate),
                        seed: s.unwrap_or(seed),
                    };
                    Arc::new(StyleDetector::new(id.clone(), StyleModel::train(&corpus(train_corpus), training)?))
                }
            })
        })
        .collect::<Result<_, _>>()?;

    let mut set = DetectorSet::new();
    for (id, table) in external {
        if !specs.contains_key(id) {
            set.insert(table.clone());
        }
    }
    for detector in built {
        set.insert_arc(detector);
    }
    Ok(set)
}
