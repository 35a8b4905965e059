//! Synthetic labeled corpora with controlled detector behaviour.

use codeprov_core::detectors::{DetectorSet, ExternalDetector};
use codeprov_core::model::{CodeSample, LanguageId, OriginMeta, ProvenanceLabel};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use std::collections::HashMap;

pub fn sample(id: impl Into<String>, content: impl Into<String>, label: ProvenanceLabel) -> CodeSample {
    CodeSample {
        id: id.into(),
        content: content.into(),
        language: LanguageId::Python,
        label,
        origin: OriginMeta::default(),
    }
}

fn table(id: &str, scores: HashMap<String, f64>) -> ExternalDetector {
    ExternalDetector::new(id, scores)
}

/// Scores drawn independently and uniformly, with `exit_share` of the master
/// scores pushed above 0.9. Labels are random. Detector ids are "master",
/// "aux_1" ... "aux_k".
pub fn random_score_corpus(rng: &mut ChaCha8Rng, n: usize, aux: usize, exit_share: f64) -> (Vec<CodeSample>, DetectorSet) {
    let samples: Vec<CodeSample> = (0..n)
        .map(|i| sample(format!("s{i:04}"), "", if rng.gen_bool(0.5) { ProvenanceLabel::Ai } else { ProvenanceLabel::Human }))
        .collect();
    let mut set = DetectorSet::new();
    let master = samples
        .iter()
        .map(|s| {
            let v = if rng.gen_bool(exit_share) { rng.gen_range(0.9..=1.0) } else { rng.gen_range(0.0..=0.9) };
            (s.id.clone(), v)
        })
        .collect();
    set.insert(table("master", master));
    for k in 1..=aux {
        let scores = samples.iter().map(|s| (s.id.clone(), rng.gen_range(0.0..=1.0))).collect();
        set.insert(table(&format!("aux_{k}"), scores));
    }
    (samples, set)
}

/// A labeled corpus where "master" is precise but misses most AI code and
/// "aux_a"/"aux_b" catch nearly all AI code but also most human code.
///
/// AI samples are "easy" (master near 1) with probability 0.3; a sixth of
/// those are invisible to the auxiliaries. The rest have a low master score
/// and high auxiliary scores. Human samples have a low master score and
/// moderately high auxiliary scores.
pub fn cascade_benchmark(rng: &mut ChaCha8Rng, per_class: usize) -> (Vec<CodeSample>, DetectorSet) {
    let beta = |a: f64, b: f64| Beta::new(a, b).expect("valid beta");
    let (easy_master, hard_master, human_master) = (beta(30.0, 1.5), beta(6.0, 14.0), beta(2.0, 8.0));
    let (ai_aux, blind_aux, human_aux) = (beta(9.0, 2.0), beta(1.0, 12.0), beta(6.0, 3.0));
    let mut samples = Vec::with_capacity(2 * per_class);
    let mut master = HashMap::new();
    let mut aux_a = HashMap::new();
    let mut aux_b = HashMap::new();
    for i in 0..2 * per_class {
        let is_ai = i % 2 == 0;
        let id = format!("b{i:05}");
        let (m, aux): (f64, &Beta<f64>) = if is_ai {
            if rng.gen_bool(0.3) {
                let aux = if rng.gen_bool(1.0 / 6.0) { &blind_aux } else { &ai_aux };
                (easy_master.sample(rng), aux)
            } else {
                (hard_master.sample(rng), &ai_aux)
            }
        } else {
            (human_master.sample(rng), &human_aux)
        };
        master.insert(id.clone(), m);
        aux_a.insert(id.clone(), aux.sample(rng));
        aux_b.insert(id.clone(), aux.sample(rng));
        samples.push(sample(id, "", if is_ai { ProvenanceLabel::Ai } else { ProvenanceLabel::Human }));
    }
    let set = DetectorSet::new().with(table("master", master)).with(table("aux_a", aux_a)).with(table("aux_b", aux_b));
    (samples, set)
}

const AI_LINES: &[&str] = &[
    "def process_data(data):\n",
    "    result = []\n",
    "    for item in data:\n",
    "        result.append(item)\n",
    "    return result\n",
    "\n",
    "def validate_input(value):\n",
    "    if value is None:\n",
    "        return False\n",
    "    return True\n",
];

/// Repetitive, template-like code: a few fixed lines in varying order.
pub fn low_entropy_text(rng: &mut ChaCha8Rng, lines: usize) -> String {
    (0..lines).map(|_| *AI_LINES.choose(rng).expect("non-empty")).collect()
}

const NOISE: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_+-*/%=<>!&|^~()[]{};:,.?@#$ \n\t";

/// Character soup with the same rough length per line as code.
pub fn high_entropy_text(rng: &mut ChaCha8Rng, lines: usize) -> String {
    let mut out = String::new();
    for _ in 0..lines {
        for _ in 0..rng.gen_range(12..32) {
            out.push(*NOISE.choose(rng).expect("non-empty") as char);
        }
        out.push('\n');
    }
    out
}
