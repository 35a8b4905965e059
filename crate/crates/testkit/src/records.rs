//! Random, valid records of every kind with awkward string contents.

use chrono::NaiveDate;
use codeprov_core::cascade::{DecisionPath, Verdict};
use codeprov_core::model::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const PIECES: &[&str] = &[
    "if", " ", "\n", "\t", "\"", "'", "\\", "{", "}", "é", "漢字", "🦀", "\u{0}", "\u{1f}", "\r\n", "//", "x", "0", "null", "}\n{",
];

pub fn awkward_text(rng: &mut ChaCha8Rng, max_pieces: usize) -> String {
    (0..rng.gen_range(0..=max_pieces)).map(|_| *PIECES.choose(rng).expect("non-empty")).collect()
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, options: &[T]) -> T {
    *options.choose(rng).expect("non-empty")
}

fn maybe(rng: &mut ChaCha8Rng, make: impl FnOnce(&mut ChaCha8Rng) -> String) -> Option<String> {
    rng.gen_bool(0.5).then(|| make(rng))
}

pub fn random_sample(rng: &mut ChaCha8Rng, index: usize) -> CodeSample {
    let label = pick(rng, &[ProvenanceLabel::Ai, ProvenanceLabel::Human, ProvenanceLabel::Unknown]);
    let mut origin = OriginMeta {
        repo: maybe(rng, |r| awkward_text(r, 3)),
        generator: maybe(rng, |r| awkward_text(r, 3)),
        commit: maybe(rng, |r| format!("{:040x}", r.gen::<u128>())),
        path: maybe(rng, |r| awkward_text(r, 4)),
        timestamp: rng.gen_bool(0.5).then(|| rng.gen_range(-1_000_000_000i64..4_000_000_000)),
        app_domain: rng.gen_bool(0.5).then(|| pick(rng, AppDomain::ALL)),
        task: maybe(rng, |r| awkward_text(r, 2)),
        lossy_utf8: rng.gen_bool(0.1),
    };
    match label {
        ProvenanceLabel::Ai => origin.generator = Some("model-x".into()),
        ProvenanceLabel::Human => origin.repo = Some("repo".into()),
        ProvenanceLabel::Unknown => {}
    }
    CodeSample {
        id: format!("s{index}:{}", awkward_text(rng, 2)),
        content: awkward_text(rng, 40),
        language: pick(rng, LanguageId::ALL),
        label,
        origin,
    }
}

pub fn random_change(rng: &mut ChaCha8Rng, index: usize) -> CommitFileChange {
    let kind = pick(rng, ChangeKind::ALL);
    let (pre, post) = match kind {
        ChangeKind::Added => (None, Some(awkward_text(rng, 30))),
        ChangeKind::Deleted => (Some(awkward_text(rng, 30)), None),
        ChangeKind::Modified => (Some(awkward_text(rng, 30)), Some(awkward_text(rng, 30))),
    };
    CommitFileChange {
        repo: format!("r{}", awkward_text(rng, 2)),
        commit: format!("{:040x}", rng.gen::<u128>()),
        timestamp: rng.gen_range(0i64..4_000_000_000),
        path: format!("p{index}/{}", awkward_text(rng, 3)),
        pre_content: pre,
        post_content: post,
        change_kind: kind,
    }
}

pub fn random_vuln(rng: &mut ChaCha8Rng, index: usize) -> VulnRecord {
    let vulnerable = awkward_text(rng, 20);
    VulnRecord {
        cve_id: format!("CVE-{}-{:05}", rng.gen_range(1999..2026), index),
        cwe_id: format!("CWE-{}", rng.gen_range(1..1400)),
        cvss_base: rng.gen_range(0..=100) as f64 / 10.0,
        attack_vector: pick(rng, AttackVector::ALL),
        language: pick(rng, LanguageId::ALL),
        patched_fragment: format!("{vulnerable}!"),
        vulnerable_fragment: vulnerable,
        intro_source: pick(rng, Attribution::ALL),
        fix_source: pick(rng, Attribution::ALL),
        disclosed: NaiveDate::from_ymd_opt(rng.gen_range(2000..2026), rng.gen_range(1..=12), rng.gen_range(1..=28)).expect("valid date"),
    }
}

pub fn random_verdict(rng: &mut ChaCha8Rng, index: usize) -> Verdict<f64> {
    let path = pick(rng, &[DecisionPath::Stage1Exit, DecisionPath::Stage1Reject, DecisionPath::Stage2Aggregate]);
    let label = match path {
        DecisionPath::Stage1Exit => ProvenanceLabel::Ai,
        DecisionPath::Stage1Reject => ProvenanceLabel::Human,
        DecisionPath::Stage2Aggregate => pick(rng, &[ProvenanceLabel::Ai, ProvenanceLabel::Human]),
    };
    let component_scores: BTreeMap<String, f64> = (0..rng.gen_range(1..4)).map(|k| (format!("d{k}{}", awkward_text(rng, 1)), rng.gen())).collect();
    Verdict {
        sample_id: format!("v{index}:{}", awkward_text(rng, 2)),
        label,
        final_score: rng.gen(),
        decision_path: path,
        component_scores,
    }
}
