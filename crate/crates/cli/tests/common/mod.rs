#![allow(dead_code)]

use codeprov_testkit::git_fixture::build_fixture_repo;
use codeprov_testkit::synthetic::{high_entropy_text, low_entropy_text};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn codeprov() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_codeprov"));
    cmd.env_remove("CODEPROV_CONFIG").env_remove("RUST_LOG");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    codeprov().args(args).output().expect("spawn codeprov")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "codeprov {args:?} failed:\n{}", stderr(&out));
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Inputs for a full pipeline run: the fixture repository, generated
/// responses for the first tasks of the preset matrix, a vulnerability
/// import file and an ensemble config of trained detectors.
pub struct Inputs {
    pub repo: PathBuf,
    pub responses: PathBuf,
    pub vulns: PathBuf,
    pub config: PathBuf,
}

pub fn write_inputs(dir: &Path) -> Inputs {
    let repo = dir.join("fixture");
    std::fs::create_dir_all(&repo).unwrap();
    build_fixture_repo(&repo);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut responses = String::new();
    for t in 1..=12 {
        for g in 1..=3 {
            let line = serde_json::json!({
                "task_id": format!("T{t:03}"),
                "model": format!("generator-{g:02}"),
                "content": low_entropy_text(&mut rng, 12),
                "language": "python",
            });
            responses.push_str(&format!("{line}\n"));
        }
    }
    let responses_path = dir.join("responses.jsonl");
    std::fs::write(&responses_path, responses).unwrap();

    let langs = ["python", "c", "javascript", "java"];
    let cwes = ["CWE-79", "CWE-89", "CWE-787", "CWE-22", "CWE-9999"];
    let vectors = ["network", "local", "adjacent", "physical"];
    let mut vulns = String::new();
    for i in 0..24 {
        let ai = i % 3 == 0;
        let vulnerable = if ai { low_entropy_text(&mut rng, 6) } else { high_entropy_text(&mut rng, 6) };
        let mut row = serde_json::json!({
            "cve_id": format!("CVE-2023-{:05}", 1000 + i),
            "cwe_id": cwes[i % 5],
            "cvss_base": (rng.gen_range(20..100) as f64) / 10.0,
            "attack_vector": vectors[i % 4],
            "language": langs[i % 4],
            "vulnerable_fragment": vulnerable,
            "patched_fragment": format!("# patched\n{}", low_entropy_text(&mut rng, 3)),
            "disclosed": format!("2023-{:02}-15", 1 + i % 12),
        });
        if i % 4 != 0 {
            row["intro_source"] = serde_json::json!(if ai { "ai" } else { "human" });
            row["fix_source"] = serde_json::json!("human");
        }
        vulns.push_str(&format!("{row}\n"));
    }
    let vulns_path = dir.join("vulns_in.jsonl");
    std::fs::write(&vulns_path, vulns).unwrap();

    let config = serde_json::json!({
        "master": "ngram",
        "auxiliaries": ["entropy", "style"],
        "tau1": 0.9,
        "tau2": 0.53,
        "detectors": {
            "ngram": {"kind": "ngram", "train_corpus": "corpus.jsonl"},
            "entropy": {"kind": "entropy", "train_corpus": "corpus.jsonl"},
            "style": {"kind": "style", "train_corpus": "corpus.jsonl"},
        },
    });
    let config_path = dir.join("caf.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    Inputs { repo, responses: responses_path, vulns: vulns_path, config: config_path }
}

/// Every file the pipeline writes, relative to `work`.
pub const PIPELINE_OUTPUTS: &[&str] = &[
    "changes.jsonl",
    "corpus.jsonl",
    "unlabeled.jsonl",
    "verdicts.jsonl",
    "vulns.jsonl",
    "metrics.csv",
    "profiles.csv",
    "report.csv",
];

pub const ANALYSIS_OUTPUTS: &[&str] = &[
    "adoption_language",
    "adoption_tech_stack",
    "adoption_file_function",
    "adoption_repo",
    "quarterly_language",
    "ai_contribution_quarterly",
    "topn_bottomn",
    "net_impact",
    "cwe_profile",
    "cwe_categories",
    "severity",
    "attack_vector",
    "vuln_quarterly",
];

/// Run harvest through analyze with the config in `work`. Inputs are read
/// from `inputs`, every output lands in `work`.
pub fn run_pipeline(inputs: &Inputs, work: &Path, seed: &str) {
    std::fs::create_dir_all(work).unwrap();
    let config = work.join("caf.json");
    std::fs::copy(&inputs.config, &config).unwrap();
    let w = |name: &str| work.join(name).to_str().unwrap().to_string();
    let g = ["--seed", seed, "--config", s(&config)];
    let with = |args: &[&str]| {
        let mut all: Vec<&str> = args.to_vec();
        all.extend_from_slice(&g);
        ok(&all);
    };
    with(&["harvest", "--repo", s(&inputs.repo), "--out", &w("changes.jsonl")]);
    with(&["build-corpus", "--human-repo", s(&inputs.repo), "--responses", s(&inputs.responses), "--out", &w("corpus.jsonl")]);
    with(&["build-corpus", "--changes", &w("changes.jsonl"), "--out", &w("unlabeled.jsonl")]);
    with(&["detect", "--in", &w("unlabeled.jsonl"), "--out", &w("verdicts.jsonl")]);
    with(&["import-vulns", "--in", s(&inputs.vulns), "--out", &w("vulns.jsonl")]);
    with(&["evaluate", "--corpus", &w("corpus.jsonl"), "--ablations", "--out", &w("metrics.csv")]);
    with(&[
        "evaluate",
        "--corpus",
        &w("corpus.jsonl"),
        "--profile-split",
        "0.5",
        "--profiles-out",
        &w("profiles.csv"),
        "--out",
        &w("evaluate_split.csv"),
    ]);
    with(&[
        "analyze",
        "--verdicts",
        &w("verdicts.jsonl"),
        "--changes",
        &w("changes.jsonl"),
        "--vulns",
        &w("vulns.jsonl"),
        "--top-n",
        "1,2",
        "--out-dir",
        &w("analysis"),
    ]);
    with(&["report", "--corpus", &w("corpus.jsonl"), "--out", &w("report.csv")]);
}
