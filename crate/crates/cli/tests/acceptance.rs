//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

mod common;

use codeprov_core::analytics::{mann_whitney_u, mann_whitney_u_exact, mann_whitney_u_normal, PValueMethod, DEFAULT_ALPHA};
use codeprov_core::cascade::{classify, classify_batch, DecisionPath, EnsembleConfig, Mode, Verdict};
use codeprov_core::corpus::{build_human_subset, harvest_repo, CorpusError, HarvestSpec};
use codeprov_core::detectors::{profile_detectors, Detector, DetectorSet, ExternalDetector, NgramDetector, NgramModel};
use codeprov_core::eval::{evaluate_ensemble, metrics, metrics_csv, ConfusionCounts, EvalError, Metric};
use codeprov_core::lexical::lexical_profile;
use codeprov_core::model::{read_records, write_records, CodeSample, CommitFileChange, ProvenanceLabel, Record, VulnRecord};
use codeprov_core::Exact;
use codeprov_testkit::git_fixture::*;
use codeprov_testkit::lcs_oracle::{oracle_counts, ORACLE_LANGUAGES};
use codeprov_testkit::perplexity::{median, NaiveNgram};
use codeprov_testkit::records::*;
use codeprov_testkit::snippets::{fixture_corpus, one_control_statement, one_logical_operator, snippet};
use codeprov_testkit::synthetic::{cascade_benchmark, high_entropy_text, low_entropy_text, random_score_corpus, sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;
use std::path::Path;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const EQ2_TUPLES: usize = 10_000;
const EQ2_BUDGET: Duration = Duration::from_secs(5);

fn unscored(id: &str) -> CodeSample {
    sample(id, "", ProvenanceLabel::Unknown)
}

fn criterion_1() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ai = 0;
    for t in 0..EQ2_TUPLES {
        let n_aux = rng.gen_range(1..=5);
        // Master at or below tau1 so every tuple reaches the aggregate.
        let master_k: i128 = rng.gen_range(0..=90_000);
        let aux_k: Vec<i128> = (0..n_aux).map(|_| rng.gen_range(0..=100_000)).collect();
        let weights: Vec<i128> = (0..=n_aux).map(|_| rng.gen_range(1..=500)).collect();
        let mut set = DetectorSet::new();
        set.insert(ExternalDetector::new("m", HashMap::from([("x".to_string(), master_k as f64 / 1e5)])));
        let ids: Vec<String> = (0..n_aux).map(|i| format!("a{i}")).collect();
        let mut cfg = EnsembleConfig::<Exact>::new("m", ids.clone()).with_weight("m", Exact::new(weights[0], 100));
        for (i, id) in ids.iter().enumerate() {
            set.insert(ExternalDetector::new(id.clone(), HashMap::from([("x".to_string(), aux_k[i] as f64 / 1e5)])));
            cfg = cfg.with_weight(id.clone(), Exact::new(weights[i + 1], 100));
        }
        let v = classify(&cfg, &set, &unscored("x")).map_err(|e| e.to_string())?;
        // Sum(w_i s_i) / Sum(w_i) with w = k/100 and s = k/10^5.
        let num: i128 = weights[0] * master_k + aux_k.iter().zip(&weights[1..]).map(|(s, w)| s * w).sum::<i128>();
        let den: i128 = weights.iter().sum::<i128>() * 100_000;
        let expected = Exact::new(num, den);
        ensure!(v.final_score == expected, "tuple {t}: score {} != {}", v.final_score, expected);
        ensure!(v.is_ai() == (expected >= Exact::new(53, 100)), "tuple {t}: label {:?} at {}", v.label, expected);
        ai += v.is_ai() as usize;
    }
    let elapsed = started.elapsed();
    for (value, want) in [(0.52999, ProvenanceLabel::Human), (0.53, ProvenanceLabel::Ai), (0.53001, ProvenanceLabel::Ai)] {
        let table = || HashMap::from([("x".to_string(), value)]);
        let set = DetectorSet::new().with(ExternalDetector::new("m", table())).with(ExternalDetector::new("a", table()));
        let v = classify(&EnsembleConfig::<Exact>::new("m", ["a"]), &set, &unscored("x")).map_err(|e| e.to_string())?;
        ensure!(v.label == want, "boundary {value}: got {:?}", v.label);
    }
    ensure!(elapsed < EQ2_BUDGET, "{EQ2_TUPLES} tuples took {elapsed:?}");
    Ok(format!("{EQ2_TUPLES} tuples exact ({ai} ai), boundaries Human/AI/AI, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0usize;
    let mut exits = 0usize;
    for _ in 0..1000 {
        let aux = rng.gen_range(1..=4);
        let (samples, set) = random_score_corpus(&mut rng, 50, aux, 0.3);
        let ids: Vec<String> = (1..=aux).map(|k| format!("aux_{k}")).collect();
        let run = |mode| -> Vec<Verdict<Exact>> {
            let cfg = EnsembleConfig::<Exact>::new("master", ids.clone()).with_mode(mode);
            classify_batch(&cfg, &set, &samples).into_iter().map(|r| r.expect("scored")).collect()
        };
        let (full, no1, no2) = (run(Mode::Full), run(Mode::NoStage1), run(Mode::NoStage2));
        for ((f, a), b) in full.iter().zip(&no1).zip(&no2) {
            let exit = f.decision_path == DecisionPath::Stage1Exit;
            exits += exit as usize;
            if b.is_ai() != exit {
                violations += 1;
            }
            if !exit && (a.label != f.label || a.final_score != f.final_score) {
                violations += 1;
            }
        }
    }
    ensure!(violations == 0, "{violations} mode-algebra violations");
    Ok(format!("1000 corpora x 50 samples, {exits} stage-1 exits, 0 violations"))
}

fn benchmark_run(seed: u64) -> Result<(BTreeMap<String, (f64, f64)>, Vec<(Mode, codeprov_core::MetricsReport<Exact>)>), String> {
    let (samples, set) = cascade_benchmark(&mut ChaCha8Rng::seed_from_u64(seed), 2000);
    let profiles = profile_detectors::<Exact>(&set, &samples).map_err(|e| e.to_string())?;
    let pr: BTreeMap<String, (f64, f64)> = profiles
        .iter()
        .map(|p| {
            let v = |m: Metric<Exact>| m.value().map_or(f64::NAN, |x| *x.numer() as f64 / *x.denom() as f64);
            (p.detector_id.clone(), (v(p.metrics.precision), v(p.metrics.recall)))
        })
        .collect();
    let cfg = EnsembleConfig::<Exact>::new("master", ["aux_a", "aux_b"]);
    let reports = evaluate_ensemble(&cfg, &set, &samples, &Mode::ALL).map_err(|e| e.to_string())?;
    Ok((pr, reports))
}

fn f1(report: &codeprov_core::MetricsReport<Exact>) -> Exact {
    report.f1.value().unwrap_or_default()
}

fn criterion_3() -> Check {
    let (pr, reports) = benchmark_run(2024)?;
    let (mp, mr) = pr["master"];
    ensure!(mp >= 0.9 && mr <= 0.4, "master precision {mp:.3} recall {mr:.3}");
    for aux in ["aux_a", "aux_b"] {
        let (p, r) = pr[aux];
        ensure!(r >= 0.9 && (0.4..=0.6).contains(&p), "{aux} precision {p:.3} recall {r:.3}");
    }
    let by_mode: HashMap<Mode, _> = reports.iter().cloned().collect();
    let (full, no1, no2) = (&by_mode[&Mode::Full], &by_mode[&Mode::NoStage1], &by_mode[&Mode::NoStage2]);
    ensure!(f1(full) > f1(no1) && f1(full) > f1(no2), "F1 full {} no-stage1 {} no-stage2 {}", f1(full), f1(no1), f1(no2));
    let recall2 = no2.recall.value().unwrap_or_default();
    ensure!(recall2 < Exact::new(1, 2), "no-stage2 recall {recall2}");
    let (_, again) = benchmark_run(2024)?;
    ensure!(again == reports, "second run with the same seed differs");
    let fmt = |x: Exact| format!("{:.3}", *x.numer() as f64 / *x.denom() as f64);
    Ok(format!(
        "master P {mp:.3} R {mr:.3}; aux R >= 0.9, P ~ {:.3}; F1 full {} > no-stage1 {} / no-stage2 {}; no-stage2 recall {}",
        pr["aux_a"].0,
        fmt(f1(full)),
        fmt(f1(no1)),
        fmt(f1(no2)),
        fmt(recall2)
    ))
}

fn criterion_4() -> Check {
    for (i, (language, content)) in fixture_corpus(200, 4).iter().enumerate() {
        let p = lexical_profile::<Exact>(content, *language);
        let oracle = oracle_counts(content, *language);
        ensure!((p.n_cf, p.n_op) == oracle, "snippet {i} ({language:?}): regex {:?} oracle {oracle:?}", (p.n_cf, p.n_op));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for m in 0..1000 {
        let language = ORACLE_LANGUAGES[rng.gen_range(0..ORACLE_LANGUAGES.len())];
        let lines = rng.gen_range(1..12);
        let base = snippet(&mut rng, language, lines);
        let (suffix, delta) =
            if m % 2 == 0 { (one_control_statement(language), Exact::from_integer(1)) } else { (one_logical_operator(language), Exact::new(1, 2)) };
        let before = lexical_profile::<Exact>(&base, language).lcs;
        let after = lexical_profile::<Exact>(&format!("{base}{suffix}\n"), language).lcs;
        ensure!(after - before == delta, "mutation {m} ({language:?}): delta {} expected {delta}", after - before);
    }
    Ok("200/200 snippets match the token-scan oracle; 1000/1000 append mutations monotone".into())
}

type Expected = Option<(i128, i128)>;

const MATRICES: [(u64, u64, u64, u64, (i128, i128), Expected, Expected, Expected); 25] = [
    (0, 0, 0, 1, (1, 1), None, None, None),
    (0, 0, 1, 0, (0, 1), None, Some((0, 1)), None),
    (0, 1, 0, 0, (0, 1), Some((0, 1)), None, None),
    (1, 0, 0, 0, (1, 1), Some((1, 1)), Some((1, 1)), Some((1, 1))),
    (0, 0, 3, 4, (4, 7), None, Some((0, 1)), None),
    (0, 2, 0, 5, (5, 7), Some((0, 1)), None, None),
    (0, 0, 0, 9, (1, 1), None, None, None),
    (3, 0, 0, 0, (1, 1), Some((1, 1)), Some((1, 1)), Some((1, 1))),
    (0, 3, 3, 0, (0, 1), Some((0, 1)), Some((0, 1)), Some((0, 1))),
    (5, 0, 0, 5, (1, 1), Some((1, 1)), Some((1, 1)), Some((1, 1))),
    (5, 5, 0, 0, (1, 2), Some((1, 2)), Some((1, 1)), Some((2, 3))),
    (1, 30, 30, 0, (1, 61), Some((1, 31)), Some((1, 31)), Some((1, 31))),
    (2, 1, 1, 2, (2, 3), Some((2, 3)), Some((2, 3)), Some((2, 3))),
    (7, 3, 2, 8, (3, 4), Some((7, 10)), Some((7, 9)), Some((14, 19))),
    (10, 0, 5, 5, (3, 4), Some((1, 1)), Some((2, 3)), Some((4, 5))),
    (0, 4, 6, 10, (1, 2), Some((0, 1)), Some((0, 1)), Some((0, 1))),
    (4, 0, 6, 10, (7, 10), Some((1, 1)), Some((2, 5)), Some((4, 7))),
    (1, 1, 1, 1, (1, 2), Some((1, 2)), Some((1, 2)), Some((1, 2))),
    (50, 25, 25, 0, (1, 2), Some((2, 3)), Some((2, 3)), Some((2, 3))),
    (9, 1, 0, 90, (99, 100), Some((9, 10)), Some((1, 1)), Some((18, 19))),
    (3, 4, 5, 6, (1, 2), Some((3, 7)), Some((3, 8)), Some((2, 5))),
    (100, 1, 1, 100, (100, 101), Some((100, 101)), Some((100, 101)), Some((100, 101))),
    (1, 99, 0, 0, (1, 100), Some((1, 100)), Some((1, 1)), Some((2, 101))),
    (0, 5, 5, 0, (0, 1), Some((0, 1)), Some((0, 1)), Some((0, 1))),
    (12, 7, 3, 1, (13, 23), Some((12, 19)), Some((4, 5)), Some((12, 17))),
];

fn criterion_5() -> Check {
    let want = |e: Expected| e.map_or(Metric::Undefined, |(n, d)| Metric::Defined(Exact::new(n, d)));
    let mut undefined = 0;
    for (k, &(tp, fp, fn_, tn, acc, p, r, f)) in MATRICES.iter().enumerate() {
        let counts = ConfusionCounts::new(tp, fp, fn_, tn);
        let m = metrics::<Exact>(counts).map_err(|e| e.to_string())?;
        ensure!(m.accuracy == Exact::new(acc.0, acc.1), "matrix {k}: accuracy {}", m.accuracy);
        ensure!(m.precision == want(p), "matrix {k}: precision {:?}", m.precision);
        ensure!(m.recall == want(r), "matrix {k}: recall {:?}", m.recall);
        ensure!(m.f1 == want(f), "matrix {k}: f1 {:?}", m.f1);
        for (metric, expected) in [(m.precision, p), (m.recall, r), (m.f1, f)] {
            if expected.is_none() {
                undefined += 1;
                ensure!(metric.to_string() == "undefined", "matrix {k}: undefined metric rendered as {metric}");
            }
        }
        let csv = metrics_csv(&[("m".to_string(), m)]);
        let row: Vec<&str> = csv.lines().nth(1).unwrap_or_default().split(',').collect();
        for (col, expected) in [(2, p), (3, r), (4, f)] {
            ensure!((row[col] == "undefined") == expected.is_none(), "matrix {k}: csv column {col} is {:?}", row[col]);
        }
    }
    ensure!(matches!(metrics::<Exact>(ConfusionCounts::default()), Err(EvalError::EmptyCounts)), "empty counts accepted");
    Ok(format!("25 matrices exact, {undefined} undefined metrics reported as undefined"))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = (0.0f64, 0, 0);
    let mut over = 0usize;
    let mut total = 0usize;
    for n1 in 3..=6 {
        for n2 in 3..=6 {
            for _ in 0..100 {
                let draw = |rng: &mut ChaCha8Rng, n| (0..n).map(|_| rng.gen_range(0..=100) as f64 / 10.0).collect::<Vec<f64>>();
                let (a, b) = (draw(&mut rng, n1), draw(&mut rng, n2));
                let exact = mann_whitney_u_exact(&a, &b, DEFAULT_ALPHA).map_err(|e| e.to_string())?;
                let approx = mann_whitney_u_normal(&a, &b, DEFAULT_ALPHA).map_err(|e| e.to_string())?;
                ensure!(exact.u_statistic == approx.u_statistic, "U differs between methods");
                ensure!(exact.u_statistic + mann_whitney_u_exact(&b, &a, DEFAULT_ALPHA).unwrap().u_statistic == (n1 * n2) as f64, "U_a + U_b != n1 n2");
                let gap = (exact.p_value - approx.p_value).abs();
                total += 1;
                if gap > 0.01 {
                    over += 1;
                }
                if gap > worst.0 {
                    worst = (gap, n1, n2);
                }
            }
        }
    }
    let third = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], DEFAULT_ALPHA).map_err(|e| e.to_string())?;
    let exact_third = third.method == PValueMethod::Exact && third.u_statistic == 0.0 && (third.p_value - 1.0 / 3.0).abs() < 1e-12;
    let same = mann_whitney_u(&[5.0, 5.0, 5.0], &[5.0, 5.0, 5.0], DEFAULT_ALPHA).map_err(|e| e.to_string())?;
    let single = mann_whitney_u(&[5.0], &[5.0], DEFAULT_ALPHA).map_err(|e| e.to_string())?;
    let identical = same.p_value == 1.0 && single.p_value == 1.0;
    let summary = format!(
        "{{1,2}} vs {{3,4}} p = {:.6} ({}); identical data p = {} / {} ({}); approximation gap > 0.01 in {over}/{total} datasets, max {:.4} at n1={}, n2={}",
        third.p_value,
        if exact_third { "ok" } else { "wrong" },
        same.p_value,
        single.p_value,
        if identical { "ok" } else { "wrong" },
        worst.0,
        worst.1,
        worst.2
    );
    if exact_third && identical && over == 0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

const HARVEST_BUDGET: Duration = Duration::from_secs(10);

fn criterion_7() -> Check {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let repo = build_fixture_repo(dir.path());
    ensure!(repo.commits.len() == FIXTURE_COMMITS, "fixture has {} commits", repo.commits.len());
    let wild = harvest_repo(&HarvestSpec::in_the_wild(), dir.path(), Some(FIXTURE_REPO_NAME)).map_err(|e| e.to_string())?;
    ensure!(wild.changes == expected_wild_changes(&repo), "wild window: {:#?}", wild.changes);
    let trusted = harvest_repo(&HarvestSpec::trusted_human(), dir.path(), Some(FIXTURE_REPO_NAME)).map_err(|e| e.to_string())?;
    ensure!(trusted.changes == expected_trusted_changes(&repo), "trusted window: {:#?}", trusted.changes);
    let mut with_png = HarvestSpec::in_the_wild();
    with_png.allowlist.insert("png".into());
    let binary = harvest_repo(&with_png, dir.path(), Some(FIXTURE_REPO_NAME)).map_err(|e| e.to_string())?;
    ensure!(binary.changes == wild.changes && binary.diagnostics.len() == 1, "binary file handling: {:?}", binary.diagnostics);
    let subset = build_human_subset(&HarvestSpec::trusted_human(), &[dir.path().to_path_buf()]).map_err(|e| e.to_string())?;
    let final_state: Vec<(&str, &str)> =
        subset.samples.iter().map(|s| (s.origin.path.as_deref().unwrap_or(""), s.content.as_str())).collect();
    ensure!(final_state == expected_trusted_final_state(), "human subset: {final_state:?}");
    let mut late = HarvestSpec::trusted_human();
    late.end += chrono::Duration::days(1);
    ensure!(
        matches!(build_human_subset(&late, &[dir.path().to_path_buf()]), Err(CorpusError::PurityViolation { .. })),
        "window ending after 2011-01-01 accepted"
    );
    let elapsed = started.elapsed();
    ensure!(elapsed < HARVEST_BUDGET, "took {elapsed:?}");
    Ok(format!(
        "{} wild + {} trusted changes exact, binary skipped with diagnostic, purity rejection, {:.2}s",
        wild.changes.len(),
        trusted.changes.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let train_texts: Vec<String> = (0..200).map(|_| low_entropy_text(&mut rng, 20)).collect();
    let train: Vec<CodeSample> =
        train_texts.iter().enumerate().map(|(i, t)| sample(format!("t{i}"), t.clone(), ProvenanceLabel::Ai)).collect();
    let model = NgramModel::train(&train, 4, 8).map_err(|e| e.to_string())?;
    let detector = NgramDetector::new("ngram", model);
    let mut eval = Vec::new();
    for i in 0..200 {
        eval.push(sample(format!("ai{i}"), low_entropy_text(&mut rng, 20), ProvenanceLabel::Ai));
        eval.push(sample(format!("hu{i}"), high_entropy_text(&mut rng, 20), ProvenanceLabel::Human));
    }
    let oracle = NaiveNgram::new(&train_texts, 4);
    let ppl = |label| eval.iter().filter(|s| s.label == label).map(|s| oracle.perplexity(&s.content)).collect::<Vec<f64>>();
    let (ai_ppl, human_ppl) = (median(&mut ppl(ProvenanceLabel::Ai)), median(&mut ppl(ProvenanceLabel::Human)));
    ensure!(human_ppl >= 2.0 * ai_ppl, "oracle medians ai {ai_ppl:.2} human {human_ppl:.2}");
    let mut correct = 0;
    for s in &eval {
        let score = detector.score(s).map_err(|e| e.to_string())?.score;
        if (score >= 0.5) == (s.label == ProvenanceLabel::Ai) {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / eval.len() as f64;
    ensure!(accuracy >= 0.9, "accuracy {accuracy:.3}");
    Ok(format!("oracle median perplexity ai {ai_ppl:.2} vs human {human_ppl:.2}; accuracy {accuracy:.3} at 0.5"))
}

fn files_under(root: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if let Ok(rel) = path.strip_prefix(root) {
                out.insert(rel.to_string_lossy().into_owned());
            }
        }
    }
    out
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inputs = common::write_inputs(dir.path());
    let (a, b) = (dir.path().join("run_a"), dir.path().join("run_b"));
    common::run_pipeline(&inputs, &a, "42");
    common::run_pipeline(&inputs, &b, "42");
    let (fa, fb) = (files_under(&a), files_under(&b));
    ensure!(fa == fb, "file sets differ: {:?}", fa.symmetric_difference(&fb).collect::<Vec<_>>());
    for name in &fa {
        let (x, y) = (std::fs::read(a.join(name)), std::fs::read(b.join(name)));
        ensure!(x.map_err(|e| e.to_string())? == y.map_err(|e| e.to_string())?, "{name} differs between runs");
    }
    for name in common::PIPELINE_OUTPUTS {
        ensure!(fa.contains(*name), "{name} missing");
    }
    let mut charts = 0;
    for name in common::ANALYSIS_OUTPUTS {
        for ext in ["csv", "svg"] {
            let path = a.join("analysis").join(format!("{name}.{ext}"));
            let len = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
            ensure!(len > 0, "{} missing or empty", path.display());
            charts += 1;
        }
    }
    Ok(format!("{} artifacts byte-identical across two seeded runs; {charts} analysis CSV/SVG files present", fa.len()))
}

fn round_trip<T: Record + PartialEq + Debug>(dir: &Path, records: &[T]) -> Result<(), String> {
    let path = dir.join(format!("{}.jsonl", T::KIND.as_str()));
    let file = std::fs::File::create(&path).map_err(|e| e.to_string())?;
    write_records(records, std::io::BufWriter::new(file)).map_err(|e| e.to_string())?;
    let file = std::fs::File::open(&path).map_err(|e| e.to_string())?;
    let back = read_records::<T, _>(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    ensure!(back.diagnostics.is_empty(), "{}: {:?}", T::KIND.as_str(), back.diagnostics.first());
    ensure!(back.records.len() == records.len(), "{}: {} of {} read back", T::KIND.as_str(), back.records.len(), records.len());
    if let Some(i) = (0..records.len()).find(|&i| back.records[i] != records[i]) {
        return Err(format!("{} record {i} changed: {:?} -> {:?}", T::KIND.as_str(), records[i], back.records[i]));
    }
    Ok(())
}

fn criterion_10() -> Check {
    const N: usize = 10_000;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    round_trip::<CodeSample>(dir.path(), &(0..N).map(|i| random_sample(&mut rng, i)).collect::<Vec<_>>())?;
    round_trip::<CommitFileChange>(dir.path(), &(0..N).map(|i| random_change(&mut rng, i)).collect::<Vec<_>>())?;
    round_trip::<VulnRecord>(dir.path(), &(0..N).map(|i| random_vuln(&mut rng, i)).collect::<Vec<_>>())?;
    round_trip::<Verdict<f64>>(dir.path(), &(0..N).map(|i| random_verdict(&mut rng, i)).collect::<Vec<_>>())?;
    Ok(format!("{N} records each of sample, change, vuln and verdict unchanged"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("weighted aggregation exactness", criterion_1),
        ("mode algebra", criterion_2),
        ("ablation direction", criterion_3),
        ("LCS oracle and monotonicity", criterion_4),
        ("metrics exactness", criterion_5),
        ("Mann-Whitney oracle", criterion_6),
        ("harvest fidelity", criterion_7),
        ("ngram separability", criterion_8),
        ("end-to-end reproducibility", criterion_9),
        ("serialization round-trip", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
