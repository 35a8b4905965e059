//! `codeprov`: harvest repositories, build corpora, run the cascade ensemble,
//! evaluate it and produce the analysis tables.

mod analyze;
mod support;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use codeprov_core::analytics::{annotate, dataset_composition, to_csv, CweMap, DEFAULT_ALPHA};
use codeprov_core::cascade::Verdict;
use codeprov_core::corpus::{
    build_ai_subset, changes_to_samples, code_allowlist, dedup, fragment_sample, harvest_repo, import_vuln_records,
    stray_responses, HarvestSpec, ImportedResponses, Labeler, SampleGranularity, SubprocessGenerator, TaskMatrix,
    DEFAULT_MAX_FILE_BYTES,
};
use codeprov_core::detectors::{assemble_config, profile_detectors, DetectorProfile};
use codeprov_core::eval::{metrics_csv, split_samples};
use codeprov_core::lexical::LcsRules;
use codeprov_core::model::{CodeSample, CommitFileChange, LanguageId, ProvenanceLabel, VulnRecord};
use codeprov_core::scalar::Scalar;
use codeprov_core::{classify_batch, Exact, Mode, SCHEMA_VERSION};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use support::{
    data, emit, load_config, open, parse_mode, parse_tau, read_jsonl, report, usage, write_jsonl, EnsembleOverrides,
    Failure, Outcome,
};

pub const CONFIG_ENV: &str = "CODEPROV_CONFIG";

#[derive(Parser, Debug)]
#[command(name = "codeprov", about = "Provenance analysis of AI-generated source code", disable_version_flag = true)]
struct Cli {
    /// Print tool and schema versions as JSON and exit.
    #[arg(long)]
    version: bool,
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    /// Ensemble config (JSON).
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Replacement LCS rule table.
    #[arg(long, global = true)]
    lcs_rules: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct EnsembleFlags {
    /// Ensemble mode: full, no-stage1 or no-stage2.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Stage-1 early-exit threshold.
    #[arg(long, value_parser = parse_tau)]
    tau1: Option<Exact>,
    /// Stage-2 decision threshold.
    #[arg(long, value_parser = parse_tau)]
    tau2: Option<Exact>,
    /// External score file(s), JSON Lines of {sample_id, detector_id, score}.
    #[arg(long = "scores")]
    scores: Vec<PathBuf>,
}

impl EnsembleFlags {
    fn overrides(&self) -> EnsembleOverrides {
        EnsembleOverrides { mode: self.mode, tau1: self.tau1, tau2: self.tau2 }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract per-commit file changes from local git clones.
    Harvest(HarvestArgs),
    /// Assemble labeled or unlabeled sample corpora.
    BuildCorpus(BuildCorpusArgs),
    /// Import CVE records, attributing fragments with the ensemble when needed.
    ImportVulns(ImportVulnsArgs),
    /// Classify samples with the cascade ensemble.
    Detect(DetectArgs),
    /// Score the ensemble against a labeled corpus.
    Evaluate(EvaluateArgs),
    /// Adoption and vulnerability tables and charts.
    Analyze(AnalyzeArgs),
    /// Composition of a sample corpus.
    Report(ReportArgs),
}

fn parse_date(text: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|e| format!("{text:?}: {e} (expected YYYY-MM-DD)"))
}

fn parse_granularity(text: &str) -> Result<SampleGranularity, String> {
    match text {
        "final" => Ok(SampleGranularity::FinalState),
        "per-commit" => Ok(SampleGranularity::PerCommit),
        _ => Err(format!("unknown granularity {text:?}; expected final or per-commit")),
    }
}

#[derive(Args, Debug)]
struct HarvestArgs {
    /// Repository clone; repeatable.
    #[arg(long = "repo")]
    repos: Vec<PathBuf>,
    /// File listing one clone per line as `path [name]`; `#` starts a comment.
    #[arg(long)]
    repo_list: Option<PathBuf>,
    #[arg(long, value_parser = parse_date, default_value = "2022-01-01")]
    start: NaiveDate,
    /// Exclusive end of the window.
    #[arg(long, value_parser = parse_date, default_value = "2025-07-01")]
    end: NaiveDate,
    /// Comma-separated extensions; defaults to all known code extensions.
    #[arg(long, value_delimiter = ',')]
    extensions: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_FILE_BYTES)]
    max_file_bytes: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BuildCorpusArgs {
    /// Clone whose early history is labeled human; repeatable.
    #[arg(long = "human-repo")]
    human_repos: Vec<PathBuf>,
    #[arg(long, value_parser = parse_date, default_value = "2008-01-01")]
    human_start: NaiveDate,
    #[arg(long, value_parser = parse_date, default_value = "2011-01-01")]
    human_end: NaiveDate,
    /// Generated code, JSON Lines of {task_id, model, content}.
    #[arg(long, conflicts_with = "generator_cmd")]
    responses: Option<PathBuf>,
    /// Program run once per task-matrix cell (whitespace-separated argv).
    #[arg(long)]
    generator_cmd: Option<String>,
    /// Task matrix JSON; defaults to the shipped preset.
    #[arg(long)]
    task_matrix: Option<PathBuf>,
    /// Harvested changes to turn into unlabeled samples.
    #[arg(long)]
    changes: Option<PathBuf>,
    /// final or per-commit (applies to --changes).
    #[arg(long, value_parser = parse_granularity, default_value = "final")]
    granularity: SampleGranularity,
    /// Keep content duplicates.
    #[arg(long)]
    no_dedup: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ImportVulnsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    ensemble: EnsembleFlags,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    ensemble: EnsembleFlags,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Labeled samples.
    #[arg(long)]
    corpus: PathBuf,
    /// Also evaluate the no-stage1 and no-stage2 ablations.
    #[arg(long)]
    ablations: bool,
    /// Profile detectors on this fraction of the corpus, assemble the
    /// ensemble from the profiles and evaluate on the rest.
    #[arg(long)]
    profile_split: Option<f64>,
    /// Detector profiles CSV (with --profile-split).
    #[arg(long, requires = "profile_split")]
    profiles_out: Option<PathBuf>,
    /// Metrics CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    ensemble: EnsembleFlags,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, requires = "changes")]
    verdicts: Option<PathBuf>,
    #[arg(long, requires = "verdicts")]
    changes: Option<PathBuf>,
    #[arg(long)]
    vulns: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// CWE to risk category table; defaults to the shipped map.
    #[arg(long)]
    cwe_map: Option<PathBuf>,
    /// final or per-commit.
    #[arg(long, value_parser = parse_granularity, default_value = "final")]
    granularity: SampleGranularity,
    /// Group sizes for the top/bottom repository comparison.
    #[arg(long, value_delimiter = ',', default_value = "10,50,100")]
    top_n: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Composition CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn version_json() -> String {
    serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
    })
    .to_string()
}

fn utc(date: NaiveDate) -> chrono::DateTime<chrono::Utc> {
    date.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

fn harvest_spec(start: NaiveDate, end: NaiveDate, extensions: &[String], max_file_bytes: u64) -> Outcome<HarvestSpec> {
    let allowlist: BTreeSet<String> =
        if extensions.is_empty() { code_allowlist() } else { extensions.iter().cloned().collect() };
    let mut spec = HarvestSpec::new(utc(start), utc(end), allowlist).map_err(usage)?;
    spec.max_file_bytes = max_file_bytes;
    Ok(spec)
}

fn read_repo_list(path: &Path) -> Outcome<Vec<(PathBuf, Option<String>)>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut repos = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| data(format!("reading {}: {e}", path.display())))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let repo = PathBuf::from(parts.next().expect("non-empty line"));
        let repo = if repo.is_absolute() { repo } else { base.join(repo) };
        repos.push((repo, parts.next().map(str::to_string)));
    }
    Ok(repos)
}

fn harvest(args: &HarvestArgs) -> Outcome {
    let spec = harvest_spec(args.start, args.end, &args.extensions, args.max_file_bytes)?;
    let mut repos: Vec<(PathBuf, Option<String>)> = args.repos.iter().map(|r| (r.clone(), None)).collect();
    if let Some(list) = &args.repo_list {
        repos.extend(read_repo_list(list)?);
    }
    if repos.is_empty() {
        return Err(usage("nothing to harvest: pass --repo or --repo-list"));
    }
    for (path, _) in &repos {
        if !path.is_dir() {
            return Err(data(format!("repository {} does not exist", path.display())));
        }
    }
    let results: Vec<_> = repos.par_iter().map(|(path, name)| harvest_repo(&spec, path, name.as_deref())).collect();
    let mut changes: Vec<CommitFileChange> = Vec::new();
    for ((path, _), result) in repos.iter().zip(results) {
        let outcome = result.map_err(data)?;
        report(&path.display().to_string(), &outcome.diagnostics);
        log::info!("{}: {} file changes", path.display(), outcome.changes.len());
        changes.extend(outcome.changes);
    }
    write_jsonl(&args.out, &changes)?;
    Ok(())
}

fn build_corpus(args: &BuildCorpusArgs) -> Outcome {
    if args.human_repos.is_empty() && args.responses.is_none() && args.generator_cmd.is_none() && args.changes.is_none() {
        return Err(usage("no sources: pass --human-repo, --responses, --generator-cmd or --changes"));
    }
    let mut samples: Vec<CodeSample> = Vec::new();

    if !args.human_repos.is_empty() {
        let spec = harvest_spec(args.human_start, args.human_end, &[], DEFAULT_MAX_FILE_BYTES)?;
        for repo in &args.human_repos {
            if !repo.is_dir() {
                return Err(data(format!("repository {} does not exist", repo.display())));
            }
        }
        let human = codeprov_core::corpus::build_human_subset(&spec, &args.human_repos).map_err(|e| match e {
            codeprov_core::corpus::CorpusError::PurityViolation { .. } => usage(e),
            other => data(other),
        })?;
        report("human subset", &human.diagnostics);
        log::info!("human subset: {} samples", human.samples.len());
        samples.extend(human.samples);
    }

    if args.responses.is_some() || args.generator_cmd.is_some() {
        let matrix = match &args.task_matrix {
            Some(p) => TaskMatrix::load(p).map_err(data)?,
            None => TaskMatrix::preset(),
        };
        let ai = if let Some(path) = &args.responses {
            let (responses, diagnostics) =
                ImportedResponses::read(open(path)?).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
            report(&path.display().to_string(), &diagnostics);
            report(&path.display().to_string(), &stray_responses(&matrix, &responses));
            build_ai_subset(&matrix, &responses)
        } else {
            let command: Vec<String> =
                args.generator_cmd.as_deref().unwrap_or_default().split_whitespace().map(str::to_string).collect();
            if command.is_empty() {
                return Err(usage("--generator-cmd is empty"));
            }
            build_ai_subset(&matrix, &SubprocessGenerator { command })
        };
        report("ai subset", &ai.diagnostics);
        log::info!("ai subset: {} samples, {} uncovered cells", ai.samples.len(), ai.uncovered.len());
        samples.extend(ai.samples);
    }

    if let Some(path) = &args.changes {
        let changes: Vec<CommitFileChange> = read_jsonl(path)?;
        samples.extend(changes_to_samples(&changes, args.granularity, ProvenanceLabel::Unknown));
    }

    if !args.no_dedup {
        let (kept, removed) = dedup(samples);
        if removed > 0 {
            log::info!("removed {removed} duplicate samples");
        }
        samples = kept;
    }
    write_jsonl(&args.out, &samples)?;
    Ok(())
}

/// Both fragments of every row that parses far enough to have them, so
/// subprocess detectors can be queried once up front.
fn fragment_samples(path: &Path) -> Outcome<Vec<CodeSample>> {
    let mut samples = Vec::new();
    let mut seen = BTreeSet::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| data(format!("reading {}: {e}", path.display())))?;
        let Ok(row) = serde_json::from_str::<serde_json::Value>(&line) else { continue };
        let (Some(cve), Some(lang)) = (row["cve_id"].as_str(), row.get("language")) else { continue };
        let Ok(language) = serde_json::from_value::<LanguageId>(lang.clone()) else { continue };
        for (role, field) in [("intro", "vulnerable_fragment"), ("fix", "patched_fragment")] {
            if let Some(content) = row[field].as_str() {
                let sample = fragment_sample(cve, role, content, language);
                if seen.insert(sample.id.clone()) {
                    samples.push(sample);
                }
            }
        }
    }
    Ok(samples)
}

fn import_vulns(args: &ImportVulnsArgs, global: &Global) -> Outcome {
    let labeling = match &global.config {
        Some(path) => {
            let loaded = load_config(Some(path))?;
            let config = loaded.ensemble(&args.ensemble.overrides())?;
            let detectors = loaded.detectors(&args.ensemble.scores, &fragment_samples(&args.input)?, global.seed)?;
            Some((config, detectors))
        }
        None => None,
    };
    let labeler = labeling.as_ref().map(|(config, detectors)| Labeler { config, detectors });
    let outcome = import_vuln_records(open(&args.input)?, labeler.as_ref())
        .map_err(|e| data(format!("reading {}: {e}", args.input.display())))?;
    report(&args.input.display().to_string(), &outcome.diagnostics);
    write_jsonl::<VulnRecord>(&args.out, &outcome.records)?;
    Ok(())
}

fn detect(args: &DetectArgs, global: &Global) -> Outcome {
    let loaded = load_config(global.config.as_deref())?;
    let config = loaded.ensemble(&args.ensemble.overrides())?;
    let samples: Vec<CodeSample> = read_jsonl(&args.input)?;
    let detectors = loaded.detectors(&args.ensemble.scores, &samples, global.seed)?;
    let mut verdicts: Vec<Verdict<Exact>> = Vec::with_capacity(samples.len());
    let mut failed = 0usize;
    for (sample, result) in samples.iter().zip(classify_batch(&config, &detectors, &samples)) {
        match result {
            Ok(v) => verdicts.push(v),
            Err(e) => {
                failed += 1;
                log::error!("{}: {e}", sample.id);
            }
        }
    }
    write_jsonl(&args.out, &verdicts)?;
    let ai = verdicts.iter().filter(|v| v.is_ai()).count();
    log::info!("{} verdicts, {ai} ai, mode {}", verdicts.len(), config.mode);
    if failed > 0 {
        return Err(data(format!("{failed} of {} samples could not be classified", samples.len())));
    }
    Ok(())
}

fn profiles_csv(profiles: &[DetectorProfile<Exact>]) -> String {
    let mut out = String::from("detector,accuracy,precision,recall,f1,group\n");
    for p in profiles {
        out.push_str(&format!(
            "{},{:.6},{},{},{},{}\n",
            p.detector_id,
            p.metrics.accuracy.to_f64(),
            p.metrics.precision,
            p.metrics.recall,
            p.metrics.f1,
            p.group.as_str()
        ));
    }
    out
}

fn evaluate(args: &EvaluateArgs, global: &Global) -> Outcome {
    let loaded = load_config(global.config.as_deref())?;
    let corpus: Vec<CodeSample> = read_jsonl(&args.corpus)?;
    let detectors = loaded.detectors(&args.ensemble.scores, &corpus, global.seed)?;
    let mut config = loaded.ensemble(&args.ensemble.overrides())?;

    let held_out = match args.profile_split {
        Some(fraction) => {
            let (profiling, rest) = split_samples(&corpus, fraction, global.seed).map_err(usage)?;
            let profiles = profile_detectors::<Exact>(&detectors, &profiling).map_err(data)?;
            if let Some(path) = &args.profiles_out {
                emit(Some(path), &profiles_csv(&profiles))?;
            }
            let mut assembled = assemble_config(&profiles).map_err(data)?;
            assembled.tau1 = config.tau1;
            assembled.tau2 = config.tau2;
            assembled.mode = config.mode;
            log::info!("assembled master {} with auxiliaries {:?}", assembled.master_id, assembled.aux_ids);
            config = assembled;
            rest
        }
        None => corpus,
    };

    let modes: Vec<Mode> = if args.ablations { Mode::ALL.to_vec() } else { vec![config.mode] };
    let results = codeprov_core::eval::evaluate_ensemble(&config, &detectors, &held_out, &modes).map_err(data)?;
    let rows: Vec<(String, _)> = results.into_iter().map(|(m, r)| (m.as_str().to_string(), r)).collect();
    emit(args.out.as_deref(), &metrics_csv(&rows))
}

fn lcs_rules(global: &Global) -> Outcome<LcsRules> {
    match &global.lcs_rules {
        Some(path) => LcsRules::load(path).map_err(|e| data(format!("LCS rules {}: {e}", path.display()))),
        None => Ok(LcsRules::builtin()),
    }
}

fn analyze(args: &AnalyzeArgs) -> Outcome {
    if args.verdicts.is_none() && args.vulns.is_none() {
        return Err(usage("nothing to analyze: pass --verdicts with --changes, and/or --vulns"));
    }
    let cwe_map = match &args.cwe_map {
        Some(p) => CweMap::load(p).map_err(data)?,
        None => CweMap::builtin(),
    };
    let annotated = match (&args.verdicts, &args.changes) {
        (Some(v), Some(c)) => {
            let verdicts: Vec<Verdict<Exact>> = read_jsonl(v)?;
            let changes: Vec<CommitFileChange> = read_jsonl(c)?;
            let (files, diagnostics) = annotate(&changes, &verdicts, args.granularity);
            report("annotate", &diagnostics);
            if files.is_empty() {
                return Err(data("no changed file has a verdict"));
            }
            Some(files)
        }
        _ => None,
    };
    let vulns: Option<Vec<VulnRecord>> = args.vulns.as_deref().map(read_jsonl).transpose()?;

    let mut bundle = analyze::Bundle { out_dir: &args.out_dir, written: Vec::new() };
    if let Some(files) = &annotated {
        analyze::adoption(&mut bundle, files, &args.top_n)?;
    }
    if let Some(records) = &vulns {
        analyze::vulnerabilities(&mut bundle, records, &cwe_map, args.alpha)?;
    }
    log::info!("wrote {} files to {}", bundle.written.len(), args.out_dir.display());
    Ok(())
}

fn report_cmd(args: &ReportArgs, global: &Global) -> Outcome {
    let rules = lcs_rules(global)?;
    let samples: Vec<CodeSample> = read_jsonl(&args.corpus)?;
    emit(args.out.as_deref(), &to_csv(&dataset_composition(&samples, &rules)))
}

fn run(cli: Cli) -> Outcome {
    let global = cli.global;
    if global.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(global.workers)
            .build_global()
            .map_err(|e| Failure::Internal(format!("worker pool: {e}")))?;
    }
    match cli.command.expect("checked by main") {
        Command::Harvest(a) => harvest(&a),
        Command::BuildCorpus(a) => build_corpus(&a),
        Command::ImportVulns(a) => import_vulns(&a, &global),
        Command::Detect(a) => detect(&a, &global),
        Command::Evaluate(a) => evaluate(&a, &global),
        Command::Analyze(a) => analyze(&a),
        Command::Report(a) => report_cmd(&a, &global),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if cli.version {
        println!("{}", version_json());
        return;
    }
    if cli.command.is_none() {
        use clap::CommandFactory;
        let _ = Cli::command().write_help(&mut std::io::stderr());
        std::process::exit(1);
    }
    env_logger::Builder::new()
        .filter_level(cli.global.log_level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();

    let code = match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(failure)) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            3
        }
    };
    std::process::exit(code);
}
