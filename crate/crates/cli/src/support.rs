use codeprov_core::detectors::{build_detectors, load_external_scores, CafConfig, CafConfigError, DetectorSet, ExternalDetector};
use codeprov_core::model::{read_records, write_records, CodeSample, Record};
use codeprov_core::{parse_decimal, Diagnostic, EnsembleConfig, Exact, Mode};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub fn data(message: impl Display) -> Failure {
    Failure::Data(message.to_string())
}

pub fn usage(message: impl Display) -> Failure {
    Failure::Usage(message.to_string())
}

pub fn report(source: &str, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        log::warn!("{source}: {d}");
    }
}

pub fn open(path: &Path) -> Outcome<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| data(format!("cannot open {}: {e}", path.display())))
}

pub fn read_jsonl<T: Record>(path: &Path) -> Outcome<Vec<T>> {
    let out = read_records::<T, _>(open(path)?).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
    report(&path.display().to_string(), &out.diagnostics);
    log::info!("read {} records from {}", out.records.len(), path.display());
    Ok(out.records)
}

pub fn create(path: &Path) -> Outcome<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| data(format!("cannot create {}: {e}", parent.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| data(format!("cannot create {}: {e}", path.display())))
}

pub fn write_jsonl<'a, T: Record + 'a>(path: &Path, records: impl IntoIterator<Item = &'a T>) -> Outcome<usize> {
    let n = write_records(records, create(path)?).map_err(|e| data(format!("writing {}: {e}", path.display())))?;
    log::info!("wrote {n} records to {}", path.display());
    Ok(n)
}

pub fn write_text(path: &Path, text: &str) -> Outcome {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| data(format!("writing {}: {e}", path.display())))
}

/// Text to `path`, or standard output without one.
pub fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Internal(e.to_string()))
        }
    }
}

pub fn parse_tau(text: &str) -> Result<Exact, String> {
    parse_decimal::<Exact>(text).ok_or_else(|| format!("{text:?} is not a decimal number"))
}

pub fn parse_mode(text: &str) -> Result<Mode, String> {
    Mode::parse(text).ok_or_else(|| format!("unknown mode {text:?}; expected full, no-stage1 or no-stage2"))
}

/// Ensemble config file plus the directory its relative paths resolve from.
pub struct LoadedConfig {
    pub file: CafConfig,
    pub base_dir: PathBuf,
}

pub fn load_config(path: Option<&Path>) -> Outcome<LoadedConfig> {
    let path = path.ok_or_else(|| usage("no ensemble config: pass --config or set CODEPROV_CONFIG"))?;
    let file = CafConfig::load(path).map_err(|e| match e {
        CafConfigError::Io { .. } => data(format!("cannot read config {}: {e}", path.display())),
        _ => data(format!("config {}: {e}", path.display())),
    })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { file, base_dir })
}

/// Overrides from the command line; set values win over the config file.
#[derive(Debug, Default, Clone)]
pub struct EnsembleOverrides {
    pub mode: Option<Mode>,
    pub tau1: Option<Exact>,
    pub tau2: Option<Exact>,
}

impl LoadedConfig {
    pub fn ensemble(&self, overrides: &EnsembleOverrides) -> Outcome<EnsembleConfig<Exact>> {
        let mut cfg = self.file.ensemble::<Exact>().map_err(|e| data(format!("config: {e}")))?;
        overrides.apply(&mut cfg);
        cfg.validate().map_err(|e| usage(format!("invalid ensemble settings: {e}")))?;
        Ok(cfg)
    }

    pub fn detectors(&self, scores: &[PathBuf], samples: &[CodeSample], seed: u64) -> Outcome<DetectorSet> {
        let external = load_scores(scores)?;
        build_detectors(&self.file.detectors, &self.base_dir, &external, samples, seed)
            .map_err(|e| data(format!("building detectors: {e}")))
    }
}

impl EnsembleOverrides {
    pub fn apply(&self, cfg: &mut EnsembleConfig<Exact>) {
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(t) = self.tau1 {
            cfg.tau1 = t;
        }
        if let Some(t) = self.tau2 {
            cfg.tau2 = t;
        }
    }
}

pub fn load_scores(paths: &[PathBuf]) -> Outcome<BTreeMap<String, ExternalDetector>> {
    let mut all: BTreeMap<String, ExternalDetector> = BTreeMap::new();
    for path in paths {
        let (tables, diagnostics) =
            load_external_scores(open(path)?).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
        report(&path.display().to_string(), &diagnostics);
        for (id, table) in tables {
            match all.get_mut(&id) {
                Some(existing) => {
                    let dropped = existing.merge(table);
                    if dropped > 0 {
                        log::warn!("{}: {dropped} duplicate scores for {id}, first kept", path.display());
                    }
                }
                None => {
                    all.insert(id, table);
                }
            }
        }
    }
    Ok(all)
}
