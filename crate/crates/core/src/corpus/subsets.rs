use super::harvest::{harvest_repo, utc_midnight, HarvestSpec};
use super::CorpusError;
use crate::diagnostics::Diagnostic;
use crate::lexical::{classify_app_domain, detect_language};
use crate::model::{ChangeKind, CodeSample, CommitFileChange, LanguageId, OriginMeta, ProvenanceLabel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

/// Latest permitted end of a trusted-human window.
pub fn purity_cutoff() -> chrono::DateTime<chrono::Utc> {
    utc_midnight(2011, 1, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleGranularity {
    /// One sample per file as it stands after the last change.
    #[default]
    FinalState,
    /// One sample per added or modified file per commit.
    PerCommit,
}

fn sample_from_change(change: &CommitFileChange, content: &str, label: ProvenanceLabel) -> CodeSample {
    let mut sample = CodeSample {
        id: change.sample_id(),
        content: content.to_string(),
        language: detect_language(&change.path, Some(content)),
        label,
        origin: OriginMeta {
            repo: Some(change.repo.clone()),
            commit: Some(change.commit.clone()),
            path: Some(change.path.clone()),
            timestamp: Some(change.timestamp),
            ..OriginMeta::default()
        },
    };
    sample.origin.app_domain = Some(classify_app_domain(&sample));
    sample
}

/// Turn changes into samples. Final-state mode keeps the last change per
/// (repo, path) and drops files whose last change deleted them; samples are
/// ordered by repo then path. Per-commit mode keeps input order.
pub fn changes_to_samples(
    changes: &[CommitFileChange],
    granularity: SampleGranularity,
    label: ProvenanceLabel,
) -> Vec<CodeSample> {
    match granularity {
        SampleGranularity::PerCommit => changes
            .iter()
            .filter_map(|c| c.post_content.as_deref().map(|content| sample_from_change(c, content, label)))
            .collect(),
        SampleGranularity::FinalState => {
            let mut last: BTreeMap<(&str, &str), &CommitFileChange> = BTreeMap::new();
            for c in changes {
                last.insert((c.repo.as_str(), c.path.as_str()), c);
            }
            last.values()
                .filter(|c| c.change_kind != ChangeKind::Deleted)
                .filter_map(|c| c.post_content.as_deref().map(|content| sample_from_change(c, content, label)))
                .collect()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SubsetOutcome {
    pub samples: Vec<CodeSample>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Human-labeled samples from repositories whose window closes no later than
/// 2011-01-01. Each repo contributes the final state of every file changed
/// inside the window; repos are harvested in parallel, output follows input.
pub fn build_human_subset(spec: &HarvestSpec, repos: &[PathBuf]) -> Result<SubsetOutcome, CorpusError> {
    if spec.end > purity_cutoff() {
        return Err(CorpusError::PurityViolation { end: spec.end });
    }
    let harvested: Vec<_> = repos.par_iter().map(|r| harvest_repo(spec, r, None)).collect();
    let mut out = SubsetOutcome::default();
    for result in harvested {
        let h = result?;
        out.diagnostics.extend(h.diagnostics);
        out.samples.extend(changes_to_samples(&h.changes, SampleGranularity::FinalState, ProvenanceLabel::Human));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub topic: String,
    pub prompt: String,
}

/// Topics, concrete tasks and the generator models asked to solve them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskMatrix {
    pub topics: Vec<String>,
    pub tasks: Vec<Task>,
    pub generators: Vec<String>,
}

const PRESET: &str = include_str!("../../assets/task_matrix.json");

impl TaskMatrix {
    pub const PRESET_TOPICS: usize = 33;
    pub const TASKS_PER_TOPIC: usize = 5;
    pub const PRESET_GENERATORS: usize = 11;

    /// Shipped placeholder preset: 33 topics, 5 tasks each, 11 generator slots.
    pub fn preset() -> Self {
        let m: Self = serde_json::from_str(PRESET).expect("shipped task matrix parses");
        m.validate().expect("shipped task matrix is valid");
        m
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let m: Self = serde_json::from_str(text).map_err(|e| CorpusError::TaskMatrix(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io { path: path.into(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::TaskMatrix(m));
        if self.generators.is_empty() {
            return bad("no generators".into());
        }
        let topics: BTreeSet<&str> = self.topics.iter().map(String::as_str).collect();
        if topics.len() != self.topics.len() {
            return bad("duplicate topic".into());
        }
        if self.generators.iter().collect::<BTreeSet<_>>().len() != self.generators.len() {
            return bad("duplicate generator".into());
        }
        let mut ids = HashSet::new();
        for t in &self.tasks {
            if !topics.contains(t.topic.as_str()) {
                return bad(format!("task {} names unknown topic {:?}", t.id, t.topic));
            }
            if !ids.insert(t.id.as_str()) {
                return bad(format!("duplicate task id {}", t.id));
            }
        }
        Ok(())
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn cell_count(&self) -> usize {
        self.tasks.len() * self.generators.len()
    }

    /// Every (task id, generator) pair in task-major order.
    pub fn cells(&self) -> impl Iterator<Item = (&str, &str)> {
        self.tasks.iter().flat_map(|t| self.generators.iter().map(move |g| (t.id.as_str(), g.as_str())))
    }
}

/// One generated solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedCode {
    pub task_id: String,
    pub model: String,
    pub content: String,
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub path: Option<String>,
}

/// Source of generated code for task-matrix cells.
pub trait GeneratorAdapter: Sync {
    /// The response for one cell, or `None` when the cell is not covered.
    fn generate(&self, task: &Task, model: &str) -> Result<Option<GeneratedCode>, String>;
}

/// Responses read ahead of time from a JSON Lines file.
#[derive(Debug, Clone, Default)]
pub struct ImportedResponses {
    cells: BTreeMap<(String, String), GeneratedCode>,
}

impl ImportedResponses {
    /// Parse `{task_id, model, content, language?, path?}` lines. Malformed
    /// lines and repeated cells become diagnostics; the first response wins.
    pub fn read<R: BufRead>(source: R) -> std::io::Result<(Self, Vec<Diagnostic>)> {
        let mut cells = BTreeMap::new();
        let mut diagnostics = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<GeneratedCode>(&line) {
                Ok(g) => {
                    let key = (g.task_id.clone(), g.model.clone());
                    if let Some(((task, model), _)) = cells.get_key_value(&key) {
                        diagnostics.push(Diagnostic::at_line(
                            idx + 1,
                            format!("duplicate response for ({task}, {model}), first kept"),
                        ));
                    } else {
                        cells.insert(key, g);
                    }
                }
                Err(e) => diagnostics.push(Diagnostic::at_line(idx + 1, format!("malformed response: {e}"))),
            }
        }
        Ok((Self { cells }, diagnostics))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn keys(&self) -> impl Iterator<Item = &(String, String)> {
        self.cells.keys()
    }
}

impl GeneratorAdapter for ImportedResponses {
    fn generate(&self, task: &Task, model: &str) -> Result<Option<GeneratedCode>, String> {
        Ok(self.cells.get(&(task.id.clone(), model.to_string())).cloned())
    }
}

/// Runs a program per cell. It receives `{"task_id", "topic", "prompt",
/// "model"}` as one JSON line on stdin and prints the code on stdout; a
/// non-zero exit or empty output marks the cell uncovered.
#[derive(Debug, Clone)]
pub struct SubprocessGenerator {
    pub command: Vec<String>,
}

impl GeneratorAdapter for SubprocessGenerator {
    fn generate(&self, task: &Task, model: &str) -> Result<Option<GeneratedCode>, String> {
        let (program, args) = self.command.split_first().ok_or("empty generator command")?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| format!("cannot start {program}: {e}"))?;
        let request = serde_json::json!({"task_id": task.id, "topic": task.topic, "prompt": task.prompt, "model": model});
        let mut stdin = child.stdin.take().expect("piped stdin");
        let input = format!("{request}\n");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let output = child.wait_with_output().map_err(|e| e.to_string())?;
        let _ = writer.join();
        if !output.status.success() || output.stdout.is_empty() {
            return Ok(None);
        }
        Ok(Some(GeneratedCode {
            task_id: task.id.clone(),
            model: model.to_string(),
            content: String::from_utf8_lossy(&output.stdout).into_owned(),
            language: None,
            path: None,
        }))
    }
}

#[derive(Debug, Clone, Default)]
pub struct AiSubsetOutcome {
    pub samples: Vec<CodeSample>,
    /// (task id, generator) cells with no response.
    pub uncovered: Vec<(String, String)>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn ai_sample_id(task_id: &str, model: &str) -> String {
    format!("ai:{model}:{task_id}")
}

/// One AI-labeled sample per covered cell, in task-major order. Uncovered
/// cells are listed and reported as diagnostics, so samples plus uncovered
/// always account for the whole grid.
pub fn build_ai_subset(matrix: &TaskMatrix, adapter: &dyn GeneratorAdapter) -> AiSubsetOutcome {
    let cells: Vec<(&Task, &str)> =
        matrix.tasks.iter().flat_map(|t| matrix.generators.iter().map(move |g| (t, g.as_str()))).collect();
    let responses: Vec<_> = cells.par_iter().map(|&(task, model)| adapter.generate(task, model)).collect();

    let mut out = AiSubsetOutcome::default();
    for ((task, model), response) in cells.into_iter().zip(responses) {
        let cell = format!("({}, {model})", task.id);
        match response {
            Ok(Some(g)) => {
                let language = match (&g.language, &g.path) {
                    (Some(lang), _) => LanguageId::parse_lenient(lang),
                    (None, Some(path)) => detect_language(path, Some(&g.content)),
                    (None, None) => LanguageId::Other,
                };
                let mut sample = CodeSample {
                    id: ai_sample_id(&task.id, model),
                    content: g.content,
                    language,
                    label: ProvenanceLabel::Ai,
                    origin: OriginMeta {
                        generator: Some(model.to_string()),
                        task: Some(format!("{}: {}", task.topic, task.prompt)),
                        path: g.path,
                        ..OriginMeta::default()
                    },
                };
                sample.origin.app_domain = Some(classify_app_domain(&sample));
                sample.origin.task = Some(task.id.clone());
                out.samples.push(sample);
            }
            Ok(None) => {
                out.diagnostics.push(Diagnostic::about(cell, "no response, cell uncovered"));
                out.uncovered.push((task.id.clone(), model.to_string()));
            }
            Err(e) => {
                out.diagnostics.push(Diagnostic::about(cell, format!("generator failed: {e}")));
                out.uncovered.push((task.id.clone(), model.to_string()));
            }
        }
    }
    out
}

/// Responses in an import file that match no cell of `matrix`.
pub fn stray_responses(matrix: &TaskMatrix, responses: &ImportedResponses) -> Vec<Diagnostic> {
    let cells: HashSet<(&str, &str)> = matrix.cells().collect();
    responses
        .keys()
        .filter(|(t, m)| !cells.contains(&(t.as_str(), m.as_str())))
        .map(|(t, m)| Diagnostic::about(format!("({t}, {m})"), "response for a cell outside the task matrix, ignored"))
        .collect()
}

/// Drop samples whose content hash was already seen; first occurrence wins.
/// Returns the kept samples and the number removed.
pub fn dedup(samples: Vec<CodeSample>) -> (Vec<CodeSample>, usize) {
    let mut seen = HashSet::new();
    let before = samples.len();
    let kept: Vec<CodeSample> =
        samples.into_iter().filter(|s| seen.insert(Sha256::digest(s.content.as_bytes()))).collect();
    let removed = before - kept.len();
    (kept, removed)
}
