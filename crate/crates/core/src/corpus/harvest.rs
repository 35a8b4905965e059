use super::CorpusError;
use crate::diagnostics::Diagnostic;
use crate::lexical::{extension, is_code_extension, known_extensions};
use crate::model::{decode_lossy, ChangeKind, CommitFileChange};
use chrono::{DateTime, NaiveDate, Utc};
use git2::{Delta, DiffOptions, ObjectType, Oid, Repository, Tree};
use std::collections::BTreeSet;
use std::path::Path;

pub const DEFAULT_MAX_FILE_BYTES: u64 = 1 << 20;

/// Which commits and files a harvest keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestSpec {
    /// Inclusive.
    pub start: DateTime<Utc>,
    /// Exclusive.
    pub end: DateTime<Utc>,
    /// Lowercase extensions without the dot.
    pub allowlist: BTreeSet<String>,
    pub max_file_bytes: u64,
}

pub(crate) fn utc_midnight(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date").and_hms_opt(0, 0, 0).expect("midnight").and_utc()
}

/// Every extension that maps to a language and is neither documentation nor
/// config/data.
pub fn code_allowlist() -> BTreeSet<String> {
    known_extensions().filter(|e| is_code_extension(e)).map(str::to_string).collect()
}

impl HarvestSpec {
    pub fn new(
        start: DateTime<Utc>,
        end: DateTime<Utc>,
        allowlist: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, CorpusError> {
        let spec = Self {
            start,
            end,
            allowlist: allowlist.into_iter().map(|e| e.into().trim_start_matches('.').to_ascii_lowercase()).collect(),
            max_file_bytes: DEFAULT_MAX_FILE_BYTES,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// In-the-wild window, 2022-01-01 up to 2025-07-01, code extensions.
    pub fn in_the_wild() -> Self {
        Self::new(utc_midnight(2022, 1, 1), utc_midnight(2025, 7, 1), code_allowlist()).expect("valid default")
    }

    /// Trusted-human window, 2008-01-01 up to 2011-01-01, code extensions.
    pub fn trusted_human() -> Self {
        Self::new(utc_midnight(2008, 1, 1), utc_midnight(2011, 1, 1), code_allowlist()).expect("valid default")
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.start >= self.end {
            return Err(CorpusError::BadWindow { start: self.start, end: self.end });
        }
        if self.allowlist.is_empty() {
            return Err(CorpusError::EmptyAllowlist);
        }
        Ok(())
    }

    pub fn contains_time(&self, seconds: i64) -> bool {
        self.start.timestamp() <= seconds && seconds < self.end.timestamp()
    }

    pub fn allows_path(&self, path: &str) -> bool {
        extension(path).is_some_and(|e| self.allowlist.contains(&e))
    }
}

/// Changes harvested from one repository plus the files that were skipped.
#[derive(Debug, Clone, Default)]
pub struct HarvestOutcome {
    pub changes: Vec<CommitFileChange>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Walk the first-parent history of HEAD, oldest commit first, and emit one
/// change per file whose contents differ from the first parent (the empty
/// tree for a root commit). Renames come out as a deletion plus an addition.
///
/// `repo_name` defaults to the final component of `path`.
pub fn harvest_repo(spec: &HarvestSpec, path: &Path, repo_name: Option<&str>) -> Result<HarvestOutcome, CorpusError> {
    spec.validate()?;
    let name = repo_name
        .map(str::to_string)
        .or_else(|| path.canonicalize().ok()?.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| path.display().to_string());
    let git_err = |e: git2::Error| CorpusError::Git { repo: name.clone(), message: e.message().to_string() };
    let repo = Repository::open(path).map_err(git_err)?;
    let head = repo
        .head()
        .and_then(|h| h.peel_to_commit())
        .map_err(|_| CorpusError::UnresolvableBranch(name.clone()))?;

    let mut line = Vec::new();
    let mut cursor = Some(head);
    while let Some(commit) = cursor {
        cursor = commit.parents().next();
        line.push(commit);
    }
    line.reverse();

    let mut outcome = HarvestOutcome::default();
    for commit in &line {
        let timestamp = commit.time().seconds();
        if !spec.contains_time(timestamp) {
            continue;
        }
        let tree = commit.tree().map_err(git_err)?;
        let parent_tree: Option<Tree> = match commit.parents().next() {
            Some(p) => Some(p.tree().map_err(git_err)?),
            None => None,
        };
        let mut opts = DiffOptions::new();
        opts.include_typechange(false);
        let diff = repo.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts)).map_err(git_err)?;
        let commit_id = commit.id().to_string();
        for delta in diff.deltas() {
            let kind = match delta.status() {
                Delta::Added => ChangeKind::Added,
                Delta::Deleted => ChangeKind::Deleted,
                Delta::Modified => ChangeKind::Modified,
                _ => ChangeKind::Modified,
            };
            let file = if kind == ChangeKind::Deleted { delta.old_file() } else { delta.new_file() };
            let Some(file_path) = file.path().map(|p| p.to_string_lossy().replace('\\', "/")) else { continue };
            if !spec.allows_path(&file_path) {
                continue;
            }
            let subject = format!("{name}@{}:{file_path}", &commit_id[..commit_id.len().min(12)]);
            let mut read = |oid: Oid| -> Result<Option<Option<String>>, CorpusError> {
                if oid.is_zero() {
                    return Ok(Some(None));
                }
                let object = repo.find_object(oid, None).map_err(git_err)?;
                if object.kind() != Some(ObjectType::Blob) {
                    outcome.diagnostics.push(Diagnostic::about(&subject, "not a regular file, skipped"));
                    return Ok(None);
                }
                let blob = object.peel_to_blob().map_err(git_err)?;
                if blob.size() as u64 > spec.max_file_bytes {
                    outcome.diagnostics.push(Diagnostic::about(
                        &subject,
                        format!("{} bytes exceeds the {} byte limit, skipped", blob.size(), spec.max_file_bytes),
                    ));
                    return Ok(None);
                }
                if blob.is_binary() {
                    outcome.diagnostics.push(Diagnostic::about(&subject, "binary content, skipped"));
                    return Ok(None);
                }
                let (text, lossy) = decode_lossy(blob.content());
                if lossy {
                    outcome.diagnostics.push(Diagnostic::about(&subject, "invalid UTF-8, decoded lossily"));
                }
                Ok(Some(Some(text)))
            };
            let Some(pre_content) = read(delta.old_file().id())? else { continue };
            let Some(post_content) = read(delta.new_file().id())? else { continue };
            if pre_content == post_content {
                // Mode-only change.
                continue;
            }
            outcome.changes.push(CommitFileChange {
                repo: name.clone(),
                commit: commit_id.clone(),
                timestamp,
                path: file_path,
                pre_content,
                post_content,
                change_kind: kind,
            });
        }
    }
    Ok(outcome)
}

/// Keep changes whose path extension is in `allowlist`, preserving order.
pub fn filter_code_files(changes: Vec<CommitFileChange>, allowlist: &BTreeSet<String>) -> Vec<CommitFileChange> {
    changes.into_iter().filter(|c| extension(&c.path).is_some_and(|e| allowlist.contains(&e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let s = utc_midnight(2020, 1, 1);
        assert!(matches!(HarvestSpec::new(s, s, ["py"]), Err(CorpusError::BadWindow { .. })));
        assert!(matches!(HarvestSpec::new(s, utc_midnight(2021, 1, 1), Vec::<String>::new()), Err(CorpusError::EmptyAllowlist)));
        let spec = HarvestSpec::new(s, utc_midnight(2021, 1, 1), [".PY"]).unwrap();
        assert!(spec.allows_path("src/a.py"));
        assert!(!spec.allows_path("README.md"));
        assert!(spec.contains_time(s.timestamp()));
        assert!(!spec.contains_time(utc_midnight(2021, 1, 1).timestamp()));
    }

    #[test]
    fn code_allowlist_excludes_docs_and_config() {
        let list = code_allowlist();
        assert!(list.contains("py") && list.contains("rs") && list.contains("ts"));
        assert!(!list.contains("md") && !list.contains("yaml") && !list.contains("json"));
    }

    fn change(path: &str) -> CommitFileChange {
        CommitFileChange {
            repo: "r".into(),
            commit: "ab".into(),
            timestamp: 0,
            path: path.into(),
            pre_content: None,
            post_content: Some(String::new()),
            change_kind: ChangeKind::Added,
        }
    }

    #[test]
    fn filter_keeps_code_only() {
        let allow = code_allowlist();
        let kept = filter_code_files(vec![change("a.py"), change("b.md"), change("c.json")], &allow);
        assert_eq!(kept.iter().map(|c| c.path.as_str()).collect::<Vec<_>>(), ["a.py"]);
        assert_eq!(filter_code_files(kept.clone(), &allow), kept);
        assert!(filter_code_files(vec![], &allow).is_empty());
    }
}
