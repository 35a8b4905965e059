use codeprov_core::corpus::{build_human_subset, changes_to_samples, harvest_repo, CorpusError, HarvestSpec, SampleGranularity};
use codeprov_core::model::{LanguageId, ProvenanceLabel};
use codeprov_testkit::git_fixture::*;
use chrono::{TimeZone, Utc};

#[test]
fn wild_window_matches_script() {
    let dir = tempfile::tempdir().unwrap();
    let repo = build_fixture_repo(dir.path());
    assert_eq!(repo.commits.len(), FIXTURE_COMMITS);
    let out = harvest_repo(&HarvestSpec::in_the_wild(), dir.path(), Some(FIXTURE_REPO_NAME)).unwrap();
    assert_eq!(out.changes, expected_wild_changes(&repo));
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
}

#[test]
fn trusted_window_matches_script() {
    let dir = tempfile::tempdir().unwrap();
    let repo = build_fixture_repo(dir.path());
    let out = harvest_repo(&HarvestSpec::trusted_human(), dir.path(), Some(FIXTURE_REPO_NAME)).unwrap();
    assert_eq!(out.changes, expected_trusted_changes(&repo));
}

#[test]
fn binary_files_are_reported_when_allowlisted() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture_repo(dir.path());
    let mut spec = HarvestSpec::in_the_wild();
    spec.allowlist.insert("png".into());
    let out = harvest_repo(&spec, dir.path(), Some(FIXTURE_REPO_NAME)).unwrap();
    assert_eq!(out.changes.len(), 8);
    assert_eq!(out.diagnostics.len(), 1);
    assert!(out.diagnostics[0].to_string().contains("binary"));
}

#[test]
fn size_limit_skips_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture_repo(dir.path());
    let mut spec = HarvestSpec::in_the_wild();
    spec.max_file_bytes = 80;
    let out = harvest_repo(&spec, dir.path(), Some(FIXTURE_REPO_NAME)).unwrap();
    assert!(out.changes.len() < 8);
    assert!(!out.diagnostics.is_empty());
}

#[test]
fn missing_repo_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        harvest_repo(&HarvestSpec::in_the_wild(), &dir.path().join("nope"), None),
        Err(CorpusError::Git { .. })
    ));
}

#[test]
fn human_subset_is_final_state() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture_repo(dir.path());
    let out = build_human_subset(&HarvestSpec::trusted_human(), &[dir.path().to_path_buf()]).unwrap();
    let got: Vec<_> = out.samples.iter().map(|s| (s.origin.path.as_deref().unwrap(), s.content.as_str())).collect();
    assert_eq!(got, expected_trusted_final_state());
    assert!(out.samples.iter().all(|s| s.label == ProvenanceLabel::Human));
    assert_eq!(out.samples[0].language, LanguageId::Rust);
}

#[test]
fn human_subset_rejects_late_windows() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture_repo(dir.path());
    let mut spec = HarvestSpec::trusted_human();
    spec.end = Utc.with_ymd_and_hms(2011, 1, 2, 0, 0, 0).unwrap();
    assert!(matches!(build_human_subset(&spec, &[dir.path().to_path_buf()]), Err(CorpusError::PurityViolation { .. })));
}

#[test]
fn per_commit_samples_skip_deletions() {
    let dir = tempfile::tempdir().unwrap();
    let repo = build_fixture_repo(dir.path());
    let samples = changes_to_samples(&expected_wild_changes(&repo), SampleGranularity::PerCommit, ProvenanceLabel::Unknown);
    assert_eq!(samples.len(), 6);
    let finals = changes_to_samples(&expected_wild_changes(&repo), SampleGranularity::FinalState, ProvenanceLabel::Unknown);
    let paths: Vec<_> = finals.iter().map(|s| s.origin.path.clone().unwrap()).collect();
    assert_eq!(paths, ["src/helpers.py", "src/main.py", "web/app.js"]);
}
