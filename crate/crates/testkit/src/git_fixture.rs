//! A scripted twelve-commit repository with known harvest output.
//!
//! History (committer dates, `*` marks the first-parent line):
//!
//! ```text
//! * c01 2009-03-01 add src/main.py, src/util.py, README.md, assets/logo.png
//! * c02 2009-06-01 modify src/util.py
//! * c03 2010-02-01 add src/lib.rs
//! * c04 2011-05-01 add web/app.js
//! * c05 2022-03-01 modify src/main.py
//! * c06 2022-06-01 rename src/util.py -> src/helpers.py
//! |   b07 2022-10-01 (feature) add src/feature.go
//! |   b08 2022-11-01 (feature) modify web/app.js
//! * c09 2022-10-15 modify src/main.py
//! * m10 2023-01-10 merge feature (first parent c09)
//! * c11 2023-04-01 modify assets/logo.png, chmod +x src/main.py
//! * c12 2024-02-01 delete src/feature.go, modify src/helpers.py
//! ```

use codeprov_core::model::{ChangeKind, CommitFileChange};
use git2::{Index, IndexEntry, IndexTime, Oid, Repository, Signature, Time};
use std::collections::BTreeMap;
use std::path::Path;

pub const FIXTURE_REPO_NAME: &str = "fixture";
pub const FIXTURE_COMMITS: usize = 12;

type Files = BTreeMap<&'static str, (Vec<u8>, u32)>;

const REGULAR: u32 = 0o100644;
const EXECUTABLE: u32 = 0o100755;

fn day(y: i32, m: u32, d: u32) -> i64 {
    // Days from civil, valid for the Gregorian calendar.
    let (y, m) = if m <= 2 { (y - 1, m + 12) } else { (y, m) };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let doy = (153 * (m as i32 - 3) + 2) / 5 + d as i32 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    (era as i64 * 146_097 + doe as i64 - 719_468) * 86_400 + 12 * 3600
}

fn text(s: &str) -> (Vec<u8>, u32) {
    (s.as_bytes().to_vec(), REGULAR)
}

fn png(variant: u8) -> (Vec<u8>, u32) {
    let mut bytes = vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 0, 0, 0, 0x0d];
    bytes.extend([variant, 0, 0, variant]);
    (bytes, REGULAR)
}

struct Script<'r> {
    repo: &'r Repository,
    commits: Vec<(String, Oid)>,
}

impl Script<'_> {
    fn commit(&mut self, name: &str, files: &Files, parents: &[Oid], seconds: i64, update_ref: Option<&str>) -> Oid {
        let mut index = Index::new().expect("in-memory index");
        for (path, (bytes, mode)) in files {
            let id = self.repo.blob(bytes).expect("blob");
            index
                .add(&IndexEntry {
                    ctime: IndexTime::new(0, 0),
                    mtime: IndexTime::new(0, 0),
                    dev: 0,
                    ino: 0,
                    mode: *mode,
                    uid: 0,
                    gid: 0,
                    file_size: bytes.len() as u32,
                    id,
                    flags: path.len().min(0xfff) as u16,
                    flags_extended: 0,
                    path: path.as_bytes().to_vec(),
                })
                .expect("index add");
        }
        let tree_id = index.write_tree_to(self.repo).expect("write tree");
        let tree = self.repo.find_tree(tree_id).expect("tree");
        let sig = Signature::new("Fixture Author", "fixture@example.org", &Time::new(seconds, 0)).expect("signature");
        let parents: Vec<_> = parents.iter().map(|p| self.repo.find_commit(*p).expect("parent")).collect();
        let parent_refs: Vec<_> = parents.iter().collect();
        let id = self.repo.commit(update_ref, &sig, &sig, name, &tree, &parent_refs).expect("commit");
        self.commits.push((name.to_string(), id));
        id
    }
}

/// Commit ids by script name, plus the changes a full-history harvest of the
/// repository is expected to produce.
pub struct FixtureRepo {
    pub commits: BTreeMap<String, Oid>,
}

impl FixtureRepo {
    pub fn id(&self, name: &str) -> String {
        self.commits[name].to_string()
    }
}

/// Create the fixture history in a fresh repository at `dir`.
pub fn build_fixture_repo(dir: &Path) -> FixtureRepo {
    let repo = Repository::init(dir).expect("init repository");
    let mut s = Script { repo: &repo, commits: Vec::new() };
    let head = Some("HEAD");
    let mut files: Files = BTreeMap::new();

    files.insert("src/main.py", text(MAIN_V1));
    files.insert("src/util.py", text(UTIL_V1));
    files.insert("README.md", text("# fixture\n"));
    files.insert("assets/logo.png", png(1));
    let c01 = s.commit("c01", &files, &[], day(2009, 3, 1), head);

    files.insert("src/util.py", text(UTIL_V2));
    let c02 = s.commit("c02", &files, &[c01], day(2009, 6, 1), head);

    files.insert("src/lib.rs", text(LIB_RS));
    let c03 = s.commit("c03", &files, &[c02], day(2010, 2, 1), head);

    files.insert("web/app.js", text(APP_V1));
    let c04 = s.commit("c04", &files, &[c03], day(2011, 5, 1), head);

    files.insert("src/main.py", text(MAIN_V2));
    let c05 = s.commit("c05", &files, &[c04], day(2022, 3, 1), head);

    let moved = files.remove("src/util.py").expect("present");
    files.insert("src/helpers.py", moved);
    let c06 = s.commit("c06", &files, &[c05], day(2022, 6, 1), head);

    let mut feature = files.clone();
    feature.insert("src/feature.go", text(FEATURE_GO));
    let b07 = s.commit("b07", &feature, &[c06], day(2022, 10, 1), Some("refs/heads/feature"));
    feature.insert("web/app.js", text(APP_V2));
    let b08 = s.commit("b08", &feature, &[b07], day(2022, 11, 1), Some("refs/heads/feature"));

    files.insert("src/main.py", text(MAIN_V3));
    let c09 = s.commit("c09", &files, &[c06], day(2022, 10, 15), head);

    files.insert("src/feature.go", text(FEATURE_GO));
    files.insert("web/app.js", text(APP_V2));
    let m10 = s.commit("m10", &files, &[c09, b08], day(2023, 1, 10), head);

    files.insert("assets/logo.png", png(2));
    files.get_mut("src/main.py").expect("present").1 = EXECUTABLE;
    let c11 = s.commit("c11", &files, &[m10], day(2023, 4, 1), head);

    files.remove("src/feature.go");
    files.insert("src/helpers.py", text(HELPERS_V2));
    s.commit("c12", &files, &[c11], day(2024, 2, 1), head);

    FixtureRepo { commits: s.commits.into_iter().collect() }
}

const MAIN_V1: &str = "import util\n\nif __name__ == '__main__':\n    util.run()\n";
const MAIN_V2: &str = "import util\n\nif __name__ == '__main__' and util.ready():\n    util.run()\n";
const MAIN_V3: &str = "import helpers\n\nif __name__ == '__main__' and helpers.ready():\n    helpers.run()\n";
const UTIL_V1: &str = "def run():\n    print('run')\n";
const UTIL_V2: &str = "def run():\n    for i in range(3):\n        print(i)\n\ndef ready():\n    return True\n";
const HELPERS_V2: &str = "def run():\n    for i in range(3):\n        if i or not i:\n            print(i)\n\ndef ready():\n    return True\n";
const LIB_RS: &str = "pub fn add(a: i32, b: i32) -> i32 {\n    if a > 0 && b > 0 { a + b } else { 0 }\n}\n";
const APP_V1: &str = "function route(req) {\n  return req.path;\n}\n";
const APP_V2: &str = "function route(req) {\n  if (req.path && req.ok) {\n    return req.path;\n  }\n  return '/';\n}\n";
const FEATURE_GO: &str = "package main\n\nfunc feature(x int) int {\n\tif x > 1 {\n\t\treturn x\n\t}\n\treturn 0\n}\n";

fn change(repo: &FixtureRepo, commit: &str, path: &str, pre: Option<&str>, post: Option<&str>, kind: ChangeKind) -> CommitFileChange {
    let seconds = match commit {
        "c01" => day(2009, 3, 1),
        "c02" => day(2009, 6, 1),
        "c03" => day(2010, 2, 1),
        "c04" => day(2011, 5, 1),
        "c05" => day(2022, 3, 1),
        "c06" => day(2022, 6, 1),
        "c09" => day(2022, 10, 15),
        "m10" => day(2023, 1, 10),
        "c11" => day(2023, 4, 1),
        "c12" => day(2024, 2, 1),
        other => panic!("{other} is not on the first-parent line"),
    };
    CommitFileChange {
        repo: FIXTURE_REPO_NAME.to_string(),
        commit: repo.id(commit),
        timestamp: seconds,
        path: path.to_string(),
        pre_content: pre.map(str::to_string),
        post_content: post.map(str::to_string),
        change_kind: kind,
    }
}

/// Expected harvest of the 2022-01-01 to 2025-07-01 window with the default
/// code allowlist, in harvest order.
pub fn expected_wild_changes(repo: &FixtureRepo) -> Vec<CommitFileChange> {
    use ChangeKind::*;
    vec![
        change(repo, "c05", "src/main.py", Some(MAIN_V1), Some(MAIN_V2), Modified),
        change(repo, "c06", "src/helpers.py", None, Some(UTIL_V2), Added),
        change(repo, "c06", "src/util.py", Some(UTIL_V2), None, Deleted),
        change(repo, "c09", "src/main.py", Some(MAIN_V2), Some(MAIN_V3), Modified),
        change(repo, "m10", "src/feature.go", None, Some(FEATURE_GO), Added),
        change(repo, "m10", "web/app.js", Some(APP_V1), Some(APP_V2), Modified),
        change(repo, "c12", "src/feature.go", Some(FEATURE_GO), None, Deleted),
        change(repo, "c12", "src/helpers.py", Some(UTIL_V2), Some(HELPERS_V2), Modified),
    ]
}

/// Expected harvest of the 2008-01-01 to 2011-01-01 window.
pub fn expected_trusted_changes(repo: &FixtureRepo) -> Vec<CommitFileChange> {
    use ChangeKind::*;
    vec![
        change(repo, "c01", "src/main.py", None, Some(MAIN_V1), Added),
        change(repo, "c01", "src/util.py", None, Some(UTIL_V1), Added),
        change(repo, "c02", "src/util.py", Some(UTIL_V1), Some(UTIL_V2), Modified),
        change(repo, "c03", "src/lib.rs", None, Some(LIB_RS), Added),
    ]
}

/// Final-state contents of the trusted window, ordered by path.
pub fn expected_trusted_final_state() -> Vec<(&'static str, &'static str)> {
    vec![("src/lib.rs", LIB_RS), ("src/main.py", MAIN_V1), ("src/util.py", UTIL_V2)]
}
