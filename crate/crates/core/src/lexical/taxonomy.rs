use super::language::{extension, file_name, language_for_extension};
use crate::model::{AppDomain, CodeSample, FileFunction};

const DOC_EXTENSIONS: &[&str] = &["md", "markdown", "rst", "txt", "adoc"];
const DOC_DIRS: &[&str] = &["docs", "doc"];
const TEST_DIRS: &[&str] = &["test", "tests", "spec", "__tests__"];
const CONFIG_EXTENSIONS: &[&str] =
    &["json", "yaml", "yml", "toml", "ini", "xml", "csv", "lock", "cfg", "properties"];

fn directories(path: &str) -> impl Iterator<Item = String> + '_ {
    let mut parts: Vec<&str> = path.split(['/', '\\']).collect();
    parts.pop();
    parts.into_iter().map(|p| p.to_ascii_lowercase())
}

/// Extensions of source files: mapped to a language and neither documentation
/// nor config/data.
pub fn is_code_extension(ext: &str) -> bool {
    language_for_extension(ext).is_some() && !CONFIG_EXTENSIONS.contains(&ext) && !DOC_EXTENSIONS.contains(&ext)
}

/// First-match classification: documentation, tests, config/data, code, other.
pub fn classify_file_function(path: &str) -> FileFunction {
    let ext = extension(path);
    let ext = ext.as_deref().unwrap_or("");

    if DOC_EXTENSIONS.contains(&ext) || directories(path).any(|d| DOC_DIRS.contains(&d.as_str())) {
        return FileFunction::Documentation;
    }
    let name = file_name(path).to_ascii_lowercase();
    let test_dir = directories(path).any(|d| TEST_DIRS.contains(&d.as_str()));
    let test_name = (name.contains("test") || name.contains("spec")) && is_code_extension(ext);
    if test_dir || test_name {
        return FileFunction::TestCode;
    }
    if CONFIG_EXTENSIONS.contains(&ext) {
        return FileFunction::ConfigData;
    }
    if is_code_extension(ext) {
        return FileFunction::CoreLogic;
    }
    FileFunction::Other
}

/// Keyword table in first-match order. Keywords of four or more characters
/// also match as substrings of a path token ("database" matches "databases").
const DOMAIN_RULES: &[(AppDomain, &[&str])] = &[
    (
        AppDomain::WebApplication,
        &[
            "http", "web", "route", "router", "routes", "html", "css", "frontend", "backend", "rest", "api",
            "django", "flask", "express", "react", "vue", "angular", "servlet", "webapp", "website",
        ],
    ),
    (
        AppDomain::DataManagement,
        &[
            "database", "db", "sql", "storage", "persist", "cache", "orm", "redis", "mongo", "postgres",
            "sqlite", "kv", "index", "query",
        ],
    ),
    (
        AppDomain::DataScience,
        &[
            "data", "ml", "learn", "model", "pandas", "numpy", "tensor", "analytics", "etl", "pipeline",
            "stats", "notebook", "dataset",
        ],
    ),
    (
        AppDomain::NetworkSecurity,
        &[
            "net", "network", "socket", "tcp", "udp", "crypto", "security", "auth", "tls", "ssl",
            "distributed", "rpc", "p2p", "cluster",
        ],
    ),
    (
        AppDomain::LanguageRuntime,
        &[
            "compiler", "parser", "lexer", "interpreter", "runtime", "vm", "lang", "jit", "ast", "bytecode",
        ],
    ),
    (
        AppDomain::Operations,
        &[
            "deploy", "ops", "devops", "monitor", "logging", "ci", "docker", "k8s", "kube", "metrics",
            "backup", "ansible", "terraform",
        ],
    ),
    (
        AppDomain::ClientGraphics,
        &[
            "gui", "ui", "graphics", "render", "game", "opengl", "canvas", "image", "widget", "window",
            "shader", "android", "ios",
        ],
    ),
    (
        AppDomain::PlatformsSystems,
        &[
            "kernel", "os", "driver", "system", "embedded", "firmware", "platform", "filesystem", "fs",
            "syscall",
        ],
    ),
];

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
        .collect()
}

fn keyword_hits(keyword: &str, token: &str) -> bool {
    token == keyword || (keyword.len() >= 4 && token.contains(keyword))
}

/// Keyword heuristic over the sample's path, task and repository name.
pub fn classify_app_domain(sample: &CodeSample) -> AppDomain {
    let origin = &sample.origin;
    let haystack: Vec<String> = [origin.path.as_deref(), origin.task.as_deref(), origin.repo.as_deref()]
        .into_iter()
        .flatten()
        .flat_map(tokens)
        .collect();
    DOMAIN_RULES
        .iter()
        .find(|(_, keywords)| keywords.iter().any(|k| haystack.iter().any(|t| keyword_hits(k, t))))
        .map(|(domain, _)| *domain)
        .unwrap_or(AppDomain::Others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LanguageId, OriginMeta, ProvenanceLabel};

    #[test]
    fn file_function_rules() {
        assert_eq!(classify_file_function("docs/guide.md"), FileFunction::Documentation);
        assert_eq!(classify_file_function("docs/conf.py"), FileFunction::Documentation);
        assert_eq!(classify_file_function("NOTES.txt"), FileFunction::Documentation);
        assert_eq!(classify_file_function("tests/test_parser.py"), FileFunction::TestCode);
        assert_eq!(classify_file_function("src/parser_test.go"), FileFunction::TestCode);
        assert_eq!(classify_file_function("spec/fixtures/data.json"), FileFunction::TestCode);
        assert_eq!(classify_file_function("config/app.yaml"), FileFunction::ConfigData);
        assert_eq!(classify_file_function("test_data.json"), FileFunction::ConfigData);
        assert_eq!(classify_file_function("Cargo.lock"), FileFunction::ConfigData);
        assert_eq!(classify_file_function("src/main.rs"), FileFunction::CoreLogic);
        assert_eq!(classify_file_function("assets/logo.png"), FileFunction::Other);
        assert_eq!(classify_file_function("Makefile"), FileFunction::Other);
    }

    fn sample(path: Option<&str>, repo: Option<&str>) -> CodeSample {
        CodeSample {
            id: "s".into(),
            content: String::new(),
            language: LanguageId::Other,
            label: ProvenanceLabel::Unknown,
            origin: OriginMeta {
                path: path.map(Into::into),
                repo: repo.map(Into::into),
                ..Default::default()
            },
        }
    }

    #[test]
    fn app_domain_rules() {
        assert_eq!(classify_app_domain(&sample(Some("src/http_server.py"), None)), AppDomain::WebApplication);
        assert_eq!(classify_app_domain(&sample(Some("app/routes/user.js"), None)), AppDomain::WebApplication);
        assert_eq!(classify_app_domain(&sample(Some("src/main.c"), Some("acme/database"))), AppDomain::DataManagement);
        assert_eq!(classify_app_domain(&sample(Some("src/lexer.rs"), None)), AppDomain::LanguageRuntime);
        assert_eq!(classify_app_domain(&sample(Some("src/main.c"), Some("foo"))), AppDomain::Others);
        assert_eq!(classify_app_domain(&sample(None, None)), AppDomain::Others);
    }
}
