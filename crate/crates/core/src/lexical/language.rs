use crate::model::{LanguageId, TechStack};

const EXTENSIONS: &[(&str, LanguageId)] = &[
    ("py", LanguageId::Python),
    ("pyw", LanguageId::Python),
    ("js", LanguageId::JavaScript),
    ("mjs", LanguageId::JavaScript),
    ("cjs", LanguageId::JavaScript),
    ("jsx", LanguageId::JavaScript),
    ("ts", LanguageId::TypeScript),
    ("tsx", LanguageId::TypeScript),
    ("mts", LanguageId::TypeScript),
    ("cts", LanguageId::TypeScript),
    ("java", LanguageId::Java),
    ("c", LanguageId::C),
    ("h", LanguageId::C),
    ("cc", LanguageId::Cpp),
    ("cpp", LanguageId::Cpp),
    ("cxx", LanguageId::Cpp),
    ("c++", LanguageId::Cpp),
    ("hpp", LanguageId::Cpp),
    ("hh", LanguageId::Cpp),
    ("hxx", LanguageId::Cpp),
    ("cs", LanguageId::CSharp),
    ("go", LanguageId::Go),
    ("rs", LanguageId::Rust),
    ("php", LanguageId::Php),
    ("rb", LanguageId::Ruby),
    ("scala", LanguageId::Scala),
    ("sc", LanguageId::Scala),
    ("kt", LanguageId::Kotlin),
    ("kts", LanguageId::Kotlin),
    ("swift", LanguageId::Swift),
    ("sh", LanguageId::Shell),
    ("bash", LanguageId::Shell),
    ("zsh", LanguageId::Shell),
    ("ipynb", LanguageId::JupyterNotebook),
    ("html", LanguageId::Html),
    ("htm", LanguageId::Html),
    ("css", LanguageId::Css),
    ("scss", LanguageId::Css),
    ("less", LanguageId::Css),
    ("sql", LanguageId::Sql),
    ("md", LanguageId::Markdown),
    ("markdown", LanguageId::Markdown),
    ("yaml", LanguageId::Yaml),
    ("yml", LanguageId::Yaml),
];

const INTERPRETERS: &[(&str, LanguageId)] = &[
    ("python", LanguageId::Python),
    ("node", LanguageId::JavaScript),
    ("deno", LanguageId::TypeScript),
    ("ruby", LanguageId::Ruby),
    ("php", LanguageId::Php),
    ("sh", LanguageId::Shell),
    ("bash", LanguageId::Shell),
    ("zsh", LanguageId::Shell),
    ("dash", LanguageId::Shell),
    ("ksh", LanguageId::Shell),
];

/// Lowercased extension of the final path component, if it has one.
pub fn extension(path: &str) -> Option<String> {
    let name = file_name(path);
    let (stem, ext) = name.rsplit_once('.')?;
    if stem.is_empty() || ext.is_empty() {
        // ".gitignore" style dotfiles have no extension.
        return None;
    }
    Some(ext.to_ascii_lowercase())
}

pub(crate) fn file_name(path: &str) -> &str {
    path.rsplit(['/', '\\']).next().unwrap_or(path)
}

pub fn language_for_extension(ext: &str) -> Option<LanguageId> {
    let ext = ext.to_ascii_lowercase();
    EXTENSIONS.iter().find(|(e, _)| *e == ext).map(|(_, lang)| *lang)
}

/// Every extension mapped to a language.
pub fn known_extensions() -> impl Iterator<Item = &'static str> {
    EXTENSIONS.iter().map(|(e, _)| *e)
}

/// Language of a file by extension; extensionless files fall back to the
/// shebang line when content is available.
pub fn detect_language(path: &str, content: Option<&str>) -> LanguageId {
    match extension(path) {
        Some(ext) => language_for_extension(&ext).unwrap_or(LanguageId::Other),
        None => content.and_then(shebang_language).unwrap_or(LanguageId::Other),
    }
}

fn shebang_language(content: &str) -> Option<LanguageId> {
    let first = content.lines().next()?.strip_prefix("#!")?;
    let mut words = first.split_whitespace();
    let mut program = file_name(words.next()?);
    if program == "env" {
        program = words.find(|w| !w.starts_with('-'))?;
    }
    // python3.11 -> python
    let base = program.trim_end_matches(|c: char| c.is_ascii_digit() || c == '.');
    INTERPRETERS.iter().find(|(name, _)| *name == base).map(|(_, lang)| *lang)
}

pub fn classify_tech_stack(language: LanguageId) -> TechStack {
    use LanguageId::*;
    match language {
        Python | JavaScript | TypeScript | Ruby | Php | Shell | JupyterNotebook => TechStack::DynamicScripting,
        C | Cpp | Rust | Java | CSharp | Go | Scala | Kotlin | Swift => TechStack::StaticSystem,
        Html | Css | Sql | Markdown | Yaml => TechStack::Declarative,
        Other => TechStack::Other,
    }
}
