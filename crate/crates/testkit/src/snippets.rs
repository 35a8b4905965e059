//! Random but well-formed multi-language snippets mixing real control flow
//! and logical operators with decoys: keywords inside comments and string
//! literals, and identifiers that merely contain keywords.

use codeprov_core::model::LanguageId;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lcs_oracle::ORACLE_LANGUAGES;

const IDENTS: &[&str] = &["count", "iffy", "formula", "order_id", "endif_flag", "notable", "android", "whileLoop", "caseless", "loops", "x", "y2"];
const DECOY_WORDS: &[&str] = &["if", "for", "while", "and", "or", "not", "case", "&&", "||", " ? ", "elif", "when", "match", "loop"];

fn ident(rng: &mut ChaCha8Rng) -> &'static str {
    IDENTS.choose(rng).expect("non-empty")
}

fn decoy_text(rng: &mut ChaCha8Rng) -> String {
    (0..rng.gen_range(1..4)).map(|_| *DECOY_WORDS.choose(rng).expect("non-empty")).collect::<Vec<_>>().join(" ")
}

struct Style {
    and: &'static str,
    or: &'static str,
    line_comment: &'static str,
    block: Option<(&'static str, &'static str)>,
    quote: &'static str,
}

fn style(language: LanguageId) -> Style {
    use LanguageId::*;
    let c = Style { and: "&&", or: "||", line_comment: "//", block: Some(("/*", "*/")), quote: "\"" };
    match language {
        Python => Style { and: "and", or: "or", line_comment: "#", block: None, quote: "'" },
        Ruby => Style { line_comment: "#", block: None, ..c },
        Shell => Style { line_comment: "#", block: None, quote: "'", ..c },
        Sql => Style { and: "AND", or: "OR", line_comment: "--", quote: "'", ..c },
        Php => Style { line_comment: "#", ..c },
        _ => c,
    }
}

fn condition(rng: &mut ChaCha8Rng, st: &Style) -> String {
    let mut cond = ident(rng).to_string();
    for _ in 0..rng.gen_range(0..3) {
        let op = if rng.gen_bool(0.5) { st.and } else { st.or };
        cond = format!("{cond} {op} {}", ident(rng));
    }
    cond
}

fn control(rng: &mut ChaCha8Rng, language: LanguageId, st: &Style) -> String {
    use LanguageId::*;
    let c = condition(rng, st);
    let v = ident(rng);
    let pick = |rng: &mut ChaCha8Rng, options: Vec<String>| options.choose(rng).expect("non-empty").clone();
    match language {
        Python => pick(rng, vec![
            format!("if {c}:\n    {v} = 1"),
            format!("while {c}:\n    break"),
            format!("for {v} in items:\n    pass"),
            format!("try:\n    run()\nexcept ValueError:\n    pass"),
            format!("if {v}:\n    pass\nelif {c}:\n    pass"),
            format!("{v} = not {c}"),
        ]),
        Ruby => pick(rng, vec![
            format!("if {c}\n  {v} = 1\nend"),
            format!("unless {c}\n  {v} = 2\nend"),
            format!("while {c} do\n  break\nend"),
            format!("{v} = {c} ? 1 : 2"),
            format!("case {v}\nwhen 1 then {v}\nend"),
            format!("{v} = not {c}"),
        ]),
        Shell => pick(rng, vec![
            format!("if [ -n \"${v}\" ] {} [ -z \"$x\" ]; then\n  echo ok\nfi", st.and),
            format!("for {v} in a b c; do\n  echo \"${v}\"\ndone"),
            format!("while true; do\n  break\ndone"),
            format!("case \"${v}\" in\n  a) echo a;;\nesac"),
            format!("test -f x {} echo missing", st.or),
        ]),
        Sql => pick(rng, vec![
            format!("SELECT {v} FROM t WHERE {c};"),
            format!("SELECT CASE WHEN {c} THEN 1 ELSE 0 END FROM t;"),
            format!("select {v} from t where not {c};"),
            format!("WHILE @{v} > 0 BEGIN SET @{v} = @{v} - 1 END"),
        ]),
        Go => pick(rng, vec![
            format!("if {c} {{\n\t{v} = 1\n}}"),
            format!("for {v} := 0; {v} < 3; {v}++ {{\n}}"),
            format!("switch {v} {{\ncase 1:\n\treturn\n}}"),
        ]),
        Rust => pick(rng, vec![
            format!("if {c} {{\n    {v} += 1;\n}}"),
            format!("for {v} in 0..3 {{}}"),
            format!("while {c} {{ break; }}"),
            format!("loop {{ break; }}"),
            format!("match {v} {{ _ => {{}} }}"),
        ]),
        Kotlin => pick(rng, vec![
            format!("if ({c}) {{ {v} = 1 }}"),
            format!("when ({v}) {{ 1 -> run() }}"),
            format!("for ({v} in xs) {{ }}"),
            format!("try {{ run() }} catch (e: Exception) {{ }}"),
        ]),
        C => pick(rng, vec![
            format!("if ({c}) {{ {v} = 1; }}"),
            format!("for ({v} = 0; {v} < 3; {v}++) {{ }}"),
            format!("while ({c}) {{ break; }}"),
            format!("switch ({v}) {{ case 1: break; }}"),
            format!("{v} = {c} ? 1 : 0;"),
        ]),
        Php => pick(rng, vec![
            format!("if (${v} {} $x) {{ ${v} = 1; }} elseif ($y) {{ }}", st.and),
            format!("foreach ($xs as ${v}) {{ }}"),
            format!("${v} = $a and $b;"),
            format!("${v} = $a ? 1 : 2;"),
            format!("try {{ run(); }} catch (Exception $e) {{ }}"),
        ]),
        CSharp => pick(rng, vec![
            format!("if ({c}) {{ {v} = 1; }}"),
            format!("foreach (var {v} in xs) {{ }}"),
            format!("try {{ Run(); }} catch (Exception e) {{ }}"),
            format!("{v} = {c} ? 1 : 0;"),
            format!("switch ({v}) {{ case 1: break; }}"),
        ]),
        _ => pick(rng, vec![
            format!("if ({c}) {{ {v} = 1; }}"),
            format!("for (let {v} = 0; {v} < 3; {v}++) {{ }}"),
            format!("while ({c}) {{ break; }}"),
            format!("switch ({v}) {{ case 1: break; }}"),
            format!("try {{ run(); }} catch (e) {{ }}"),
            format!("{v} = {c} ? 1 : 0;"),
        ]),
    }
}

fn assignment(rng: &mut ChaCha8Rng, language: LanguageId) -> String {
    let (a, b) = (ident(rng), ident(rng));
    match language {
        LanguageId::Shell => format!("{a}=\"${b}\""),
        LanguageId::Php => format!("${a} = ${b} + 1;"),
        LanguageId::Sql => format!("UPDATE t SET {a} = {b};"),
        LanguageId::Python | LanguageId::Ruby => format!("{a} = {b} + 1"),
        _ => format!("{a} = {b} + 1;"),
    }
}

fn commented(rng: &mut ChaCha8Rng, st: &Style) -> String {
    let text = decoy_text(rng);
    match st.block {
        Some((open, close)) if rng.gen_bool(0.4) => format!("{open} {text}\n {} {close}", decoy_text(rng)),
        _ => format!("{} {text}", st.line_comment),
    }
}

fn literal(rng: &mut ChaCha8Rng, language: LanguageId, st: &Style) -> String {
    let v = ident(rng);
    let text = decoy_text(rng);
    let escaped = if st.quote == "\"" && rng.gen_bool(0.3) { format!("\\\"{text}\\\"") } else { text };
    let quoted = format!("{q}{escaped}{q}", q = st.quote);
    match language {
        LanguageId::Python if rng.gen_bool(0.3) => format!("{v} = \"\"\"{}\n{}\"\"\"", decoy_text(rng), decoy_text(rng)),
        LanguageId::JavaScript | LanguageId::TypeScript if rng.gen_bool(0.3) => {
            format!("{v} = `{}\n{}`;", decoy_text(rng), decoy_text(rng))
        }
        LanguageId::Go if rng.gen_bool(0.3) => format!("{v} := `{}`", decoy_text(rng)),
        LanguageId::Shell => format!("echo {quoted}"),
        LanguageId::Sql => format!("SELECT {quoted} AS {v};"),
        LanguageId::Php => format!("${v} = {quoted};"),
        LanguageId::Python | LanguageId::Ruby => format!("{v} = {quoted}"),
        _ => format!("{v} = {quoted};"),
    }
}

/// One snippet of `lines` statements in `language`.
pub fn snippet(rng: &mut ChaCha8Rng, language: LanguageId, lines: usize) -> String {
    let st = style(language);
    let mut out = Vec::with_capacity(lines);
    for _ in 0..lines {
        out.push(match rng.gen_range(0..10) {
            0..=3 => control(rng, language, &st),
            4..=5 => assignment(rng, language),
            6..=7 => commented(rng, &st),
            _ => literal(rng, language, &st),
        });
    }
    out.join("\n") + "\n"
}

/// `count` snippets cycling through every oracle language.
pub fn fixture_corpus(count: usize, seed: u64) -> Vec<(LanguageId, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let language = ORACLE_LANGUAGES[i % ORACLE_LANGUAGES.len()];
            let lines = rng.gen_range(3..16);
            (language, snippet(&mut rng, language, lines))
        })
        .collect()
}

/// A standalone statement with exactly one control-flow construct and no
/// logical operator.
pub fn one_control_statement(language: LanguageId) -> &'static str {
    use LanguageId::*;
    match language {
        Python => "if ready:\n    pass",
        Ruby => "if ready\n  x = 1\nend",
        Shell => "if true; then\n  echo ok\nfi",
        Sql => "SELECT CASE WHEN ready THEN 1 END FROM t;",
        Go => "if ready {\n}",
        Rust => "if ready {}",
        _ => "if (ready) { }",
    }
}

/// A standalone statement with exactly one logical operator and no control
/// flow.
pub fn one_logical_operator(language: LanguageId) -> &'static str {
    use LanguageId::*;
    match language {
        Python => "flag = ready and done",
        Sql => "SELECT 1 FROM t WHERE ready AND done;",
        Shell => "test -f a && echo found",
        Php => "$flag = $ready && $done;",
        Ruby => "flag = ready && done",
        _ => "flag = ready && done;",
    }
}
