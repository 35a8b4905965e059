use crate::support::{data, report, write_text, Outcome};
use codeprov_core::analytics::{
    adoption_by, attack_vector_distribution, cwe_profile, net_impact, quarterly_series, severity_compare, svg, to_csv,
    topn_bottomn, vuln_quarterly_series, AnnotatedFile, CweMap, Dimension, QuarterlyRow, TableRow,
};
use codeprov_core::model::{AttackVector, Attribution, VulnRecord};
use codeprov_core::scalar::Scalar;
use codeprov_core::Exact;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct Bundle<'a> {
    pub out_dir: &'a Path,
    pub written: Vec<PathBuf>,
}

impl Bundle<'_> {
    fn table<T: TableRow>(&mut self, name: &str, rows: &[T]) -> Outcome {
        self.file(&format!("{name}.csv"), &to_csv(rows))
    }

    fn file(&mut self, name: &str, text: &str) -> Outcome {
        let path = self.out_dir.join(name);
        write_text(&path, text)?;
        self.written.push(path);
        Ok(())
    }
}

fn f(v: Exact) -> f64 {
    v.to_f64()
}

fn line_per_key(title: &str, rows: &[QuarterlyRow<Exact>]) -> String {
    let mut quarters: Vec<String> = Vec::new();
    let mut series: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows {
        let q = r.quarter.to_string();
        if quarters.last() != Some(&q) {
            quarters.push(q);
        }
        series.entry(&r.key).or_default().push(f(r.ai_file_rate));
    }
    let series: Vec<(&str, Vec<f64>)> = series.into_iter().collect();
    svg::line_chart(title, &quarters, &series, Some(1.0))
}

/// Adoption tables and charts over classified files.
pub fn adoption(bundle: &mut Bundle<'_>, files: &[AnnotatedFile], top_n: &[usize]) -> Outcome {
    for dim in [Dimension::Language, Dimension::TechStack, Dimension::FileFunction, Dimension::Repo] {
        let rows = adoption_by::<Exact>(files, dim).map_err(data)?;
        bundle.table(&format!("adoption_{}", dim.as_str()), &rows)?;
        let keys: Vec<String> = rows.iter().map(|r| r.key.clone()).collect();
        let rates = rows.iter().map(|r| f(r.ai_file_rate)).collect();
        let title = format!("AI file rate by {}", dim.as_str().replace('_', " "));
        bundle.file(&format!("adoption_{}.svg", dim.as_str()), &svg::bar_chart(&title, &keys, &[("ai_file_rate", rates)], Some(1.0)))?;
    }

    let quarterly = quarterly_series::<Exact>(files, Dimension::Language);
    bundle.table("quarterly_language", &quarterly)?;
    bundle.file("quarterly_language.svg", &line_per_key("AI file rate per quarter by language", &quarterly))?;

    let overall = quarterly_series::<Exact>(files, Dimension::Overall);
    bundle.table("ai_contribution_quarterly", &overall)?;
    bundle.file("ai_contribution_quarterly.svg", &line_per_key("AI share of changed files per quarter", &overall))?;

    let repos = adoption_by::<Exact>(files, Dimension::Repo).map_err(data)?;
    let (groups, diagnostics) = topn_bottomn(&repos, top_n);
    report("topn_bottomn", &diagnostics);
    bundle.table("topn_bottomn", &groups)?;
    let labels: Vec<String> = top_n.iter().map(|n| format!("N={n}")).collect();
    let pick = |g: &str| groups.iter().filter(|r| r.group == g).map(|r| f(r.mean_ai_file_rate)).collect::<Vec<_>>();
    bundle.file(
        "topn_bottomn.svg",
        &svg::bar_chart("Mean AI file rate, top and bottom repositories", &labels, &[("top", pick("top")), ("bottom", pick("bottom"))], Some(1.0)),
    )
}

/// Vulnerability tables and charts.
pub fn vulnerabilities(bundle: &mut Bundle<'_>, records: &[VulnRecord], map: &CweMap, alpha: f64) -> Outcome {
    let (impact, diagnostics) = net_impact::<Exact>(records);
    report("net_impact", &diagnostics);
    bundle.table("net_impact", &impact)?;
    let langs: Vec<String> = impact.iter().map(|r| r.language.clone()).collect();
    bundle.file(
        "net_impact.svg",
        &svg::bar_chart(
            "AI share of vulnerability introductions and fixes",
            &langs,
            &[
                ("intro_ai_share", impact.iter().map(|r| f(r.intro_ai_share)).collect()),
                ("fix_ai_share", impact.iter().map(|r| f(r.fix_ai_share)).collect()),
            ],
            Some(1.0),
        ),
    )?;

    let (profile, diagnostics) = cwe_profile::<Exact>(records, map);
    report("cwe_profile", &diagnostics);
    bundle.table("cwe_profile", &profile.rows)?;
    bundle.file(
        "cwe_profile.svg",
        &svg::bar_chart(
            "AI introduction share by CWE",
            &profile.rows.iter().map(|r| r.cwe_id.clone()).collect::<Vec<_>>(),
            &[("ai_share", profile.rows.iter().map(|r| f(r.ai_share)).collect())],
            Some(1.0),
        ),
    )?;
    bundle.table("cwe_categories", &profile.categories)?;
    bundle.file(
        "cwe_categories.svg",
        &svg::bar_chart(
            "AI-introduced vulnerabilities by risk category",
            &profile.categories.iter().map(|r| r.category.as_str().to_string()).collect::<Vec<_>>(),
            &[("share", profile.categories.iter().map(|r| f(r.share)).collect())],
            Some(1.0),
        ),
    )?;

    let severity: Vec<_> = match severity_compare(records, alpha) {
        Ok(r) => vec![r],
        Err(e) => {
            log::warn!("severity: {e}; table left empty");
            Vec::new()
        }
    };
    bundle.table("severity", &severity)?;
    let stats = |pick: fn(&codeprov_core::analytics::RankTestResult) -> (f64, f64)| {
        severity.first().map(pick).map(|(a, b)| vec![a, b]).unwrap_or_default()
    };
    bundle.file(
        "severity.svg",
        &svg::bar_chart(
            "CVSS base score, AI- vs human-introduced",
            &["median".to_string(), "mean".to_string()],
            &[
                ("ai", stats(|r| (r.median_a, r.mean_a))),
                ("human", stats(|r| (r.median_b, r.mean_b))),
            ],
            Some(10.0),
        ),
    )?;

    let vectors = attack_vector_distribution::<Exact>(records);
    bundle.table("attack_vector", &vectors)?;
    let names: Vec<String> = AttackVector::ALL.iter().map(|v| v.as_str().to_string()).collect();
    let series: Vec<(&str, Vec<f64>)> = Attribution::ALL
        .iter()
        .filter(|s| vectors.iter().any(|r| r.source == **s))
        .map(|s| (s.as_str(), vectors.iter().filter(|r| r.source == *s).map(|r| f(r.share)).collect()))
        .collect();
    bundle.file("attack_vector.svg", &svg::bar_chart("Attack vector share by introducing source", &names, &series, Some(1.0)))?;

    let quarterly = vuln_quarterly_series::<Exact>(records);
    bundle.table("vuln_quarterly", &quarterly)?;
    bundle.file(
        "vuln_quarterly.svg",
        &svg::line_chart(
            "AI share of vulnerability introductions and fixes per quarter",
            &quarterly.iter().map(|r| r.quarter.to_string()).collect::<Vec<_>>(),
            &[
                ("intro_ai_share", quarterly.iter().map(|r| f(r.intro_ai_share)).collect()),
                ("fix_ai_share", quarterly.iter().map(|r| f(r.fix_ai_share)).collect()),
            ],
            Some(1.0),
        ),
    )
}
