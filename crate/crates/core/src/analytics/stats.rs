use super::AnalyticsError;
use crate::detectors::median;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Pooled sample size up to which the exact null distribution is enumerated.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTestResult {
    /// U of group a: `R_a - n_a (n_a + 1) / 2`.
    pub u_statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub method: PValueMethod,
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: f64,
    pub median_b: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub reject_null: bool,
}

/// Doubled midranks of the pooled values (so ties stay integral), in input
/// order, plus the tie group sizes.
fn doubled_midranks(pooled: &[f64]) -> (Vec<u64>, Vec<u64>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0; pooled.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // Ranks start..end (1-based start+1..=end); doubled midrank = start+1+end.
        for &k in &order[start..end] {
            ranks[k] = (start + 1 + end) as u64;
        }
        ties.push((end - start) as u64);
        start = end;
    }
    (ranks, ties)
}

struct Ranked {
    n_a: usize,
    n_b: usize,
    /// Doubled ranks, group a first.
    ranks: Vec<u64>,
    ties: Vec<u64>,
    /// Doubled U of group a.
    u2: u64,
}

fn rank(a: &[f64], b: &[f64]) -> Result<Ranked, AnalyticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalyticsError::EmptyGroup);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = doubled_midranks(&pooled);
    let n_a = a.len() as u64;
    let r2: u64 = ranks[..a.len()].iter().sum();
    Ok(Ranked { n_a: a.len(), n_b: b.len(), ranks, ties, u2: r2 - n_a * (n_a + 1) })
}

/// Two-sided exact p: the share of all C(n, n_a) assignments of the pooled
/// ranks to group a whose U is at least as far from its mean as observed.
fn exact_p(r: &Ranked) -> f64 {
    fn walk(ranks: &[u64], start: usize, left: usize, sum: u64, visit: &mut dyn FnMut(u64)) {
        if left == 0 {
            visit(sum);
            return;
        }
        for i in start..=ranks.len() - left {
            walk(ranks, i + 1, left - 1, sum + ranks[i], visit);
        }
    }
    let k = r.n_a as u64;
    let offset = k * (k + 1);
    // 2U - n_a n_b is twice the distance from the mean and stays integral.
    let mean2 = (r.n_a * r.n_b) as i64;
    let observed = (r.u2 as i64 - mean2).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    walk(&r.ranks, 0, r.n_a, 0, &mut |sum| {
        total += 1;
        if ((sum - offset) as i64 - mean2).abs() >= observed {
            extreme += 1;
        }
    });
    extreme as f64 / total as f64
}

/// Normal approximation with tie and continuity correction.
fn normal_p(r: &Ranked) -> f64 {
    let (n1, n2) = (r.n_a as f64, r.n_b as f64);
    let n = n1 + n2;
    let tie_term: f64 = r.ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term);
    if variance <= 0.0 {
        return 1.0;
    }
    let u = r.u2 as f64 / 2.0;
    let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn result(a: &[f64], b: &[f64], r: &Ranked, p: f64, method: PValueMethod, alpha: f64) -> RankTestResult {
    RankTestResult {
        u_statistic: r.u2 as f64 / 2.0,
        p_value: p,
        alpha,
        method,
        n_a: r.n_a,
        n_b: r.n_b,
        median_a: median(&mut a.to_vec()).expect("non-empty"),
        median_b: median(&mut b.to_vec()).expect("non-empty"),
        mean_a: mean(a),
        mean_b: mean(b),
        reject_null: p < alpha,
    }
}

/// Two-sided Mann-Whitney U test, exact when `n_a + n_b <= 12`.
pub fn mann_whitney_u(a: &[f64], b: &[f64], alpha: f64) -> Result<RankTestResult, AnalyticsError> {
    let r = rank(a, b)?;
    if r.ranks.len() <= EXACT_MAX_N {
        Ok(result(a, b, &r, exact_p(&r), PValueMethod::Exact, alpha))
    } else {
        Ok(result(a, b, &r, normal_p(&r), PValueMethod::Normal, alpha))
    }
}

/// The test with the normal approximation regardless of size.
pub fn mann_whitney_u_normal(a: &[f64], b: &[f64], alpha: f64) -> Result<RankTestResult, AnalyticsError> {
    let r = rank(a, b)?;
    Ok(result(a, b, &r, normal_p(&r), PValueMethod::Normal, alpha))
}

/// The test with exact enumeration regardless of size. Cost grows as
/// C(n_a + n_b, n_a).
pub fn mann_whitney_u_exact(a: &[f64], b: &[f64], alpha: f64) -> Result<RankTestResult, AnalyticsError> {
    let r = rank(a, b)?;
    Ok(result(a, b, &r, exact_p(&r), PValueMethod::Exact, alpha))
}
