//! Two-sided Mann-Whitney U test.

use std::cmp::Ordering;

use serde::Serialize;
use statrs::function::erf::erfc;
use thiserror::Error;

/// Largest combined sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample {0} is empty")]
    EmptySample(char),
    #[error("sample {0} contains a non-finite value")]
    NonFinite(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: Method,
}

/// Average (mid) ranks, 1-based, of the concatenation `a ++ b`, plus the tie
/// group sizes.
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let values: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));

    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end share ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Number of arrangements of `m` first-sample and `n` second-sample items
/// giving each U value `0..=m*n`, with no ties.
///
/// Recurrence on the largest item: if it belongs to the first sample it beats
/// all `n` others, otherwise it contributes nothing.
pub fn exact_u_counts(m: usize, n: usize) -> Vec<u64> {
    // table[i][j] = counts for (i, j)
    let mut table: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            table[i][j] = if i == 0 || j == 0 {
                vec![1]
            } else {
                let mut counts = vec![0u64; i * j + 1];
                for (u, c) in table[i - 1][j].iter().enumerate() {
                    counts[u + j] += c;
                }
                for (u, c) in table[i][j - 1].iter().enumerate() {
                    counts[u] += c;
                }
                counts
            };
        }
    }
    std::mem::take(&mut table[m][n])
}

fn standard_normal_two_sided(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2)
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    for (label, sample) in [('A', a), ('B', b)] {
        if sample.is_empty() {
            return Err(StatsError::EmptySample(label));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite(label));
        }
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let (ranks, ties) = midranks(a, b);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    let tie_free = ties.iter().all(|&t| t == 1);
    if tie_free && n <= EXACT_MAX_N {
        let counts = exact_u_counts(na, nb);
        let total: u64 = counts.iter().sum();
        let k = u.round() as usize;
        let lower: u64 = counts[..=k].iter().sum();
        let upper: u64 = counts[k..].iter().sum();
        let p = (2.0 * lower.min(upper) as f64 / total as f64).min(1.0);
        return Ok(MannWhitney { u, p_value: p, method: Method::Exact });
    }

    let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
    let mean = naf * nbf / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (nf * (nf - 1.0));
    let variance = naf * nbf / 12.0 * ((nf + 1.0) - tie_term);
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
        standard_normal_two_sided(z).min(1.0)
    };
    Ok(MannWhitney { u, p_value: p, method: Method::NormalApprox })
}
