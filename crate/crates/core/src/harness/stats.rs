//! Order statistics and the one-sided Mann-Whitney U test.

use serde::{Deserialize, Serialize};

/// Linearly interpolated quantile (the "type 7" rule). `None` on empty input.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

pub fn iqr(values: &[f64]) -> Option<f64> {
    Some(quantile(values, 0.75)? - quantile(values, 0.25)?)
}

/// Largest sample pair handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Pairs with `x > y`, ties counting one half.
    pub u: f64,
    /// P(U <= u) under the null: small when `x` tends to be lower than `y`.
    pub p_less: f64,
    pub exact: bool,
}

/// Midranks (1-based) of the pooled sample.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// Null distribution of U for sample sizes `(m, n)` without ties, as
/// probabilities indexed by `u` in `0..=m*n`.
///
/// Uses `c(i, j, u) = c(i-1, j, u-j) + c(i, j-1, u)` with counts divided by
/// `C(i+j, i)` on the fly to stay in range.
fn exact_null(m: usize, n: usize) -> Vec<f64> {
    // prev[j] holds the distribution for (i-1, j); cur[j] for (i, j).
    let mut prev: Vec<Vec<f64>> = (0..=n).map(|_| vec![1.0]).collect();
    for i in 1..=m {
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        cur.push(vec![1.0]);
        for j in 1..=n {
            // P(last element is from x) = i / (i + j)
            let px = i as f64 / (i + j) as f64;
            let mut dist = vec![0.0; i * j + 1];
            for (u, &p) in prev[j].iter().enumerate() {
                dist[u + j] += px * p;
            }
            for (u, &p) in cur[j - 1].iter().enumerate() {
                dist[u] += (1.0 - px) * p;
            }
            cur.push(dist);
        }
        prev = cur;
    }
    prev.swap_remove(n)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Complementary error function (Numerical Recipes `erfcc`, |rel err| < 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// One-sided test of "`x` is stochastically smaller than `y`".
///
/// Exact when there are no ties and both samples have at most
/// [`EXACT_LIMIT`] values; otherwise the tie-corrected normal approximation
/// with continuity correction. Returns `None` if either sample is empty.
pub fn mann_whitney_less(x: &[f64], y: &[f64]) -> Option<MannWhitney> {
    let (m, n) = (x.len(), y.len());
    if m == 0 || n == 0 {
        return None;
    }
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..m].iter().sum();
    let u = rank_sum - (m * (m + 1)) as f64 / 2.0;
    let has_ties = ties.iter().any(|&t| t > 1);

    if !has_ties && m <= EXACT_LIMIT && n <= EXACT_LIMIT {
        let dist = exact_null(m, n);
        let p: f64 = dist[..=(u.round() as usize)].iter().sum();
        return Some(MannWhitney { u, p_less: p.min(1.0), exact: true });
    }

    let (mf, nf) = (m as f64, n as f64);
    let total = mf + nf;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (total * (total - 1.0));
    let var = mf * nf / 12.0 * ((total + 1.0) - tie_term);
    let mean = mf * nf / 2.0;
    let p_less = if var <= 0.0 {
        0.5
    } else {
        normal_cdf((u - mean + 0.5) / var.sqrt()).min(1.0)
    };
    Some(MannWhitney { u, p_less, exact: false })
}
