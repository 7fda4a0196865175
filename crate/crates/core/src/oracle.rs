//! Brute-force reference solver.
//!
//! Walks every `K`-subset in lexicographic order with the textbook successor
//! rule and scores it with the shared objective. It uses nothing from
//! [`crate::generator`] or [`crate::ekm`] apart from the result types, so a fault in the
//! convolution machinery cannot hide behind it. Ties are broken by colex rank,
//! computed here from the closed formula rather than by enumeration order.

use std::time::Instant;

use crate::dataset::Dataset;
use crate::ekm::{Solution, SolverParams};
use crate::error::{Error, Result};
use crate::metrics::DistanceCache;

fn choose(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 1..=k.min(n - k) {
        acc = acc.checked_mul(n + 1 - i)? / i;
    }
    Some(acc)
}

fn colex_rank(indices: &[usize]) -> u128 {
    indices
        .iter()
        .enumerate()
        .map(|(i, &c)| choose(c as u128, i as u128 + 1).unwrap_or(u128::MAX))
        .fold(0u128, u128::saturating_add)
}

/// Advances `c` to the lexicographically next `k`-subset of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn solve_exhaustive_cached(
    cache: &DistanceCache<'_>,
    k: usize,
    limit: u64,
) -> Result<Solution> {
    let n = cache.n();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArguments(format!(
            "need 1 <= K <= N, got K={k}, N={n}"
        )));
    }
    let total = choose(n as u128, k as u128).unwrap_or(u128::MAX);
    if total > limit as u128 {
        return Err(Error::InstanceTooLarge {
            configurations: total,
            limit: limit as u128,
        });
    }

    let start = Instant::now();
    let mut current: Vec<usize> = (0..k).collect();
    let mut best = current.clone();
    let mut best_value = cache.objective_unchecked(&current);
    let mut best_rank = colex_rank(&current);
    let mut count: u64 = 1;
    while next_combination(&mut current, n) {
        count += 1;
        let value = cache.objective_unchecked(&current);
        if value > best_value {
            continue;
        }
        let rank = colex_rank(&current);
        if value < best_value || rank < best_rank {
            best_value = value;
            best_rank = rank;
            best.copy_from_slice(&current);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Solution::from_medoids(cache, "oracle", best, count, elapsed)
}

pub fn solve_exhaustive(ds: &Dataset, params: &SolverParams) -> Result<Solution> {
    if ds.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    let ds = params.prepare(ds)?;
    let cache = DistanceCache::new(&ds, params.metric.clone(), params.cache_budget_bytes);
    solve_exhaustive_cached(&cache, params.k, params.enumeration_limit)
}
