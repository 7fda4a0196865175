//! The exact K-medoids solver.
//!
//! The generator recursion `S^n = conv(∘, [[[]], [[x_n]]], S^{n-1}, K)` is run
//! with evaluation and selection fused in: a union that reaches size `K` is
//! scored immediately and offered to a single [`Incumbent`], and only partial
//! configurations of size `< K` are kept. After point `n` is processed the
//! store holds exactly `C(n, j)` configurations at level `j < K`, and the run
//! evaluates all `C(N, K)` medoid sets in `N` steps.
//!
//! Two forms are provided. [`cross_join_eval`] and [`merge_eval`] are the
//! literal list-based operators; [`EkmSolver`] is the same recursion over flat
//! index buffers specialised to the singleton left operand, which is what
//! [`solve_ekm`] runs.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{standardize, Dataset};
use crate::error::{Error, Result};
use crate::generator::{combination_count, conv, Config, Levels};
use crate::metrics::{assign_unchecked, DistanceCache, Metric, DEFAULT_CACHE_BUDGET};

/// Default ceiling for the retained partial configurations: 4 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

/// Default ceiling on `C(N, K)` for the exhaustive oracle.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone)]
pub struct SolverParams {
    pub k: usize,
    pub metric: Metric,
    pub cache_budget_bytes: u64,
    pub standardize: bool,
    /// Evaluate each step's batch of complete configurations on the rayon pool.
    pub parallel: bool,
    pub memory_budget_bytes: u64,
    pub enumeration_limit: u64,
}

impl SolverParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            metric: Metric::default(),
            cache_budget_bytes: DEFAULT_CACHE_BUDGET,
            standardize: false,
            parallel: false,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn with_standardize(mut self, standardize: bool) -> Self {
        self.standardize = standardize;
        self
    }

    /// Applies the standardize flag.
    pub fn prepare(&self, ds: &Dataset) -> Result<Dataset> {
        if self.standardize {
            standardize(ds)
        } else {
            Ok(ds.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub algorithm: String,
    pub medoid_indices: Vec<usize>,
    pub objective: f64,
    pub assignment: Vec<usize>,
    pub wall_time_seconds: f64,
    pub evaluated_configurations: u64,
}

impl Solution {
    /// Recomputes objective and assignment from the medoid set.
    pub fn from_medoids(
        cache: &DistanceCache<'_>,
        algorithm: &str,
        mut medoids: Vec<usize>,
        evaluated_configurations: u64,
        wall_time_seconds: f64,
    ) -> Result<Self> {
        medoids.sort_unstable();
        cache.check_medoids(&medoids)?;
        Ok(Self {
            algorithm: algorithm.to_string(),
            objective: cache.objective_unchecked(&medoids),
            assignment: assign_unchecked(cache, &medoids),
            medoid_indices: medoids,
            wall_time_seconds,
            evaluated_configurations,
        })
    }
}

/// A configuration tagged with its objective; `+inf` marks a partial one.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedConfig {
    pub config: Config,
    pub objective: f64,
}

impl EvaluatedConfig {
    pub fn partial(config: Config) -> Self {
        Self {
            config,
            objective: f64::INFINITY,
        }
    }
}

/// The selector state: best complete configuration seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    best_config: Option<Config>,
    best_objective: f64,
    evaluated_count: u64,
}

impl Default for Incumbent {
    fn default() -> Self {
        Self {
            best_config: None,
            best_objective: f64::INFINITY,
            evaluated_count: 0,
        }
    }
}

impl Incumbent {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the incumbent iff `value` is strictly smaller; exact ties keep
    /// the earlier candidate.
    pub fn select_into(&mut self, candidate: &Config, value: f64) {
        self.evaluated_count += 1;
        if value < self.best_objective || self.best_config.is_none() {
            self.best_objective = value;
            self.best_config = Some(candidate.clone());
        }
    }

    /// Offers the winner of a batch of `batch_len` evaluated candidates.
    fn select_batch(&mut self, winner: Option<(f64, Vec<usize>)>, batch_len: u64) {
        self.evaluated_count += batch_len;
        if let Some((value, indices)) = winner {
            if value < self.best_objective || self.best_config.is_none() {
                self.best_objective = value;
                self.best_config = Some(Config::from_sorted(indices));
            }
        }
    }

    pub fn best_config(&self) -> Option<&Config> {
        self.best_config.as_ref()
    }

    pub fn best_objective(&self) -> f64 {
        self.best_objective
    }

    pub fn evaluated_count(&self) -> u64 {
        self.evaluated_count
    }
}

/// `l1 ∘_E l2`: unions of size `k` are scored and streamed into `incumbent`,
/// smaller unions are returned unscored in `l1`-major order.
pub fn cross_join_eval(
    l1: &[EvaluatedConfig],
    l2: &[EvaluatedConfig],
    k: usize,
    cache: &DistanceCache<'_>,
    incumbent: &mut Incumbent,
) -> Result<Vec<EvaluatedConfig>> {
    let mut retained = Vec::new();
    for s in l1 {
        for t in l2 {
            let union = s.config.union(&t.config)?;
            if union.len() == k {
                let value = cache.objective_unchecked(union.indices());
                incumbent.select_into(&union, value);
            } else {
                retained.push(EvaluatedConfig::partial(union));
            }
        }
    }
    Ok(retained)
}

/// Operand of [`merge_eval`].
#[derive(Debug, Clone, Copy)]
pub enum MergeEvalOperand<'a> {
    Empty,
    Point(usize),
    Levels(&'a [Vec<EvaluatedConfig>]),
}

/// Evaluating merge. The base cases build `+inf`-tagged stores; the
/// two-store case is `conv(∘_E, l, m, k)` and returns levels `0..k` only,
/// since every size-`k` union has been handed to `incumbent`.
pub fn merge_eval(
    a: MergeEvalOperand<'_>,
    b: Option<MergeEvalOperand<'_>>,
    k: usize,
    cache: &DistanceCache<'_>,
    incumbent: &mut Incumbent,
) -> Result<Levels<EvaluatedConfig>> {
    match (a, b) {
        (MergeEvalOperand::Empty, None) => {
            Ok(vec![vec![EvaluatedConfig::partial(Config::empty())]])
        }
        (MergeEvalOperand::Point(x), None) => Ok(vec![
            vec![EvaluatedConfig::partial(Config::empty())],
            vec![EvaluatedConfig::partial(Config::singleton(x))],
        ]),
        (MergeEvalOperand::Levels(l), Some(MergeEvalOperand::Levels(m))) => {
            let mut out = conv(|x, y| cross_join_eval(x, y, k, cache, incumbent), l, m, k)?;
            if out.len() > k {
                debug_assert!(out[k].is_empty());
                out.truncate(k);
            }
            Ok(out)
        }
        (a, b) => Err(Error::InvalidArguments(format!(
            "merge_eval is undefined for operands {a:?} and {b:?}"
        ))),
    }
}

/// The fused recursion run literally through [`merge_eval`]. Quadratic in
/// allocations; meant for cross-checking [`EkmSolver`] on small inputs.
pub fn evalgen_reference(
    cache: &DistanceCache<'_>,
    k: usize,
) -> Result<(Incumbent, Levels<EvaluatedConfig>)> {
    let mut incumbent = Incumbent::new();
    let mut store = merge_eval(MergeEvalOperand::Empty, None, k, cache, &mut incumbent)?;
    for point in 0..cache.n() {
        let single = merge_eval(
            MergeEvalOperand::Point(point),
            None,
            k,
            cache,
            &mut incumbent,
        )?;
        store = merge_eval(
            MergeEvalOperand::Levels(&single),
            Some(MergeEvalOperand::Levels(&store)),
            k,
            cache,
            &mut incumbent,
        )?;
    }
    Ok((incumbent, store))
}

/// Bytes held by the retained partial store after all `n` points:
/// `sum_{j<k} 4 j C(n, j)`.
pub fn partial_store_bytes(n: usize, k: usize) -> u128 {
    (1..k)
        .map(|j| {
            crate::generator::binomial(n as u64, j as u64)
                .unwrap_or(u128::MAX)
                .saturating_mul(4 * j as u128)
        })
        .fold(0u128, u128::saturating_add)
}

/// Level store over flat `u32` index buffers; level `j` has stride `j`.
#[derive(Debug, Clone)]
struct PartialStore {
    counts: Vec<usize>,
    levels: Vec<Vec<u32>>,
}

impl PartialStore {
    fn new(k: usize, n: usize) -> Self {
        let mut counts = vec![0; k];
        counts[0] = 1;
        let levels = (0..k)
            .map(|j| {
                let cap = crate::generator::binomial(n as u64, j as u64).unwrap_or(0) as usize;
                Vec::with_capacity(cap * j)
            })
            .collect();
        Self { counts, levels }
    }
}

const BATCH_CHUNK: usize = 4096;

/// Step-wise driver of the fused recursion.
pub struct EkmSolver<'c, 'a> {
    cache: &'c DistanceCache<'a>,
    k: usize,
    parallel: bool,
    store: PartialStore,
    incumbent: Incumbent,
    next_point: usize,
}

impl<'c, 'a> EkmSolver<'c, 'a> {
    pub fn new(cache: &'c DistanceCache<'a>, k: usize, memory_budget_bytes: u64) -> Result<Self> {
        let n = cache.n();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if k == 0 || k > n {
            return Err(Error::InvalidArguments(format!(
                "need 1 <= K <= N, got K={k}, N={n}"
            )));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidArguments(format!(
                "N={n} exceeds the u32 index range"
            )));
        }
        combination_count(n as u64, k as u64)?;
        let estimated_bytes = partial_store_bytes(n, k);
        if estimated_bytes > memory_budget_bytes as u128 {
            return Err(Error::MemoryEstimate {
                estimated_bytes,
                budget_bytes: memory_budget_bytes as u128,
            });
        }
        Ok(Self {
            cache,
            k,
            parallel: false,
            store: PartialStore::new(k, n),
            incumbent: Incumbent::new(),
            next_point: 0,
        })
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// Number of points consumed so far.
    pub fn points_processed(&self) -> usize {
        self.next_point
    }

    pub fn incumbent(&self) -> &Incumbent {
        &self.incumbent
    }

    pub fn retained_level_sizes(&self) -> Vec<usize> {
        self.store.counts.clone()
    }

    /// The retained store as configurations, in emission order.
    pub fn retained_levels(&self) -> Levels {
        (0..self.k)
            .map(|j| {
                if j == 0 {
                    return vec![Config::empty()];
                }
                self.store.levels[j]
                    .chunks_exact(j)
                    .map(|c| Config::from_sorted(c.iter().map(|&i| i as usize).collect()))
                    .collect()
            })
            .collect()
    }

    /// Consumes the next point. Returns `false` once all points are processed.
    pub fn step(&mut self) -> bool {
        let n = self.cache.n();
        if self.next_point >= n {
            return false;
        }
        let point = self.next_point as u32;
        let k = self.k;

        // Complete configurations: every retained (K-1)-set extended by `point`.
        let batch_len = self.store.counts[k - 1];
        let winner = self.evaluate_batch(point);
        self.incumbent.select_batch(winner, batch_len as u64);

        // Level t gains level t-1 extended by `point`; descending t reads each
        // source level before it grows.
        for t in (1..k).rev() {
            let src_count = self.store.counts[t - 1];
            if t == 1 {
                self.store.levels[1].push(point);
            } else {
                let (lower, upper) = self.store.levels.split_at_mut(t);
                let src = &lower[t - 1];
                let dst = &mut upper[0];
                for c in src.chunks_exact(t - 1) {
                    dst.extend_from_slice(c);
                    dst.push(point);
                }
            }
            self.store.counts[t] += src_count;
        }
        self.next_point += 1;
        true
    }

    /// Minimum over the batch by (objective, emission position).
    fn evaluate_batch(&self, point: u32) -> Option<(f64, Vec<usize>)> {
        let k = self.k;
        let stride = k - 1;
        let cache = self.cache;
        if stride == 0 {
            let medoids = vec![point as usize];
            return Some((cache.objective_unchecked(&medoids), medoids));
        }
        let source = &self.store.levels[stride];
        if source.is_empty() {
            return None;
        }
        let scan = |(chunk_no, chunk): (usize, &[u32])| -> (f64, usize) {
            let mut buf = vec![0usize; k];
            buf[stride] = point as usize;
            let mut best = (f64::INFINITY, usize::MAX);
            for (i, c) in chunk.chunks_exact(stride).enumerate() {
                for (slot, &idx) in buf.iter_mut().zip(c) {
                    *slot = idx as usize;
                }
                let value = cache.objective_unchecked(&buf);
                if value < best.0 || best.1 == usize::MAX {
                    best = (value, chunk_no * BATCH_CHUNK + i);
                }
            }
            best
        };
        let pick = |a: (f64, usize), b: (f64, usize)| -> (f64, usize) {
            if b.1 == usize::MAX {
                return a;
            }
            if a.1 == usize::MAX || b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        };
        let chunks = source.chunks(BATCH_CHUNK * stride);
        let (value, pos) = if self.parallel {
            chunks
                .collect::<Vec<_>>()
                .into_par_iter()
                .enumerate()
                .map(scan)
                .reduce(|| (f64::INFINITY, usize::MAX), pick)
        } else {
            chunks
                .enumerate()
                .map(scan)
                .fold((f64::INFINITY, usize::MAX), pick)
        };
        let mut medoids: Vec<usize> = source[pos * stride..(pos + 1) * stride]
            .iter()
            .map(|&i| i as usize)
            .collect();
        medoids.push(point as usize);
        Some((value, medoids))
    }

    /// Runs the remaining steps.
    pub fn run(mut self) -> Incumbent {
        while self.step() {}
        self.incumbent
    }
}

/// Exact solve on a prepared cache. The returned medoid set is the
/// optimum of smallest colex rank.
pub fn solve_ekm_cached(
    cache: &DistanceCache<'_>,
    k: usize,
    parallel: bool,
    memory_budget_bytes: u64,
) -> Result<Solution> {
    let start = Instant::now();
    let incumbent = EkmSolver::new(cache, k, memory_budget_bytes)?
        .parallel(parallel)
        .run();
    let elapsed = start.elapsed().as_secs_f64();
    let best = incumbent
        .best_config()
        .cloned()
        .expect("C(N, K) >= 1 configurations were evaluated");
    let solution = Solution::from_medoids(
        cache,
        "ekm",
        best.into_indices(),
        incumbent.evaluated_count(),
        elapsed,
    )?;
    debug_assert_eq!(
        solution.objective.to_bits(),
        incumbent.best_objective().to_bits()
    );
    Ok(solution)
}

pub fn solve_ekm(ds: &Dataset, params: &SolverParams) -> Result<Solution> {
    if ds.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    let ds = params.prepare(ds)?;
    let cache = DistanceCache::new(&ds, params.metric.clone(), params.cache_budget_bytes);
    solve_ekm_cached(
        &cache,
        params.k,
        params.parallel,
        params.memory_budget_bytes,
    )
}
