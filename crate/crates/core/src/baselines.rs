//! Approximate K-medoids heuristics: PAM, FasterPAM and CLARANS.
//!
//! All three run on a shared [`DistanceCache`] and only accept a swap after
//! recomputing the objective and seeing it strictly decrease, so rounding in
//! the incremental loss bookkeeping cannot make them cycle.

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ekm::Solution;
use crate::error::{Error, Result};
use crate::metrics::DistanceCache;

#[derive(Debug, Clone, Copy)]
pub struct BaselineParams {
    pub seed: u64,
    pub max_iter: usize,
    pub clarans_numlocal: usize,
    /// `None` selects `max(250, ceil(0.0125 K (N - K)))`.
    pub clarans_maxneighbor: Option<usize>,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iter: 100,
            clarans_numlocal: 2,
            clarans_maxneighbor: None,
        }
    }
}

impl BaselineParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.clarans_numlocal == 0 || self.clarans_maxneighbor == Some(0) {
            return Err(Error::InvalidArguments(
                "baseline counts must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn maxneighbor(&self, n: usize, k: usize) -> usize {
        self.clarans_maxneighbor
            .unwrap_or_else(|| 250.max((0.0125 * k as f64 * (n - k) as f64).ceil() as usize))
    }
}

fn check_k(cache: &DistanceCache<'_>, k: usize) -> Result<()> {
    let n = cache.n();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArguments(format!(
            "need 1 <= K <= N, got K={k}, N={n}"
        )));
    }
    Ok(())
}

/// Nearest and second-nearest medoid bookkeeping.
struct Nearest {
    nearest: Vec<usize>,
    d_near: Vec<f64>,
    d_second: Vec<f64>,
}

impl Nearest {
    fn compute(cache: &DistanceCache<'_>, medoids: &[usize]) -> Self {
        let n = cache.n();
        let mut out = Self {
            nearest: vec![0; n],
            d_near: vec![f64::INFINITY; n],
            d_second: vec![f64::INFINITY; n],
        };
        for p in 0..n {
            for (pos, &m) in medoids.iter().enumerate() {
                let d = cache.get(p, m);
                if d < out.d_near[p] {
                    out.d_second[p] = out.d_near[p];
                    out.d_near[p] = d;
                    out.nearest[p] = pos;
                } else if d < out.d_second[p] {
                    out.d_second[p] = d;
                }
            }
        }
        out
    }

    /// Loss from deleting each medoid with no replacement.
    fn removal_loss(&self, k: usize) -> Vec<f64> {
        let mut loss = vec![0.0; k];
        for p in 0..self.nearest.len() {
            loss[self.nearest[p]] += self.d_second[p] - self.d_near[p];
        }
        loss
    }

    /// Objective change for swapping each medoid position with `candidate`,
    /// all positions at once. Requires `k >= 2`.
    fn swap_deltas(
        &self,
        cache: &DistanceCache<'_>,
        candidate: usize,
        removal: &[f64],
        out: &mut [f64],
    ) {
        out.copy_from_slice(removal);
        let mut shared = 0.0;
        for p in 0..self.nearest.len() {
            let d = cache.get(p, candidate);
            let i = self.nearest[p];
            if d < self.d_near[p] {
                shared += d - self.d_near[p];
                out[i] += self.d_near[p] - self.d_second[p];
            } else if d < self.d_second[p] {
                out[i] += d - self.d_second[p];
            }
        }
        out.iter_mut().for_each(|v| *v += shared);
    }

    /// Objective change for swapping medoid position `pos` with `candidate`.
    fn swap_delta(&self, cache: &DistanceCache<'_>, pos: usize, candidate: usize) -> f64 {
        let mut delta = 0.0;
        for p in 0..self.nearest.len() {
            let d = cache.get(p, candidate);
            let fallback = if self.nearest[p] == pos {
                self.d_second[p]
            } else {
                self.d_near[p]
            };
            delta += d.min(fallback) - self.d_near[p];
        }
        delta
    }
}

/// Full objective of `medoids`, validated swap target.
fn total(cache: &DistanceCache<'_>, medoids: &[usize]) -> f64 {
    let mut sorted = medoids.to_vec();
    sorted.sort_unstable();
    cache.objective_unchecked(&sorted)
}

fn is_medoid(medoids: &[usize], c: usize) -> bool {
    medoids.contains(&c)
}

/// Greedy BUILD initialization. Ties go to the smaller point index.
pub fn pam_build(cache: &DistanceCache<'_>, k: usize) -> Vec<usize> {
    let n = cache.n();
    let mut medoids = Vec::with_capacity(k);
    let mut first = (f64::INFINITY, 0);
    for c in 0..n {
        let cost: f64 = (0..n).map(|p| cache.get(p, c)).sum();
        if cost < first.0 {
            first = (cost, c);
        }
    }
    medoids.push(first.1);
    let mut d_near: Vec<f64> = (0..n).map(|p| cache.get(p, first.1)).collect();
    while medoids.len() < k {
        let mut best: Option<(f64, usize)> = None;
        for c in (0..n).filter(|&c| !is_medoid(&medoids, c)) {
            let gain: f64 = (0..n).map(|p| (d_near[p] - cache.get(p, c)).max(0.0)).sum();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, c));
            }
        }
        let (_, c) = best.expect("k <= n leaves a non-medoid");
        medoids.push(c);
        for (p, dn) in d_near.iter_mut().enumerate() {
            *dn = dn.min(cache.get(p, c));
        }
    }
    medoids
}

/// PAM: BUILD, then best-improvement SWAP until no swap lowers the objective.
/// Deterministic; `params.seed` is unused.
pub fn pam(cache: &DistanceCache<'_>, k: usize, params: &BaselineParams) -> Result<Solution> {
    check_k(cache, k)?;
    params.validate()?;
    let start = Instant::now();
    let n = cache.n();
    let mut medoids = pam_build(cache, k);
    let mut cost = total(cache, &medoids);
    let mut evaluated: u64 = 1;
    let mut deltas = vec![0.0; k];
    for _ in 0..params.max_iter {
        let near = Nearest::compute(cache, &medoids);
        let removal = near.removal_loss(k);
        let mut best: Option<(f64, usize, usize)> = None;
        for c in (0..n).filter(|&c| !is_medoid(&medoids, c)) {
            if k == 1 {
                deltas[0] = near.swap_delta(cache, 0, c);
            } else {
                near.swap_deltas(cache, c, &removal, &mut deltas);
            }
            evaluated += k as u64;
            for (pos, &delta) in deltas.iter().enumerate() {
                if best.is_none_or(|(b, _, _)| delta < b) {
                    best = Some((delta, pos, c));
                }
            }
        }
        let Some((delta, pos, c)) = best else { break };
        if delta >= 0.0 {
            break;
        }
        let mut next = medoids.clone();
        next[pos] = c;
        let next_cost = total(cache, &next);
        if next_cost >= cost {
            break;
        }
        medoids = next;
        cost = next_cost;
    }
    Solution::from_medoids(
        cache,
        "pam",
        medoids,
        evaluated,
        start.elapsed().as_secs_f64(),
    )
}

/// FasterPAM: seeded uniform initialization, then eager swapping over the
/// candidates in index order until a full cycle passes without a swap.
pub fn fasterpam(cache: &DistanceCache<'_>, k: usize, params: &BaselineParams) -> Result<Solution> {
    check_k(cache, k)?;
    params.validate()?;
    let start = Instant::now();
    let n = cache.n();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut medoids = sample(&mut rng, n, k).into_vec();
    let mut cost = total(cache, &medoids);
    let mut evaluated: u64 = 1;
    let mut near = Nearest::compute(cache, &medoids);
    let mut removal = near.removal_loss(k);
    let mut deltas = vec![0.0; k];
    let mut last_swap: Option<usize> = None;
    'outer: for _ in 0..params.max_iter {
        let mut swapped = false;
        for c in 0..n {
            if last_swap == Some(c) {
                break 'outer;
            }
            if is_medoid(&medoids, c) {
                continue;
            }
            if k == 1 {
                deltas[0] = near.swap_delta(cache, 0, c);
            } else {
                near.swap_deltas(cache, c, &removal, &mut deltas);
            }
            evaluated += k as u64;
            let (pos, delta) =
                deltas
                    .iter()
                    .copied()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |b, (i, v)| if v < b.1 { (i, v) } else { b },
                    );
            if delta < 0.0 {
                let mut next = medoids.clone();
                next[pos] = c;
                let next_cost = total(cache, &next);
                if next_cost < cost {
                    medoids = next;
                    cost = next_cost;
                    near = Nearest::compute(cache, &medoids);
                    removal = near.removal_loss(k);
                    last_swap = Some(c);
                    swapped = true;
                }
            }
        }
        if !swapped {
            break;
        }
    }
    Solution::from_medoids(
        cache,
        "fasterpam",
        medoids,
        evaluated,
        start.elapsed().as_secs_f64(),
    )
}

/// CLARANS: `numlocal` seeded restarts, each a randomized descent that stops
/// after `maxneighbor` consecutive non-improving neighbor samples.
pub fn clarans(cache: &DistanceCache<'_>, k: usize, params: &BaselineParams) -> Result<Solution> {
    check_k(cache, k)?;
    params.validate()?;
    let start = Instant::now();
    let n = cache.n();
    let maxneighbor = params.maxneighbor(n, k);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut evaluated: u64 = 0;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..params.clarans_numlocal {
        let mut current = sample(&mut rng, n, k).into_vec();
        let mut cost = total(cache, &current);
        evaluated += 1;
        if k < n {
            let mut near = Nearest::compute(cache, &current);
            let mut tries = 1;
            while tries <= maxneighbor {
                let pos = rng.random_range(0..k);
                let c = loop {
                    let c = rng.random_range(0..n);
                    if !is_medoid(&current, c) {
                        break c;
                    }
                };
                evaluated += 1;
                let mut improved = false;
                if near.swap_delta(cache, pos, c) < 0.0 {
                    let mut next = current.clone();
                    next[pos] = c;
                    let next_cost = total(cache, &next);
                    if next_cost < cost {
                        current = next;
                        cost = next_cost;
                        near = Nearest::compute(cache, &current);
                        improved = true;
                    }
                }
                tries = if improved { 1 } else { tries + 1 };
            }
        }
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, current));
        }
    }
    let (_, medoids) = best.expect("numlocal >= 1");
    Solution::from_medoids(
        cache,
        "clarans",
        medoids,
        evaluated,
        start.elapsed().as_secs_f64(),
    )
}
