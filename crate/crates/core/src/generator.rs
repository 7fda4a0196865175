//! Unfused combinatorial machinery: cross-join, level-indexed convolution,
//! the pattern-matched `merge`, and the recursive generator `gen_combs`.
//!
//! Configurations are strictly increasing lists of point indices. The
//! generator semiring is realized as list concatenation (sum), [`cross_join`]
//! (product), the empty list (zero) and `[[]]` (unit). This module favours
//! clarity over speed; the fused solver in [`crate::ekm`] is checked against it.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A strictly increasing list of point indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Config(Vec<usize>);

impl Config {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(index: usize) -> Self {
        Self(vec![index])
    }

    /// Validating constructor.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArguments(format!(
                "configuration {indices:?} is not strictly increasing"
            )));
        }
        Ok(Self(indices))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.0
    }

    /// Sorted union of two disjoint configurations.
    pub fn union(&self, other: &Config) -> Result<Config> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    return Err(Error::DisjointnessViolation {
                        left: a.clone(),
                        right: b.clone(),
                    })
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Config(out))
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<Config> for Vec<usize> {
    fn from(c: Config) -> Self {
        c.0
    }
}

/// Levels `[S_0, S_1, ...]`, where `S_j` holds configurations of size `j`.
pub type Levels<T = Config> = Vec<Vec<T>>;

/// `l1 ∘ l2`: every pairwise union, `l1`-major.
pub fn cross_join(l1: &[Config], l2: &[Config]) -> Result<Vec<Config>> {
    let mut out = Vec::with_capacity(l1.len() * l2.len());
    for s in l1 {
        for t in l2 {
            out.push(s.union(t)?);
        }
    }
    Ok(out)
}

/// Level-indexed convolution: `c_t` concatenates `f(a_i, b_j)` over
/// `i + j = t` in ascending `i`. Levels past the end of an operand count as
/// empty; the output stops at level `k` or at the last level either operand
/// can reach, whichever is lower.
pub fn conv<T, F>(mut f: F, la: &[Vec<T>], lb: &[Vec<T>], k: usize) -> Result<Levels<T>>
where
    F: FnMut(&[T], &[T]) -> Result<Vec<T>>,
{
    if la.is_empty() || lb.is_empty() {
        return Ok(Vec::new());
    }
    let top = k.min(la.len() - 1 + lb.len() - 1);
    let mut out = Vec::with_capacity(top + 1);
    for t in 0..=top {
        let mut level = Vec::new();
        for i in 0..=t {
            let j = t - i;
            if let (Some(a), Some(b)) = (la.get(i), lb.get(j)) {
                level.extend(f(a, b)?);
            }
        }
        out.push(level);
    }
    Ok(out)
}

/// Operand of [`merge`]: the empty list, a single point, or a level store.
#[derive(Debug, Clone, Copy)]
pub enum MergeOperand<'a> {
    Empty,
    Point(usize),
    Levels(&'a [Vec<Config>]),
}

/// `merge([], k) = [[[]]]`, `merge([x], k) = [[[]], [[x]]]`,
/// `merge(l, m, k) = conv(∘, l, m, k)`.
pub fn merge(a: MergeOperand<'_>, b: Option<MergeOperand<'_>>, k: usize) -> Result<Levels> {
    match (a, b) {
        (MergeOperand::Empty, None) => Ok(vec![vec![Config::empty()]]),
        (MergeOperand::Point(x), None) => {
            Ok(vec![vec![Config::empty()], vec![Config::singleton(x)]])
        }
        (MergeOperand::Levels(l), Some(MergeOperand::Levels(m))) => conv(cross_join, l, m, k),
        (a, b) => Err(Error::InvalidArguments(format!(
            "merge is undefined for operands {a:?} and {b:?}"
        ))),
    }
}

/// All combinations of size `0..=min(k, n)` over points `0..n`, grouped by
/// size; each level is in colex order.
pub fn gen_combs(n: usize, k: usize) -> Levels {
    let mut store = merge(MergeOperand::Empty, None, k).expect("base case");
    for point in 0..n {
        let single = merge(MergeOperand::Point(point), None, k).expect("singleton case");
        store = merge(
            MergeOperand::Levels(&single),
            Some(MergeOperand::Levels(&store)),
            k,
        )
        .expect("generated configurations are disjoint");
    }
    store
}

/// `C(n, k)` in 128 bits, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Largest value allowed for a rank or configuration count.
pub const RANK_LIMIT: u128 = 1 << 63;

/// `C(n, k)` as a count that must stay below 2^63.
pub fn combination_count(n: u64, k: u64) -> Result<u64> {
    match binomial(n, k) {
        Some(c) if c < RANK_LIMIT => Ok(c as u64),
        _ => Err(Error::RankOverflow { n, k }),
    }
}

/// Colex rank: `sum_i C(c_i, i)` with 1-based positions `i`.
pub fn rank_colex(c: &Config) -> Result<u64> {
    let mut rank: u128 = 0;
    for (pos, &ci) in c.indices().iter().enumerate() {
        let term = binomial(ci as u64, pos as u64 + 1).ok_or(Error::RankOverflow {
            n: ci as u64,
            k: pos as u64 + 1,
        })?;
        rank += term;
        if rank >= RANK_LIMIT {
            return Err(Error::RankOverflow {
                n: ci as u64 + 1,
                k: c.len() as u64,
            });
        }
    }
    Ok(rank as u64)
}

/// Inverse of [`rank_colex`] for configurations of size `k`.
pub fn unrank_colex(rank: u64, k: usize) -> Result<Config> {
    if rank as u128 >= RANK_LIMIT {
        return Err(Error::RankOverflow { n: 0, k: k as u64 });
    }
    let mut remaining = rank as u128;
    let mut out = vec![0; k];
    for pos in (1..=k).rev() {
        // largest c with C(c, pos) <= remaining; c >= pos - 1 always qualifies
        let fits = |c: u64| binomial(c, pos as u64).is_some_and(|b| b <= remaining);
        let mut lo = pos as u64 - 1;
        let mut hi = lo + 1;
        while fits(hi) {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        remaining -= binomial(lo, pos as u64).expect("fits");
        out[pos - 1] = lo as usize;
    }
    Ok(Config(out))
}
