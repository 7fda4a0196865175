//! Distance functions, the pairwise distance cache, and the K-medoids
//! objective `E(M) = sum_n min_{m in M} d(x_n, x_m)`.
//!
//! Every objective is summed over points in ascending index order. The exact
//! solver and the oracle compare objectives for equality, so the order is part
//! of the contract.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub type DistanceFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Default cache budget: 2 GiB.
pub const DEFAULT_CACHE_BUDGET: u64 = 2 << 30;

/// A named distance function. No symmetry or triangle inequality is assumed;
/// `d(x, x) = 0` and non-negativity are.
#[derive(Clone)]
pub struct Metric {
    name: String,
    func: Arc<DistanceFn>,
}

impl Metric {
    /// Names accepted by [`Metric::by_name`].
    pub const REGISTERED: [&'static str; 3] = ["sqeuclidean", "euclidean", "manhattan"];

    pub fn sq_euclidean() -> Self {
        Self::custom("sqeuclidean", sq_euclidean_unchecked)
    }

    pub fn euclidean() -> Self {
        Self::custom("euclidean", |x, y| sq_euclidean_unchecked(x, y).sqrt())
    }

    pub fn manhattan() -> Self {
        Self::custom("manhattan", |x, y| {
            x.iter().zip(y).fold(0.0, |acc, (a, b)| acc + (a - b).abs())
        })
    }

    pub fn custom<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sqeuclidean" => Ok(Self::sq_euclidean()),
            "euclidean" => Ok(Self::euclidean()),
            "manhattan" => Ok(Self::manhattan()),
            _ => Err(Error::UnknownMetric {
                name: name.to_string(),
                registered: Self::REGISTERED.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Distance with a dimension check.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        Ok((self.func)(x, y))
    }

    #[inline]
    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.func)(x, y)
    }
}

impl Default for Metric {
    fn default() -> Self {
        Self::sq_euclidean()
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Metric").field(&self.name).finish()
    }
}

/// Squared Euclidean distance, summed in ascending coordinate order.
pub fn sq_euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(sq_euclidean_unchecked(x, y))
}

#[inline]
fn sq_euclidean_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |acc, (a, b)| {
        let t = a - b;
        acc + t * t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheMode {
    Precomputed,
    OnTheFly,
}

/// Distance lookups over one dataset, either from a precomputed matrix or by
/// calling the metric. Both modes return bit-identical values.
#[derive(Debug, Clone)]
pub struct DistanceCache<'a> {
    ds: &'a Dataset,
    metric: Metric,
    // Medoid-major: `by_medoid[m * n + p] = d(x_p, x_m)`, so the distances of
    // all points to one medoid are contiguous.
    by_medoid: Option<Vec<f64>>,
}

impl<'a> DistanceCache<'a> {
    /// Precomputes the full matrix when `8 * n^2 <= budget_bytes`.
    pub fn new(ds: &'a Dataset, metric: Metric, budget_bytes: u64) -> Self {
        let n = ds.n();
        let needed = 8u128 * (n as u128) * (n as u128);
        let by_medoid = (needed <= budget_bytes as u128).then(|| {
            let mut matrix = vec![0.0; n * n];
            if n > 0 {
                matrix.par_chunks_mut(n).enumerate().for_each(|(m, col)| {
                    let xm = ds.row(m);
                    for (p, slot) in col.iter_mut().enumerate() {
                        *slot = metric.eval(ds.row(p), xm);
                    }
                });
            }
            matrix
        });
        Self {
            ds,
            metric,
            by_medoid,
        }
    }

    pub fn on_the_fly(ds: &'a Dataset, metric: Metric) -> Self {
        Self {
            ds,
            metric,
            by_medoid: None,
        }
    }

    pub fn mode(&self) -> CacheMode {
        if self.by_medoid.is_some() {
            CacheMode::Precomputed
        } else {
            CacheMode::OnTheFly
        }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn n(&self) -> usize {
        self.ds.n()
    }

    /// `d(x_point, x_medoid)`.
    #[inline]
    pub fn get(&self, point: usize, medoid: usize) -> f64 {
        match &self.by_medoid {
            Some(m) => m[medoid * self.ds.n() + point],
            None => self.metric.eval(self.ds.row(point), self.ds.row(medoid)),
        }
    }

    /// Distances of every point to `medoid`, when precomputed.
    #[inline]
    pub fn column(&self, medoid: usize) -> Option<&[f64]> {
        let n = self.ds.n();
        self.by_medoid
            .as_deref()
            .map(|m| &m[medoid * n..(medoid + 1) * n])
    }

    pub fn check_medoids(&self, medoids: &[usize]) -> Result<()> {
        if medoids.is_empty() {
            return Err(Error::InvalidArguments("medoid list is empty".into()));
        }
        let n = self.ds.n();
        for (i, &m) in medoids.iter().enumerate() {
            if m >= n {
                return Err(Error::Index { index: m, len: n });
            }
            if medoids[..i].contains(&m) {
                return Err(Error::InvalidArguments(format!("medoid {m} repeated")));
            }
        }
        Ok(())
    }

    /// Objective for an already validated medoid set.
    pub fn objective_unchecked(&self, medoids: &[usize]) -> f64 {
        if self.by_medoid.is_some() {
            let col = |m: usize| self.column(m).unwrap();
            return match *medoids {
                [a] => col(a).iter().fold(0.0, |s, v| s + v),
                [a, b] => col(a)
                    .iter()
                    .zip(col(b))
                    .fold(0.0, |s, (&x, &y)| s + min2(x, y)),
                [a, b, c] => col(a)
                    .iter()
                    .zip(col(b))
                    .zip(col(c))
                    .fold(0.0, |s, ((&x, &y), &z)| s + min2(min2(x, y), z)),
                [a, b, c, d] => col(a)
                    .iter()
                    .zip(col(b))
                    .zip(col(c))
                    .zip(col(d))
                    .fold(0.0, |s, (((&x, &y), &z), &w)| {
                        s + min2(min2(x, y), min2(z, w))
                    }),
                _ => self.objective_generic(medoids),
            };
        }
        self.objective_generic(medoids)
    }

    fn objective_generic(&self, medoids: &[usize]) -> f64 {
        let mut total = 0.0;
        for p in 0..self.ds.n() {
            let mut best = f64::INFINITY;
            for &m in medoids {
                best = min2(best, self.get(p, m));
            }
            total += best;
        }
        total
    }
}

#[inline(always)]
fn min2(a: f64, b: f64) -> f64 {
    if b < a {
        b
    } else {
        a
    }
}

/// Total deviation of the dataset from its nearest medoids.
pub fn evaluate_objective(cache: &DistanceCache<'_>, medoids: &[usize]) -> Result<f64> {
    cache.check_medoids(medoids)?;
    Ok(cache.objective_unchecked(medoids))
}

/// `labels[p]` is the position in `medoids` of the medoid nearest to point
/// `p`; equidistant medoids resolve to the smaller point index.
pub fn assign(cache: &DistanceCache<'_>, medoids: &[usize]) -> Result<Vec<usize>> {
    cache.check_medoids(medoids)?;
    Ok(assign_unchecked(cache, medoids))
}

pub(crate) fn assign_unchecked(cache: &DistanceCache<'_>, medoids: &[usize]) -> Vec<usize> {
    (0..cache.n())
        .map(|p| {
            let mut best = 0;
            let mut best_d = cache.get(p, medoids[0]);
            for (pos, &m) in medoids.iter().enumerate().skip(1) {
                let d = cache.get(p, m);
                if d < best_d || (d == best_d && m < medoids[best]) {
                    best = pos;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}
