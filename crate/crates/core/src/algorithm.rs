use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::baselines::{clarans, fasterpam, pam, BaselineParams};
use crate::ekm::{solve_ekm_cached, Solution, DEFAULT_ENUMERATION_LIMIT, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};
use crate::metrics::DistanceCache;
use crate::oracle::solve_exhaustive_cached;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ekm,
    Oracle,
    Pam,
    FasterPam,
    Clarans,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Ekm,
        Algorithm::Oracle,
        Algorithm::Pam,
        Algorithm::FasterPam,
        Algorithm::Clarans,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ekm => "ekm",
            Algorithm::Oracle => "oracle",
            Algorithm::Pam => "pam",
            Algorithm::FasterPam => "fasterpam",
            Algorithm::Clarans => "clarans",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Algorithm::Ekm | Algorithm::Oracle)
    }

    pub fn run(self, cache: &DistanceCache<'_>, k: usize, opts: &RunOptions) -> Result<Solution> {
        match self {
            Algorithm::Ekm => solve_ekm_cached(cache, k, opts.parallel, opts.memory_budget_bytes),
            Algorithm::Oracle => solve_exhaustive_cached(cache, k, opts.enumeration_limit),
            Algorithm::Pam => pam(cache, k, &opts.baseline),
            Algorithm::FasterPam => fasterpam(cache, k, &opts.baseline),
            Algorithm::Clarans => clarans(cache, k, &opts.baseline),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidArguments(format!(
                    "unknown algorithm {s:?}; expected one of ekm, oracle, pam, fasterpam, clarans"
                ))
            })
    }
}

/// Knobs shared by every algorithm run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub parallel: bool,
    pub memory_budget_bytes: u64,
    pub enumeration_limit: u64,
    pub baseline: BaselineParams,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            parallel: false,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            baseline: BaselineParams::default(),
        }
    }
}
