//! Exact K-medoids clustering by fused enumeration, with baselines and a
//! brute-force oracle for checking it.

pub mod algorithm;
pub mod baselines;
pub mod bench;
pub mod dataset;
pub mod ekm;
pub mod error;
pub mod generator;
pub mod metrics;
pub mod oracle;

pub use algorithm::{Algorithm, RunOptions};
pub use baselines::{clarans, fasterpam, pam, BaselineParams};
pub use dataset::{load_csv, standardize, synthetic, CsvOptions, Dataset};
pub use ekm::{solve_ekm, solve_ekm_cached, EkmSolver, Solution, SolverParams};
pub use error::{Error, Result};
pub use generator::{gen_combs, rank_colex, unrank_colex, Config};
pub use metrics::{evaluate_objective, DistanceCache, Metric};
pub use oracle::{solve_exhaustive, solve_exhaustive_cached};
