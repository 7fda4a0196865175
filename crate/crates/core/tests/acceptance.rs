//! Acceptance suite. Each test prints one `A<n> PASS|FAIL` line with the
//! measured values. Tests hold a shared lock so the timing checks never run
//! alongside other work.
//!
//! Run with `cargo test -p ekm --test acceptance -- --nocapture`.

mod common;

use std::io::Write;
use std::sync::{Mutex, MutexGuard};

use ekm::bench::{fit_slope, ScalingConfig};
use ekm::ekm::{evalgen_reference, EkmSolver, DEFAULT_MEMORY_BUDGET};
use ekm::generator::binomial;
use ekm::metrics::DEFAULT_CACHE_BUDGET;
use ekm::{
    clarans, evaluate_objective, fasterpam, gen_combs, load_csv, pam, rank_colex, solve_ekm_cached,
    solve_exhaustive_cached, standardize, synthetic, unrank_colex, BaselineParams, Config,
    CsvOptions, DistanceCache, Metric,
};

use common::{data_path, random_instance};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints the verdict line and fails the test on a non-empty failure list.
/// The line goes straight to the process stdout so it shows up even when
/// the harness captures test output.
fn verdict(id: &str, summary: String, failures: Vec<String>) {
    verdict_with_details(id, summary, &[], failures);
}

fn verdict_with_details(id: &str, summary: String, details: &[String], failures: Vec<String>) {
    let mut text = format!(
        "{id} {} {summary}\n",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    for f in details.iter().chain(&failures) {
        text.push_str(&format!("    {f}\n"));
    }
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).unwrap();
    out.flush().unwrap();
    if !failures.is_empty() {
        panic!("{id} failed: {}", failures.join("; "));
    }
}

const A1_INSTANCES: u64 = 200;
const ORACLE_LIMIT: u64 = 10_000_000;

fn exact(cache: &DistanceCache<'_>, k: usize) -> ekm::Solution {
    solve_ekm_cached(cache, k, false, DEFAULT_MEMORY_BUDGET).unwrap()
}

#[test]
fn a1_oracle_equivalence() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut ties = 0;
    for seed in 0..A1_INSTANCES {
        let (ds, k) = random_instance(seed);
        let cache = DistanceCache::new(&ds, Metric::sq_euclidean(), DEFAULT_CACHE_BUDGET);
        let fused = exact(&cache, k);
        let oracle = solve_exhaustive_cached(&cache, k, ORACLE_LIMIT).unwrap();
        if fused.objective.to_bits() != oracle.objective.to_bits()
            || fused.medoid_indices != oracle.medoid_indices
        {
            failures.push(format!(
                "seed {seed} (N={}, K={k}): ekm {:?}/{} vs oracle {:?}/{}",
                ds.n(),
                fused.medoid_indices,
                fused.objective,
                oracle.medoid_indices,
                oracle.objective
            ));
        }
        // Count instances where the optimum is not unique, to show the tie rule is exercised.
        let optima = gen_combs(ds.n(), k)[k]
            .iter()
            .filter(|c| {
                evaluate_objective(&cache, c.indices()).unwrap().to_bits()
                    == oracle.objective.to_bits()
            })
            .count();
        if optima > 1 {
            ties += 1;
        }
    }
    verdict(
        "A1",
        format!("{A1_INSTANCES} instances bit-equal to oracle ({ties} with tied optima)"),
        failures,
    );
}

#[test]
fn a2_fusion_law() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut seed = 10_000u64;
    while checked < 50 {
        seed += 1;
        let (ds, k) = random_instance(seed);
        if ds.n() > 15 {
            continue;
        }
        checked += 1;
        let cache = DistanceCache::new(&ds, Metric::sq_euclidean(), DEFAULT_CACHE_BUDGET);
        // Unfused: generate every K-set, evaluate, then select.
        let unfused = gen_combs(ds.n(), k)[k]
            .iter()
            .map(|c| evaluate_objective(&cache, c.indices()).unwrap())
            .fold(f64::INFINITY, f64::min);
        let (reference, _) = evalgen_reference(&cache, k).unwrap();
        let fused = exact(&cache, k);
        if unfused.to_bits() != fused.objective.to_bits()
            || reference.best_objective().to_bits() != fused.objective.to_bits()
        {
            failures.push(format!(
                "seed {seed}: unfused {unfused}, recursive {}, fused {}",
                reference.best_objective(),
                fused.objective
            ));
        }
    }
    verdict(
        "A2",
        format!("{checked} instances with N <= 15, K <= 4"),
        failures,
    );
}

#[test]
fn a3_counting_invariants() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut runs = 0;
    for n in 1..=12usize {
        let ds = synthetic(n, 2, 1, n as u64).unwrap();
        let cache = DistanceCache::new(&ds, Metric::sq_euclidean(), DEFAULT_CACHE_BUDGET);
        for k in 1..=n {
            runs += 1;
            let mut solver = EkmSolver::new(&cache, k, DEFAULT_MEMORY_BUDGET).unwrap();
            while solver.step() {
                let p = solver.points_processed() as u64;
                let expected: Vec<usize> = (0..k as u64)
                    .map(|j| binomial(p, j).unwrap() as usize)
                    .collect();
                let sizes = solver.retained_level_sizes();
                if sizes != expected {
                    failures.push(format!(
                        "N={n} K={k} after {p} points: {sizes:?} != {expected:?}"
                    ));
                }
            }
            let total = binomial(n as u64, k as u64).unwrap() as u64;
            if solver.incumbent().evaluated_count() != total {
                failures.push(format!(
                    "N={n} K={k}: evaluated {} != {total}",
                    solver.incumbent().evaluated_count()
                ));
            }
            let sol = exact(&cache, k);
            if sol.evaluated_configurations != total {
                failures.push(format!(
                    "N={n} K={k}: solution reports {}",
                    sol.evaluated_configurations
                ));
            }
        }
    }
    for seed in 0..A1_INSTANCES {
        let (ds, k) = random_instance(seed);
        let cache = DistanceCache::new(&ds, Metric::sq_euclidean(), DEFAULT_CACHE_BUDGET);
        let total = binomial(ds.n() as u64, k as u64).unwrap() as u64;
        if exact(&cache, k).evaluated_configurations != total {
            failures.push(format!("seed {seed}: evaluated count differs from C(N,K)"));
        }
    }
    verdict(
        "A3",
        format!("{runs} instrumented runs (N <= 12) and {A1_INSTANCES} solves count C(N,K)"),
        failures,
    );
}

const A4_REL_TOL: f64 = 0.005;

struct ReferenceRow {
    name: &'static str,
    file: &'static str,
    n: usize,
    target: f64,
}

const REFERENCE_ROWS: [ReferenceRow; 4] = [
    ReferenceRow {
        name: "IRIS",
        file: "iris.csv",
        n: 150,
        target: 84.0,
    },
    ReferenceRow {
        name: "SEEDS",
        file: "seeds.csv",
        n: 210,
        target: 598.0,
    },
    ReferenceRow {
        name: "GLASS",
        file: "glass.csv",
        n: 214,
        target: 629.0,
    },
    ReferenceRow {
        name: "Wine",
        file: "wine.csv",
        n: 178,
        target: 2.39e6,
    },
];

/// Solves one reference dataset at K=3, raw features first and standardized as
/// fallback; checks the target and that no baseline beats the exact result.
fn reference_row(row: &ReferenceRow) -> Result<String, String> {
    let path = data_path(row.file);
    if !path.exists() {
        return Err(format!("{}: {} not present", row.name, path.display()));
    }
    let raw = load_csv(
        &path,
        CsvOptions {
            has_header: true,
            delimiter: b',',
        },
    )
    .map_err(|e| e.to_string())?;
    if raw.n() != row.n {
        return Err(format!(
            "{}: expected N={}, file has {}",
            row.name,
            row.n,
            raw.n()
        ));
    }
    let std_ds = standardize(&raw).map_err(|e| e.to_string())?;
    let mut tried = Vec::new();
    for (mode, ds) in [("raw", &raw), ("standardized", &std_ds)] {
        let cache = DistanceCache::new(ds, Metric::sq_euclidean(), DEFAULT_CACHE_BUDGET);
        let sol = exact(&cache, 3);
        let rel = (sol.objective - row.target).abs() / row.target;
        if rel > A4_REL_TOL {
            tried.push(format!("{mode} {:.4} (rel {:.2e})", sol.objective, rel));
            continue;
        }
        if sol.wall_time_seconds > 60.0 {
            return Err(format!(
                "{}: solve took {:.1} s",
                row.name, sol.wall_time_seconds
            ));
        }
        let params = BaselineParams::default().with_seed(0);
        let mut baselines = Vec::new();
        for b in [
            pam(&cache, 3, &params),
            fasterpam(&cache, 3, &params),
            clarans(&cache, 3, &params),
        ] {
            let b = b.map_err(|e| e.to_string())?;
            if b.objective < sol.objective {
                return Err(format!(
                    "{}: {} {} beats exact {}",
                    row.name, b.algorithm, b.objective, sol.objective
                ));
            }
            baselines.push(format!("{} {:.4}", b.algorithm, b.objective));
        }
        return Ok(format!(
            "{} N={} {mode}: ekm {:.4} vs {} (rel {:.2e}, {:.2} s); {}",
            row.name,
            row.n,
            sol.objective,
            row.target,
            rel,
            sol.wall_time_seconds,
            baselines.join(", ")
        ));
    }
    Err(format!(
        "{}: no mode within {A4_REL_TOL}: {}",
        row.name,
        tried.join(", ")
    ))
}

#[test]
fn a4_reference_objectives() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for row in &REFERENCE_ROWS {
        match reference_row(row) {
            Ok(detail) => details.push(detail),
            Err(e) => failures.push(e),
        }
    }
    verdict_with_details(
        "A4",
        format!(
            "{}/{} reference datasets within {A4_REL_TOL} relative at K=3",
            details.len(),
            REFERENCE_ROWS.len()
        ),
        &details,
        failures,
    );
}

const A5_REPS: usize = 3;
const A5_K2_SIZES: [usize; 5] = [100, 200, 400, 800, 1600];
const A5_K2_RANGE: (f64, f64) = (2.65, 3.35);
const A5_K3_SIZES: [usize; 5] = [50, 100, 150, 220, 300];
const A5_K3_RANGE: (f64, f64) = (3.6, 4.4);

#[test]
fn a5_complexity_slopes() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut slopes = Vec::new();
    for (k, sizes, (lo, hi)) in [
        (2, &A5_K2_SIZES[..], A5_K2_RANGE),
        (3, &A5_K3_SIZES[..], A5_K3_RANGE),
    ] {
        let report =
            ekm::bench::run_scaling(&ScalingConfig::new(k, sizes.to_vec(), A5_REPS, 2024)).unwrap();
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        let slope = fit_slope(&report.records).unwrap();
        slopes.push(format!("K={k} slope {slope:.3} in [{lo}, {hi}]"));
        if !(lo..=hi).contains(&slope) {
            failures.push(format!("K={k}: slope {slope:.3} outside [{lo}, {hi}]"));
        }
    }
    verdict("A5", slopes.join("; "), failures);
}

#[test]
fn a6_baseline_sanity() {
    let _g = serial();
    let mut failures = Vec::new();
    for seed in 0..A1_INSTANCES {
        let (ds, k) = random_instance(seed);
        let cache = DistanceCache::new(&ds, Metric::sq_euclidean(), DEFAULT_CACHE_BUDGET);
        let best = exact(&cache, k).objective;
        let params = BaselineParams::default().with_seed(seed ^ 0x5eed);
        type Baseline =
            fn(&DistanceCache<'_>, usize, &BaselineParams) -> ekm::Result<ekm::Solution>;
        for run in [pam as Baseline, fasterpam, clarans] {
            let a = run(&cache, k, &params).unwrap();
            let b = run(&cache, k, &params).unwrap();
            if a.medoid_indices != b.medoid_indices
                || a.objective.to_bits() != b.objective.to_bits()
            {
                failures.push(format!("seed {seed}: {} not reproducible", a.algorithm));
            }
            if a.objective < best {
                failures.push(format!(
                    "seed {seed}: {} {} below exact {best}",
                    a.algorithm, a.objective
                ));
            }
        }
    }
    verdict(
        "A6",
        format!("pam/fasterpam/clarans reproducible and >= exact on {A1_INSTANCES} instances"),
        failures,
    );
}

#[test]
fn a7_rank_unrank() {
    let _g = serial();
    let mut failures = Vec::new();
    let mut total = 0;
    for k in 0..=5 {
        let level = &gen_combs(10, k)[k];
        let expected = binomial(10, k as u64).unwrap() as usize;
        if level.len() != expected {
            failures.push(format!(
                "k={k}: {} subsets, expected {expected}",
                level.len()
            ));
        }
        let mut prev: Option<u64> = None;
        for (pos, c) in level.iter().enumerate() {
            let r = rank_colex(c).unwrap();
            if r != pos as u64 || prev.is_some_and(|p| p >= r) {
                failures.push(format!("k={k}: {c:?} ranked {r} at position {pos}"));
            }
            let back: Config = unrank_colex(r, k).unwrap();
            if &back != c {
                failures.push(format!("k={k}: unrank({r}) = {back:?}, expected {c:?}"));
            }
            prev = Some(r);
            total += 1;
        }
    }
    verdict(
        "A7",
        format!("{total} subsets of 0..10 with k <= 5 round-trip in colex order"),
        failures,
    );
}
