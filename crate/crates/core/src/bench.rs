//! Runtime-scaling experiments, log-log slope fits and objective comparisons.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::algorithm::{Algorithm, RunOptions};
use crate::dataset::{synthetic, Dataset};
use crate::ekm::{partial_store_bytes, solve_ekm_cached};
use crate::error::{Error, Result};
use crate::generator::combination_count;
use crate::metrics::{DistanceCache, Metric, DEFAULT_CACHE_BUDGET};

/// One timed solve of a synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRecord {
    pub k: usize,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub evaluated_configurations: u64,
    /// Distance-cache construction, excluded from `wall_time_seconds`.
    pub setup_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingWarning {
    pub k: usize,
    pub n: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ScalingReport {
    pub records: Vec<ScalingRecord>,
    pub warnings: Vec<ScalingWarning>,
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Dimension of the synthetic points.
    pub d: usize,
    pub metric: Metric,
    pub parallel: bool,
    pub memory_budget_bytes: u64,
}

impl ScalingConfig {
    pub fn new(k: usize, sizes: Vec<usize>, reps: usize, seed: u64) -> Self {
        Self {
            k,
            sizes,
            reps,
            seed,
            d: 2,
            metric: Metric::default(),
            parallel: false,
            memory_budget_bytes: crate::ekm::DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Seed of the synthetic instance for size `n`, repetition `rep`.
pub fn instance_seed(base: u64, n: usize, rep: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((n as u64) << 20)
        .wrapping_add(rep as u64)
}

/// Runs the solver on a fresh synthetic dataset per `(n, rep)`, sequentially.
/// Instances the solver would refuse become warnings instead of records.
pub fn run_scaling(config: &ScalingConfig) -> Result<ScalingReport> {
    if config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArguments(
            "sizes must be strictly ascending".into(),
        ));
    }
    let mut report = ScalingReport::default();
    if config.reps == 0 {
        return Ok(report);
    }
    let k = config.k;
    for &n in &config.sizes {
        let feasible = if k == 0 || k > n {
            Err(format!("need 1 <= K <= N, got K={k}, N={n}"))
        } else if let Err(e) = combination_count(n as u64, k as u64) {
            Err(e.to_string())
        } else if partial_store_bytes(n, k) > config.memory_budget_bytes as u128 {
            Err(format!(
                "retained store needs ~{} bytes, budget is {}",
                partial_store_bytes(n, k),
                config.memory_budget_bytes
            ))
        } else {
            Ok(())
        };
        if let Err(message) = feasible {
            report.warnings.push(ScalingWarning { k, n, message });
            continue;
        }
        for rep in 0..config.reps {
            let seed = instance_seed(config.seed, n, rep);
            let ds = synthetic(n, config.d, k, seed)?;
            let setup = Instant::now();
            let cache = DistanceCache::new(&ds, config.metric.clone(), DEFAULT_CACHE_BUDGET);
            let setup_seconds = setup.elapsed().as_secs_f64();
            let solution =
                solve_ekm_cached(&cache, k, config.parallel, config.memory_budget_bytes)?;
            report.records.push(ScalingRecord {
                k,
                n,
                rep,
                seed,
                wall_time_seconds: solution.wall_time_seconds.max(1e-9),
                evaluated_configurations: solution.evaluated_configurations,
                setup_seconds,
            });
        }
    }
    Ok(report)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Per-size median wall time, ascending in `n`.
pub fn median_times(records: &[ScalingRecord]) -> Vec<(usize, f64)> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r.wall_time_seconds);
    }
    by_n.into_iter()
        .map(|(n, mut t)| (n, median(&mut t)))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs at least 3 distinct sizes, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::InvalidArguments(
            "log-log fit needs positive values".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Slope of median wall time against `n` on log-log axes.
pub fn fit_slope(records: &[ScalingRecord]) -> Result<f64> {
    let points: Vec<(f64, f64)> = median_times(records)
        .into_iter()
        .map(|(n, t)| (n as f64, t))
        .collect();
    fit_loglog(&points)
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub median_wall_time_seconds: f64,
    pub median_setup_seconds: f64,
    pub evaluated_configurations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub k: usize,
    pub predicted_exponent: usize,
    pub slope: f64,
    pub sizes: Vec<SizeSummary>,
    pub warnings: Vec<ScalingWarning>,
}

pub fn summarize(records: &[ScalingRecord], warnings: &[ScalingWarning]) -> Result<ScalingSummary> {
    let k = records
        .first()
        .map(|r| r.k)
        .ok_or_else(|| Error::InsufficientData("no scaling records to summarize".into()))?;
    if records.iter().any(|r| r.k != k) {
        return Err(Error::InvalidArguments(
            "records mix several K values".into(),
        ));
    }
    let slope = fit_slope(records)?;
    let mut by_n: BTreeMap<usize, Vec<&ScalingRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r);
    }
    let sizes = by_n
        .into_iter()
        .map(|(n, rs)| SizeSummary {
            n,
            median_wall_time_seconds: median(
                &mut rs.iter().map(|r| r.wall_time_seconds).collect::<Vec<_>>(),
            ),
            median_setup_seconds: median(
                &mut rs.iter().map(|r| r.setup_seconds).collect::<Vec<_>>(),
            ),
            evaluated_configurations: rs[0].evaluated_configurations,
        })
        .collect();
    Ok(ScalingSummary {
        k,
        predicted_exponent: k + 1,
        slope,
        sizes,
        warnings: warnings.to_vec(),
    })
}

pub const SCALING_CSV_HEADER: [&str; 6] = [
    "k",
    "n",
    "rep",
    "seed",
    "wall_time_seconds",
    "evaluated_configurations",
];

pub fn write_scaling_csv<W: Write>(out: W, records: &[ScalingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCALING_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.n.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.wall_time_seconds.to_string(),
            r.evaluated_configurations.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads records written by [`write_scaling_csv`]; `setup_seconds` is not
/// part of the file and reads back as zero.
pub fn read_scaling_csv<R: std::io::Read>(input: R) -> Result<Vec<ScalingRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(SCALING_CSV_HEADER) {
        return Err(Error::InvalidArguments(format!(
            "unexpected scaling header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let cell = |column: usize| -> Result<&str> {
            rec.get(column).ok_or(Error::Shape {
                row,
                expected: SCALING_CSV_HEADER.len(),
                found: rec.len(),
            })
        };
        let parse_err = |column: usize| Error::Parse {
            row,
            column,
            cell: rec.get(column).unwrap_or_default().to_string(),
        };
        out.push(ScalingRecord {
            k: cell(0)?.parse().map_err(|_| parse_err(0))?,
            n: cell(1)?.parse().map_err(|_| parse_err(1))?,
            rep: cell(2)?.parse().map_err(|_| parse_err(2))?,
            seed: cell(3)?.parse().map_err(|_| parse_err(3))?,
            wall_time_seconds: cell(4)?.parse().map_err(|_| parse_err(4))?,
            evaluated_configurations: cell(5)?.parse().map_err(|_| parse_err(5))?,
            setup_seconds: 0.0,
        });
    }
    Ok(out)
}

/// A named dataset for [`compare`]; a failed load is carried into the report.
#[derive(Debug)]
pub struct CompareInput {
    pub name: String,
    pub dataset: std::result::Result<Dataset, String>,
}

impl CompareInput {
    pub fn loaded(name: impl Into<String>, dataset: Dataset) -> Self {
        Self {
            name: name.into(),
            dataset: Ok(dataset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmResult {
    pub algorithm: String,
    pub objective: Option<f64>,
    pub wall_time_seconds: Option<f64>,
    pub medoid_indices: Option<Vec<usize>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub dataset: String,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub results: Vec<AlgorithmResult>,
    pub error: Option<String>,
    /// Set when an exact objective exceeds another algorithm's objective.
    pub invariant_violation: Option<String>,
}

impl CompareRow {
    pub fn objective(&self, algorithm: Algorithm) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.algorithm == algorithm.name())
            .and_then(|r| r.objective)
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub k: usize,
    pub algorithms: Vec<Algorithm>,
    pub metric: Metric,
    pub cache_budget_bytes: u64,
    pub run: RunOptions,
}

impl CompareOptions {
    pub fn new(k: usize, algorithms: Vec<Algorithm>) -> Self {
        Self {
            k,
            algorithms,
            metric: Metric::default(),
            cache_budget_bytes: DEFAULT_CACHE_BUDGET,
            run: RunOptions::default(),
        }
    }
}

/// Runs every algorithm on every dataset over one shared distance cache each.
pub fn compare(inputs: &[CompareInput], opts: &CompareOptions) -> Vec<CompareRow> {
    inputs
        .iter()
        .map(|input| compare_one(input, opts))
        .collect()
}

fn compare_one(input: &CompareInput, opts: &CompareOptions) -> CompareRow {
    let ds = match &input.dataset {
        Ok(ds) => ds,
        Err(e) => {
            return CompareRow {
                dataset: input.name.clone(),
                n: None,
                d: None,
                results: Vec::new(),
                error: Some(e.clone()),
                invariant_violation: None,
            }
        }
    };
    let cache = DistanceCache::new(ds, opts.metric.clone(), opts.cache_budget_bytes);
    let results: Vec<AlgorithmResult> = opts
        .algorithms
        .iter()
        .map(
            |&algorithm| match algorithm.run(&cache, opts.k, &opts.run) {
                Ok(s) => AlgorithmResult {
                    algorithm: algorithm.name().to_string(),
                    objective: Some(s.objective),
                    wall_time_seconds: Some(s.wall_time_seconds),
                    medoid_indices: Some(s.medoid_indices),
                    error: None,
                },
                Err(e) => AlgorithmResult {
                    algorithm: algorithm.name().to_string(),
                    objective: None,
                    wall_time_seconds: None,
                    medoid_indices: None,
                    error: Some(if e.is_infeasible() {
                        format!("omitted: {e}")
                    } else {
                        e.to_string()
                    }),
                },
            },
        )
        .collect();

    let mut violation = None;
    for (algorithm, exact) in opts.algorithms.iter().zip(&results) {
        let Some(exact_obj) = exact.objective.filter(|_| algorithm.is_exact()) else {
            continue;
        };
        for other in &results {
            if let Some(o) = other.objective {
                if exact_obj > o {
                    violation = Some(format!(
                        "{} objective {exact_obj} exceeds {} objective {o}",
                        exact.algorithm, other.algorithm
                    ));
                }
            }
        }
    }
    CompareRow {
        dataset: input.name.clone(),
        n: Some(ds.n()),
        d: Some(ds.d()),
        results,
        error: None,
        invariant_violation: violation,
    }
}

/// One line per (dataset, algorithm).
pub fn write_compare_csv<W: Write>(out: W, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dataset",
        "n",
        "d",
        "algorithm",
        "objective",
        "wall_time_seconds",
        "error",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for row in rows {
        if row.results.is_empty() {
            w.write_record([
                row.dataset.clone(),
                opt(row.n.map(|v| v.to_string())),
                opt(row.d.map(|v| v.to_string())),
                String::new(),
                String::new(),
                String::new(),
                opt(row.error.clone()),
            ])?;
        }
        for r in &row.results {
            w.write_record([
                row.dataset.clone(),
                opt(row.n.map(|v| v.to_string())),
                opt(row.d.map(|v| v.to_string())),
                r.algorithm.clone(),
                opt(r.objective.map(|v| v.to_string())),
                opt(r.wall_time_seconds.map(|v| v.to_string())),
                opt(r.error.clone()),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, t: f64) -> ScalingRecord {
        ScalingRecord {
            k: 2,
            n,
            rep: 0,
            seed: 0,
            wall_time_seconds: t,
            evaluated_configurations: 0,
            setup_seconds: 0.0,
        }
    }

    #[test]
    fn noiseless_cubic_fit() {
        let recs: Vec<_> = [50, 100, 200, 400]
            .iter()
            .map(|&n| record(n, 3e-9 * (n as f64).powi(3)))
            .collect();
        assert!((fit_slope(&recs).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn slope_ignores_time_units() {
        let recs: Vec<_> = [10, 30, 70, 90]
            .iter()
            .map(|&n| record(n, (n as f64).powf(2.5) * (1.0 + 0.01 * (n % 7) as f64)))
            .collect();
        let scaled: Vec<_> = recs
            .iter()
            .map(|r| ScalingRecord {
                wall_time_seconds: r.wall_time_seconds * 1000.0,
                ..r.clone()
            })
            .collect();
        assert!((fit_slope(&recs).unwrap() - fit_slope(&scaled).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn median_over_reps() {
        let mut recs = vec![record(10, 1.0), record(10, 100.0), record(10, 2.0)];
        recs.extend([record(20, 8.0), record(40, 32.0)]);
        assert_eq!(median_times(&recs), vec![(10, 2.0), (20, 8.0), (40, 32.0)]);
        assert!((fit_slope(&recs).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_sizes() {
        let recs = vec![record(10, 1.0), record(20, 2.0), record(20, 3.0)];
        assert!(matches!(fit_slope(&recs), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn zero_reps_is_empty() {
        let report = run_scaling(&ScalingConfig::new(2, vec![10, 20], 0, 1)).unwrap();
        assert!(report.records.is_empty());
    }

    #[test]
    fn scaling_counts_configurations() {
        let report = run_scaling(&ScalingConfig::new(2, vec![10, 20, 30], 2, 5)).unwrap();
        assert_eq!(report.records.len(), 6);
        for r in &report.records {
            assert_eq!(r.evaluated_configurations as usize, r.n * (r.n - 1) / 2);
            assert!(r.wall_time_seconds > 0.0);
        }
    }

    #[test]
    fn infeasible_sizes_become_warnings() {
        let mut cfg = ScalingConfig::new(3, vec![2, 40], 1, 5);
        cfg.memory_budget_bytes = 1 << 40;
        let report = run_scaling(&cfg).unwrap();
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].n, 2);
        assert_eq!(report.records.len(), 1);
    }

    #[test]
    fn scaling_csv_round_trip() {
        let report = run_scaling(&ScalingConfig::new(2, vec![10, 20, 30], 1, 9)).unwrap();
        let mut buf = Vec::new();
        write_scaling_csv(&mut buf, &report.records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,n,rep,seed,wall_time_seconds,evaluated_configurations\n"));
        let back = read_scaling_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in back.iter().zip(&report.records) {
            assert_eq!(
                (a.n, a.seed, a.evaluated_configurations),
                (b.n, b.seed, b.evaluated_configurations)
            );
            assert_eq!(a.wall_time_seconds, b.wall_time_seconds);
        }
    }

    #[test]
    fn empty_compare() {
        assert!(compare(&[], &CompareOptions::new(3, vec![Algorithm::Ekm])).is_empty());
    }

    #[test]
    fn compare_marks_load_failures() {
        let inputs = vec![CompareInput {
            name: "missing".into(),
            dataset: Err("no such file".into()),
        }];
        let rows = compare(&inputs, &CompareOptions::new(3, vec![Algorithm::Ekm]));
        assert_eq!(rows[0].error.as_deref(), Some("no such file"));
    }

    #[test]
    fn compare_oracle_and_ekm_agree() {
        let ds = synthetic(30, 2, 3, 4).unwrap();
        let rows = compare(
            &[CompareInput::loaded("syn", ds)],
            &CompareOptions::new(3, vec![Algorithm::Oracle, Algorithm::Ekm, Algorithm::Pam]),
        );
        let row = &rows[0];
        assert_eq!(
            row.objective(Algorithm::Oracle),
            row.objective(Algorithm::Ekm)
        );
        assert!(row.invariant_violation.is_none());
        assert!(row.objective(Algorithm::Pam).unwrap() >= row.objective(Algorithm::Ekm).unwrap());
    }

    #[test]
    fn compare_reports_infeasible_ekm() {
        let ds = synthetic(30, 2, 3, 4).unwrap();
        let mut opts = CompareOptions::new(3, vec![Algorithm::Ekm, Algorithm::Pam]);
        opts.run.memory_budget_bytes = 16;
        let rows = compare(&[CompareInput::loaded("syn", ds)], &opts);
        let ekm = &rows[0].results[0];
        assert!(ekm.objective.is_none());
        assert!(ekm.error.as_deref().unwrap().starts_with("omitted"));
        assert!(rows[0].results[1].objective.is_some());
    }
}
