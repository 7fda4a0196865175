//! `ekm` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid flags, 3 data errors, 4 infeasible instance.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ekm::bench::{
    compare, read_scaling_csv, run_scaling, summarize, write_compare_csv, write_scaling_csv,
    CompareInput, CompareOptions, ScalingConfig,
};
use ekm::ekm::DEFAULT_MEMORY_BUDGET;
use ekm::metrics::DEFAULT_CACHE_BUDGET;
use ekm::{
    load_csv, standardize, Algorithm, BaselineParams, CsvOptions, Dataset, DistanceCache, Error,
    Metric, RunOptions,
};

#[derive(Parser, Debug)]
#[command(
    name = "ekm",
    version,
    about = "Exact K-medoids clustering and baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster one dataset with a single algorithm.
    Cluster(ClusterArgs),
    /// Run several algorithms over one or more datasets.
    Compare(CompareArgs),
    /// Runtime-scaling experiments.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// Time the exact solver on synthetic data of increasing size.
    Scaling(ScalingArgs),
    /// Fit the log-log slope of a scaling CSV.
    Fit(FitArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// First line of the input is a header.
    #[arg(long)]
    has_header: bool,
    /// Field delimiter of the input.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Z-score each feature before clustering.
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value = "sqeuclidean", value_parser = ["sqeuclidean", "euclidean", "manhattan"])]
    metric: String,
    /// Byte budget for the precomputed distance matrix.
    #[arg(long, default_value_t = DEFAULT_CACHE_BUDGET)]
    cache_budget: u64,
}

impl InputArgs {
    fn csv_options(&self) -> Result<CsvOptions, Failure> {
        if !self.delimiter.is_ascii() {
            return Err(Failure::usage(format!(
                "delimiter {:?} is not a single byte",
                self.delimiter
            )));
        }
        Ok(CsvOptions {
            has_header: self.has_header,
            delimiter: self.delimiter as u8,
        })
    }

    fn load(&self, path: &Path) -> Result<Dataset, Error> {
        let ds = load_csv(
            path,
            self.csv_options()
                .map_err(|f| Error::InvalidArguments(f.message))?,
        )?;
        if self.standardize {
            standardize(&ds)
        } else {
            Ok(ds)
        }
    }
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Seed for the randomized baselines.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate each batch of candidate configurations on all cores.
    #[arg(long)]
    parallel: bool,
    /// Byte budget for the retained partial configurations.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
    memory_budget: u64,
    /// Largest number of subsets the exhaustive oracle may enumerate.
    #[arg(long, default_value_t = ekm::ekm::DEFAULT_ENUMERATION_LIMIT)]
    enumeration_limit: u64,
    /// Iteration cap for PAM and FasterPAM.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 2)]
    clarans_numlocal: usize,
    /// Defaults to max(250, 1.25% of K(N-K)).
    #[arg(long)]
    clarans_maxneighbor: Option<usize>,
}

impl SolverArgs {
    fn run_options(&self) -> RunOptions {
        RunOptions {
            parallel: self.parallel,
            memory_budget_bytes: self.memory_budget,
            enumeration_limit: self.enumeration_limit,
            baseline: BaselineParams {
                seed: self.seed,
                max_iter: self.max_iter,
                clarans_numlocal: self.clarans_numlocal,
                clarans_maxneighbor: self.clarans_maxneighbor,
            },
        }
    }
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "ekm")]
    algorithm: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    data: InputArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, visible_alias = "output")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// One or more dataset files.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ekm,pam,fasterpam,clarans"
    )]
    algorithms: Vec<String>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    data: InputArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, visible_alias = "output")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimension of the synthetic points.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "sqeuclidean", value_parser = ["sqeuclidean", "euclidean", "manhattan"])]
    metric: String,
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
    memory_budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, visible_alias = "output")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Scaling CSV written by `bench scaling`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, visible_alias = "output")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArguments(_) | Error::UnknownMetric { .. } => 2,
            e if e.is_infeasible() => 4,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure {
            code: 3,
            message: format!("cannot create {}: {e}", p.display()),
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn parse_algorithm(name: &str) -> Result<Algorithm, Failure> {
    name.parse::<Algorithm>().map_err(Failure::from)
}

#[derive(Serialize)]
struct ClusterReport<'a> {
    algorithm: &'a str,
    n: usize,
    d: usize,
    k: usize,
    metric: &'a str,
    objective: f64,
    medoid_indices: &'a [usize],
    assignment: &'a [usize],
    wall_time_seconds: f64,
    evaluated_configurations: u64,
}

fn cmd_cluster(args: &ClusterArgs) -> Result<(), Failure> {
    let algorithm = parse_algorithm(&args.algorithm)?;
    args.data.csv_options()?;
    let metric = Metric::by_name(&args.data.metric)?;
    let ds = args.data.load(&args.input)?;
    let k = args.solver.k as usize;
    let cache = DistanceCache::new(&ds, metric, args.data.cache_budget);
    let solution = algorithm.run(&cache, k, &args.solver.run_options())?;
    let report = ClusterReport {
        algorithm: algorithm.name(),
        n: ds.n(),
        d: ds.d(),
        k,
        metric: &args.data.metric,
        objective: solution.objective,
        medoid_indices: &solution.medoid_indices,
        assignment: &solution.assignment,
        wall_time_seconds: solution.wall_time_seconds,
        evaluated_configurations: solution.evaluated_configurations,
    };
    match args.format {
        Format::Json => write_json(args.out.as_deref(), &report),
        Format::Csv => {
            let out = open_output(args.out.as_deref())?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["point", "medoid"]).map_err(Error::from)?;
            for (p, m) in solution.assignment.iter().enumerate() {
                w.write_record([p.to_string(), m.to_string()])
                    .map_err(Error::from)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Failure> {
    let algorithms = args
        .algorithms
        .iter()
        .map(|a| parse_algorithm(a))
        .collect::<Result<Vec<_>, _>>()?;
    args.data.csv_options()?;
    let metric = Metric::by_name(&args.data.metric)?;
    let inputs: Vec<CompareInput> = args
        .input
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            let dataset = args.data.load(path).map_err(|e| e.to_string());
            if let Err(e) = &dataset {
                eprintln!("warning: {}: {e}", path.display());
            }
            CompareInput { name, dataset }
        })
        .collect();
    let mut opts = CompareOptions::new(args.solver.k as usize, algorithms);
    opts.metric = metric;
    opts.cache_budget_bytes = args.data.cache_budget;
    opts.run = args.solver.run_options();
    let rows = compare(&inputs, &opts);
    for row in &rows {
        for r in &row.results {
            if let Some(e) = &r.error {
                eprintln!("warning: {} / {}: {e}", row.dataset, r.algorithm);
            }
        }
        if let Some(v) = &row.invariant_violation {
            eprintln!("error: {}: {v}", row.dataset);
        }
    }
    match args.format {
        Format::Json => write_json(args.out.as_deref(), &rows)?,
        Format::Csv => {
            let mut out = open_output(args.out.as_deref())?;
            write_compare_csv(&mut out, &rows)?;
            out.flush()?;
        }
    }
    if rows.iter().any(|r| r.error.is_some()) {
        return Err(Failure {
            code: 3,
            message: "one or more datasets failed to load".into(),
        });
    }
    Ok(())
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), Failure> {
    let mut config = ScalingConfig::new(args.k as usize, args.sizes.clone(), args.reps, args.seed);
    config.d = args.dim;
    config.metric = Metric::by_name(&args.metric)?;
    config.parallel = args.parallel;
    config.memory_budget_bytes = args.memory_budget;
    let report = run_scaling(&config)?;
    for w in &report.warnings {
        eprintln!("warning: skipped K={} N={}: {}", w.k, w.n, w.message);
    }
    match args.format {
        Format::Csv => {
            let mut out = open_output(args.out.as_deref())?;
            write_scaling_csv(&mut out, &report.records)?;
            out.flush()?;
            Ok(())
        }
        Format::Json => write_json(args.out.as_deref(), &report),
    }
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let file = File::open(&args.input).map_err(|source| Error::Io {
        path: args.input.clone(),
        source,
    })?;
    let records = read_scaling_csv(file)?;
    let summary = summarize(&records, &[])?;
    write_json(args.out.as_deref(), &summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bench(BenchCommand::Scaling(a)) => cmd_scaling(a),
        Command::Bench(BenchCommand::Fit(a)) => cmd_fit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
