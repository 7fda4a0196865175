//! Row-major point matrices: CSV loading, z-score standardization and
//! seeded synthetic Gaussian mixtures.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// An immutable `n x d` matrix of finite reals, one row per data point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    source: String,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer of length `n * d`.
    pub fn from_flat(points: Vec<f64>, d: usize, source: impl Into<String>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArguments(
                "dimension must be at least 1".into(),
            ));
        }
        if !points.len().is_multiple_of(d) {
            return Err(Error::Shape {
                row: points.len() / d,
                expected: d,
                found: points.len() % d,
            });
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                column: pos % d,
            });
        }
        let n = points.len() / d;
        Ok(Self {
            points,
            n,
            d,
            source: source.into(),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], source: impl Into<String>) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?;
        let d = first.as_ref().len();
        let mut points = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::Shape {
                    row: i,
                    expected: d,
                    found: row.len(),
                });
            }
            points.extend_from_slice(row);
        }
        Self::from_flat(points, d, source)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// Writes the points as delimiter-separated text using shortest round-trip
    /// float formatting, so [`load_csv`] reproduces the matrix exactly.
    pub fn write_csv<W: Write>(
        &self,
        out: W,
        header: Option<&[&str]>,
        delimiter: u8,
    ) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(out);
        if let Some(header) = header {
            writer.write_record(header)?;
        }
        for row in self.rows() {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }
}

/// CSV reader options.
#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: false,
            delimiter: b',',
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, options, path.display().to_string())
}

/// Parses CSV from any reader. Row indices in errors count data rows from 0,
/// after the header.
pub fn read_csv<R: Read>(
    input: R,
    options: CsvOptions,
    source: impl Into<String>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut points = Vec::new();
    let mut width: Option<usize> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Shape {
                row,
                expected,
                found: record.len(),
            });
        }
        for (column, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column,
                cell: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite { row, column });
            }
            points.push(value);
        }
    }
    let d = width.ok_or(Error::EmptyDataset)?;
    if d == 0 || points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_flat(points, d, source)
}

/// Column-wise z-scores with the sample (n - 1) standard deviation.
/// Zero-variance columns become all zeros.
pub fn standardize(ds: &Dataset) -> Result<Dataset> {
    let (n, d) = (ds.n(), ds.d());
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "standardization needs at least 2 points, got {n}"
        )));
    }
    let mut mean = vec![0.0; d];
    for row in ds.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut var = vec![0.0; d];
    for row in ds.rows() {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let sd: Vec<f64> = var.iter().map(|s| (s / (n - 1) as f64).sqrt()).collect();

    let mut points = Vec::with_capacity(n * d);
    for row in ds.rows() {
        for ((v, m), s) in row.iter().zip(&mean).zip(&sd) {
            points.push(if *s > 0.0 { (v - m) / s } else { 0.0 });
        }
    }
    Dataset::from_flat(points, d, format!("standardize({})", ds.source()))
}

/// `n` points from an equal-size mixture of `k_true` unit-variance isotropic
/// Gaussians whose centers are uniform in `[0, 10]^d`. Point `i` belongs to
/// component `i % k_true`.
///
/// The generator is ChaCha8 seeded with `seed`; centers are drawn first, then
/// the per-point offsets in row order.
pub fn synthetic(n: usize, d: usize, k_true: usize, seed: u64) -> Result<Dataset> {
    if k_true == 0 || d == 0 || n < k_true {
        return Err(Error::InvalidArguments(format!(
            "synthetic needs n >= k_true >= 1 and d >= 1 (n={n}, d={d}, k_true={k_true})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<f64> = (0..k_true * d)
        .map(|_| rng.random_range(0.0..=10.0))
        .collect();
    let mut points = Vec::with_capacity(n * d);
    for i in 0..n {
        let center = &centers[(i % k_true) * d..(i % k_true + 1) * d];
        for c in center {
            let z: f64 = rng.sample(StandardNormal);
            points.push(c + z);
        }
    }
    Dataset::from_flat(
        points,
        d,
        format!("synthetic(n={n},d={d},k={k_true},seed={seed})"),
    )
}
