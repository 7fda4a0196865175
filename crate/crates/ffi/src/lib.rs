//! C ABI over the `ekm` crate.
//!
//! Every function returns an [`EkmStatus`]; on failure a message is kept per
//! thread and can be read with [`ekm_last_error_message`]. Handles are opaque
//! and must be released with their `_free` function. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ekm::{
    load_csv, rank_colex, standardize, unrank_colex, Algorithm, BaselineParams, Config, CsvOptions,
    Dataset, DistanceCache, Error, Metric, RunOptions, Solution,
};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    Infeasible = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

/// Opaque dataset handle.
pub struct EkmDataset(Dataset);

/// Opaque solution handle.
pub struct EkmSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let mut msg = message.into().into_bytes();
    msg.retain(|&b| b != 0);
    let c = CString::new(msg).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EkmStatus {
    match e {
        Error::InvalidArguments(_) | Error::UnknownMetric { .. } | Error::Index { .. } => {
            EkmStatus::InvalidArgument
        }
        e if e.is_infeasible() => EkmStatus::Infeasible,
        _ => EkmStatus::DataError,
    }
}

fn guard<F: FnOnce() -> Result<(), (EkmStatus, String)>>(f: F) -> EkmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EkmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EkmStatus::Internal
        }
    }
}

fn lib(e: Error) -> (EkmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (EkmStatus, String) {
    (EkmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EkmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (EkmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn ekm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `n * d` row-major values into a new dataset.
///
/// # Safety
/// `data` must point to `n * d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ekm_dataset_from_rows(
    data: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut EkmDataset,
) -> EkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if data.is_null() && n > 0 {
            return Err(null("data"));
        }
        let len = n
            .checked_mul(d)
            .ok_or((EkmStatus::InvalidArgument, "n * d overflows".to_string()))?;
        let values = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(data, len).to_vec()
        };
        let ds = Dataset::from_flat(values, d, "ffi").map_err(lib)?;
        *out = Box::into_raw(Box::new(EkmDataset(ds)));
        Ok(())
    })
}

/// Loads a numeric CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ekm_dataset_from_csv(
    path: *const c_char,
    has_header: bool,
    delimiter: u8,
    out: *mut *mut EkmDataset,
) -> EkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = c_str(path, "path")?;
        let ds = load_csv(
            path,
            CsvOptions {
                has_header,
                delimiter,
            },
        )
        .map_err(lib)?;
        *out = Box::into_raw(Box::new(EkmDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ekm_dataset_n(ds: *const EkmDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n())
}

/// # Safety
/// `ds` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ekm_dataset_d(ds: *const EkmDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.d())
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ekm_dataset_free(ds: *mut EkmDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Clusters `ds` into `k` medoids.
///
/// `algorithm` is one of "ekm", "oracle", "pam", "fasterpam", "clarans";
/// `metric` one of "sqeuclidean", "euclidean", "manhattan". NULL selects
/// "ekm" and "sqeuclidean" respectively. `seed` only affects the randomized
/// baselines.
///
/// # Safety
/// `ds` must be a live handle; string arguments NULL or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ekm_solve(
    ds: *const EkmDataset,
    k: usize,
    algorithm: *const c_char,
    metric: *const c_char,
    seed: u64,
    standardize_features: bool,
    out: *mut *mut EkmSolution,
) -> EkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let algorithm: Algorithm = if algorithm.is_null() {
            Algorithm::Ekm
        } else {
            c_str(algorithm, "algorithm")?.parse().map_err(lib)?
        };
        let metric = if metric.is_null() {
            Metric::default()
        } else {
            Metric::by_name(c_str(metric, "metric")?).map_err(lib)?
        };
        let prepared;
        let data = if standardize_features {
            prepared = standardize(&ds.0).map_err(lib)?;
            &prepared
        } else {
            &ds.0
        };
        let cache = DistanceCache::new(data, metric, ekm::metrics::DEFAULT_CACHE_BUDGET);
        let opts = RunOptions {
            baseline: BaselineParams::default().with_seed(seed),
            ..RunOptions::default()
        };
        let sol = algorithm.run(&cache, k, &opts).map_err(lib)?;
        *out = Box::into_raw(Box::new(EkmSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_objective(sol: *const EkmSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.objective)
}

/// Number of medoids.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_k(sol: *const EkmSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.medoid_indices.len())
}

/// Number of clustered points.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_n(sol: *const EkmSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.assignment.len())
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_evaluated_configurations(sol: *const EkmSolution) -> u64 {
    sol.as_ref().map_or(0, |s| s.0.evaluated_configurations)
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_wall_time_seconds(sol: *const EkmSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.wall_time_seconds)
}

unsafe fn copy_out(src: &[usize], buf: *mut usize, cap: usize) -> Result<(), (EkmStatus, String)> {
    if cap < src.len() {
        return Err((
            EkmStatus::BufferTooSmall,
            format!("buffer holds {cap}, need {}", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Copies the ascending medoid indices into `buf` (capacity `cap`).
///
/// # Safety
/// `sol` must be a live handle and `buf` writable for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_medoids(
    sol: *const EkmSolution,
    buf: *mut usize,
    cap: usize,
) -> EkmStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        copy_out(&s.0.medoid_indices, buf, cap)
    })
}

/// Copies, for every point, the position of its medoid within the medoid
/// list (a cluster label in `0..k`) into `buf`.
///
/// # Safety
/// `sol` must be a live handle and `buf` writable for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_assignment(
    sol: *const EkmSolution,
    buf: *mut usize,
    cap: usize,
) -> EkmStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        copy_out(&s.0.assignment, buf, cap)
    })
}

/// # Safety
/// `sol` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ekm_solution_free(sol: *mut EkmSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Colex rank of a strictly increasing index set.
///
/// # Safety
/// `indices` must hold `k` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ekm_rank_colex(
    indices: *const usize,
    k: usize,
    out: *mut u64,
) -> EkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let idx = if k == 0 {
            Vec::new()
        } else if indices.is_null() {
            return Err(null("indices"));
        } else {
            std::slice::from_raw_parts(indices, k).to_vec()
        };
        let config = Config::new(idx).map_err(lib)?;
        *out = rank_colex(&config).map_err(lib)?;
        Ok(())
    })
}

/// Writes the `k`-subset with colex rank `rank` into `out`.
///
/// # Safety
/// `out` must be writable for `k` elements.
#[no_mangle]
pub unsafe extern "C" fn ekm_unrank_colex(rank: u64, k: usize, out: *mut usize) -> EkmStatus {
    guard(|| {
        let config = unrank_colex(rank, k).map_err(lib)?;
        copy_out(config.indices(), out, k)
    })
}
