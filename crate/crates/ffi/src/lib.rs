//! C ABI for the joinmi library: opaque handles over tables and sketches,
//! integer error codes, and a thread-local last-error message.
//!
//! All functions returning `JmiStatus` set the thread-local error message
//! on failure; fetch it with `jmi_last_error`. Handles are created and
//! destroyed by this library only; passing foreign pointers is undefined
//! behavior. NULL handles are rejected with `JMI_STATUS_INVALID_ARGUMENT`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use joinmi::aggregate::AggregateKind;
use joinmi::estimators::{estimate_dispatched, estimate_with, MiEstimator};
use joinmi::sketch::{build_sketch, join_sketches, Sketch, SketchMethod, SketchSide};
use joinmi::table::{full_left_join, load_csv, TwoColumnTable};

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmiStatus {
    JmiStatusOk = 0,
    JmiStatusIoError = 1,
    JmiStatusParseError = 2,
    JmiStatusInvalidArgument = 3,
    JmiStatusEmptyJoin = 4,
    JmiStatusEstimatorError = 5,
    JmiStatusOtherError = 99,
}

/// Sketch construction methods.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmiMethod {
    JmiMethodTupsk = 0,
    JmiMethodLv2sk = 1,
    JmiMethodPrisk = 2,
    JmiMethodIndsk = 3,
    JmiMethodCsk = 4,
}

/// Which table side a sketch summarizes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmiSide {
    JmiSideTrain = 0,
    JmiSideAug = 1,
}

/// Aggregate applied to repeated aug-side keys.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmiAgg {
    JmiAggAvg = 0,
    JmiAggSum = 1,
    JmiAggMin = 2,
    JmiAggMax = 3,
    JmiAggCount = 4,
    JmiAggMode = 5,
    JmiAggFirst = 6,
}

/// Estimator selector; Auto applies the type-based dispatch rule.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmiEstimator {
    JmiEstimatorAuto = 0,
    JmiEstimatorMle = 1,
    JmiEstimatorKsg = 2,
    JmiEstimatorMixedKsg = 3,
    JmiEstimatorDcKsg = 4,
}

/// Opaque table handle.
pub struct JmiTable {
    inner: TwoColumnTable,
}

/// Opaque sketch handle.
pub struct JmiSketch {
    inner: Sketch,
}

/// A completed estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct JmiEstimate {
    /// Mutual information in nats.
    pub value_nats: f64,
    /// Sample size the estimate was computed on.
    pub n: usize,
    /// Estimator actually used (never Auto).
    pub estimator: JmiEstimator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(err: &joinmi::Error) -> JmiStatus {
    let message = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    match err {
        joinmi::Error::Io { .. } => JmiStatus::JmiStatusIoError,
        joinmi::Error::Csv { .. } | joinmi::Error::SketchFormat(_) | joinmi::Error::Json(_) => {
            JmiStatus::JmiStatusParseError
        }
        joinmi::Error::InvalidParameter(_)
        | joinmi::Error::MissingColumn { .. }
        | joinmi::Error::HashContractMismatch { .. } => JmiStatus::JmiStatusInvalidArgument,
        joinmi::Error::EmptyJoin => JmiStatus::JmiStatusEmptyJoin,
        joinmi::Error::EstimatorInput { .. } | joinmi::Error::SampleTooSmall { .. } => {
            JmiStatus::JmiStatusEstimatorError
        }
        _ => JmiStatus::JmiStatusOtherError,
    }
}

fn set_error_message(message: &str) -> JmiStatus {
    let message = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
    JmiStatus::JmiStatusInvalidArgument
}

/// Copies the last error message for this thread into `buf` (NUL
/// terminated, truncated to `cap` bytes). Returns the full message length
/// excluding the terminator. Safe to call with `buf == NULL` to query the
/// length.
///
/// # Safety
/// `buf` must be NULL or valid for writes of `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn jmi_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, JmiStatus> {
    if ptr.is_null() {
        return Err(set_error_message(&format!("{name} must not be NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| set_error_message(&format!("{name} is not valid UTF-8")))
}

fn method_from(method: JmiMethod) -> SketchMethod {
    match method {
        JmiMethod::JmiMethodTupsk => SketchMethod::Tupsk,
        JmiMethod::JmiMethodLv2sk => SketchMethod::Lv2sk,
        JmiMethod::JmiMethodPrisk => SketchMethod::Prisk,
        JmiMethod::JmiMethodIndsk => SketchMethod::Indsk,
        JmiMethod::JmiMethodCsk => SketchMethod::Csk,
    }
}

fn agg_from(agg: JmiAgg) -> AggregateKind {
    match agg {
        JmiAgg::JmiAggAvg => AggregateKind::Avg,
        JmiAgg::JmiAggSum => AggregateKind::Sum,
        JmiAgg::JmiAggMin => AggregateKind::Min,
        JmiAgg::JmiAggMax => AggregateKind::Max,
        JmiAgg::JmiAggCount => AggregateKind::Count,
        JmiAgg::JmiAggMode => AggregateKind::Mode,
        JmiAgg::JmiAggFirst => AggregateKind::First,
    }
}

fn estimator_to(e: MiEstimator) -> JmiEstimator {
    match e {
        MiEstimator::Mle => JmiEstimator::JmiEstimatorMle,
        MiEstimator::Ksg => JmiEstimator::JmiEstimatorKsg,
        MiEstimator::MixedKsg => JmiEstimator::JmiEstimatorMixedKsg,
        MiEstimator::DcKsg => JmiEstimator::JmiEstimatorDcKsg,
    }
}

/// Loads a (key column, value column) pair from a CSV file.
///
/// # Safety
/// `path`, `key_column`, `value_column` must be NUL-terminated strings;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jmi_table_load_csv(
    path: *const c_char,
    key_column: *const c_char,
    value_column: *const c_char,
    delimiter: c_char,
    out: *mut *mut JmiTable,
) -> JmiStatus {
    if out.is_null() {
        return set_error_message("out must not be NULL");
    }
    let (path, key, value) = match (
        required_str(path, "path"),
        required_str(key_column, "key_column"),
        required_str(value_column, "value_column"),
    ) {
        (Ok(p), Ok(k), Ok(v)) => (p, k, v),
        (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
    };
    match load_csv(Path::new(path), key, value, delimiter as u8) {
        Ok(loaded) => {
            *out = Box::into_raw(Box::new(JmiTable {
                inner: loaded.table,
            }));
            JmiStatus::JmiStatusOk
        }
        Err(e) => set_error(&e),
    }
}

/// Number of rows in the table.
///
/// # Safety
/// `table` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jmi_table_len(table: *const JmiTable) -> usize {
    if table.is_null() {
        return 0;
    }
    (*table).inner.len()
}

/// Frees a table handle. NULL is a no-op.
///
/// # Safety
/// `table` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn jmi_table_free(table: *mut JmiTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Builds a sketch of a table side with the given budget.
///
/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jmi_sketch_build(
    table: *const JmiTable,
    method: JmiMethod,
    side: JmiSide,
    n: usize,
    agg: JmiAgg,
    seed: u64,
    out: *mut *mut JmiSketch,
) -> JmiStatus {
    if table.is_null() || out.is_null() {
        return set_error_message("table and out must not be NULL");
    }
    let side = match side {
        JmiSide::JmiSideTrain => SketchSide::Train,
        JmiSide::JmiSideAug => SketchSide::Aug,
    };
    match build_sketch(
        &(*table).inner,
        method_from(method),
        side,
        n,
        Some(agg_from(agg)),
        seed,
    ) {
        Ok(sketch) => {
            *out = Box::into_raw(Box::new(JmiSketch { inner: sketch }));
            JmiStatus::JmiStatusOk
        }
        Err(e) => set_error(&e),
    }
}

/// Number of entries in the sketch.
///
/// # Safety
/// `sketch` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jmi_sketch_len(sketch: *const JmiSketch) -> usize {
    if sketch.is_null() {
        return 0;
    }
    (*sketch).inner.len()
}

/// Writes the sketch as canonical JSON to `path`.
///
/// # Safety
/// `sketch` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn jmi_sketch_save_json(
    sketch: *const JmiSketch,
    path: *const c_char,
) -> JmiStatus {
    if sketch.is_null() {
        return set_error_message("sketch must not be NULL");
    }
    let path = match required_str(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    match std::fs::write(path, (*sketch).inner.to_json()) {
        Ok(()) => JmiStatus::JmiStatusOk,
        Err(e) => set_error(&joinmi::Error::Io {
            path: Path::new(path).to_path_buf(),
            source: e,
        }),
    }
}

/// Loads a sketch from a JSON file produced by `jmi_sketch_save_json` or
/// the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jmi_sketch_load_json(
    path: *const c_char,
    out: *mut *mut JmiSketch,
) -> JmiStatus {
    if out.is_null() {
        return set_error_message("out must not be NULL");
    }
    let path = match required_str(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return set_error(&joinmi::Error::Io {
                path: Path::new(path).to_path_buf(),
                source: e,
            })
        }
    };
    match Sketch::from_json(&text) {
        Ok(sketch) => {
            *out = Box::into_raw(Box::new(JmiSketch { inner: sketch }));
            JmiStatus::JmiStatusOk
        }
        Err(e) => set_error(&e),
    }
}

/// Frees a sketch handle. NULL is a no-op.
///
/// # Safety
/// `sketch` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn jmi_sketch_free(sketch: *mut JmiSketch) {
    if !sketch.is_null() {
        drop(Box::from_raw(sketch));
    }
}

fn run_estimate(
    sample: &joinmi::table::JoinedSample,
    estimator: JmiEstimator,
    k: usize,
    out: *mut JmiEstimate,
) -> JmiStatus {
    if sample.is_empty() {
        return set_error(&joinmi::Error::EmptyJoin);
    }
    let result = match estimator {
        JmiEstimator::JmiEstimatorAuto => estimate_dispatched(sample, k),
        JmiEstimator::JmiEstimatorMle => estimate_with(sample, MiEstimator::Mle, k),
        JmiEstimator::JmiEstimatorKsg => estimate_with(sample, MiEstimator::Ksg, k),
        JmiEstimator::JmiEstimatorMixedKsg => estimate_with(sample, MiEstimator::MixedKsg, k),
        JmiEstimator::JmiEstimatorDcKsg => estimate_with(sample, MiEstimator::DcKsg, k),
    };
    match result {
        Ok(estimate) => {
            unsafe {
                *out = JmiEstimate {
                    value_nats: estimate.value_nats,
                    n: estimate.n,
                    estimator: estimator_to(estimate.estimator),
                };
            }
            JmiStatus::JmiStatusOk
        }
        Err(e) => set_error(&e),
    }
}

/// Joins a train/aug sketch pair and estimates MI on the recovered
/// sample.
///
/// # Safety
/// `train` and `aug` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jmi_estimate_sketch_join(
    train: *const JmiSketch,
    aug: *const JmiSketch,
    estimator: JmiEstimator,
    k: usize,
    out: *mut JmiEstimate,
) -> JmiStatus {
    if train.is_null() || aug.is_null() || out.is_null() {
        return set_error_message("train, aug, and out must not be NULL");
    }
    let join = match join_sketches(&(*train).inner, &(*aug).inner) {
        Ok(j) => j,
        Err(e) => return set_error(&e),
    };
    run_estimate(&join.sample, estimator, k, out)
}

/// Materializes the full left join of two tables and estimates MI on it.
///
/// # Safety
/// `train` and `aug` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jmi_estimate_full_join(
    train: *const JmiTable,
    aug: *const JmiTable,
    agg: JmiAgg,
    estimator: JmiEstimator,
    k: usize,
    out: *mut JmiEstimate,
) -> JmiStatus {
    if train.is_null() || aug.is_null() || out.is_null() {
        return set_error_message("train, aug, and out must not be NULL");
    }
    let sample = match full_left_join(&(*train).inner, &(*aug).inner, agg_from(agg)) {
        Ok(s) => s,
        Err(e) => return set_error(&e),
    };
    run_estimate(&sample, estimator, k, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::io::Write;

    fn write_csv(dir: &Path, name: &str, contents: &str) -> CString {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        CString::new(path.to_str().unwrap()).unwrap()
    }

    #[test]
    fn end_to_end_through_the_c_api() {
        let dir = std::env::temp_dir().join("jmi-ffi-test");
        std::fs::create_dir_all(&dir).unwrap();
        let train_rows: String = std::iter::once("id,y\n".to_string())
            .chain((0..300).map(|i| format!("k{i},{}\n", if i % 2 == 0 { "a" } else { "b" })))
            .collect();
        let aug_rows: String = std::iter::once("id,x\n".to_string())
            .chain((0..300).map(|i| format!("k{i},{}\n", if i % 2 == 0 { "p" } else { "q" })))
            .collect();
        let train_path = write_csv(&dir, "train.csv", &train_rows);
        let aug_path = write_csv(&dir, "aug.csv", &aug_rows);
        let key = CString::new("id").unwrap();
        let train_val = CString::new("y").unwrap();
        let aug_val = CString::new("x").unwrap();

        unsafe {
            let mut train: *mut JmiTable = ptr::null_mut();
            let mut aug: *mut JmiTable = ptr::null_mut();
            assert_eq!(
                jmi_table_load_csv(
                    train_path.as_ptr(),
                    key.as_ptr(),
                    train_val.as_ptr(),
                    b',' as c_char,
                    &mut train
                ),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(
                jmi_table_load_csv(
                    aug_path.as_ptr(),
                    key.as_ptr(),
                    aug_val.as_ptr(),
                    b',' as c_char,
                    &mut aug
                ),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(jmi_table_len(train), 300);

            let mut train_sk: *mut JmiSketch = ptr::null_mut();
            let mut aug_sk: *mut JmiSketch = ptr::null_mut();
            assert_eq!(
                jmi_sketch_build(
                    train,
                    JmiMethod::JmiMethodTupsk,
                    JmiSide::JmiSideTrain,
                    128,
                    JmiAgg::JmiAggFirst,
                    0,
                    &mut train_sk
                ),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(
                jmi_sketch_build(
                    aug,
                    JmiMethod::JmiMethodTupsk,
                    JmiSide::JmiSideAug,
                    128,
                    JmiAgg::JmiAggFirst,
                    0,
                    &mut aug_sk
                ),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(jmi_sketch_len(train_sk), 128);

            let mut estimate = JmiEstimate {
                value_nats: 0.0,
                n: 0,
                estimator: JmiEstimator::JmiEstimatorAuto,
            };
            assert_eq!(
                jmi_estimate_sketch_join(
                    train_sk,
                    aug_sk,
                    JmiEstimator::JmiEstimatorAuto,
                    3,
                    &mut estimate
                ),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(estimate.estimator, JmiEstimator::JmiEstimatorMle);
            // y is a deterministic function of x: MI = H(y) = ln 2
            assert!((estimate.value_nats - 2f64.ln()).abs() < 0.05);

            let mut full = JmiEstimate {
                value_nats: 0.0,
                n: 0,
                estimator: JmiEstimator::JmiEstimatorAuto,
            };
            assert_eq!(
                jmi_estimate_full_join(
                    train,
                    aug,
                    JmiAgg::JmiAggFirst,
                    JmiEstimator::JmiEstimatorAuto,
                    3,
                    &mut full
                ),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(full.n, 300);
            assert!((full.value_nats - 2f64.ln()).abs() < 1e-9);

            // save / load round trip
            let sk_path =
                CString::new(dir.join("t.sketch.json").to_str().unwrap()).unwrap();
            assert_eq!(
                jmi_sketch_save_json(train_sk, sk_path.as_ptr()),
                JmiStatus::JmiStatusOk
            );
            let mut reloaded: *mut JmiSketch = ptr::null_mut();
            assert_eq!(
                jmi_sketch_load_json(sk_path.as_ptr(), &mut reloaded),
                JmiStatus::JmiStatusOk
            );
            assert_eq!(jmi_sketch_len(reloaded), 128);

            jmi_sketch_free(train_sk);
            jmi_sketch_free(aug_sk);
            jmi_sketch_free(reloaded);
            jmi_table_free(train);
            jmi_table_free(aug);
        }
    }

    #[test]
    fn errors_set_message_and_code() {
        let missing = CString::new("/nonexistent/file.csv").unwrap();
        let col = CString::new("k").unwrap();
        unsafe {
            let mut out: *mut JmiTable = ptr::null_mut();
            let status = jmi_table_load_csv(
                missing.as_ptr(),
                col.as_ptr(),
                col.as_ptr(),
                b',' as c_char,
                &mut out,
            );
            assert_ne!(status, JmiStatus::JmiStatusOk);
            let needed = jmi_last_error(ptr::null_mut(), 0);
            assert!(needed > 0);
            let mut buf = vec![0u8; needed + 1];
            jmi_last_error(buf.as_mut_ptr() as *mut c_char, buf.len());
            let msg = CStr::from_bytes_until_nul(&buf).unwrap();
            assert!(!msg.to_str().unwrap().is_empty());

            // NULL handle rejection
            let mut est = JmiEstimate {
                value_nats: 0.0,
                n: 0,
                estimator: JmiEstimator::JmiEstimatorAuto,
            };
            assert_eq!(
                jmi_estimate_sketch_join(
                    ptr::null(),
                    ptr::null(),
                    JmiEstimator::JmiEstimatorAuto,
                    3,
                    &mut est
                ),
                JmiStatus::JmiStatusInvalidArgument
            );
        }
    }
}
