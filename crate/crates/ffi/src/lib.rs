//! C ABI over the `oksvm` crate.
//!
//! Datasets and models are opaque heap handles created by `*_new`, `*_load`
//! or `oksvm_train_*` and released with the matching `*_free`. Every fallible
//! function returns an [`OksvmStatus`]; on failure a description is
//! available from [`oksvm_last_error_message`] on the same thread.
//!
//! No function unwinds across the boundary: panics are caught and reported
//! as [`OksvmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use oksvm::dataset::{generate_synthetic, load_csv, split_train_test, Dataset, LoadOptions, SyntheticConfig};
use oksvm::error::Error;
use oksvm::harness::evaluate_model;
use oksvm::model_io::{load_model, save_model};
use oksvm::optimizer::{train_oksvm, train_svm_baseline, OksvmConfig, Termination};
use oksvm::solver::{SolverConfig, SvmModel};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OksvmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    SingleClass = 4,
    DegenerateModel = 5,
    DimensionMismatch = 6,
    Io = 7,
    Format = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OksvmTermination {
    /// Not an OKSVM run.
    None = 0,
    Converged = 1,
    GammaExceeded = 2,
    Stagnated = 3,
    StepCap = 4,
}

/// Opaque dataset handle.
pub struct OksvmDataset {
    inner: Dataset,
}

/// Opaque model handle.
pub struct OksvmModel {
    inner: SvmModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OksvmSolverOptions {
    pub kkt_tolerance: f64,
    /// Pair updates per solve; 0 selects `10 * N^2`.
    pub max_iterations: usize,
    pub support_threshold: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OksvmOptions {
    pub gamma0: f64,
    pub eta0: f64,
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    pub gamma_max: f64,
    pub epsilon: f64,
    pub ws_limit: usize,
    pub max_outer_steps: usize,
    pub warm_start: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OksvmTrainReport {
    pub final_gamma: f64,
    pub outer_steps: usize,
    pub terminated_by: OksvmTermination,
    /// Solver converged and the outer loop did not stop on the step cap.
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OksvmMetrics {
    pub acc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> OksvmStatus {
    match err {
        Error::InvalidConfig(_) | Error::UnknownMetric(_) => OksvmStatus::InvalidArgument,
        Error::SingleClass | Error::SingleLabel => OksvmStatus::SingleClass,
        Error::DegenerateModel => OksvmStatus::DegenerateModel,
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => OksvmStatus::DimensionMismatch,
        Error::Io { .. } => OksvmStatus::Io,
        Error::ModelFormat(_) | Error::ResultFormat(_) | Error::Csv(_) => OksvmStatus::Format,
        _ => OksvmStatus::InvalidData,
    }
}

struct Failure(OksvmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OksvmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OksvmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OksvmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OksvmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(OksvmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn dataset_ref<'a>(p: *const OksvmDataset) -> Result<&'a Dataset, Failure> {
    p.as_ref().map(|d| &d.inner).ok_or_else(|| null("dataset"))
}

unsafe fn model_ref<'a>(p: *const OksvmModel) -> Result<&'a SvmModel, Failure> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

fn boxed_dataset(ds: Dataset) -> *mut OksvmDataset {
    Box::into_raw(Box::new(OksvmDataset { inner: ds }))
}

fn boxed_model(m: SvmModel) -> *mut OksvmModel {
    Box::into_raw(Box::new(OksvmModel { inner: m }))
}

/// Message for the most recent failure on this thread, or null after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn oksvm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `n_samples * n_features` row-major values and `n_samples` labels
/// (each -1 or +1) into a new dataset.
///
/// # Safety
/// `features` and `labels` must point to arrays of the stated lengths and
/// `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_new(
    features: *const f64,
    n_samples: usize,
    n_features: usize,
    labels: *const i8,
    out: *mut *mut OksvmDataset,
) -> OksvmStatus {
    guard(|| {
        if features.is_null() || labels.is_null() {
            return Err(null("features or labels"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n_samples
            .checked_mul(n_features)
            .ok_or_else(|| Failure(OksvmStatus::InvalidArgument, "size overflow".into()))?;
        let x = std::slice::from_raw_parts(features, len).to_vec();
        let y = std::slice::from_raw_parts(labels, n_samples).to_vec();
        *out = boxed_dataset(Dataset::new(x, n_features, y)?);
        Ok(())
    })
}

/// Two balanced Gaussian blobs with centres `2 * sep` apart.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_generate(
    n_samples: usize,
    dim: usize,
    sep: f64,
    seed: u64,
    out: *mut *mut OksvmDataset,
) -> OksvmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ds = generate_synthetic(&SyntheticConfig {
            n_samples,
            dim,
            sep,
            seed,
        })?;
        *out = boxed_dataset(ds);
        Ok(())
    })
}

/// Loads a headered CSV; rows whose `label_column` equals `positive_label`
/// become +1, all others -1.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings and `out` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    positive_label: *const c_char,
    out: *mut *mut OksvmDataset,
) -> OksvmStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let label = str_arg(label_column, "label_column")?;
        let positive = str_arg(positive_label, "positive_label")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = boxed_dataset(load_csv(&path, &LoadOptions::new(label, positive))?);
        Ok(())
    })
}

/// Stratified split into two new datasets.
///
/// # Safety
/// `ds` must be a live dataset handle; `train` and `test` must point to
/// writable storage for one pointer each.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_split(
    ds: *const OksvmDataset,
    test_fraction: f64,
    seed: u64,
    train: *mut *mut OksvmDataset,
    test: *mut *mut OksvmDataset,
) -> OksvmStatus {
    guard(|| {
        let ds = dataset_ref(ds)?;
        if train.is_null() || test.is_null() {
            return Err(null("train or test"));
        }
        let (a, b) = split_train_test(ds, test_fraction, true, seed)?;
        *train = boxed_dataset(a);
        *test = boxed_dataset(b);
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_n_samples(ds: *const OksvmDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_samples())
}

/// Number of features, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_n_features(ds: *const OksvmDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_features())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oksvm_dataset_free(ds: *mut OksvmDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

#[no_mangle]
pub extern "C" fn oksvm_solver_options_default() -> OksvmSolverOptions {
    let d = SolverConfig::default();
    OksvmSolverOptions {
        kkt_tolerance: d.kkt_tolerance,
        max_iterations: 0,
        support_threshold: d.support_threshold,
    }
}

#[no_mangle]
pub extern "C" fn oksvm_options_default() -> OksvmOptions {
    let d = OksvmConfig::default();
    OksvmOptions {
        gamma0: d.gamma0,
        eta0: d.eta0,
        zeta_plus: d.zeta_plus,
        zeta_minus: d.zeta_minus,
        gamma_max: d.gamma_max,
        epsilon: d.epsilon,
        ws_limit: d.ws_limit,
        max_outer_steps: d.max_outer_steps,
        warm_start: d.warm_start,
    }
}

fn solver_config(opts: Option<&OksvmSolverOptions>) -> SolverConfig {
    let d = SolverConfig::default();
    match opts {
        None => d,
        Some(o) => SolverConfig {
            kkt_tolerance: o.kkt_tolerance,
            max_iterations: (o.max_iterations > 0).then_some(o.max_iterations),
            support_threshold: o.support_threshold,
            ..d
        },
    }
}

fn oksvm_config(o: &OksvmOptions) -> OksvmConfig {
    OksvmConfig {
        gamma0: o.gamma0,
        eta0: o.eta0,
        zeta_plus: o.zeta_plus,
        zeta_minus: o.zeta_minus,
        gamma_max: o.gamma_max,
        epsilon: o.epsilon,
        ws_limit: o.ws_limit,
        max_outer_steps: o.max_outer_steps,
        warm_start: o.warm_start,
        ..OksvmConfig::default()
    }
}

/// Plain SVM at fixed `(c, gamma)`. `solver` may be null for defaults.
///
/// # Safety
/// `train` must be a live dataset handle, `solver` null or valid, and `out`
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn oksvm_train_svm(
    train: *const OksvmDataset,
    c: f64,
    gamma: f64,
    solver: *const OksvmSolverOptions,
    out: *mut *mut OksvmModel,
) -> OksvmStatus {
    guard(|| {
        let ds = dataset_ref(train)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let model = train_svm_baseline(ds, c, gamma, &solver_config(solver.as_ref()))?;
        *out = boxed_model(model);
        Ok(())
    })
}

/// SVM with the kernel width learned from `options.gamma0`. `options` and
/// `solver` may be null for defaults; `report` may be null.
///
/// # Safety
/// `train` must be a live dataset handle, the option pointers null or
/// valid, `out` writable storage for one pointer and `report` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn oksvm_train_oksvm(
    train: *const OksvmDataset,
    c: f64,
    options: *const OksvmOptions,
    solver: *const OksvmSolverOptions,
    out: *mut *mut OksvmModel,
    report: *mut OksvmTrainReport,
) -> OksvmStatus {
    guard(|| {
        let ds = dataset_ref(train)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = options.as_ref().map_or_else(OksvmConfig::default, oksvm_config);
        let (model, state) = train_oksvm(ds, c, &config, &solver_config(solver.as_ref()))?;
        if let Some(r) = report.as_mut() {
            let terminated_by = match state.terminated_by {
                None => OksvmTermination::None,
                Some(Termination::Converged) => OksvmTermination::Converged,
                Some(Termination::GammaExceeded) => OksvmTermination::GammaExceeded,
                Some(Termination::Stagnated) => OksvmTermination::Stagnated,
                Some(Termination::StepCap) => OksvmTermination::StepCap,
            };
            *r = OksvmTrainReport {
                final_gamma: model.gamma,
                outer_steps: state.t,
                terminated_by,
                converged: model.converged && terminated_by != OksvmTermination::StepCap,
            };
        }
        *out = boxed_model(model);
        Ok(())
    })
}

/// Writes one decision value per row of the row-major `features` matrix.
///
/// # Safety
/// `model` must be a live model handle, `features` must hold
/// `n_rows * n_features` values and `out` room for `n_rows` values.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_decision_values(
    model: *const OksvmModel,
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    out: *mut f64,
) -> OksvmStatus {
    guard(|| {
        let m = model_ref(model)?;
        if features.is_null() || out.is_null() {
            return Err(null("features or out"));
        }
        let x = std::slice::from_raw_parts(features, n_rows * n_features);
        let scores = m.decision_values(x, n_features)?;
        std::slice::from_raw_parts_mut(out, n_rows).copy_from_slice(&scores);
        Ok(())
    })
}

/// Writes one label (-1 or +1) per row; a score of exactly 0 gives +1.
///
/// # Safety
/// As for [`oksvm_model_decision_values`], with `out` holding `n_rows` bytes.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_predict(
    model: *const OksvmModel,
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    out: *mut i8,
) -> OksvmStatus {
    guard(|| {
        let m = model_ref(model)?;
        if features.is_null() || out.is_null() {
            return Err(null("features or out"));
        }
        let x = std::slice::from_raw_parts(features, n_rows * n_features);
        let labels = m.predict(x, n_features)?;
        std::slice::from_raw_parts_mut(out, n_rows).copy_from_slice(&labels);
        Ok(())
    })
}

/// Scores `test` and fills `out` with all metrics.
///
/// # Safety
/// `model` and `test` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_evaluate(
    model: *const OksvmModel,
    test: *const OksvmDataset,
    out: *mut OksvmMetrics,
) -> OksvmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let ds = dataset_ref(test)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = evaluate_model(m, ds)?;
        *out = OksvmMetrics {
            acc: r.acc,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            auc: r.auc,
            tp: r.tp,
            fp: r.fp,
            tn: r.tn,
            fn_: r.fn_,
        };
        Ok(())
    })
}

/// Kernel width of the model, or NaN for a null handle.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_gamma(model: *const OksvmModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.inner.gamma)
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_c(model: *const OksvmModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.inner.c)
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_bias(model: *const OksvmModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.inner.bias)
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_n_support(model: *const OksvmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.n_support())
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_n_features(model: *const OksvmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.n_features)
}

/// # Safety
/// `model` must be a live model handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_save(model: *const OksvmModel, path: *const c_char) -> OksvmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let path = PathBuf::from(str_arg(path, "path")?);
        save_model(m, &path)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_load(path: *const c_char, out: *mut *mut OksvmModel) -> OksvmStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = boxed_model(load_model(&path)?);
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oksvm_model_free(model: *mut OksvmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
