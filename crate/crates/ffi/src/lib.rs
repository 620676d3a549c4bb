//! C ABI over the provenance engine.
//!
//! Every function returns a [`ProvStatus`]. On failure a message is kept in
//! thread-local storage and can be read with [`prov_last_error`]. Engines are
//! opaque handles created by `prov_engine_open`/`prov_engine_init` and
//! released with `prov_engine_free`; a handle may be shared across threads
//! for classification.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use provenance::classifier::ClassifyError;
use provenance::interchange::{EmbeddingVector, InterchangeError};
use provenance::ledger::{self, GasMode, GasModel, LedgerError};
use provenance::pipeline::{Engine, EngineConfig, EngineError, FrameworkMode, Prediction};
use provenance::vecstore::{self, StoreError};

/// Opaque engine handle.
pub struct ProvEngine(Engine);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Uninitialized = 4,
    DimensionMismatch = 5,
    ZeroVector = 6,
    NotDeterminable = 7,
    DataError = 8,
    LedgerCorrupt = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProvMode {
    HashOnly = 0,
    VectorOnly = 1,
    Hybrid = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProvPrediction {
    Ai = 0,
    Human = 1,
    Undetermined = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProvGasMode {
    Uint256 = 0,
    String = 1,
}

/// Fixed-layout classification result. Similarities are meaningful only
/// when `has_similarities`; `verified` only when `has_verified`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProvClassification {
    pub prediction: ProvPrediction,
    pub mode: ProvMode,
    pub has_similarities: bool,
    pub human_similarity: f64,
    pub ai_similarity: f64,
    pub has_verified: bool,
    pub verified: bool,
    pub conflict: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProvGasSummary {
    pub count: u64,
    pub mean: f64,
    pub median: f64,
    pub min: u64,
    pub max: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: ProvStatus, msg: impl Into<String>) -> ProvStatus {
    set_error(msg);
    status
}

fn status_of(e: &EngineError) -> ProvStatus {
    match e {
        EngineError::Uninitialized(_) => ProvStatus::Uninitialized,
        EngineError::Store(StoreError::DimensionMismatch { .. })
        | EngineError::Classify(ClassifyError::Store(StoreError::DimensionMismatch { .. })) => {
            ProvStatus::DimensionMismatch
        }
        EngineError::Interchange(InterchangeError::ZeroVector)
        | EngineError::Ledger(LedgerError::ZeroVector) => ProvStatus::ZeroVector,
        EngineError::Classify(ClassifyError::NotDeterminable(_)) => ProvStatus::NotDeterminable,
        EngineError::Ledger(LedgerError::Corrupt { .. } | LedgerError::BadHeader(_)) => {
            ProvStatus::LedgerCorrupt
        }
        EngineError::Io(_) => ProvStatus::Io,
        _ => ProvStatus::DataError,
    }
}

fn engine_fail(e: EngineError) -> ProvStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into `ProvStatus::Panic`. Clears the last error
/// on success.
fn guarded(f: impl FnOnce() -> ProvStatus) -> ProvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == ProvStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(_) => fail(ProvStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, ProvStatus> {
    if p.is_null() {
        return Err(fail(ProvStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ProvStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn vector_arg(p: *const f32, dim: usize) -> Result<EmbeddingVector, ProvStatus> {
    if p.is_null() {
        return Err(fail(ProvStatus::NullPointer, "components pointer is null"));
    }
    let slice = std::slice::from_raw_parts(p, dim);
    EmbeddingVector::new(slice.to_vec()).map_err(|e| fail(ProvStatus::InvalidArgument, e.to_string()))
}

fn mode_from(m: ProvMode) -> FrameworkMode {
    match m {
        ProvMode::HashOnly => FrameworkMode::HashOnly,
        ProvMode::VectorOnly => FrameworkMode::VectorOnly,
        ProvMode::Hybrid => FrameworkMode::Hybrid,
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn prov_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

fn open_with(out: *mut *mut ProvEngine, f: impl FnOnce() -> Result<Engine, EngineError>) -> ProvStatus {
    if out.is_null() {
        return fail(ProvStatus::NullPointer, "out is null");
    }
    match f() {
        Ok(engine) => {
            // SAFETY: checked non-null above.
            unsafe { *out = Box::into_raw(Box::new(ProvEngine(engine))) };
            ProvStatus::Ok
        }
        Err(e) => engine_fail(e),
    }
}

/// Opens an initialized data root using `<root>/provenance.toml` if present.
///
/// # Safety
/// `root` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prov_engine_open(root: *const c_char, out: *mut *mut ProvEngine) -> ProvStatus {
    guarded(|| {
        let root = match str_arg(root, "root") {
            Ok(r) => Path::new(r),
            Err(s) => return s,
        };
        open_with(out, || Engine::open(root, EngineConfig::load(root, None)?))
    })
}

/// Creates the collections (dimension `dim`) and ledgers under `root`.
///
/// # Safety
/// As for [`prov_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn prov_engine_init(
    root: *const c_char,
    dim: usize,
    out: *mut *mut ProvEngine,
) -> ProvStatus {
    guarded(|| {
        let root = match str_arg(root, "root") {
            Ok(r) => Path::new(r),
            Err(s) => return s,
        };
        open_with(out, || Engine::init(root, dim, EngineConfig::load(root, None)?))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `engine` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn prov_engine_free(engine: *mut ProvEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// # Safety
/// `engine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prov_engine_dim(engine: *const ProvEngine, out: *mut usize) -> ProvStatus {
    guarded(|| {
        if engine.is_null() || out.is_null() {
            return fail(ProvStatus::NullPointer, "engine or out is null");
        }
        *out = (*engine).0.dim();
        ProvStatus::Ok
    })
}

/// Ingests an embedding file into `collection` (`"ai"` or `"human"`) under
/// the configured namespace. `out_count` (nullable) receives the record count.
///
/// # Safety
/// `engine` must be a live handle; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn prov_engine_ingest_file(
    engine: *const ProvEngine,
    path: *const c_char,
    collection: *const c_char,
    out_count: *mut usize,
) -> ProvStatus {
    guarded(|| {
        if engine.is_null() {
            return fail(ProvStatus::NullPointer, "engine is null");
        }
        let (path, collection) = match (str_arg(path, "path"), str_arg(collection, "collection")) {
            (Ok(p), Ok(c)) => (p, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let e = &(*engine).0;
        match e.ingest_file(Path::new(path), collection, &e.config().namespace) {
            Ok(summary) => {
                if !out_count.is_null() {
                    *out_count = summary.records;
                }
                ProvStatus::Ok
            }
            Err(err) => engine_fail(err),
        }
    })
}

/// Classifies one embedding of `dim` components.
///
/// # Safety
/// `components` must point to `dim` floats; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prov_engine_classify(
    engine: *const ProvEngine,
    components: *const f32,
    dim: usize,
    mode: ProvMode,
    out: *mut ProvClassification,
) -> ProvStatus {
    guarded(|| {
        if engine.is_null() || out.is_null() {
            return fail(ProvStatus::NullPointer, "engine or out is null");
        }
        let v = match vector_arg(components, dim) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match (*engine).0.classify_with(&v, mode_from(mode)) {
            Ok(r) => {
                *out = ProvClassification {
                    prediction: match r.prediction {
                        Prediction::Ai => ProvPrediction::Ai,
                        Prediction::Human => ProvPrediction::Human,
                        Prediction::Undetermined => ProvPrediction::Undetermined,
                    },
                    mode,
                    has_similarities: r.ai_similarity.is_some(),
                    human_similarity: r.human_similarity.unwrap_or(0.0),
                    ai_similarity: r.ai_similarity.unwrap_or(0.0),
                    has_verified: r.verified.is_some(),
                    verified: r.verified.unwrap_or(false),
                    conflict: r.conflict,
                };
                ProvStatus::Ok
            }
            Err(e) => engine_fail(e),
        }
    })
}

/// Like [`prov_engine_classify`] but returns the full JSON response,
/// including nearest ids. Free the string with [`prov_string_free`].
///
/// # Safety
/// As for [`prov_engine_classify`]; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prov_engine_classify_json(
    engine: *const ProvEngine,
    components: *const f32,
    dim: usize,
    mode: ProvMode,
    out_json: *mut *mut c_char,
) -> ProvStatus {
    guarded(|| {
        if engine.is_null() || out_json.is_null() {
            return fail(ProvStatus::NullPointer, "engine or out_json is null");
        }
        let v = match vector_arg(components, dim) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match (*engine).0.classify_with(&v, mode_from(mode)) {
            Ok(r) => {
                let text = serde_json::to_string(&r).expect("response serializes");
                *out_json = CString::new(text).expect("no NUL in JSON").into_raw();
                ProvStatus::Ok
            }
            Err(e) => engine_fail(e),
        }
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn prov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// SHA-256 of the canonical serialization of a vector.
///
/// # Safety
/// `components` must point to `dim` floats; `out` to 32 writable bytes.
#[no_mangle]
pub unsafe extern "C" fn prov_embed_hash(components: *const f32, dim: usize, out: *mut u8) -> ProvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ProvStatus::NullPointer, "out is null");
        }
        let v = match vector_arg(components, dim) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match ledger::embed_hash(&v) {
            Ok(h) => {
                ptr::copy_nonoverlapping(h.as_bytes().as_ptr(), out, 32);
                ProvStatus::Ok
            }
            Err(e) => fail(ProvStatus::ZeroVector, e.to_string()),
        }
    })
}

/// Cosine distance in `[0, 2]`.
///
/// # Safety
/// `a` and `b` must each point to `dim` floats; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prov_cosine_distance(
    a: *const f32,
    b: *const f32,
    dim: usize,
    out: *mut f64,
) -> ProvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ProvStatus::NullPointer, "out is null");
        }
        let (a, b) = match (vector_arg(a, dim), vector_arg(b, dim)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match vecstore::cosine_distance(&a, &b) {
            Ok(d) => {
                *out = d;
                ProvStatus::Ok
            }
            Err(e) => fail(ProvStatus::ZeroVector, e.to_string()),
        }
    })
}

/// Verifies a ledger file. `first_bad_index` (nullable) receives the first
/// defective entry, or -1. A bad header returns `LEDGER_CORRUPT`.
///
/// # Safety
/// `path` NUL-terminated; `ok` writable.
#[no_mangle]
pub unsafe extern "C" fn prov_ledger_verify(
    path: *const c_char,
    ok: *mut bool,
    first_bad_index: *mut i64,
) -> ProvStatus {
    guarded(|| {
        if ok.is_null() {
            return fail(ProvStatus::NullPointer, "ok is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ledger::verify_chain(Path::new(path)) {
            Ok(status) => {
                *ok = status.ok;
                if !first_bad_index.is_null() {
                    *first_bad_index = status.first_bad_index.map_or(-1, |i| i as i64);
                }
                ProvStatus::Ok
            }
            Err(e) => engine_fail(EngineError::Ledger(e)),
        }
    })
}

/// Simulates `n` digest stores under the default gas model.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prov_gas_simulate(
    mode: ProvGasMode,
    n: usize,
    seed: u64,
    out: *mut ProvGasSummary,
) -> ProvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(ProvStatus::NullPointer, "out is null");
        }
        let mode = match mode {
            ProvGasMode::Uint256 => GasMode::Uint256,
            ProvGasMode::String => GasMode::String,
        };
        match ledger::simulate_gas(mode, n, &GasModel::default(), seed) {
            Ok(run) => {
                let s = run.summary;
                *out = ProvGasSummary {
                    count: s.count,
                    mean: s.mean,
                    median: s.median,
                    min: s.min,
                    max: s.max,
                };
                ProvStatus::Ok
            }
            Err(e) => fail(ProvStatus::InvalidArgument, e.to_string()),
        }
    })
}
