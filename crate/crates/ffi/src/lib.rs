//! C ABI over the `smerc` library.
//!
//! Objects are opaque handles created by `*_new`, `*_load` or `smerc_cluster`
//! and released with the matching `*_free`. Fallible calls return a
//! [`SmercStatus`]; on failure `smerc_last_error_message` describes the
//! error for the calling thread. Strings returned by accessors are borrowed
//! from their handle and stay valid until it is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smerc::eval::evaluate;
use smerc::{
    analyze_gaps, calibrate_tp, load_corpus, read_corpus, write_report, ClusterRun, Corpus,
    DecayFit, Error, EvalResult, LoadOptions, Pipeline, RunConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmercStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    OutOfRange = 3,
    Io = 4,
    Parse = 5,
    Config = 6,
    NoLabels = 7,
    NoDecay = 8,
    InsufficientData = 9,
    Internal = 10,
    Panic = 11,
}

impl From<&Error> for SmercStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => SmercStatus::Io,
            Error::MalformedLine { .. }
            | Error::MissingField { .. }
            | Error::DuplicateId { .. }
            | Error::EmptyCorpus
            | Error::Json(_) => SmercStatus::Parse,
            Error::Config { .. } | Error::InvalidSynthetic(_) => SmercStatus::Config,
            Error::NoLabels => SmercStatus::NoLabels,
            Error::NoDecay { .. } => SmercStatus::NoDecay,
            Error::EmptyVocabulary
            | Error::TooFewBuckets { .. }
            | Error::TooFewSamples { .. }
            | Error::ZeroVariance
            | Error::TooFewPoints { .. } => SmercStatus::InsufficientData,
            _ => SmercStatus::Internal,
        }
    }
}

/// Run configuration handle.
pub struct SmercConfig(RunConfig);

/// Loaded corpus handle.
pub struct SmercCorpus(Corpus);

/// Clustering result handle.
pub struct SmercClusterRun {
    run: ClusterRun,
    exemplar_ids: Vec<CString>,
    member_ids: Vec<Vec<CString>>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmercDecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub buckets_used: usize,
    pub related_pairs: usize,
    pub unrelated_pairs: usize,
    /// `-1 / slope`, or NaN when `has_recommendation` is false.
    pub recommended_t_p: f64,
    pub has_recommendation: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmercEvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// NaN when no surviving cluster has a labeled member.
    pub quality_mean: f64,
    pub clusters_linked: usize,
    pub clusters_total: usize,
    pub events_detected: usize,
    pub events_missed: usize,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub f1_defined: bool,
}

impl From<EvalResult> for SmercEvalResult {
    fn from(r: EvalResult) -> Self {
        SmercEvalResult {
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            quality_mean: r.quality_mean.unwrap_or(f64::NAN),
            clusters_linked: r.clusters_linked,
            clusters_total: r.clusters_total,
            events_detected: r.events_detected,
            events_missed: r.events_missed,
            precision_defined: r.precision_defined,
            recall_defined: r.recall_defined,
            f1_defined: r.f1_defined,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(SmercStatus);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Failure(SmercStatus::from(&e))
    }
}

fn fail(status: SmercStatus, msg: &str) -> Failure {
    set_error(msg);
    Failure(status)
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SmercStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmercStatus::Ok,
        Ok(Err(Failure(status))) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SmercStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(SmercStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(SmercStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(SmercStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SmercStatus::InvalidUtf8, &format!("{what} is not UTF-8")))
}

fn c_string(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior NULs replaced")
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn smerc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next library call on the same thread.
#[no_mangle]
pub extern "C" fn smerc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// New configuration holding the built-in defaults.
#[no_mangle]
pub extern "C" fn smerc_config_new() -> *mut SmercConfig {
    Box::into_raw(Box::new(SmercConfig(RunConfig::default())))
}

/// Sets one configuration key from its text form, as in a config file.
/// The whole configuration is validated before it is accepted.
///
/// # Safety
/// `config` must come from `smerc_config_new`; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn smerc_config_set(
    config: *mut SmercConfig,
    key: *const c_char,
    value: *const c_char,
) -> SmercStatus {
    guard(|| {
        let cfg = out_ptr(config, "config")?;
        let key = string(key, "key")?;
        let value = string(value, "value")?;
        let mut next = cfg.0.clone();
        next.set(key, value)?;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// # Safety
/// `config` must come from `smerc_config_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_config_free(config: *mut SmercConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Loads a JSON Lines corpus from `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smerc_corpus_load(
    path: *const c_char,
    out: *mut *mut SmercCorpus,
) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let corpus = load_corpus(string(path, "path")?)?;
        *out = Box::into_raw(Box::new(SmercCorpus(corpus)));
        Ok(())
    })
}

/// Parses a JSON Lines corpus held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smerc_corpus_from_jsonl(
    text: *const c_char,
    out: *mut *mut SmercCorpus,
) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = string(text, "text")?;
        let (corpus, _) = read_corpus(Cursor::new(text), "<memory>", &LoadOptions::default())?;
        *out = Box::into_raw(Box::new(SmercCorpus(corpus)));
        Ok(())
    })
}

/// Number of tweets, or 0 for NULL.
///
/// # Safety
/// `corpus` must be a live corpus handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_corpus_len(corpus: *const SmercCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `corpus` must be a live corpus handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_corpus_free(corpus: *mut SmercCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Runs the full clustering pipeline. `config` may be NULL for defaults.
///
/// # Safety
/// Handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smerc_cluster(
    corpus: *const SmercCorpus,
    config: *const SmercConfig,
    out: *mut *mut SmercClusterRun,
) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let corpus = borrow(corpus, "corpus")?;
        let cfg = config
            .as_ref()
            .map_or_else(RunConfig::default, |c| c.0.clone());
        let run = Pipeline::new(cfg)?.run(&corpus.0)?;
        let exemplar_ids = run
            .clusters
            .iter()
            .map(|c| c_string(&c.exemplar.id))
            .collect();
        let member_ids = run
            .clusters
            .iter()
            .map(|c| c.members.iter().map(|t| c_string(&t.id)).collect())
            .collect();
        *out = Box::into_raw(Box::new(SmercClusterRun {
            run,
            exemplar_ids,
            member_ids,
        }));
        Ok(())
    })
}

/// Clusters surviving the cohesion filter.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_num_clusters(run: *const SmercClusterRun) -> usize {
    run.as_ref().map_or(0, |r| r.run.clusters.len())
}

/// Clusters produced by affinity propagation before filtering.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_clusters_before(run: *const SmercClusterRun) -> usize {
    run.as_ref().map_or(0, |r| r.run.clusters_before())
}

/// Member count of surviving cluster `k`, or 0 when out of range.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_cluster_size(run: *const SmercClusterRun, k: usize) -> usize {
    run.as_ref()
        .and_then(|r| r.run.clusters.get(k))
        .map_or(0, |c| c.len())
}

/// Average internal affinity of surviving cluster `k`, NaN when out of range.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_cluster_affinity(run: *const SmercClusterRun, k: usize) -> f64 {
    run.as_ref()
        .and_then(|r| r.run.clusters.get(k))
        .map_or(f64::NAN, |c| c.average_affinity)
}

/// Exemplar tweet id of cluster `k`, or NULL when out of range.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_cluster_exemplar_id(
    run: *const SmercClusterRun,
    k: usize,
) -> *const c_char {
    run.as_ref()
        .and_then(|r| r.exemplar_ids.get(k))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Tweet id of member `j` of cluster `k`, or NULL when out of range.
///
/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_cluster_member_id(
    run: *const SmercClusterRun,
    k: usize,
    j: usize,
) -> *const c_char {
    run.as_ref()
        .and_then(|r| r.member_ids.get(k))
        .and_then(|m| m.get(j))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Writes `clusters.csv`, `summary.json` and `manifest.json` into `dir`.
///
/// # Safety
/// Handles must be live; `dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_write_report(
    run: *const SmercClusterRun,
    corpus: *const SmercCorpus,
    dir: *const c_char,
) -> SmercStatus {
    guard(|| {
        let run = borrow(run, "run")?;
        let corpus = borrow(corpus, "corpus")?;
        let dir = string(dir, "dir")?;
        write_report(&run.run, &corpus.0, dir)?.write(dir)?;
        Ok(())
    })
}

/// Scores the run's surviving clusters against the corpus labels.
///
/// # Safety
/// Handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_evaluate(
    run: *const SmercClusterRun,
    corpus: *const SmercCorpus,
    out: *mut SmercEvalResult,
) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let run = borrow(run, "run")?;
        let corpus = borrow(corpus, "corpus")?;
        *out = evaluate(&run.run, &corpus.0)?.into();
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn smerc_run_free(run: *mut SmercClusterRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

fn decay_fit(fit: &DecayFit, related: usize, unrelated: usize) -> SmercDecayFit {
    let t_p = calibrate_tp(fit).ok();
    SmercDecayFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        buckets_used: fit.buckets_used,
        related_pairs: related,
        unrelated_pairs: unrelated,
        recommended_t_p: t_p.unwrap_or(f64::NAN),
        has_recommendation: t_p.is_some(),
    }
}

/// Fits the log-linear relatedness decay of a labeled corpus. A flat or
/// rising curve is not an error: `has_recommendation` is then false.
///
/// # Safety
/// Handles must be live (`config` may be NULL); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn smerc_analyze_gaps(
    corpus: *const SmercCorpus,
    config: *const SmercConfig,
    out: *mut SmercDecayFit,
) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let corpus = borrow(corpus, "corpus")?;
        let cfg = config
            .as_ref()
            .map_or_else(RunConfig::default, |c| c.0.clone());
        let a = analyze_gaps(&corpus.0, &cfg)?;
        *out = decay_fit(
            &a.fit,
            a.sample.related_gaps.len(),
            a.sample.unrelated_gaps.len(),
        );
        Ok(())
    })
}

/// `T_p = -1 / slope`; fails with `NO_DECAY` unless the slope is negative.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smerc_calibrate_tp(slope: f64, out: *mut f64) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let fit = DecayFit {
            slope,
            intercept: 0.0,
            r_squared: 1.0,
            buckets_used: 0,
            zero_probability_buckets: Vec::new(),
        };
        *out = calibrate_tp(&fit)?;
        Ok(())
    })
}

/// Precision, recall and F1 from raw link counts.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smerc_precision_recall(
    clusters_linked: usize,
    clusters_total: usize,
    events_detected: usize,
    events_missed: usize,
    out: *mut SmercEvalResult,
) -> SmercStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if clusters_linked > clusters_total {
            return Err(fail(
                SmercStatus::OutOfRange,
                "clusters_linked exceeds clusters_total",
            ));
        }
        *out = EvalResult::from_counts(
            clusters_linked,
            clusters_total,
            events_detected,
            events_missed,
        )
        .into();
        Ok(())
    })
}
