//! C ABI over `fifo-routes`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`FifoStatus`] and writes its result through an out-pointer only on
//! success. After a failure, [`fifo_last_error`] describes it on the same
//! thread. Strings handed out by the library are NUL-terminated UTF-8 and
//! must be released with [`fifo_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fifo_routes::format;
use fifo_routes::ingest::{generate_synthetic, load_gtfs, GeneratorSpec};
use fifo_routes::solve::{self, Algorithm, Solution, SolveError};
use fifo_routes::timetable::Timetable;
use fifo_routes::verify::{verify_certificate, verify_partition};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FifoStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidInput = 4,
    InvalidSpec = 5,
    SolverRefused = 6,
    Panic = 255,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FifoAlgorithm {
    Optimal = 0,
    Greedy = 1,
    Trivial = 2,
    Brute = 3,
}

impl From<FifoAlgorithm> for Algorithm {
    fn from(a: FifoAlgorithm) -> Self {
        match a {
            FifoAlgorithm::Optimal => Algorithm::Optimal,
            FifoAlgorithm::Greedy => Algorithm::Greedy,
            FifoAlgorithm::Trivial => Algorithm::Trivial,
            FifoAlgorithm::Brute => Algorithm::Brute,
        }
    }
}

/// Synthetic timetable parameters, mirroring `GeneratorSpec`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FifoGeneratorSpec {
    pub num_sequences: usize,
    pub trips_per_sequence: usize,
    pub stops_per_sequence: usize,
    pub headway_seconds: u32,
    pub jitter_seconds: u32,
    pub overtake_probability: f64,
    pub rng_seed: u64,
}

/// Outcome of [`fifo_verify`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FifoVerification {
    pub valid: bool,
    pub violations: usize,
    /// -1 when the partition carries no certificate, else 0 or 1.
    pub certificate_valid: i32,
}

/// An immutable timetable.
pub struct FifoTimetable(Timetable);

/// A route partition, with its optimality certificate when it has one.
pub struct FifoPartition(Solution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(FifoStatus, String);

impl Failure {
    fn new(status: FifoStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, storing its output in `out` on success and recording the error
/// message otherwise. Panics are caught and reported as `Panic`.
fn guard<T>(out: *mut T, f: impl FnOnce() -> Result<T, Failure>) -> FifoStatus {
    if out.is_null() {
        set_last_error("output pointer is null");
        return FifoStatus::NullArgument;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller promises it is
            // valid for a write of `T`.
            unsafe { out.write(v) };
            set_last_error("");
            FifoStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            FifoStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::new(FifoStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::new(FifoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or a live handle from this library.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(FifoStatus::NullArgument, format!("{what} is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("serialized output has no NUL").into_raw()
}

fn format_failure(e: format::FormatError) -> Failure {
    let status = match e {
        format::FormatError::Io { .. } => FifoStatus::Io,
        _ => FifoStatus::InvalidInput,
    };
    Failure::new(status, e)
}

/// Message for the last failed call on this thread; empty after a call that
/// returned `Ok`.
/// The pointer stays valid until the next call into the library on this
/// thread. Do not free it.
#[no_mangle]
pub extern "C" fn fifo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a timetable document.
///
/// # Safety
/// `json` must be null or NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_from_json(
    json: *const c_char,
    out: *mut *mut FifoTimetable,
) -> FifoStatus {
    guard(out, || {
        let text = read_str(json, "json")?;
        let tt = format::timetable_from_json(text).map_err(format_failure)?;
        Ok(Box::into_raw(Box::new(FifoTimetable(tt))))
    })
}

/// Reads a timetable file written by `fifo_timetable_to_json` or the CLI.
///
/// # Safety
/// `path` must be null or NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_load(
    path: *const c_char,
    out: *mut *mut FifoTimetable,
) -> FifoStatus {
    guard(out, || {
        let path = read_str(path, "path")?;
        let tt = format::load_timetable(Path::new(path)).map_err(format_failure)?;
        Ok(Box::into_raw(Box::new(FifoTimetable(tt))))
    })
}

/// Loads a GTFS directory. `dropped`, when non-null, receives the number of
/// trips skipped for bad data.
///
/// # Safety
/// `dir` must be null or NUL-terminated; `out` must be null or writable;
/// `dropped` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_load_gtfs(
    dir: *const c_char,
    out: *mut *mut FifoTimetable,
    dropped: *mut usize,
) -> FifoStatus {
    guard(out, || {
        let dir = read_str(dir, "dir")?;
        let (tt, report) = load_gtfs(Path::new(dir)).map_err(|e| {
            let status = match e {
                fifo_routes::ingest::IngestError::Io { .. } => FifoStatus::Io,
                _ => FifoStatus::InvalidInput,
            };
            Failure::new(status, e)
        })?;
        if !dropped.is_null() {
            *dropped = report.trips_dropped;
        }
        Ok(Box::into_raw(Box::new(FifoTimetable(tt))))
    })
}

/// Builds a seeded synthetic timetable.
///
/// # Safety
/// `spec` must be null or readable; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_generate(
    spec: *const FifoGeneratorSpec,
    out: *mut *mut FifoTimetable,
) -> FifoStatus {
    guard(out, || {
        let s = *handle(spec, "spec")?;
        let spec = GeneratorSpec {
            num_sequences: s.num_sequences,
            trips_per_sequence: s.trips_per_sequence,
            stops_per_sequence: s.stops_per_sequence,
            headway_seconds: s.headway_seconds,
            jitter_seconds: s.jitter_seconds,
            overtake_probability: s.overtake_probability,
            rng_seed: s.rng_seed,
        };
        spec.validate()
            .map_err(|e| Failure::new(FifoStatus::InvalidSpec, e))?;
        Ok(Box::into_raw(Box::new(FifoTimetable(generate_synthetic(&spec)))))
    })
}

/// # Safety
/// `tt` must be null or a live timetable handle.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_trip_count(tt: *const FifoTimetable) -> usize {
    tt.as_ref().map_or(0, |t| t.0.len())
}

/// Serializes a timetable to its canonical document.
///
/// # Safety
/// `tt` must be null or a live timetable handle; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_to_json(
    tt: *const FifoTimetable,
    out: *mut *mut c_char,
) -> FifoStatus {
    guard(out, || {
        let tt = handle(tt, "timetable")?;
        Ok(into_c_string(format::timetable_to_json(&tt.0)))
    })
}

/// # Safety
/// `tt` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fifo_timetable_free(tt: *mut FifoTimetable) {
    if !tt.is_null() {
        drop(Box::from_raw(tt));
    }
}

/// Partitions the timetable's trips into routes. `brute_limit` caps the
/// group size the brute-force solver accepts and is ignored otherwise.
///
/// # Safety
/// `tt` must be null or a live timetable handle; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_solve(
    tt: *const FifoTimetable,
    algorithm: FifoAlgorithm,
    brute_limit: usize,
    out: *mut *mut FifoPartition,
) -> FifoStatus {
    guard(out, || {
        let tt = handle(tt, "timetable")?;
        let sol = solve::solve(&tt.0, algorithm.into(), brute_limit).map_err(|e| match e {
            SolveError::AboveLimit { .. } => Failure::new(FifoStatus::SolverRefused, e),
            SolveError::NotASolver => Failure::new(FifoStatus::InvalidInput, e),
        })?;
        Ok(Box::into_raw(Box::new(FifoPartition(sol))))
    })
}

/// Parses an assignment document (JSON or CSV).
///
/// # Safety
/// `text` must be null or NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_partition_parse(
    text: *const c_char,
    out: *mut *mut FifoPartition,
) -> FifoStatus {
    guard(out, || {
        let text = read_str(text, "text")?;
        let sol = format::parse_assignment(text).map_err(format_failure)?;
        Ok(Box::into_raw(Box::new(FifoPartition(sol))))
    })
}

/// # Safety
/// `p` must be null or a live partition handle.
#[no_mangle]
pub unsafe extern "C" fn fifo_partition_route_count(p: *const FifoPartition) -> usize {
    p.as_ref().map_or(0, |p| p.0.partition.total_routes())
}

/// # Safety
/// `p` must be null or a live partition handle; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_partition_to_json(
    p: *const FifoPartition,
    out: *mut *mut c_char,
) -> FifoStatus {
    guard(out, || {
        let p = handle(p, "partition")?;
        Ok(into_c_string(format::assignment_to_json(&p.0)))
    })
}

/// # Safety
/// `p` must be null or a live partition handle; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_partition_to_csv(p: *const FifoPartition, out: *mut *mut c_char) -> FifoStatus {
    guard(out, || {
        let p = handle(p, "partition")?;
        Ok(into_c_string(format::assignment_to_csv(&p.0.partition)))
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fifo_partition_free(p: *mut FifoPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Checks that `p` covers `tt` with overtaking-free routes, and checks the
/// certificate when present. A failed check is not an error: the status is
/// `Ok` and `out.valid` is false.
///
/// # Safety
/// `tt` and `p` must be null or live handles; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fifo_verify(
    tt: *const FifoTimetable,
    p: *const FifoPartition,
    out: *mut FifoVerification,
) -> FifoStatus {
    guard(out, || {
        let tt = handle(tt, "timetable")?;
        let p = handle(p, "partition")?;
        let report =
            verify_partition(&p.0.partition, &tt.0).map_err(|e| Failure::new(FifoStatus::InvalidInput, e))?;
        let certificate_valid = match &p.0.certificate {
            None => -1,
            Some(c) => i32::from(verify_certificate(c, &p.0.partition, &tt.0)),
        };
        Ok(FifoVerification {
            valid: report.valid && certificate_valid != 0,
            violations: report.violations.len(),
            certificate_valid,
        })
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fifo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
