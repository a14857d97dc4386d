//! C bindings for the jpac solver.
//!
//! Every function is callable from C through the generated `include/jpac.h`
//! header. Handles returned by the constructors are opaque; release them with
//! the matching `_free` function exactly once. All functions are safe to call
//! with null handles and report [`JpacStatus::NullArgument`] (or return a
//! neutral value) instead of crashing.

use std::ffi::CStr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use jpac::channel::{generate_nominal, normalize, sample_perturbed, GenConfig, NormalizedProblem};
use jpac::deflation::{deflate, DeflateConfig, DeflationResult, RemovalRule, SolverKind};
use jpac::io::read_instance;
use jpac::rng::derive_seed;
use libc::{c_char, c_int};

/// Outcome of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JpacStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was malformed or out of range.
    InvalidArgument = 2,
    /// Reading the instance file failed.
    IoError = 3,
    /// A caller-provided buffer is shorter than the data to copy.
    BufferTooSmall = 4,
    /// The solver rejected the problem or failed internally.
    SolverError = 5,
    /// A panic was caught at the language boundary.
    InternalPanic = 6,
}

/// Opaque handle to a normalized problem instance.
pub struct JpacInstance {
    problem: NormalizedProblem,
}

/// Opaque handle to the outcome of a solve.
pub struct JpacSolution {
    result: DeflationResult,
}

/// Selects the smoothed projected Barzilai-Borwein inner solver.
pub const JPAC_SOLVER_PABB: c_int = 0;
/// Selects the projected subgradient inner solver.
pub const JPAC_SOLVER_SUBGRAD: c_int = 1;

/// Ranks removal candidates by interference footprint.
pub const JPAC_RULE_FOOTPRINT: c_int = 0;
/// Ranks removal candidates by clipped excess interference.
pub const JPAC_RULE_EXCESS: c_int = 1;
/// Ranks removal candidates by constraint violation norm.
pub const JPAC_RULE_VIOLATION: c_int = 2;

fn status_for(err: &jpac::Error) -> JpacStatus {
    match err {
        jpac::Error::Io(_) => JpacStatus::IoError,
        jpac::Error::Json(_) | jpac::Error::Invalid(_) => JpacStatus::InvalidArgument,
        jpac::Error::Domain(_) | jpac::Error::Shape(_) => JpacStatus::InvalidArgument,
        jpac::Error::NothingToRemove | jpac::Error::TooLarge { .. } => JpacStatus::SolverError,
    }
}

fn store_instance(out: *mut *mut JpacInstance, problem: NormalizedProblem) -> JpacStatus {
    let handle = Box::new(JpacInstance { problem });
    unsafe { *out = Box::into_raw(handle) };
    JpacStatus::Ok
}

/// Loads a JSON instance file and normalizes it into a solvable problem.
///
/// On success writes a fresh handle to `out`; the caller owns it and must
/// release it with [`jpac_instance_free`].
///
/// # Safety
///
/// `path` must point to a nul-terminated string and `out` to a writable
/// pointer slot. Both must stay valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn jpac_instance_load(
    path: *const c_char,
    out: *mut *mut JpacInstance,
) -> JpacStatus {
    if path.is_null() || out.is_null() {
        return JpacStatus::NullArgument;
    }
    let raw = CStr::from_ptr(path);
    let text = match raw.to_str() {
        Ok(text) => text,
        Err(_) => return JpacStatus::InvalidArgument,
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let loaded = read_instance(Path::new(text))?;
        normalize(&loaded.nominal, &loaded.samples)
    }));
    match outcome {
        Ok(Ok(problem)) => store_instance(out, problem),
        Ok(Err(err)) => status_for(&err),
        Err(_) => JpacStatus::InternalPanic,
    }
}

/// Generates a random instance from a seeded dense deployment.
///
/// `links` transmitter-receiver pairs are dropped uniformly in a square
/// region, `samples` channel realizations are drawn with multiplicative
/// `spread`, and the whole construction is reproducible from `seed`. On
/// success writes a fresh handle to `out`; release it with
/// [`jpac_instance_free`].
///
/// # Safety
///
/// `out` must point to a writable pointer slot valid for the duration of the
/// call.
#[no_mangle]
pub unsafe extern "C" fn jpac_instance_generate(
    links: u32,
    samples: u32,
    spread: f64,
    seed: u64,
    out: *mut *mut JpacInstance,
) -> JpacStatus {
    if out.is_null() {
        return JpacStatus::NullArgument;
    }
    if links == 0 || samples == 0 {
        return JpacStatus::InvalidArgument;
    }
    let outcome = catch_unwind(|| {
        let config = GenConfig::new(links as usize);
        let nominal = generate_nominal(&config, derive_seed(seed, 0))?;
        let drawn = sample_perturbed(&nominal, samples as usize, spread, derive_seed(seed, 1))?;
        normalize(&nominal, &drawn)
    });
    match outcome {
        Ok(Ok(problem)) => store_instance(out, problem),
        Ok(Err(err)) => status_for(&err),
        Err(_) => JpacStatus::InternalPanic,
    }
}

/// Returns the number of links in the instance, or 0 for a null handle.
///
/// # Safety
///
/// `instance` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jpac_instance_links(instance: *const JpacInstance) -> u32 {
    match instance.as_ref() {
        Some(handle) => handle.problem.links() as u32,
        None => 0,
    }
}

/// Returns the number of channel realizations, or 0 for a null handle.
///
/// # Safety
///
/// `instance` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jpac_instance_samples(instance: *const JpacInstance) -> u32 {
    match instance.as_ref() {
        Some(handle) => handle.problem.samples() as u32,
        None => 0,
    }
}

/// Releases an instance handle. Passing null is a no-op.
///
/// # Safety
///
/// `instance` must be null or a handle produced by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn jpac_instance_free(instance: *mut JpacInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Runs the full deflation pipeline on an instance.
///
/// `solver` is [`JPAC_SOLVER_PABB`] or [`JPAC_SOLVER_SUBGRAD`] (the latter
/// with its default step schedule), `rule` one of the `JPAC_RULE_*` removal
/// rules. On success writes a fresh handle to `out`; release it with
/// [`jpac_solution_free`].
///
/// # Safety
///
/// `instance` must be a live handle and `out` a writable pointer slot; both
/// must stay valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn jpac_solve(
    instance: *const JpacInstance,
    solver: c_int,
    rule: c_int,
    out: *mut *mut JpacSolution,
) -> JpacStatus {
    if instance.is_null() || out.is_null() {
        return JpacStatus::NullArgument;
    }
    let solver = match solver {
        JPAC_SOLVER_PABB => SolverKind::Pabb,
        JPAC_SOLVER_SUBGRAD => SolverKind::Subgrad {
            step0: 0.1,
            iters: 20_000,
        },
        _ => return JpacStatus::InvalidArgument,
    };
    let rule = match rule {
        JPAC_RULE_FOOTPRINT => RemovalRule::Footprint,
        JPAC_RULE_EXCESS => RemovalRule::Excess,
        JPAC_RULE_VIOLATION => RemovalRule::Violation,
        _ => return JpacStatus::InvalidArgument,
    };
    let config = DeflateConfig {
        solver,
        rule,
        ..DeflateConfig::default()
    };
    let problem = &(*instance).problem;
    let outcome = catch_unwind(AssertUnwindSafe(|| deflate(problem, &config)));
    match outcome {
        Ok(Ok(result)) => {
            let handle = Box::new(JpacSolution { result });
            *out = Box::into_raw(handle);
            JpacStatus::Ok
        }
        Ok(Err(err)) => status_for(&err),
        Err(_) => JpacStatus::InternalPanic,
    }
}

/// Returns how many links the solution serves, or 0 for a null handle.
///
/// # Safety
///
/// `solution` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jpac_solution_supported_count(solution: *const JpacSolution) -> u32 {
    match solution.as_ref() {
        Some(handle) => handle.result.supported.len() as u32,
        None => 0,
    }
}

/// Copies the zero-based indices of the served links into `buffer`.
///
/// `capacity` is the number of `uint32_t` slots in `buffer`; it must be at
/// least [`jpac_solution_supported_count`]. Indices are ascending.
///
/// # Safety
///
/// `solution` must be a live handle and `buffer` must point to at least
/// `capacity` writable `uint32_t` slots.
#[no_mangle]
pub unsafe extern "C" fn jpac_solution_supported(
    solution: *const JpacSolution,
    buffer: *mut u32,
    capacity: usize,
) -> JpacStatus {
    let handle = match solution.as_ref() {
        Some(handle) => handle,
        None => return JpacStatus::NullArgument,
    };
    if buffer.is_null() {
        return JpacStatus::NullArgument;
    }
    let supported = &handle.result.supported;
    if capacity < supported.len() {
        return JpacStatus::BufferTooSmall;
    }
    for (slot, link) in supported.iter().enumerate() {
        *buffer.add(slot) = *link as u32;
    }
    JpacStatus::Ok
}

/// Copies the normalized transmit power of each served link into `buffer`.
///
/// Values lie in `[0, 1]` (fraction of the link's power budget) and are
/// ordered like [`jpac_solution_supported`]. `capacity` is the number of
/// `double` slots in `buffer`.
///
/// # Safety
///
/// `solution` must be a live handle and `buffer` must point to at least
/// `capacity` writable `double` slots.
#[no_mangle]
pub unsafe extern "C" fn jpac_solution_powers(
    solution: *const JpacSolution,
    buffer: *mut f64,
    capacity: usize,
) -> JpacStatus {
    let handle = match solution.as_ref() {
        Some(handle) => handle,
        None => return JpacStatus::NullArgument,
    };
    if buffer.is_null() {
        return JpacStatus::NullArgument;
    }
    let q = &handle.result.q;
    if capacity < q.len() {
        return JpacStatus::BufferTooSmall;
    }
    for (slot, value) in q.iter().enumerate() {
        *buffer.add(slot) = *value;
    }
    JpacStatus::Ok
}

/// Returns the total transmit power in watts, or NaN for a null handle.
///
/// # Safety
///
/// `solution` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jpac_solution_total_power_w(solution: *const JpacSolution) -> f64 {
    match solution.as_ref() {
        Some(handle) => handle.result.total_power,
        None => f64::NAN,
    }
}

/// Returns how many links the pipeline dropped, or 0 for a null handle.
///
/// Links restored by the readmission pass still count as dropped here; the
/// served set already reflects their return.
///
/// # Safety
///
/// `solution` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jpac_solution_removal_count(solution: *const JpacSolution) -> u32 {
    match solution.as_ref() {
        Some(handle) => handle.result.removals.len() as u32,
        None => 0,
    }
}

/// Releases a solution handle. Passing null is a no-op.
///
/// # Safety
///
/// `solution` must be null or a handle produced by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn jpac_solution_free(solution: *mut JpacSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Returns a static, nul-terminated description of a status code.
#[no_mangle]
pub extern "C" fn jpac_status_message(status: JpacStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        JpacStatus::Ok => b"ok\0",
        JpacStatus::NullArgument => b"a required pointer argument was null\0",
        JpacStatus::InvalidArgument => b"an argument was malformed or out of range\0",
        JpacStatus::IoError => b"reading the instance file failed\0",
        JpacStatus::BufferTooSmall => b"the provided buffer is too small\0",
        JpacStatus::SolverError => b"the solver rejected the problem\0",
        JpacStatus::InternalPanic => b"an internal panic was caught\0",
    };
    text.as_ptr() as *const c_char
}
