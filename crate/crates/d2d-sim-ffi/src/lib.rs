//! C ABI for embedding the simulator.
//!
//! Conventions: every fallible call returns [`D2D_OK`] or a negative status
//! code, and stores a message retrievable through
//! [`d2d_last_error_message`] on the calling thread. Out-parameters are
//! written only on success. Handles are opaque and must be released with
//! their matching `_free` function; passing a freed or foreign pointer is
//! undefined behavior, passing null where a handle is optional is allowed
//! only where documented.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use d2d_sim::harness::{load_config, run_sweep, write_results, ExperimentConfig};
use d2d_sim::power::{evaluate, Algorithm, TrainedPolicy, Trainer};
use d2d_sim::topology::draw_topologies;
use d2d_sim::SimError;

pub const D2D_OK: c_int = 0;
pub const D2D_ERR_NULL_POINTER: c_int = -1;
pub const D2D_ERR_UTF8: c_int = -2;
pub const D2D_ERR_INVALID_CONFIG: c_int = -3;
pub const D2D_ERR_PARSE: c_int = -4;
pub const D2D_ERR_IO: c_int = -5;
pub const D2D_ERR_DOMAIN: c_int = -6;
pub const D2D_ERR_PANIC: c_int = -7;

/// Opaque experiment configuration.
pub struct D2dConfig(ExperimentConfig);

/// Opaque trained policy.
pub struct D2dModel(TrainedPolicy);

/// One evaluation result.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct D2dMetrics {
    pub system_throughput_bps_hz: c_double,
    pub d2d_throughput_bps_hz: c_double,
    pub cue_qos_rate: c_double,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let owned = CString::new(msg)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn error_code(err: &SimError) -> c_int {
    match err {
        SimError::InvalidConfig { .. } => D2D_ERR_INVALID_CONFIG,
        SimError::Parse { .. } | SimError::ModelFormat(_) => D2D_ERR_PARSE,
        SimError::Io { .. } => D2D_ERR_IO,
        SimError::Domain(_) | SimError::Shape(_) => D2D_ERR_DOMAIN,
    }
}

fn fail(err: SimError) -> c_int {
    set_last_error(&err.to_string());
    error_code(&err)
}

fn null_err(name: &str) -> c_int {
    set_last_error(&format!("{name} is null"));
    D2D_ERR_NULL_POINTER
}

/// Clears the per-thread error, runs `f`, and converts panics into
/// [`D2D_ERR_PANIC`] instead of unwinding across the C boundary.
fn guard(f: impl FnOnce() -> c_int) -> c_int {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_last_error("internal panic");
            D2D_ERR_PANIC
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        return Err(null_err(name));
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_last_error(&format!("{name} is not valid UTF-8"));
        D2D_ERR_UTF8
    })
}

macro_rules! ffi_try {
    ($expr:expr) => {
        match $expr {
            Ok(value) => value,
            Err(err) => return fail(err),
        }
    };
}

macro_rules! ffi_arg {
    ($expr:expr) => {
        match $expr {
            Ok(value) => value,
            Err(code) => return code,
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn d2d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded. The pointer is valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn d2d_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Creates a configuration with every parameter at its default.
///
/// # Safety
/// `out` must be null or a valid pointer to a `D2dConfig*` slot.
#[no_mangle]
pub unsafe extern "C" fn d2d_config_new(out: *mut *mut D2dConfig) -> c_int {
    guard(|| {
        if out.is_null() {
            return null_err("out");
        }
        let handle = Box::new(D2dConfig(ExperimentConfig::default()));
        unsafe { *out = Box::into_raw(handle) };
        D2D_OK
    })
}

/// Loads and validates a `key = value` configuration file.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or a
/// valid pointer to a `D2dConfig*` slot.
#[no_mangle]
pub unsafe extern "C" fn d2d_config_load(
    path: *const c_char,
    out: *mut *mut D2dConfig,
) -> c_int {
    guard(|| {
        let path = ffi_arg!(unsafe { cstr_arg(path, "path") });
        if out.is_null() {
            return null_err("out");
        }
        let config = ffi_try!(load_config(Path::new(path)));
        unsafe { *out = Box::into_raw(Box::new(D2dConfig(config))) };
        D2D_OK
    })
}

/// Applies one `key = value` assignment to a configuration. Values are
/// validated when the configuration is used.
///
/// # Safety
/// `config` must be null or a live handle from `d2d_config_new`/`_load`;
/// `key` and `value` must be null or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn d2d_config_set(
    config: *mut D2dConfig,
    key: *const c_char,
    value: *const c_char,
) -> c_int {
    guard(|| {
        let Some(config) = (unsafe { config.as_mut() }) else {
            return null_err("config");
        };
        let key = ffi_arg!(unsafe { cstr_arg(key, "key") });
        let value = ffi_arg!(unsafe { cstr_arg(value, "value") });
        ffi_try!(config.0.set(key, value));
        D2D_OK
    })
}

/// Releases a configuration handle. Null is a no-op.
///
/// # Safety
/// `config` must be null or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn d2d_config_free(config: *mut D2dConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Trains a DQN policy with `config`'s cell size and hyperparameters under
/// the given seed and returns the trained model.
///
/// # Safety
/// `config` must be null or a live handle; `out` must be null or a valid
/// pointer to a `D2dModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn d2d_train(
    config: *const D2dConfig,
    seed: u64,
    out: *mut *mut D2dModel,
) -> c_int {
    guard(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            return null_err("config");
        };
        if out.is_null() {
            return null_err("out");
        }
        let c = &config.0;
        let space = ffi_try!(c.action_space());
        let mut trainer = ffi_try!(Trainer::new(
            c.cell(c.num_d2d_pairs),
            c.radio(),
            c.env(),
            space,
            c.dqn(),
            seed,
        ));
        ffi_try!(trainer.train());
        let handle = Box::new(D2dModel(trainer.into_policy()));
        unsafe { *out = Box::into_raw(handle) };
        D2D_OK
    })
}

/// Writes a model to disk in the versioned weight format.
///
/// # Safety
/// `model` must be null or a live handle; `path` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn d2d_model_save(
    model: *const D2dModel,
    path: *const c_char,
) -> c_int {
    guard(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return null_err("model");
        };
        let path = ffi_arg!(unsafe { cstr_arg(path, "path") });
        ffi_try!(model.0.save(Path::new(path)));
        D2D_OK
    })
}

/// Loads a model saved by [`d2d_model_save`] (or the CLI).
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or a
/// valid pointer to a `D2dModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn d2d_model_load(
    path: *const c_char,
    out: *mut *mut D2dModel,
) -> c_int {
    guard(|| {
        let path = ffi_arg!(unsafe { cstr_arg(path, "path") });
        if out.is_null() {
            return null_err("out");
        }
        let policy = ffi_try!(TrainedPolicy::load(Path::new(path)));
        unsafe { *out = Box::into_raw(Box::new(D2dModel(policy))) };
        D2D_OK
    })
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be null or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn d2d_model_free(model: *mut D2dModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Scores `algorithm` ("dqn", "max_power", or "olpc") on held-out
/// topologies drawn from `seed`. `model` may be null for the baselines and
/// is required for "dqn".
///
/// # Safety
/// `config` and `model` must each be null or live handles; `algorithm` must
/// be null or a NUL-terminated string; `out` must be null or a valid
/// `D2dMetrics` pointer.
#[no_mangle]
pub unsafe extern "C" fn d2d_evaluate(
    config: *const D2dConfig,
    algorithm: *const c_char,
    model: *const D2dModel,
    seed: u64,
    out: *mut D2dMetrics,
) -> c_int {
    guard(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            return null_err("config");
        };
        let algorithm = ffi_arg!(unsafe { cstr_arg(algorithm, "algorithm") });
        if out.is_null() {
            return null_err("out");
        }
        let algo: Algorithm = ffi_try!(algorithm.parse());
        let c = &config.0;
        let space = ffi_try!(c.action_space());
        let policy = unsafe { model.as_ref() }.map(|m| &m.0);
        let topologies =
            ffi_try!(draw_topologies(&c.cell(c.num_d2d_pairs), c.eval_topologies, seed));
        let metrics = ffi_try!(evaluate(
            algo,
            policy,
            &topologies,
            &c.radio(),
            &space,
            c.tau_db,
            c.eval_steps,
            &c.olpc(),
        ));
        unsafe {
            *out = D2dMetrics {
                system_throughput_bps_hz: metrics.system_throughput_bps_hz,
                d2d_throughput_bps_hz: metrics.d2d_throughput_bps_hz,
                cue_qos_rate: metrics.cue_qos_rate,
            };
        }
        D2D_OK
    })
}

/// Runs the configured sweep and writes the result rows as CSV to `path`.
///
/// # Safety
/// `config` must be null or a live handle; `path` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn d2d_sweep_to_csv(
    config: *const D2dConfig,
    path: *const c_char,
) -> c_int {
    guard(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            return null_err("config");
        };
        let path = ffi_arg!(unsafe { cstr_arg(path, "path") });
        let rows = ffi_try!(run_sweep(&config.0));
        ffi_try!(write_results(Path::new(path), &rows));
        D2D_OK
    })
}
