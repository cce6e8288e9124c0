//! C ABI over the scheduler: opaque config and run handles, integer status
//! codes and a per-thread last-error message.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bevsched::config::ScenarioConfig;
use bevsched::scenario::{run_scenario, simulate, ScenarioRun};
use bevsched::{Error, HOURS};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Topology = 4,
    Divergence = 5,
    OutOfRange = 6,
    Infeasible = 7,
    Accounting = 8,
    Io = 9,
    Sampling = 10,
    Panic = 11,
}

/// Scenario configuration.
pub struct BsConfig(ScenarioConfig);

/// Result of one scenario run.
pub struct BsRun(ScenarioRun);

/// Headline figures of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BsSummary {
    pub rho: f64,
    pub front_size: usize,
    pub f1_selected: f64,
    pub f2_selected: f64,
    pub lf: f64,
    pub p2v: f64,
    pub pc: f64,
    pub carbon_revenue: f64,
    pub degradation_total: f64,
    pub v2g_kwh: f64,
    pub min_voltage: f64,
    pub participants: usize,
    pub rejected: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code_of(err: &Error) -> BsStatus {
    match err {
        Error::Stage { source, .. } => code_of(source),
        Error::Sampling { .. } => BsStatus::Sampling,
        Error::Config(_) | Error::TomlDe(_) | Error::TomlSer(_) => BsStatus::Config,
        Error::Topology(_) | Error::UnknownBus(_) => BsStatus::Topology,
        Error::Divergence { .. } => BsStatus::Divergence,
        Error::Range { .. } | Error::DivisionByZero(_) => BsStatus::OutOfRange,
        Error::Capacity { .. } => BsStatus::Infeasible,
        Error::Accounting { .. } => BsStatus::Accounting,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => BsStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BsStatus>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err(code)) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            BsStatus::Panic
        }
    }
}

fn fail(err: Error) -> BsStatus {
    let code = code_of(&err);
    set_error(err.to_string());
    code
}

fn null(what: &str) -> BsStatus {
    set_error(format!("{what} is null"));
    BsStatus::NullPointer
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, BsStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        BsStatus::InvalidUtf8
    })
}

unsafe fn config_mut<'a>(cfg: *mut BsConfig) -> Result<&'a mut ScenarioConfig, BsStatus> {
    cfg.as_mut().map(|c| &mut c.0).ok_or_else(|| null("config"))
}

unsafe fn run_ref<'a>(run: *const BsRun) -> Result<&'a ScenarioRun, BsStatus> {
    run.as_ref().map(|r| &r.0).ok_or_else(|| null("run"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the last error message of this thread into `buf`, truncated and
/// NUL-terminated. Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn bs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Built-in defaults. Free with [`bs_config_free`].
#[no_mangle]
pub extern "C" fn bs_config_default() -> *mut BsConfig {
    Box::into_raw(Box::new(BsConfig(ScenarioConfig::defaults())))
}

/// Parse a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_config_from_toml(toml: *const c_char, out: *mut *mut BsConfig) -> BsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ScenarioConfig::from_toml_str(text(toml, "toml")?).map_err(fail)?;
        cfg.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(BsConfig(cfg)));
        Ok(())
    })
}

/// Load a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_config_load(path: *const c_char, out: *mut *mut BsConfig) -> BsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ScenarioConfig::load(Path::new(text(path, "path")?)).map_err(fail)?;
        *out = Box::into_raw(Box::new(BsConfig(cfg)));
        Ok(())
    })
}

/// Switch the flags to a named preset, "S1" to "S7".
///
/// # Safety
/// `cfg` must come from this library; `name` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bs_config_set_scenario(cfg: *mut BsConfig, name: *const c_char) -> BsStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        let name = text(name, "name")?;
        *c = c.clone().with_scenario(name).map_err(fail)?;
        Ok(())
    })
}

/// Set the master seed.
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_config_set_seed(cfg: *mut BsConfig, seed: u64) -> BsStatus {
    guard(|| {
        config_mut(cfg)?.run.seed = seed;
        Ok(())
    })
}

/// Set fleet size and optimizer budget. `workers` 0 means all cores.
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn bs_config_set_size(
    cfg: *mut BsConfig,
    n_bevs: usize,
    population: usize,
    generations: usize,
    workers: usize,
) -> BsStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        let mut next = c.clone();
        next.fleet.n_bevs = n_bevs;
        next.optimizer.population = population;
        next.optimizer.generations = generations;
        next.optimizer.workers = workers;
        next.validate().map_err(fail)?;
        *c = next;
        Ok(())
    })
}

/// Hex digest of the configuration, NUL-terminated into `buf`.
///
/// # Safety
/// `cfg` must come from this library and `buf` be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bs_config_digest(cfg: *const BsConfig, buf: *mut c_char, len: usize) -> BsStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let d = c.0.digest();
        if len <= d.len() {
            set_error(format!("buffer of {len} bytes, digest needs {}", d.len() + 1));
            return Err(BsStatus::OutOfRange);
        }
        ptr::copy_nonoverlapping(d.as_ptr(), buf.cast(), d.len());
        *buf.add(d.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bs_config_free(cfg: *mut BsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run a scenario in memory.
///
/// # Safety
/// `cfg` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_simulate(cfg: *const BsConfig, out: *mut *mut BsRun) -> BsStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let run = simulate(&c.0).map_err(fail)?;
        *out = Box::into_raw(Box::new(BsRun(run)));
        Ok(())
    })
}

/// Run a scenario and write its artifacts to `out_dir`. `out` may be null.
///
/// # Safety
/// `cfg` must come from this library; `out_dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bs_run_scenario(cfg: *const BsConfig, out_dir: *const c_char, out: *mut *mut BsRun) -> BsStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        let dir = text(out_dir, "out_dir")?;
        let run = run_scenario(&c.0, Path::new(dir)).map_err(fail)?;
        if !out.is_null() {
            *out = Box::into_raw(Box::new(BsRun(run)));
        }
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_run_summary(run: *const BsRun, out: *mut BsSummary) -> BsStatus {
    guard(|| {
        let r = &run_ref(run)?.row;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = BsSummary {
            rho: r.rho,
            front_size: r.front_size,
            f1_selected: r.f1_selected,
            f2_selected: r.f2_selected,
            lf: r.lf,
            p2v: r.p2v,
            pc: r.pc,
            carbon_revenue: r.carbon_revenue,
            degradation_total: r.degradation_total,
            v2g_kwh: r.v2g_kwh,
            min_voltage: r.min_voltage,
            participants: r.participants,
            rejected: r.rejected,
        };
        Ok(())
    })
}

/// Objectives of front point `index`; points are ordered by `f1`.
///
/// # Safety
/// `run` must come from this library; `f1` and `f2` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bs_run_front_point(run: *const BsRun, index: usize, f1: *mut f64, f2: *mut f64) -> BsStatus {
    guard(|| {
        let r = run_ref(run)?;
        if f1.is_null() || f2.is_null() {
            return Err(null("output"));
        }
        let p = r.front.get(index).ok_or_else(|| {
            set_error(format!("front index {index} out of {}", r.front.len()));
            BsStatus::OutOfRange
        })?;
        *f1 = p.f1;
        *f2 = p.f2;
        Ok(())
    })
}

/// Lowest bus voltage at `hour` (0 to 23) under the selected schedule.
///
/// # Safety
/// `run` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_run_min_voltage(run: *const BsRun, hour: usize, out: *mut f64) -> BsStatus {
    guard(|| {
        let r = run_ref(run)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if hour >= HOURS {
            set_error(format!("hour {hour} outside 0..{HOURS}"));
            return Err(BsStatus::OutOfRange);
        }
        *out = r.min_voltage_at(hour);
        Ok(())
    })
}

/// # Safety
/// `run` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bs_run_free(run: *mut BsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
