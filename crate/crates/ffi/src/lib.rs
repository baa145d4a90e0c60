//! C ABI over freespec. Every fallible call returns an `FsStatus`; on
//! failure `fs_last_error_message` describes the error for the calling
//! thread. Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use freespec::apps::scov_closed_forms;
use freespec::block::{phase_classify, BlockModelSpec, Phase};
use freespec::free::{free_density, lehner_max, lehner_min, LehnerOptions};
use freespec::harness::{run, write_csv, ExperimentConfig};
use freespec::iso::{bbp_overlap, bbp_value};
use freespec::model::{compute_parameters, io::model_from_json, sample, GaussianSeriesModel};
use freespec::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    Invalid = 2,
    Dimension = 3,
    NoConvergence = 4,
    MemoryCap = 5,
    Io = 6,
    Utf8 = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

impl From<&Error> for FsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension(_) => FsStatus::Dimension,
            Error::NoConvergence { .. } | Error::LehnerStalled(_) => FsStatus::NoConvergence,
            Error::MemoryCap(_) => FsStatus::MemoryCap,
            Error::Io(_) => FsStatus::Io,
            _ => FsStatus::Invalid,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FsStatus, msg: impl Into<String>) -> FsStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), FsStatus>) -> FsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default();
            fail(FsStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lib_err(e: Error) -> FsStatus {
    let s = FsStatus::from(&e);
    fail(s, e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, FsStatus> {
    if p.is_null() {
        return Err(fail(FsStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(FsStatus::Utf8, e.to_string()))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, FsStatus> {
    p.as_mut().ok_or_else(|| fail(FsStatus::NullPointer, "output pointer is null"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, FsStatus> {
    p.as_ref().ok_or_else(|| fail(FsStatus::NullPointer, "handle is null"))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque Gaussian series model X = A0 + Σ A_i g_i.
pub struct FsModel(GaussianSeriesModel);

/// Opaque block model specification.
pub struct FsBlockSpec(BlockModelSpec);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct FsParameters {
    pub sigma: f64,
    pub v: f64,
    pub sigma_star: f64,
    pub v_tilde: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct FsPhaseReport {
    pub snr: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub error_radius: f64,
    pub kappa: f64,
    /// 'a', 'b' or 'c'.
    pub phase: c_char,
    pub consistent: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct FsScovValues {
    pub s: f64,
    pub h_plus: f64,
    pub h_minus: f64,
}

/// Parse a model from its JSON form. On success `*out` owns a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_model_from_json(json: *const c_char, out: *mut *mut FsModel) -> FsStatus {
    guard(|| {
        let out = out_arg(out)?;
        let m = model_from_json(str_arg(json)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FsModel(m)));
        Ok(())
    })
}

/// The scalar semicircular model (d = 1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_model_semicircle(out: *mut *mut FsModel) -> FsStatus {
    guard(|| {
        *out_arg(out)? = Box::into_raw(Box::new(FsModel(GaussianSeriesModel::semicircle())));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free(model: *mut FsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimension d, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_model_dim(model: *const FsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_model_parameters(model: *const FsModel, out: *mut FsParameters) -> FsStatus {
    guard(|| {
        let m = handle(model)?;
        let out = out_arg(out)?;
        let p = compute_parameters(&m.0);
        *out = FsParameters { sigma: p.sigma, v: p.v, sigma_star: p.sigma_star, v_tilde: p.v_tilde };
        Ok(())
    })
}

/// λmax and λmin of the free model.
///
/// # Safety
/// `model` must be a live handle; `lo` and `hi` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free_edges(model: *const FsModel, lo: *mut f64, hi: *mut f64) -> FsStatus {
    guard(|| {
        let m = handle(model)?;
        let (lo, hi) = (out_arg(lo)?, out_arg(hi)?);
        let opts = LehnerOptions::default();
        *hi = lehner_max(&m.0, &opts).map_err(lib_err)?.value;
        *lo = lehner_min(&m.0, &opts).map_err(lib_err)?.value;
        Ok(())
    })
}

/// Free density at `steps + 1` equispaced points of [xlo, xhi], written to
/// `density`, which must hold `len ≥ steps + 1` values.
///
/// # Safety
/// `model` must be a live handle and `density` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free_density(
    model: *const FsModel,
    xlo: f64,
    xhi: f64,
    steps: usize,
    eta: f64,
    density: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| {
        let m = handle(model)?;
        if density.is_null() {
            return Err(fail(FsStatus::NullPointer, "density buffer is null"));
        }
        if len < steps.saturating_add(1) {
            return Err(fail(FsStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", steps.saturating_add(1))));
        }
        let sol = free_density(&m.0, xlo, xhi, steps, eta).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(density, sol.density.len()).copy_from_slice(&sol.density);
        Ok(())
    })
}

/// One draw of X, row-major, real and imaginary parts in separate
/// buffers of `len ≥ d²` values each. `im` may be null for real models.
///
/// # Safety
/// `model` must be a live handle, `re` (and `im` if non-null) point to
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_model_sample(model: *const FsModel, seed: u64, re: *mut f64, im: *mut f64, len: usize) -> FsStatus {
    guard(|| {
        let m = handle(model)?;
        let d = m.0.dim();
        if re.is_null() {
            return Err(fail(FsStatus::NullPointer, "re buffer is null"));
        }
        if len < d * d {
            return Err(fail(FsStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", d * d)));
        }
        let x = sample(&m.0, seed);
        let re = std::slice::from_raw_parts_mut(re, d * d);
        let mut im = (!im.is_null()).then(|| std::slice::from_raw_parts_mut(im, d * d));
        for i in 0..d {
            for j in 0..d {
                re[i * d + j] = x[(i, j)].re;
                if let Some(im) = im.as_mut() {
                    im[i * d + j] = x[(i, j)].im;
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_block_from_json(json: *const c_char, out: *mut *mut FsBlockSpec) -> FsStatus {
    guard(|| {
        let out = out_arg(out)?;
        let s = BlockModelSpec::from_json(str_arg(json)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FsBlockSpec(s)));
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_block_free(spec: *mut FsBlockSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_block_phase(spec: *const FsBlockSpec, out: *mut FsPhaseReport) -> FsStatus {
    guard(|| {
        let s = handle(spec)?;
        let out = out_arg(out)?;
        let r = phase_classify(&s.0).map_err(lib_err)?;
        let phase = match r.phase {
            Phase::Subcritical => b'a',
            Phase::Critical => b'b',
            Phase::Supercritical => b'c',
        } as c_char;
        *out = FsPhaseReport {
            snr: r.snr,
            lambda: r.lambda,
            lambda0: r.lambda0,
            error_radius: r.error_radius,
            kappa: r.kappa,
            phase,
            consistent: r.consistent,
        };
        Ok(())
    })
}

/// B(θ) and the overlap (1 − 1/θ²)₊; either output may be null.
///
/// # Safety
/// Non-null outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_bbp(theta: f64, value: *mut f64, overlap: *mut f64) -> FsStatus {
    guard(|| {
        let v = bbp_value(theta).map_err(lib_err)?;
        if let Some(out) = value.as_mut() {
            *out = v;
        }
        if let Some(out) = overlap.as_mut() {
            *out = bbp_overlap(theta);
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_scov_limits(lambda: f64, delta: f64, out: *mut FsScovValues) -> FsStatus {
    guard(|| {
        let out = out_arg(out)?;
        let v = scov_closed_forms(lambda, delta).map_err(lib_err)?;
        *out = FsScovValues { s: v.s, h_plus: v.h_plus, h_minus: v.h_minus };
        Ok(())
    })
}

/// Run a sweep config (JSON) on `threads` workers (0: all cores) and
/// return the CSV in `*csv`, to be released with `fs_string_free`.
///
/// # Safety
/// `config` must be a NUL-terminated string and `csv` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_simulate(config: *const c_char, threads: usize, csv: *mut *mut c_char) -> FsStatus {
    guard(|| {
        let csv = out_arg(csv)?;
        let cfg = ExperimentConfig::from_json(str_arg(config)?).map_err(lib_err)?;
        let threads = if threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { threads };
        let out = run(&cfg, threads).map_err(lib_err)?;
        let mut buf = Vec::new();
        write_csv(&mut buf, cfg.master_seed, &out.config_hash, &out.records).map_err(lib_err)?;
        *csv = CString::new(buf).map_err(|e| fail(FsStatus::Invalid, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
