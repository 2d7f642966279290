//! C ABI over `irs-outage`.
//!
//! Sample sets and solver results are opaque heap handles owned by the
//! caller and released with the matching `*_free`. Every fallible call
//! returns an [`IrsStatus`]; on failure [`irs_last_error_message`] describes
//! the most recent error on the calling thread. Outputs are written only on
//! success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use irs_outage::channel::generate_seeded_sample_set;
use irs_outage::experiments::{run_method_no_irs, run_method_proposed, run_method_random_phase};
use irs_outage::sample_io::{read_sample_set, write_sample_set};
use irs_outage::{
    empirical_outage, BeamformingVector, ChannelSampleSet, Complex64, DecaySchedule, MarginScale,
    OutageError, PhaseShiftVector, ScenarioGeometry, SolverConfig, SolverResult, SystemParams,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateGeometry = 4,
    EmptySampleSet = 5,
    Infeasible = 6,
    Io = 7,
    MalformedFile = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsMethod {
    /// Alternating SGD over the beamformer and the phase shifts.
    Proposed = 0,
    /// Beamformer SGD with random, fixed phase shifts.
    RandomPhase = 1,
    /// Beamformer SGD on the direct channel only.
    NoIrs = 2,
}

/// Powers in watts, `gamma` linear. `margin_scale <= 0` selects `1 / noise`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IrsSystemParams {
    pub power: f64,
    pub noise: f64,
    pub gamma: f64,
    pub margin_scale: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IrsSolverConfig {
    pub l_w: f64,
    pub l_v: f64,
    pub decay: f64,
    /// Nonzero decays after every inner step instead of every outer iteration.
    pub decay_per_inner: u8,
    pub max_outer: usize,
    pub max_inner: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// Opaque channel sample set.
pub struct IrsSampleSet(ChannelSampleSet);

/// Opaque solver output.
pub struct IrsSolverResult(SolverResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &OutageError) -> IrsStatus {
    match e {
        OutageError::DegenerateGeometry(_) => IrsStatus::DegenerateGeometry,
        OutageError::DimensionMismatch(_) => IrsStatus::DimensionMismatch,
        OutageError::EmptySampleSet => IrsStatus::EmptySampleSet,
        OutageError::Infeasible(_) => IrsStatus::Infeasible,
        OutageError::InvalidConfig(_) => IrsStatus::InvalidArgument,
        OutageError::MalformedSampleFile { .. } => IrsStatus::MalformedFile,
        OutageError::Io { .. } => IrsStatus::Io,
    }
}

struct Fail(IrsStatus, String);

impl From<OutageError> for Fail {
    fn from(e: OutageError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(IrsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            IrsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IrsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(IrsStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn complex_arg(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Fail> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() || im.is_null() {
        return Err(null("vector component"));
    }
    let (re, im) = (
        std::slice::from_raw_parts(re, len),
        std::slice::from_raw_parts(im, len),
    );
    Ok(re
        .iter()
        .zip(im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect())
}

fn params_from(p: &IrsSystemParams) -> Result<SystemParams, Fail> {
    let scale = if p.margin_scale > 0.0 {
        MarginScale::Fixed(p.margin_scale)
    } else {
        MarginScale::InverseNoise
    };
    let params = SystemParams::new(p.power, p.noise, p.gamma)?.with_margin_scale(scale);
    params.validate()?;
    Ok(params)
}

fn solver_from(c: &IrsSolverConfig) -> Result<SolverConfig, Fail> {
    let cfg = SolverConfig {
        l_w: c.l_w,
        l_v: c.l_v,
        decay: c.decay,
        decay_schedule: if c.decay_per_inner != 0 {
            DecaySchedule::PerInner
        } else {
            DecaySchedule::PerOuter
        },
        max_outer: c.max_outer,
        max_inner: c.max_inner,
        epsilon: c.epsilon,
        seed: c.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn config_to_c(c: &SolverConfig) -> IrsSolverConfig {
    IrsSolverConfig {
        l_w: c.l_w,
        l_v: c.l_v,
        decay: c.decay,
        decay_per_inner: u8::from(c.decay_schedule == DecaySchedule::PerInner),
        max_outer: c.max_outer,
        max_inner: c.max_inner,
        epsilon: c.epsilon,
        seed: c.seed,
    }
}

fn copy_out(src: &[Complex64], re: *mut f64, im: *mut f64, len: usize) -> Result<(), Fail> {
    if len < src.len() {
        return Err(Fail(
            IrsStatus::BufferTooSmall,
            format!("buffer holds {len} entries, need {}", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    for (i, z) in src.iter().enumerate() {
        // SAFETY: caller guarantees `len` writable entries; i < src.len() <= len
        unsafe {
            *re.add(i) = z.re;
            *im.add(i) = z.im;
        }
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn irs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn irs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Full-scale solver defaults (J = 1000, K = 5000).
///
/// # Safety
/// `out` must be null or point to writable memory for one `IrsSolverConfig`.
#[no_mangle]
pub unsafe extern "C" fn irs_solver_config_default(out: *mut IrsSolverConfig) -> IrsStatus {
    guard(|| {
        *out_ptr(out, "out")? = config_to_c(&SolverConfig::full_scale());
        Ok(())
    })
}

/// Reduced-scale solver defaults (J = 50, K = 200, l_w = 0.01).
///
/// # Safety
/// As [`irs_solver_config_default`].
#[no_mangle]
pub unsafe extern "C" fn irs_solver_config_desk(out: *mut IrsSolverConfig) -> IrsStatus {
    guard(|| {
        *out_ptr(out, "out")? = config_to_c(&SolverConfig::desk_scale());
        Ok(())
    })
}

/// Draws `t` samples with `m` antennas and `n` IRS elements on the default
/// geometry; the user position and channels both derive from `seed`.
///
/// # Safety
/// `out` must be null or writable; on success it receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn irs_sample_set_generate(
    m: usize,
    n: usize,
    t: usize,
    seed: u64,
    out: *mut *mut IrsSampleSet,
) -> IrsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), m, n, t, seed)?;
        *out = Box::into_raw(Box::new(IrsSampleSet(set)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` as in [`irs_sample_set_generate`].
#[no_mangle]
pub unsafe extern "C" fn irs_sample_set_load(
    path: *const c_char,
    out: *mut *mut IrsSampleSet,
) -> IrsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let set = read_sample_set(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(IrsSampleSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn irs_sample_set_save(
    set: *const IrsSampleSet,
    path: *const c_char,
) -> IrsStatus {
    guard(|| {
        let set = deref(set, "set")?;
        write_sample_set(&set.0, &path_arg(path)?)?;
        Ok(())
    })
}

/// Writes `(M, N, T)`; any output pointer may be null.
///
/// # Safety
/// `set` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn irs_sample_set_dims(
    set: *const IrsSampleSet,
    m: *mut usize,
    n: *mut usize,
    t: *mut usize,
) -> IrsStatus {
    guard(|| {
        let set = &deref(set, "set")?.0;
        for (ptr, value) in [(m, set.m()), (n, set.n()), (t, set.len())] {
            if let Some(p) = ptr.as_mut() {
                *p = value;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irs_sample_set_free(set: *mut IrsSampleSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Runs `method` on `set`. The starting point derives from `init_seed`,
/// sample selection from `config->seed`.
///
/// # Safety
/// Pointers must be live and valid for their types; `out` receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn irs_solve(
    set: *const IrsSampleSet,
    params: *const IrsSystemParams,
    config: *const IrsSolverConfig,
    method: IrsMethod,
    init_seed: u64,
    out: *mut *mut IrsSolverResult,
) -> IrsStatus {
    guard(|| {
        let set = &deref(set, "set")?.0;
        let p = params_from(deref(params, "params")?)?;
        let cfg = solver_from(deref(config, "config")?)?;
        let out = out_ptr(out, "out")?;
        let result = match method {
            IrsMethod::Proposed => run_method_proposed(set, &p, &cfg, init_seed)?,
            IrsMethod::RandomPhase => run_method_random_phase(set, &p, &cfg, init_seed)?,
            IrsMethod::NoIrs => run_method_no_irs(set, &p, &cfg, init_seed)?,
        };
        *out = Box::into_raw(Box::new(IrsSolverResult(result)));
        Ok(())
    })
}

/// Lengths of the result's `w` (M) and `v` (N, zero for the no-IRS method).
///
/// # Safety
/// `result` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn irs_result_dims(
    result: *const IrsSolverResult,
    m: *mut usize,
    n: *mut usize,
) -> IrsStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        if let Some(p) = m.as_mut() {
            *p = r.w.len();
        }
        if let Some(p) = n.as_mut() {
            *p = r.v.len();
        }
        Ok(())
    })
}

/// Empirical outage of the returned point on its training set.
///
/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn irs_result_outage(
    result: *const IrsSolverResult,
    out: *mut f64,
) -> IrsStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        *out_ptr(out, "out")? = r.outage_on_train;
        Ok(())
    })
}

/// Copies `w` into `re[0..M]` and `im[0..M]`; `len` is the buffer capacity.
///
/// # Safety
/// `re` and `im` must each have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn irs_result_w(
    result: *const IrsSolverResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> IrsStatus {
    guard(|| copy_out(deref(result, "result")?.0.w.as_slice(), re, im, len))
}

/// Copies `v` into `re[0..N]` and `im[0..N]`; `len` is the buffer capacity.
///
/// # Safety
/// As [`irs_result_w`].
#[no_mangle]
pub unsafe extern "C" fn irs_result_v(
    result: *const IrsSolverResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> IrsStatus {
    guard(|| copy_out(deref(result, "result")?.0.v.as_slice(), re, im, len))
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irs_result_free(result: *mut IrsSolverResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Fraction of samples in `set` in outage under `(w, v)`. Pass `n = 0` and
/// null `v` pointers to score a set without its reflected path.
///
/// # Safety
/// `w_re`/`w_im` must hold `m` doubles, `v_re`/`v_im` `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn irs_empirical_outage(
    set: *const IrsSampleSet,
    params: *const IrsSystemParams,
    w_re: *const f64,
    w_im: *const f64,
    m: usize,
    v_re: *const f64,
    v_im: *const f64,
    n: usize,
    out: *mut f64,
) -> IrsStatus {
    guard(|| {
        let set = &deref(set, "set")?.0;
        let p = params_from(deref(params, "params")?)?;
        let out = out_ptr(out, "out")?;
        let w = BeamformingVector::new(complex_arg(w_re, w_im, m)?, p.power)?;
        let v = PhaseShiftVector::new(complex_arg(v_re, v_im, n)?)?;
        *out = if n == 0 && set.n() > 0 {
            empirical_outage(&w, &v, &set.without_irs(), &p)?
        } else {
            empirical_outage(&w, &v, set, &p)?
        };
        Ok(())
    })
}
