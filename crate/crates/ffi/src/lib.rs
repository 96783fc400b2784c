//! C ABI over `asyncap`.
//!
//! Channels are opaque handles created by `asyncap_channel_*` constructors
//! and released with [`asyncap_channel_free`]. Every fallible call returns an
//! [`AsyncapStatus`] and writes results through out-pointers; on failure a
//! description is available from [`asyncap_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use asyncap::bounds::{self, Quantization};
use asyncap::channel_file::{bundled, ChannelFile};
use asyncap::chernoff::{chernoff_info, DEFAULT_CHERNOFF_TOL};
use asyncap::prob::{blahut_arimoto, DEFAULT_BA_TOL};
use asyncap::sim::{self, Scheme, SimConfig, DEFAULT_MAX_ASYNC_LEVEL};
use asyncap::simplex::GridSpec;
use asyncap::{Channel, Dist, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsyncapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidChannel = 3,
    RateOutOfRange = 4,
    Infeasible = 5,
    InvalidConfig = 6,
    NoConvergence = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

impl From<&Error> for AsyncapStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidChannel(_) | Error::InvalidChannelRow { .. } => AsyncapStatus::InvalidChannel,
            Error::RateOutOfRange { .. } => AsyncapStatus::RateOutOfRange,
            Error::Infeasible { .. } => AsyncapStatus::Infeasible,
            Error::InvalidConfig(_) => AsyncapStatus::InvalidConfig,
            Error::NoConvergence { .. } => AsyncapStatus::NoConvergence,
            _ => AsyncapStatus::InvalidArgument,
        }
    }
}

/// Opaque channel handle.
pub struct AsyncapChannel {
    inner: Channel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsyncapGrid {
    pub simplex_step: f64,
    pub delta_step: f64,
    pub refine_rounds: u32,
    pub seed: u64,
    pub starts: usize,
}

impl From<&AsyncapGrid> for GridSpec {
    fn from(g: &AsyncapGrid) -> Self {
        GridSpec {
            simplex_step: g.simplex_step,
            delta_step: g.delta_step,
            refine_rounds: g.refine_rounds,
            seed: g.seed,
            starts: g.starts,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsyncapTrainingBounds {
    pub lower: f64,
    pub upper: f64,
    pub eta: f64,
    pub m1: f64,
    pub m2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsyncapScheme {
    Joint = 0,
    Training = 1,
    Genie = 2,
}

/// Simulation parameters. `mu` and `eta` are ignored when NaN; `input_dist`
/// may be NULL for the capacity-achieving default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsyncapSimConfig {
    pub scheme: AsyncapScheme,
    pub n: usize,
    pub alpha: f64,
    pub messages: usize,
    pub trials: usize,
    pub seed: u64,
    pub mu: f64,
    pub eta: f64,
    pub input_dist: *const f64,
    pub input_dist_len: usize,
    pub max_async_level: u64,
    /// 0 selects the default worker count.
    pub threads: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsyncapSimResult {
    pub max_error_rate: f64,
    pub avg_error_rate: f64,
    pub mean_reaction_delay: f64,
    pub empirical_rate: f64,
    pub false_alarm_rate: f64,
    pub miss_rate: f64,
    pub ci_halfwidth: f64,
    pub trials_per_message: usize,
    pub async_level: u64,
    pub async_level_clamped: bool,
    pub preamble_len: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> AsyncapStatus {
    let status = AsyncapStatus::from(&e);
    set_error(e.to_string());
    status
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), AsyncapStatus>) -> AsyncapStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsyncapStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            AsyncapStatus::Internal
        }
    }
}

fn null() -> AsyncapStatus {
    set_error("null pointer argument".into());
    AsyncapStatus::NullPointer
}

unsafe fn channel_ref<'a>(ch: *const AsyncapChannel) -> Result<&'a Channel, AsyncapStatus> {
    ch.as_ref().map(|c| &c.inner).ok_or_else(null)
}

unsafe fn out_ref<'a, T>(out: *mut T) -> Result<&'a mut T, AsyncapStatus> {
    out.as_mut().ok_or_else(null)
}

unsafe fn grid_or_default(grid: *const AsyncapGrid) -> GridSpec {
    grid.as_ref().map(GridSpec::from).unwrap_or_default()
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, AsyncapStatus> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string is not valid UTF-8".into());
        AsyncapStatus::InvalidArgument
    })
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], AsyncapStatus> {
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn emit(out: &mut *mut AsyncapChannel, inner: Channel) {
    *out = Box::into_raw(Box::new(AsyncapChannel { inner }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asyncap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn asyncap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default search grid.
#[no_mangle]
pub extern "C" fn asyncap_grid_default() -> AsyncapGrid {
    let g = GridSpec::default();
    AsyncapGrid {
        simplex_step: g.simplex_step,
        delta_step: g.delta_step,
        refine_rounds: g.refine_rounds,
        seed: g.seed,
        starts: g.starts,
    }
}

/// Builds a channel from a row-major `inputs x outputs` matrix.
///
/// # Safety
/// `rows` must point to `inputs * outputs` readable doubles and `out` must be
/// a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn asyncap_channel_new(
    rows: *const f64,
    inputs: usize,
    outputs: usize,
    star: usize,
    out: *mut *mut AsyncapChannel,
) -> AsyncapStatus {
    guard(|| {
        let out = out_ref(out)?;
        let n = inputs.checked_mul(outputs).ok_or_else(|| fail(Error::InvalidArgument("size overflow".into())))?;
        if outputs == 0 {
            return Err(fail(Error::InvalidChannel("no outputs".into())));
        }
        let data = slice(rows, n)?;
        let q = Channel::new(data.chunks(outputs).map(<[f64]>::to_vec).collect(), star).map_err(fail)?;
        emit(out, q);
        Ok(())
    })
}

/// Parses a JSON channel file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_channel_from_json(json: *const c_char, out: *mut *mut AsyncapChannel) -> AsyncapStatus {
    guard(|| {
        let out = out_ref(out)?;
        let file = ChannelFile::parse(c_str(json)?).map_err(fail)?;
        emit(out, file.to_channel().map_err(fail)?);
        Ok(())
    })
}

/// Loads a bundled channel (`fig3`, `fig4`, `zchannel`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_channel_bundled(name: *const c_char, out: *mut *mut AsyncapChannel) -> AsyncapStatus {
    guard(|| {
        let out = out_ref(out)?;
        let name = c_str(name)?;
        let file = bundled(name).ok_or_else(|| fail(Error::InvalidArgument(format!("no bundled channel {name}"))))?;
        emit(out, file.to_channel().map_err(fail)?);
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `ch` must be NULL or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asyncap_channel_free(ch: *mut AsyncapChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Number of inputs including the no-input symbol; 0 for NULL.
///
/// # Safety
/// `ch` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn asyncap_channel_inputs(ch: *const AsyncapChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.inner.inputs())
}

/// Number of outputs; 0 for NULL.
///
/// # Safety
/// `ch` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn asyncap_channel_outputs(ch: *const AsyncapChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.inner.outputs())
}

/// Synchronous capacity in nats.
///
/// # Safety
/// `ch` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_capacity(ch: *const AsyncapChannel, out: *mut f64) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        *out = blahut_arimoto(q, None, DEFAULT_BA_TOL).map_err(fail)?.capacity;
        Ok(())
    })
}

/// Synchronization threshold; may be infinite.
///
/// # Safety
/// `ch` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_sync_threshold(ch: *const AsyncapChannel, out: *mut f64) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        *out = bounds::sync_threshold(q);
        Ok(())
    })
}

/// Achievable asynchronism exponent at `rate`. `grid` may be NULL.
///
/// # Safety
/// `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_lower_bound(
    ch: *const AsyncapChannel,
    rate: f64,
    grid: *const AsyncapGrid,
    out: *mut f64,
) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        *out = bounds::lower_bound_alpha(q, rate, &grid_or_default(grid)).map_err(fail)?.alpha;
        Ok(())
    })
}

/// Converse asynchronism exponent at `rate`. `grid` may be NULL.
///
/// # Safety
/// `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_upper_bound(
    ch: *const AsyncapChannel,
    rate: f64,
    grid: *const AsyncapGrid,
    out: *mut f64,
) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        *out = bounds::upper_bound_alpha(q, rate, &grid_or_default(grid)).map_err(fail)?.alpha;
        Ok(())
    })
}

/// Exponent of the infinite-threshold case. `grid` may be NULL.
///
/// # Safety
/// `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_alpha_bar(
    ch: *const AsyncapChannel,
    grid: *const AsyncapGrid,
    out: *mut f64,
) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        *out = bounds::alpha_bar(q, &grid_or_default(grid)).map_err(fail)?.alpha;
        Ok(())
    })
}

/// Training-scheme bounds at `rate`. `grid` may be NULL.
///
/// # Safety
/// `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_training_bounds(
    ch: *const AsyncapChannel,
    rate: f64,
    grid: *const AsyncapGrid,
    out: *mut AsyncapTrainingBounds,
) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        let t = bounds::training_bounds(q, rate, &grid_or_default(grid)).map_err(fail)?;
        *out = AsyncapTrainingBounds {
            lower: t.lower.alpha,
            upper: t.upper.alpha,
            eta: t.eta,
            m1: t.m1,
            m2: t.m2,
        };
        Ok(())
    })
}

/// Min-max divergence between two distributions of length `len`, with the
/// maximizing tilt written to `lambda` when it is not NULL.
///
/// # Safety
/// `p0` and `p1` must point to `len` readable doubles; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn asyncap_chernoff(
    p0: *const f64,
    p1: *const f64,
    len: usize,
    value: *mut f64,
    lambda: *mut f64,
) -> AsyncapStatus {
    guard(|| {
        let out = out_ref(value)?;
        let a = Dist::new(slice(p0, len)?.to_vec()).map_err(fail)?;
        let b = Dist::new(slice(p1, len)?.to_vec()).map_err(fail)?;
        let r = chernoff_info(&a, &b, DEFAULT_CHERNOFF_TOL).map_err(fail)?;
        *out = r.value;
        if let Some(l) = lambda.as_mut() {
            *l = r.lambda_star;
        }
        Ok(())
    })
}

/// Achievability exponent of the unit-noise Gaussian channel under `power`,
/// with outputs quantized to `range / cell` cells.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn asyncap_gaussian_lower_bound(
    power: f64,
    rate: f64,
    range: f64,
    cell: f64,
    out: *mut f64,
) -> AsyncapStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = bounds::gaussian_lower_bound(power, rate, &Quantization { range, cell })
            .map_err(fail)?
            .alpha;
        Ok(())
    })
}

/// Configuration with library defaults for `scheme`; `eta` still has to be
/// set for the training scheme.
#[no_mangle]
pub extern "C" fn asyncap_sim_config_default(scheme: AsyncapScheme) -> AsyncapSimConfig {
    AsyncapSimConfig {
        scheme,
        n: 100,
        alpha: 0.0,
        messages: 2,
        trials: 1000,
        seed: 0,
        mu: if scheme == AsyncapScheme::Joint { sim::DEFAULT_MU } else { f64::NAN },
        eta: f64::NAN,
        input_dist: ptr::null(),
        input_dist_len: 0,
        max_async_level: DEFAULT_MAX_ASYNC_LEVEL,
        threads: 0,
    }
}

/// Runs a Monte-Carlo experiment.
///
/// # Safety
/// `ch` must be a live handle, `cfg` and `out` valid pointers, and
/// `cfg->input_dist` NULL or pointing to `cfg->input_dist_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn asyncap_simulate(
    ch: *const AsyncapChannel,
    cfg: *const AsyncapSimConfig,
    out: *mut AsyncapSimResult,
) -> AsyncapStatus {
    guard(|| {
        let (q, out) = (channel_ref(ch)?, out_ref(out)?);
        let c = cfg.as_ref().ok_or_else(null)?;
        let scheme = match c.scheme {
            AsyncapScheme::Joint => Scheme::Joint,
            AsyncapScheme::Training => Scheme::Training,
            AsyncapScheme::Genie => Scheme::Genie,
        };
        let mut config = SimConfig::new(scheme, c.n, c.alpha, c.messages, c.trials, c.seed);
        config.mu = (!c.mu.is_nan()).then_some(c.mu);
        config.eta = (!c.eta.is_nan()).then_some(c.eta);
        config.max_async_level = c.max_async_level;
        config.threads = c.threads;
        if !c.input_dist.is_null() {
            let p = slice(c.input_dist, c.input_dist_len)?;
            config.input_dist = Some(Dist::new(p.to_vec()).map_err(fail)?);
        }
        let r = sim::run_experiment(q, &config).map_err(fail)?;
        *out = AsyncapSimResult {
            max_error_rate: r.max_error_rate,
            avg_error_rate: r.avg_error_rate,
            mean_reaction_delay: r.mean_reaction_delay,
            empirical_rate: r.empirical_rate,
            false_alarm_rate: r.false_alarm_rate,
            miss_rate: r.miss_rate,
            ci_halfwidth: r.ci_halfwidth,
            trials_per_message: r.trials_per_message,
            async_level: r.async_level,
            async_level_clamped: r.async_level_clamped,
            preamble_len: r.preamble_len,
        };
        Ok(())
    })
}
