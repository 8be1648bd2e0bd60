//! C interface to the `biruin` library.
//!
//! Every function returns a status code (`BIRUIN_OK` or a negative error)
//! and writes results through out-pointers. On error the message can be read
//! with [`biruin_last_error`] on the same thread. Models and distributions
//! are opaque heap handles; free them with the matching `_free` function.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! makes. Null pointers are detected and reported as `BIRUIN_ERR_NULL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use biruin::config::{parse_config, parse_override, RunConfig};
use biruin::mc_engine::{asymptotic_for, estimate_ruin_with, Estimate, McOptions, RuinType};
use biruin::{ClaimDistribution, Error};

pub const BIRUIN_OK: i32 = 0;
pub const BIRUIN_ERR_NULL: i32 = -1;
pub const BIRUIN_ERR_INVALID_ARGUMENT: i32 = -2;
pub const BIRUIN_ERR_CONFIG: i32 = -3;
pub const BIRUIN_ERR_NUMERICAL: i32 = -4;
pub const BIRUIN_ERR_UTF8: i32 = -5;
pub const BIRUIN_ERR_PANIC: i32 = -6;

/// Ruin event selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiruinRuinType {
    Max = 0,
    Min = 1,
    Sum = 2,
    And = 3,
    Comp1 = 4,
    Comp2 = 5,
}

impl From<BiruinRuinType> for RuinType {
    fn from(k: BiruinRuinType) -> Self {
        match k {
            BiruinRuinType::Max => RuinType::Max,
            BiruinRuinType::Min => RuinType::Min,
            BiruinRuinType::Sum => RuinType::Sum,
            BiruinRuinType::And => RuinType::And,
            BiruinRuinType::Comp1 => RuinType::Comp1,
            BiruinRuinType::Comp2 => RuinType::Comp2,
        }
    }
}

/// Opaque model handle: model parameters plus run settings.
pub struct BiruinModel {
    config: RunConfig,
}

/// Opaque claim-size distribution handle.
pub struct BiruinDistribution {
    dist: ClaimDistribution,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiruinEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: u64,
    pub hits: u64,
}

impl From<&Estimate> for BiruinEstimate {
    fn from(e: &Estimate) -> Self {
        BiruinEstimate { p_hat: e.p_hat, ci_lo: e.ci_lo, ci_hi: e.ci_hi, n: e.n, hits: e.hits }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiruinEstimateSet {
    pub max: BiruinEstimate,
    pub min: BiruinEstimate,
    pub sum: BiruinEstimate,
    pub and_: BiruinEstimate,
    pub comp1: BiruinEstimate,
    pub comp2: BiruinEstimate,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiruinAsymptotic {
    pub value: f64,
    /// Static NUL-terminated formula label; never freed by the caller.
    pub case_id: *const c_char,
    /// Nonzero when `value > 1`.
    pub warn_gt_one: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } => BIRUIN_ERR_INVALID_ARGUMENT,
        Error::Config { .. } => BIRUIN_ERR_CONFIG,
        Error::Quadrature { .. } | Error::Io(_) => BIRUIN_ERR_NUMERICAL,
    }
}

enum Fail {
    Null(&'static str),
    Utf8(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            BIRUIN_OK
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            BIRUIN_ERR_NULL
        }
        Ok(Err(Fail::Utf8(what))) => {
            set_last_error(&format!("{what} is not valid UTF-8"));
            BIRUIN_ERR_UTF8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            BIRUIN_ERR_PANIC
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn biruin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn biruin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates the built-in default model.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_model_default(out: *mut *mut BiruinModel) -> i32 {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(BiruinModel { config: RunConfig::default() }));
        Ok(())
    })
}

/// Parses a TOML config document into a new model.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_model_from_toml(toml: *const c_char, out: *mut *mut BiruinModel) -> i32 {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(toml, "toml")?;
        let config = parse_config(text, &[])?;
        *out = Box::into_raw(Box::new(BiruinModel { config }));
        Ok(())
    })
}

/// Applies a `key=value` override, e.g. `"model.u1=20"`. The model is left
/// unchanged on error.
///
/// # Safety
/// `model` must come from this library; `assignment` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn biruin_model_set(model: *mut BiruinModel, assignment: *const c_char) -> i32 {
    guard(|| {
        let model = out_arg(model, "model")?;
        let ov = parse_override(str_arg(assignment, "assignment")?)?;
        model.config = parse_config(&model.config.to_flat_toml(), &[ov])?;
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn biruin_model_free(model: *mut BiruinModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Monte Carlo estimates of all ruin probabilities. `workers = 0` uses the
/// model's configured worker count.
///
/// # Safety
/// `model` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_estimate_ruin(
    model: *const BiruinModel,
    n_paths: u64,
    seed: u64,
    workers: u32,
    out: *mut BiruinEstimateSet,
) -> i32 {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let out = out_arg(out, "out")?;
        let opts = McOptions {
            n_paths,
            seed,
            workers: if workers == 0 { model.config.mc.workers } else { workers as usize },
            batch_size: model.config.mc.batch_size,
        };
        let est = estimate_ruin_with(&model.config.model, &opts)?;
        *out = BiruinEstimateSet {
            max: (&est.max).into(),
            min: (&est.min).into(),
            sum: (&est.sum).into(),
            and_: (&est.and).into(),
            comp1: (&est.comp1).into(),
            comp2: (&est.comp2).into(),
        };
        Ok(())
    })
}

fn case_label(id: biruin::CaseId) -> *const c_char {
    use biruin::CaseId::*;
    let s: &'static str = match id {
        T31a_max => "T31a_max\0",
        T31a_min => "T31a_min\0",
        T31b_sum => "T31b_sum\0",
        T32a_max => "T32a_max\0",
        T32a_min => "T32a_min\0",
        T32b_sum => "T32b_sum\0",
        T33a_max => "T33a_max\0",
        T33a_min => "T33a_min\0",
        T33b_sum => "T33b_sum\0",
        T34a_max => "T34a_max\0",
        T34a_min => "T34a_min\0",
        T34b_sum => "T34b_sum\0",
        L43_uni => "L43_uni\0",
        L44_uni => "L44_uni\0",
        and_upper => "and_upper\0",
    };
    s.as_ptr().cast()
}

/// Asymptotic approximation of the `kind` ruin probability at `(u1, u2)`.
///
/// # Safety
/// `model` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_asymptotic(
    model: *const BiruinModel,
    kind: BiruinRuinType,
    u1: f64,
    u2: f64,
    out: *mut BiruinAsymptotic,
) -> i32 {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let out = out_arg(out, "out")?;
        let res = asymptotic_for(&model.config.model, kind.into(), u1, u2)?;
        *out = BiruinAsymptotic {
            value: res.value,
            case_id: case_label(res.case_id),
            warn_gt_one: res.warn_gt_one() as i32,
        };
        Ok(())
    })
}

/// Creates a claim-size distribution: `pareto [alpha, xm]`,
/// `weibull [shape, scale]`, `lognormal [mu, sigma]` or `exponential [rate]`.
///
/// # Safety
/// `kind` must be NUL-terminated, `params` valid for `n_params` reads and
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_distribution_new(
    kind: *const c_char,
    params: *const f64,
    n_params: usize,
    out: *mut *mut BiruinDistribution,
) -> i32 {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let kind = str_arg(kind, "kind")?;
        let params = if n_params == 0 {
            &[][..]
        } else if params.is_null() {
            return Err(Fail::Null("params"));
        } else {
            std::slice::from_raw_parts(params, n_params)
        };
        let dist = ClaimDistribution::from_kind(kind, params)?;
        *out = Box::into_raw(Box::new(BiruinDistribution { dist }));
        Ok(())
    })
}

/// Releases a distribution. Null is ignored.
///
/// # Safety
/// `dist` must be null or come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn biruin_distribution_free(dist: *mut BiruinDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Survival function `P(X > x)`.
///
/// # Safety
/// `dist` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_distribution_tail(dist: *const BiruinDistribution, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        let d = ref_arg(dist, "dist")?;
        *out_arg(out, "out")? = d.dist.tail(x);
        Ok(())
    })
}

/// Quantile at level `p` in (0, 1).
///
/// # Safety
/// `dist` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_distribution_quantile(dist: *const BiruinDistribution, p: f64, out: *mut f64) -> i32 {
    guard(|| {
        let d = ref_arg(dist, "dist")?;
        let out = out_arg(out, "out")?;
        *out = d.dist.quantile(p)?;
        Ok(())
    })
}

/// `int_u^{u e^{rT}} P(X > y) / y dy`.
///
/// # Safety
/// `dist` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_tail_integral(
    dist: *const BiruinDistribution,
    u: f64,
    r: f64,
    horizon: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let d = ref_arg(dist, "dist")?;
        let out = out_arg(out, "out")?;
        *out = biruin::asymptotics::tail_integral(&d.dist, u, r, horizon)?;
        Ok(())
    })
}

/// Probability that a Brownian bridge from `a` to `b` with variance `v`
/// dips below zero.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn biruin_bridge_crossing_prob(a: f64, b: f64, v: f64, out: *mut f64) -> i32 {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = biruin::ruin_detect::bridge_crossing_prob(a, b, v)?;
        Ok(())
    })
}
