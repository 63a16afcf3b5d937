//! C ABI for the `hsball` toolkit.
//!
//! Every function returns an [`HsbStatus`]; on failure the message is kept in
//! thread-local storage and read with [`hsb_last_error_message`]. Objects are
//! opaque handles created by `*_new`/`*_build` functions and released by the
//! matching `*_free`. Strings returned through `out` pointers are owned by the
//! caller and released with [`hsb_string_free`]. Complex numbers travel as
//! interleaved `(re, im)` pairs of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use hsball::appendix;
use hsball::cli::config::RunConfig;
use hsball::cli::report::Report;
use hsball::cli::{run::run, Command};
use hsball::drury::DrurySystem;
use hsball::error::{ErrorKind, ToolkitError};
use hsball::kernels::{gram, kernel_norm_proxy, KernelConvention};
use hsball::multipliers::pick_min_norm;
use hsball::params::{Point, PointSeq, SpaceParams};
use hsball::poly::PolyFn;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsbStatus {
    Ok = 0,
    InvalidParams = 1,
    PointOutsideBall = 2,
    LogKernelCase = 3,
    DegreeOverflow = 4,
    SingularGram = 5,
    BisectionNoConverge = 6,
    QuadratureUnderResolved = 7,
    NullPointer = 8,
    InvalidString = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<ErrorKind> for HsbStatus {
    fn from(kind: ErrorKind) -> Self {
        match kind {
            ErrorKind::InvalidParams => HsbStatus::InvalidParams,
            ErrorKind::PointOutsideBall => HsbStatus::PointOutsideBall,
            ErrorKind::LogKernelCase => HsbStatus::LogKernelCase,
            ErrorKind::DegreeOverflow => HsbStatus::DegreeOverflow,
            ErrorKind::SingularGram => HsbStatus::SingularGram,
            ErrorKind::BisectionNoConverge => HsbStatus::BisectionNoConverge,
            ErrorKind::QuadratureUnderResolved => HsbStatus::QuadratureUnderResolved,
        }
    }
}

/// Validated `(n, s, p)`.
pub struct HsbParams(SpaceParams);

/// Finite sequence of distinct points of the ball.
pub struct HsbPointSeq(PointSeq);

/// Truncated power series.
pub struct HsbPoly(PolyFn);

/// Drury dual system of a sequence.
pub struct HsbDrury(DrurySystem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: HsbStatus,
    message: String,
}

impl From<ToolkitError> for Failure {
    fn from(e: ToolkitError) -> Self {
        Failure {
            status: e.kind.into(),
            message: e.to_string(),
        }
    }
}

fn failure(status: HsbStatus, message: impl Into<String>) -> Failure {
    Failure {
        status,
        message: message.into(),
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> HsbStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsbStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(&e.message);
            e.status
        }
        Err(_) => {
            set_last_error("internal panic");
            HsbStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| failure(HsbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| failure(HsbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(failure(HsbStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(failure(HsbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| failure(HsbStatus::InvalidString, format!("{what} is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(failure(HsbStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| failure(HsbStatus::InvalidString, "output contains NUL"))?;
    write(out, c.into_raw(), "out")
}

fn complexes(flat: &[f64]) -> Vec<Complex64> {
    flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hsb_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn hsb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hsb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn hsb_params_new(
    n: usize,
    s: f64,
    p: f64,
    override_sp_bound: bool,
    out: *mut *mut HsbParams,
) -> HsbStatus {
    guard(|| {
        let params = SpaceParams::with_override(n, s, p, override_sp_bound)?;
        write(out, Box::into_raw(Box::new(HsbParams(params))), "out")
    })
}

/// # Safety
/// `params` must come from [`hsb_params_new`]; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hsb_params_free(params: *mut HsbParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Dual exponent (`inf` at `p = 1`) and kernel exponent `n - 2s`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_params_derived(
    params: *const HsbParams,
    out_p_prime: *mut f64,
    out_rho: *mut f64,
) -> HsbStatus {
    guard(|| {
        let params = &borrow(params, "params")?.0;
        write(out_p_prime, params.p_prime().value(), "out_p_prime")?;
        write(out_rho, params.rho(), "out_rho")
    })
}

/// `(1-|a|^2)^{s - n/q'}` at a point given as `2n` doubles.
///
/// # Safety
/// `point` must hold `2n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsb_kernel_norm_proxy(
    params: *const HsbParams,
    point: *const f64,
    q: f64,
    out: *mut f64,
) -> HsbStatus {
    guard(|| {
        let params = &borrow(params, "params")?.0;
        let a = Point::from_re_im(slice(point, 2 * params.n(), "point")?)?;
        write(out, kernel_norm_proxy(&a, params, q), "out")
    })
}

/// Sequence of `count` points, each `2n` doubles, stored contiguously.
///
/// # Safety
/// `coords` must hold `count * 2n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_pointseq_new(
    params: *const HsbParams,
    coords: *const f64,
    count: usize,
    out: *mut *mut HsbPointSeq,
) -> HsbStatus {
    guard(|| {
        let params = borrow(params, "params")?.0;
        let dim = 2 * params.n();
        let flat = slice(coords, count * dim, "coords")?;
        let pts = flat
            .chunks_exact(dim)
            .map(Point::from_re_im)
            .collect::<Result<Vec<_>, _>>()?;
        let seq = PointSeq::new(params, pts)?;
        write(out, Box::into_raw(Box::new(HsbPointSeq(seq))), "out")
    })
}

/// # Safety
/// `seq` must come from [`hsb_pointseq_new`]; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hsb_pointseq_free(seq: *mut HsbPointSeq) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// # Safety
/// `seq` must be valid or NULL (which gives 0).
#[no_mangle]
pub unsafe extern "C" fn hsb_pointseq_len(seq: *const HsbPointSeq) -> usize {
    seq.as_ref().map_or(0, |s| s.0.len())
}

/// Series from its JSON form `{"n", "cap", "terms": [{"alpha", "re", "im"}]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_poly_from_json(json: *const c_char, out: *mut *mut HsbPoly) -> HsbStatus {
    guard(|| {
        let text = string(json, "json")?;
        let f: PolyFn = serde_json::from_str(text)
            .map_err(|e| failure(HsbStatus::InvalidParams, format!("bad polynomial JSON: {e}")))?;
        write(out, Box::into_raw(Box::new(HsbPoly(f))), "out")
    })
}

/// # Safety
/// `poly` must be valid; the string written to `out` is freed with [`hsb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hsb_poly_to_json(poly: *const HsbPoly, out: *mut *mut c_char) -> HsbStatus {
    guard(|| {
        let f = &borrow(poly, "poly")?.0;
        let text = serde_json::to_string(f).map_err(|e| failure(HsbStatus::InvalidParams, e.to_string()))?;
        write_string(out, text)
    })
}

/// # Safety
/// `poly` must come from this library; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hsb_poly_free(poly: *mut HsbPoly) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Value at `z` (`2n` doubles).
///
/// # Safety
/// Pointers must be valid and `z` must hold `2n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsb_poly_eval(
    poly: *const HsbPoly,
    z: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HsbStatus {
    guard(|| {
        let f = &borrow(poly, "poly")?.0;
        let v = f.eval(&complexes(slice(z, 2 * f.n(), "z")?));
        write(out_re, v.re, "out_re")?;
        write(out_im, v.im, "out_im")
    })
}

/// Truncated product; the cap is the larger of the two caps.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_poly_mul(a: *const HsbPoly, b: *const HsbPoly, out: *mut *mut HsbPoly) -> HsbStatus {
    guard(|| {
        let prod = borrow(a, "a")?.0.mul(&borrow(b, "b")?.0)?;
        write(out, Box::into_raw(Box::new(HsbPoly(prod))), "out")
    })
}

/// `R^j f`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_poly_radial_derivative(poly: *const HsbPoly, j: u32, out: *mut *mut HsbPoly) -> HsbStatus {
    guard(|| {
        let d = borrow(poly, "poly")?.0.radial_derivative(j);
        write(out, Box::into_raw(Box::new(HsbPoly(d))), "out")
    })
}

/// Gram matrix into `buf` as `N x N` row-major `(re, im)` pairs, so
/// `buf_len >= 2 N^2`. `convention` is 0 for the model kernel, 1 for the exact one.
///
/// # Safety
/// `buf` must hold `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsb_gram(
    seq: *const HsbPointSeq,
    convention: u32,
    cap: u32,
    buf: *mut f64,
    buf_len: usize,
) -> HsbStatus {
    guard(|| {
        let seq = &borrow(seq, "seq")?.0;
        let conv = match convention {
            0 => KernelConvention::Model,
            1 => KernelConvention::Exact,
            other => return Err(failure(HsbStatus::InvalidParams, format!("unknown kernel convention {other}"))),
        };
        let need = 2 * seq.len() * seq.len();
        if buf_len < need {
            return Err(failure(HsbStatus::BufferTooSmall, format!("need {need} doubles, got {buf_len}")));
        }
        if buf.is_null() {
            return Err(failure(HsbStatus::NullPointer, "buf is null"));
        }
        let g = gram(seq, conv, cap)?;
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (k, entry) in g.to_rows().into_iter().flatten().enumerate() {
            out[2 * k] = entry[0];
            out[2 * k + 1] = entry[1];
        }
        Ok(())
    })
}

/// Smallest Pick multiplier norm for `values` (`2N` doubles).
///
/// # Safety
/// `values` must hold `2N` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsb_pick_min_norm(seq: *const HsbPointSeq, values: *const f64, out_t: *mut f64) -> HsbStatus {
    guard(|| {
        let seq = &borrow(seq, "seq")?.0;
        let v = complexes(slice(values, 2 * seq.len(), "values")?);
        write(out_t, pick_min_norm(seq, &v)?.t_min, "out_t")
    })
}

/// # Safety
/// `seq` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_drury_build(seq: *const HsbPointSeq, cap: u32, out: *mut *mut HsbDrury) -> HsbStatus {
    guard(|| {
        let sys = DrurySystem::build(&borrow(seq, "seq")?.0, cap)?;
        write(out, Box::into_raw(Box::new(HsbDrury(sys))), "out")
    })
}

/// # Safety
/// `sys` must come from [`hsb_drury_build`]; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hsb_drury_free(sys: *mut HsbDrury) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Identity residuals at `samples` seeded points, as JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_drury_summary_json(
    sys: *mut HsbDrury,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> HsbStatus {
    guard(|| {
        let summary = borrow_mut(sys, "sys")?.0.summary(samples, seed)?;
        let text = serde_json::to_string(&summary).map_err(|e| failure(HsbStatus::InvalidParams, e.to_string()))?;
        write_string(out, text)
    })
}

/// `max sum_a |gamma_a(z)|^{2l}` against `C^{2l}` over seeded points.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_drury_ha0(
    sys: *const HsbDrury,
    l: u32,
    samples: usize,
    seed: u64,
    out_max_sum: *mut f64,
    out_bound: *mut f64,
    out_pass: *mut bool,
) -> HsbStatus {
    guard(|| {
        let r = borrow(sys, "sys")?.0.ha0_bound_check(l, samples, seed);
        write(out_max_sum, r.max_sum, "out_max_sum")?;
        write(out_bound, r.bound, "out_bound")?;
        write(out_pass, r.pass, "out_pass")
    })
}

/// Exclusion coefficients `A_q(j, l)` as numerator/denominator pairs.
/// `capacity` is the length of both output arrays; `out_len` receives
/// `min(j, l) + 1`.
///
/// # Safety
/// `out_num` and `out_den` must hold `capacity` integers.
#[no_mangle]
pub unsafe extern "C" fn hsb_appendix_exclusion(
    j: u32,
    l: u32,
    out_num: *mut i64,
    out_den: *mut i64,
    capacity: usize,
    out_len: *mut usize,
) -> HsbStatus {
    guard(|| {
        let row = appendix::rational_i64(&appendix::exclusion_coeffs(j, l))
            .ok_or_else(|| failure(HsbStatus::InvalidParams, "coefficient does not fit in 64 bits"))?;
        write(out_len, row.len(), "out_len")?;
        if capacity < row.len() {
            return Err(failure(HsbStatus::BufferTooSmall, format!("need {} entries", row.len())));
        }
        if out_num.is_null() || out_den.is_null() {
            return Err(failure(HsbStatus::NullPointer, "output arrays are null"));
        }
        for (k, (num, den)) in row.into_iter().enumerate() {
            out_num.add(k).write(num);
            out_den.add(k).write(den);
        }
        Ok(())
    })
}

/// Run a CLI command (e.g. `"drury"`) on a JSON configuration and return the
/// JSON report. `Ok` means the command ran; the report's `passed` field says
/// whether its checks held.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsb_run(command: *const c_char, config_json: *const c_char, out: *mut *mut c_char) -> HsbStatus {
    guard(|| {
        let name = string(command, "command")?;
        let command = Command::EXPERIMENTS
            .into_iter()
            .chain([Command::AllChecks])
            .find(|c| c.name() == name)
            .ok_or_else(|| failure(HsbStatus::InvalidParams, format!("unknown command {name}")))?;
        let cfg = RunConfig::from_json(string(config_json, "config_json")?)?;
        let outcome = run(command, &cfg)?;
        write_string(out, Report::new(command.name(), cfg, &outcome).to_json())
    })
}
