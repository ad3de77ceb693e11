//! C interface to `eqbundle`.
//!
//! Fans and Kaneyama data cross the boundary as opaque handles; everything
//! else crosses as NUL-terminated JSON in the same formats the command line
//! uses. Every function returns an [`EqbStatus`]; on failure a message is
//! available from [`eqb_last_error_message`] until the next call on the
//! same thread. Strings handed out must be released with
//! [`eqb_string_free`], handles with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use eqbundle::{
    aut_lie_algebra, extend_structure_group, split_check, tangent_frame_data, validate, Embedding, Fan, KaneyamaData,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    /// The input parsed but is not valid data (failed validation).
    Invalid = 4,
    /// A computation rejected its arguments.
    Domain = 5,
    Panic = 6,
}

/// Opaque fan handle.
pub struct EqbFan(Fan);

/// Opaque Kaneyama data handle.
pub struct EqbData(KaneyamaData);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(EqbStatus, String);

impl Failure {
    fn domain(e: impl ToString) -> Self {
        Failure(EqbStatus::Domain, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EqbStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EqbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EqbStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(EqbStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(EqbStatus::InvalidUtf8, e.to_string()))
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(EqbStatus::NullPointer, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(EqbStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(Failure::domain)?;
    put(out, c.into_raw())
}

fn parse_error(e: eqbundle::json::JsonError) -> Failure {
    Failure(EqbStatus::Parse, e.to_string())
}

fn require_valid(d: &KaneyamaData) -> Result<(), Failure> {
    let rep = validate(d);
    let first = rep.failures().next().map(|c| format!("{}: {}", c.rule, c.detail.as_deref().unwrap_or("failed")));
    match first {
        None => Ok(()),
        Some(msg) => Err(Failure(EqbStatus::Invalid, msg)),
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn eqb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eqb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_fan_from_json(json: *const c_char, out: *mut *mut EqbFan) -> EqbStatus {
    guard(|| {
        let f: Fan = eqbundle::json::from_str(read_str(json)?).map_err(parse_error)?;
        put(out, Box::into_raw(Box::new(EqbFan(f))))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_fan_projective_space(n: usize, out: *mut *mut EqbFan) -> EqbStatus {
    guard(|| {
        let f = Fan::projective_space(n).map_err(Failure::domain)?;
        put(out, Box::into_raw(Box::new(EqbFan(f))))
    })
}

/// Kleinschmidt fan with `s` and the `r` nondecreasing twists in `a`.
///
/// # Safety
/// `a` must point to `r` readable integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_fan_kleinschmidt(s: usize, a: *const i64, r: usize, out: *mut *mut EqbFan) -> EqbStatus {
    guard(|| {
        if a.is_null() && r > 0 {
            return Err(Failure(EqbStatus::NullPointer, "null twist array".into()));
        }
        let twists = if r == 0 { &[][..] } else { std::slice::from_raw_parts(a, r) };
        let f = Fan::kleinschmidt(s, twists).map_err(Failure::domain)?;
        put(out, Box::into_raw(Box::new(EqbFan(f))))
    })
}

/// # Safety
/// `fan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_fan_to_json(fan: *const EqbFan, out: *mut *mut c_char) -> EqbStatus {
    guard(|| put_string(out, eqbundle::json::to_string(&borrow(fan)?.0)))
}

/// # Safety
/// `fan` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eqb_fan_free(fan: *mut EqbFan) {
    if !fan.is_null() {
        drop(Box::from_raw(fan));
    }
}

/// Parses Kaneyama data. Parsing does not validate; see
/// [`eqb_data_validate`].
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_from_json(json: *const c_char, out: *mut *mut EqbData) -> EqbStatus {
    guard(|| {
        let d: KaneyamaData = eqbundle::json::from_str(read_str(json)?).map_err(parse_error)?;
        put(out, Box::into_raw(Box::new(EqbData(d))))
    })
}

/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_to_json(data: *const EqbData, out: *mut *mut c_char) -> EqbStatus {
    guard(|| put_string(out, eqbundle::json::to_string(&borrow(data)?.0)))
}

/// Tangent frame bundle data of a fan.
///
/// # Safety
/// `fan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_tangent(fan: *const EqbFan, out: *mut *mut EqbData) -> EqbStatus {
    guard(|| {
        let d = tangent_frame_data(&borrow(fan)?.0).map_err(Failure::domain)?;
        put(out, Box::into_raw(Box::new(EqbData(d))))
    })
}

/// Extends GL(r) data to SL(r+1) by `A ↦ diag(A, det A^-1)`.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_extend_sl_balance(data: *const EqbData, out: *mut *mut EqbData) -> EqbStatus {
    guard(|| {
        let d = extend_structure_group(&borrow(data)?.0, &Embedding::SlBalance).map_err(Failure::domain)?;
        put(out, Box::into_raw(Box::new(EqbData(d))))
    })
}

/// Writes `1` to `valid` when every rule passes and `0` otherwise; the
/// full report is written as JSON to `report` when it is not null.
///
/// # Safety
/// `data` must be a live handle; `valid` must be writable; `report` must
/// be null or writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_validate(
    data: *const EqbData,
    valid: *mut i32,
    report: *mut *mut c_char,
) -> EqbStatus {
    guard(|| {
        let rep = validate(&borrow(data)?.0);
        put(valid, i32::from(rep.is_valid()))?;
        if !report.is_null() {
            put_string(report, eqbundle::json::to_string(&rep))?;
        }
        Ok(())
    })
}

/// Dimension of the automorphism Lie algebra in the frame of cone `base`.
///
/// # Safety
/// `data` must be a live handle; `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_aut_dim(data: *const EqbData, base: usize, dim: *mut usize) -> EqbStatus {
    guard(|| {
        let d = &borrow(data)?.0;
        require_valid(d)?;
        let rep = aut_lie_algebra(d, base).map_err(Failure::domain)?;
        put(dim, rep.dim)
    })
}

/// Automorphism Lie algebra summary as JSON.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_aut_json(data: *const EqbData, base: usize, out: *mut *mut c_char) -> EqbStatus {
    guard(|| {
        let d = &borrow(data)?.0;
        require_valid(d)?;
        let rep = aut_lie_algebra(d, base).map_err(Failure::domain)?;
        put_string(out, eqbundle::json::to_string(&rep.summary()))
    })
}

/// Splitting verdict as JSON.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_split_json(
    data: *const EqbData,
    base: usize,
    attempts: u32,
    seed: u64,
    out: *mut *mut c_char,
) -> EqbStatus {
    guard(|| {
        let d = &borrow(data)?.0;
        require_valid(d)?;
        let v = split_check(d, base, attempts, seed).map_err(Failure::domain)?;
        put_string(out, eqbundle::json::to_string(&v))
    })
}

/// # Safety
/// `data` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eqb_data_free(data: *mut EqbData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}
