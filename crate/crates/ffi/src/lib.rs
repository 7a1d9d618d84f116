//! C ABI over the qsieve library.
//!
//! Fields and newform collections are opaque handles created by `qs_*_new`
//! or `qs_*_load` and released by the matching `qs_*_free`. Every fallible
//! call returns a [`QsStatus`]; on failure the message is kept per thread
//! and can be read with [`qs_last_error`]. Reports come back as
//! NUL-terminated JSON strings owned by the caller and released with
//! [`qs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use qsieve::forms::{NewformRecord, SieveContext};
use qsieve::pipeline::{load_forms, render_report, replay, Config};
use qsieve::quadfield::{fundamental_unit, make_field, QuadField};
use qsieve::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Field = 10,
    Residue = 11,
    UnitGenus = 12,
    Hecke = 13,
    Frey = 14,
    Irred = 15,
    Forms = 16,
    Analytic = 17,
    Solutions = 18,
    Config = 19,
    Io = 20,
    Panic = 99,
}

impl From<&Error> for QsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Field(_) => QsStatus::Field,
            Error::Residue(_) => QsStatus::Residue,
            Error::UnitGenus(_) => QsStatus::UnitGenus,
            Error::Hecke(_) => QsStatus::Hecke,
            Error::Frey(_) => QsStatus::Frey,
            Error::Irred(_) => QsStatus::Irred,
            Error::Forms(_) => QsStatus::Forms,
            Error::Analytic(_) => QsStatus::Analytic,
            Error::Solutions(_) => QsStatus::Solutions,
            Error::Config(_) => QsStatus::Config,
            Error::Io(_) => QsStatus::Io,
        }
    }
}

/// Opaque handle to a real quadratic field.
pub struct QsField {
    inner: QuadField,
}

/// Opaque handle to a loaded collection of newform records.
pub struct QsForms {
    inner: Vec<NewformRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Fail {
    Status(QsStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QsStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            let s = QsStatus::from(&e);
            set_error(e.to_string());
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            QsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(QsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Status(QsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::Status(QsStatus::InvalidUtf8, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next qsieve call on the same thread.
#[no_mangle]
pub extern "C" fn qs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a qsieve call and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build Q(√d) for squarefree d > 1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_field_new(d: u64, out: *mut *mut QsField) -> QsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = make_field(d)?;
        *out = Box::into_raw(Box::new(QsField { inner }));
        Ok(())
    })
}

/// # Safety
/// `f` must come from [`qs_field_new`] and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qs_field_free(f: *mut QsField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// The radicand d of the field.
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_field_d(f: *const QsField, out: *mut u64) -> QsStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.inner.d;
        Ok(())
    })
}

/// Field data and fundamental unit as a JSON report.
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_field_classify_json(f: *const QsField, out: *mut *mut c_char) -> QsStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        #[derive(serde::Serialize)]
        struct Body<'a> {
            field: &'a QuadField,
            fundamental_unit: qsieve::quadfield::FundamentalUnit,
        }
        let body = Body { field: &f.inner, fundamental_unit: fundamental_unit(&f.inner) };
        write_string(out, render_report("classify", &body)?)
    })
}

/// Level recipe (candidate levels and Nebentypus) as a JSON report.
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_field_level_json(f: *const QsField, out: *mut *mut c_char) -> QsStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = qsieve::frey::level_recipe(&f.inner, None)?;
        write_string(out, render_report("level", &r)?)
    })
}

/// Load newform records from a forms file or a directory of them.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_forms_load(path: *const c_char, out: *mut *mut QsForms) -> QsStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = load_forms(&[PathBuf::from(path)])?;
        *out = Box::into_raw(Box::new(QsForms { inner }));
        Ok(())
    })
}

/// # Safety
/// `f` must come from [`qs_forms_load`] and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qs_forms_free(f: *mut QsForms) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of records in the collection; 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qs_forms_len(f: *const QsForms) -> usize {
    f.as_ref().map_or(0, |f| f.inner.len())
}

/// Run the trace sieve on every record for primes in [pmin, pmax] using the
/// auxiliary primes `aux[0..aux_len]`, and return the verdicts as JSON.
///
/// # Safety
/// `field`, `forms` and `out` must be valid; `aux` must point to `aux_len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn qs_sieve_json(
    field: *const QsField,
    forms: *const QsForms,
    aux: *const u64,
    aux_len: usize,
    pmin: u64,
    pmax: u64,
    out: *mut *mut c_char,
) -> QsStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        let forms = forms.as_ref().ok_or_else(|| null("forms"))?;
        if aux.is_null() || out.is_null() {
            return Err(null(if aux.is_null() { "aux" } else { "out" }));
        }
        let aux = std::slice::from_raw_parts(aux, aux_len);
        let ctx = SieveContext::new(&field.inner, aux)?;
        let verdicts = forms.inner.iter().map(|f| ctx.discard(f, (pmin, pmax))).collect::<qsieve::Result<Vec<_>>>()?;
        write_string(out, render_report("sieve", &verdicts)?)
    })
}

/// Full pipeline for Q(√d) with default configuration. `forms_path` may be
/// NULL to run without newform data.
///
/// # Safety
/// `forms_path` must be NULL or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_replay_json(d: u64, forms_path: *const c_char, out: *mut *mut c_char) -> QsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let paths =
            if forms_path.is_null() { Vec::new() } else { vec![PathBuf::from(read_str(forms_path, "forms_path")?)] };
        let r = replay(d, &paths, &Config::default())?;
        write_string(out, render_report("replay", &r)?)
    })
}
