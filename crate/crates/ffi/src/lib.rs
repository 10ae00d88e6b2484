//! C interface to `flatweb`.
//!
//! Webs live behind the opaque `FwWeb` handle. Every fallible call returns an `FwStatus`;
//! on failure `fw_last_error_message` describes the most recent error on the calling thread.
//! Strings returned through out-parameters are owned by the caller and released with
//! `fw_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flatweb::catalog;
use flatweb::connection::{self, ConnectionError};
use flatweb::expr::Expr;
use flatweb::hexagon::{self, HexagonError, HexagonOptions};
use flatweb::singular::{self, ClassifyOptions};
use flatweb::web::{
    Depressed, DomainBox, GeneralCubic, GridSpec, QuadraticPlusVertical, WebSource, WebSpec,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    WrongVariant = 5,
    Domain = 6,
    NotRegular = 7,
    AllExcluded = 8,
    Numerical = 9,
    Panic = 10,
}

/// Opaque web handle.
pub struct FwWeb {
    spec: WebSpec,
}

/// Summary of a flatness audit.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FwFlatness {
    pub max_abs_k: f64,
    pub argmax_x: f64,
    pub argmax_y: f64,
    pub excluded_fraction: f64,
    pub evaluated: usize,
    pub flat: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (FwStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FwStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FwStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (FwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (FwStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn expr(p: *const c_char, what: &str) -> Result<Expr, Failure> {
    Expr::parse(text(p, what)?).map_err(|e| (FwStatus::Parse, format!("{what}: {e}")))
}

unsafe fn web<'a>(p: *const FwWeb) -> Result<&'a FwWeb, Failure> {
    p.as_ref().ok_or_else(|| null("web"))
}

fn domain(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<DomainBox, Failure> {
    DomainBox::new(xmin, xmax, ymin, ymax).map_err(|e| (FwStatus::InvalidArgument, e.to_string()))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn emit_web(spec: WebSpec, out: *mut *mut FwWeb) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    spec.validate()
        .map_err(|e| (FwStatus::InvalidArgument, e.to_string()))?;
    out.write(Box::into_raw(Box::new(FwWeb { spec })));
    Ok(())
}

unsafe fn emit_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s)
        .map_err(|_| (FwStatus::Numerical, "string has interior NUL".to_string()))?;
    put(out, c.into_raw(), "out")
}

fn depressed(w: &FwWeb) -> Result<&Depressed, Failure> {
    w.spec
        .as_depressed()
        .map_err(|e| (FwStatus::WrongVariant, e.to_string()))
}

fn connection_failure(e: ConnectionError) -> Failure {
    let status = match e {
        ConnectionError::OnDiscriminant { .. } | ConnectionError::NotThreeSimple { .. } => {
            FwStatus::NotRegular
        }
        ConnectionError::AllExcluded => FwStatus::AllExcluded,
        ConnectionError::Domain(_) => FwStatus::Domain,
    };
    (status, e.to_string())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn fw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `p³ + A p + B = 0` on the given box.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_web_new_depressed(
    a: *const c_char,
    b: *const c_char,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    out: *mut *mut FwWeb,
) -> FwStatus {
    guard(|| {
        let source = WebSource::Depressed(Depressed::new(expr(a, "A")?, expr(b, "B")?));
        emit_web(
            WebSpec {
                source,
                domain: domain(xmin, xmax, ymin, ymax)?,
            },
            out,
        )
    })
}

/// `K3 p³ + K2 p² + K1 p + K0 = 0` on the given box.
///
/// # Safety
/// The coefficient pointers must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fw_web_new_general(
    k3: *const c_char,
    k2: *const c_char,
    k1: *const c_char,
    k0: *const c_char,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    out: *mut *mut FwWeb,
) -> FwStatus {
    guard(|| {
        let source = WebSource::GeneralCubic(GeneralCubic {
            k3: expr(k3, "K3")?,
            k2: expr(k2, "K2")?,
            k1: expr(k1, "K1")?,
            k0: expr(k0, "K0")?,
        });
        emit_web(
            WebSpec {
                source,
                domain: domain(xmin, xmax, ymin, ymax)?,
            },
            out,
        )
    })
}

/// `p² + a p + b = 0` together with the vertical lines, on the given box.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_web_new_quadratic(
    a: *const c_char,
    b: *const c_char,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    out: *mut *mut FwWeb,
) -> FwStatus {
    guard(|| {
        let source = WebSource::QuadraticPlusVertical(QuadraticPlusVertical {
            a: expr(a, "a")?,
            b: expr(b, "b")?,
        });
        emit_web(
            WebSpec {
                source,
                domain: domain(xmin, xmax, ymin, ymax)?,
            },
            out,
        )
    })
}

/// Built-in web by catalog id.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_web_from_catalog(id: *const c_char, out: *mut *mut FwWeb) -> FwStatus {
    guard(|| {
        let entry = catalog::get(text(id, "id")?)
            .map_err(|e| (FwStatus::InvalidArgument, e.to_string()))?;
        emit_web(entry.spec, out)
    })
}

/// Releases a web. Null is ignored.
///
/// # Safety
/// `web` must come from a constructor of this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fw_web_free(web: *mut FwWeb) {
    if !web.is_null() {
        drop(Box::from_raw(web));
    }
}

/// The web spec as JSON.
///
/// # Safety
/// `web` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_web_to_json(web: *const FwWeb, out: *mut *mut c_char) -> FwStatus {
    guard(|| {
        let w = self::web(web)?;
        let s = serde_json::to_string(&w.spec).map_err(|e| (FwStatus::Numerical, e.to_string()))?;
        emit_string(s, out)
    })
}

/// Connection form `(γ1, γ2)` of a depressed web at a regular point.
///
/// # Safety
/// `web` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_gamma(
    web: *const FwWeb,
    x: f64,
    y: f64,
    gamma1: *mut f64,
    gamma2: *mut f64,
) -> FwStatus {
    guard(|| {
        let g = connection::gamma(depressed(self::web(web)?)?, x, y).map_err(connection_failure)?;
        put(gamma1, g.gamma1, "gamma1")?;
        put(gamma2, g.gamma2, "gamma2")
    })
}

/// Curvature density `K` and discriminant `δ` of a depressed web at a regular point.
///
/// # Safety
/// `web` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_curvature(
    web: *const FwWeb,
    x: f64,
    y: f64,
    k: *mut f64,
    delta: *mut f64,
) -> FwStatus {
    guard(|| {
        let c =
            connection::curvature(depressed(self::web(web)?)?, x, y).map_err(connection_failure)?;
        put(k, c.k, "k")?;
        put(delta, c.delta, "delta")
    })
}

/// Flatness audit of a depressed web on an `n × n` grid over its box.
///
/// # Safety
/// `web` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_flatness_audit(
    web: *const FwWeb,
    n: usize,
    tol: f64,
    out: *mut FwFlatness,
) -> FwStatus {
    guard(|| {
        let w = self::web(web)?;
        let d = depressed(w)?;
        if tol.is_nan() || tol <= 0.0 {
            return Err((FwStatus::InvalidArgument, "tol must be positive".into()));
        }
        let grid = GridSpec::square(n, w.spec.domain)
            .map_err(|e| (FwStatus::InvalidArgument, e.to_string()))?;
        let r = connection::flatness_audit(d, &grid, tol).map_err(connection_failure)?;
        put(
            out,
            FwFlatness {
                max_abs_k: r.max_abs_k,
                argmax_x: r.argmax[0],
                argmax_y: r.argmax[1],
                excluded_fraction: r.excluded_fraction,
                evaluated: r.evaluated,
                flat: r.flat,
            },
            "out",
        )
    })
}

/// Singular point report at `(x, y)` as JSON. General cubics are reduced locally first.
///
/// # Safety
/// `web` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_classify_json(
    web: *const FwWeb,
    x: f64,
    y: f64,
    out: *mut *mut c_char,
) -> FwStatus {
    guard(|| {
        let w = self::web(web)?;
        let opts = ClassifyOptions::default();
        let report = match &w.spec.source {
            WebSource::Depressed(d) => singular::classify(d, x, y, &opts),
            WebSource::GeneralCubic(g) => {
                singular::classify_general(g, &w.spec.domain, x, y, &opts)
            }
            WebSource::QuadraticPlusVertical(_) => {
                return Err((
                    FwStatus::WrongVariant,
                    "classification needs a cubic web".into(),
                ))
            }
        }
        .map_err(|e| (FwStatus::Numerical, e.to_string()))?;
        let s = serde_json::to_string(&report).map_err(|e| (FwStatus::Numerical, e.to_string()))?;
        emit_string(s, out)
    })
}

/// Hexagon closure defect at offset `t` around `(cx, cy)`, one Runge-Kutta step per side.
///
/// # Safety
/// `web` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_hexagon_defect(
    web: *const FwWeb,
    cx: f64,
    cy: f64,
    t: f64,
    out: *mut f64,
) -> FwStatus {
    guard(|| {
        let w = self::web(web)?;
        let d = hexagon::hexagon_defect(&w.spec, [cx, cy], t, &HexagonOptions::default()).map_err(
            |e| {
                let status = match e {
                    HexagonError::NotRegular { .. } => FwStatus::NotRegular,
                    HexagonError::InvalidOffset { .. } => FwStatus::InvalidArgument,
                    HexagonError::Unsupported => FwStatus::WrongVariant,
                    HexagonError::Domain(_) => FwStatus::Domain,
                    HexagonError::StepEscaped { .. } => FwStatus::Numerical,
                };
                (status, e.to_string())
            },
        )?;
        put(out, d.defect, "out")
    })
}
