//! C interface. Devices are opaque handles; every call returns a
//! `ZzStatus` and leaves a message for `zz_last_error` on failure.
//! Absent operating points are reported as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use zzfree::devices::{builtin, load_device, DeviceRecord};
use zzfree::driven::zz_and_zx;
use zzfree::operators::HilbertSpace;
use zzfree::search::{find_static_zz_zeros, freedom_amplitude, DEFAULT_RANGE};
use zzfree::spectral::{g_eff, static_zz};
use zzfree::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    AmbiguousLabeling = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque device handle.
pub struct ZzDevice {
    record: DeviceRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ZzStatus {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidDimension(_) | Error::DimensionMismatch { .. } | Error::Schema { .. } => {
            ZzStatus::InvalidArgument
        }
        Error::AmbiguousLabeling { .. } => ZzStatus::AmbiguousLabeling,
        Error::Io(_) => ZzStatus::Io,
        _ => ZzStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ZzStatus>) -> ZzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZzStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside zzfree".into());
            ZzStatus::Panic
        }
    }
}

fn lift<T>(r: zzfree::Result<T>) -> Result<T, ZzStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> ZzStatus {
    set_error("null pointer argument".into());
    ZzStatus::NullPointer
}

unsafe fn device<'a>(dev: *const ZzDevice) -> Result<&'a ZzDevice, ZzStatus> {
    dev.as_ref().ok_or_else(null)
}

fn space(levels: u32) -> Result<HilbertSpace, ZzStatus> {
    lift(HilbertSpace::uniform(levels as usize))
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call; never NULL.
#[no_mangle]
pub extern "C" fn zz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn zz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Table device `id` (1-7).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zz_device_builtin(id: u32, out: *mut *mut ZzDevice) -> ZzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let record = lift(builtin(id as usize))?;
        *out = Box::into_raw(Box::new(ZzDevice { record }));
        Ok(())
    })
}

/// Device file or builtin name such as `device2`.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zz_device_load(source: *const c_char, out: *mut *mut ZzDevice) -> ZzStatus {
    guard(|| {
        if source.is_null() || out.is_null() {
            return Err(null());
        }
        let s = CStr::from_ptr(source).to_str().map_err(|_| {
            set_error("source is not UTF-8".into());
            ZzStatus::InvalidArgument
        })?;
        let record = lift(load_device(s, None::<&Path>))?;
        *out = Box::into_raw(Box::new(ZzDevice { record }));
        Ok(())
    })
}

/// Release a handle. NULL is ignored.
///
/// # Safety
/// `dev` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn zz_device_free(dev: *mut ZzDevice) {
    if !dev.is_null() {
        drop(Box::from_raw(dev));
    }
}

/// Qubit frequencies and coupler reference in GHz.
///
/// # Safety
/// `dev` must be a live handle and `out` point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn zz_device_frequencies(dev: *const ZzDevice, out: *mut f64) -> ZzStatus {
    guard(|| {
        let d = device(dev)?;
        if out.is_null() {
            return Err(null());
        }
        let p = &d.record.params;
        *out = p.w1;
        *out.add(1) = p.wc;
        *out.add(2) = p.w2;
        Ok(())
    })
}

/// Effective qubit-qubit coupling at coupler frequency `wc`, GHz.
///
/// # Safety
/// `dev` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zz_g_eff(dev: *const ZzDevice, wc: f64, out: *mut f64) -> ZzStatus {
    guard(|| {
        let d = device(dev)?;
        if out.is_null() {
            return Err(null());
        }
        *out = g_eff(&d.record.params.at_coupler(wc));
        Ok(())
    })
}

/// Static ZZ at coupler frequency `wc`, GHz.
///
/// # Safety
/// `dev` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zz_static_zz(dev: *const ZzDevice, wc: f64, levels: u32, out: *mut f64) -> ZzStatus {
    guard(|| {
        let d = device(dev)?;
        if out.is_null() {
            return Err(null());
        }
        *out = lift(static_zz(&d.record.params.at_coupler(wc), &space(levels)?))?;
        Ok(())
    })
}

/// Genuine and affine idle coupler frequencies, NaN when absent.
///
/// # Safety
/// `dev` must be a live handle; both outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn zz_idle_points(
    dev: *const ZzDevice,
    levels: u32,
    genuine: *mut f64,
    affine: *mut f64,
) -> ZzStatus {
    guard(|| {
        let d = device(dev)?;
        if genuine.is_null() || affine.is_null() {
            return Err(null());
        }
        let scan = lift(find_static_zz_zeros(&d.record.params, &space(levels)?, DEFAULT_RANGE))?;
        *genuine = scan.genuine().map_or(f64::NAN, |p| p.wc);
        *affine = scan.affine().map_or(f64::NAN, |p| p.wc);
        Ok(())
    })
}

/// Smallest CR amplitude cancelling the total ZZ at `wc` and the ZX rate
/// there, GHz; both NaN when none exists.
///
/// # Safety
/// `dev` must be a live handle; both outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn zz_freedom_amplitude(
    dev: *const ZzDevice,
    wc: f64,
    levels: u32,
    omega: *mut f64,
    alpha_zx: *mut f64,
) -> ZzStatus {
    guard(|| {
        let d = device(dev)?;
        if omega.is_null() || alpha_zx.is_null() {
            return Err(null());
        }
        let s = space(levels)?;
        let p = d.record.params.at_coupler(wc);
        match lift(freedom_amplitude(&p, &s))? {
            Some(o) => {
                *omega = o;
                *alpha_zx = lift(zz_and_zx(&p, &s, o))?.1;
            }
            None => {
                *omega = f64::NAN;
                *alpha_zx = f64::NAN;
            }
        }
        Ok(())
    })
}
