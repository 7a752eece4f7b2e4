//! C interface to `casimir-core`.
//!
//! Objects cross the boundary as opaque handles created and released by
//! this library. Every function returns a [`CasimirStatus`]; on failure the
//! message is available from [`casimir_last_error`] on the same thread.
//! Panics are caught and reported as [`CasimirStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use casimir_core::cli::RunConfig;
use casimir_core::force::{period_forces, Component, PeriodForces};
use casimir_core::geometry::{PlateGeometry, RackGeometry, TiltRule};
use casimir_core::kernel::bessel_k;
use casimir_core::oracle::flat_plate_force;
use casimir_core::stress::Dimensionality;
use casimir_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Geometry = 4,
    Domain = 5,
    Precondition = 6,
    Numerical = 7,
    NonConvergent = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirDimensionality {
    Two = 2,
    Three = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirComponent {
    Normal = 0,
    Tangential = 1,
}

/// Run configuration: geometry, physics and numerics.
pub struct CasimirConfig {
    inner: RunConfig,
}

/// Forces for one configuration.
pub struct CasimirForces {
    inner: PeriodForces,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> CasimirStatus {
    match e {
        Error::Config(_) => CasimirStatus::Config,
        Error::Geometry(_) | Error::PlateIntersection { .. } => CasimirStatus::Geometry,
        Error::Domain(_) | Error::Coincident { .. } => CasimirStatus::Domain,
        Error::Precondition(_) | Error::SourceTooClose { .. } | Error::PathOutsideGap { .. } => {
            CasimirStatus::Precondition
        }
        Error::SingularMatrix { .. } | Error::IllConditioned { .. } => CasimirStatus::Numerical,
        Error::NonConvergent { .. } => CasimirStatus::NonConvergent,
        Error::Io(_) => CasimirStatus::Io,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CasimirStatus, String)>) -> CasimirStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CasimirStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            CasimirStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (CasimirStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CasimirStatus, String) {
    (CasimirStatus::NullPointer, format!("{what} is null"))
}

fn dimensionality(d: CasimirDimensionality) -> Dimensionality {
    match d {
        CasimirDimensionality::Two => Dimensionality::Two,
        CasimirDimensionality::Three => Dimensionality::Three,
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn casimir_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn casimir_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a JSON run configuration.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_from_json(json: *const c_char, out: *mut *mut CasimirConfig) -> CasimirStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CasimirStatus::InvalidUtf8, e.to_string()))?;
        let inner = RunConfig::from_json(text).map_err(core_err)?;
        inner.validate().map_err(core_err)?;
        *out = Box::into_raw(Box::new(CasimirConfig { inner }));
        Ok(())
    })
}

/// Rack geometry with default numerics, massless field, sine tilt rule.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_rack(
    a: f64,
    u: f64,
    v: f64,
    s: f64,
    l: f64,
    h: f64,
    out: *mut *mut CasimirConfig,
) -> CasimirStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let geometry = RackGeometry {
            period: a,
            face_length: u,
            valley_length: v,
            shift: s,
            gap: l,
            tooth_height: h,
            tilt_rule: TiltRule::SineRatio,
        };
        let inner = RunConfig { geometry: geometry.into(), ..RunConfig::default() };
        inner.validate().map_err(core_err)?;
        *out = Box::into_raw(Box::new(CasimirConfig { inner }));
        Ok(())
    })
}

/// Change the lateral shift `s`.
///
/// # Safety
/// `config` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_set_shift(config: *mut CasimirConfig, s: f64) -> CasimirStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        next.geometry = next.geometry.with_shift(s);
        next.validate().map_err(core_err)?;
        c.inner = next;
        Ok(())
    })
}

/// Change the field mass `m`.
///
/// # Safety
/// `config` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_set_mass(config: *mut CasimirConfig, m: f64) -> CasimirStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        next.physics.mass = m;
        next.validate().map_err(core_err)?;
        c.inner = next;
        Ok(())
    })
}

/// Change the target element size and the number of realised periods.
///
/// # Safety
/// `config` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_set_mesh(
    config: *mut CasimirConfig,
    element_size: f64,
    periods_realized: u32,
) -> CasimirStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        next.numerics.element_size = element_size;
        next.numerics.periods_realized = periods_realized as usize;
        next.validate().map_err(core_err)?;
        c.inner = next;
        Ok(())
    })
}

/// Release a configuration; null is ignored.
///
/// # Safety
/// `config` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_free(config: *mut CasimirConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Forces per period for the configuration, both components and
/// dimensionalities.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_compute(config: *const CasimirConfig, out: *mut *mut CasimirForces) -> CasimirStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = period_forces(&c.inner.geometry, &c.inner.solver(), c.inner.force_path()).map_err(core_err)?;
        *out = Box::into_raw(Box::new(CasimirForces { inner }));
        Ok(())
    })
}

/// One force per period and its error estimate. Normal forces are the
/// x-component on the upper plate; negative means attraction.
///
/// # Safety
/// `forces` must be a live handle; `value` and `error` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn casimir_forces_get(
    forces: *const CasimirForces,
    dim: CasimirDimensionality,
    component: CasimirComponent,
    value: *mut f64,
    error: *mut f64,
) -> CasimirStatus {
    guard(|| {
        let f = forces.as_ref().ok_or_else(|| null("forces"))?;
        if value.is_null() || error.is_null() {
            return Err(null("value or error"));
        }
        let comp = match component {
            CasimirComponent::Normal => Component::Normal,
            CasimirComponent::Tangential => Component::Tangential,
        };
        let v = f.inner.get(dimensionality(dim), comp);
        *value = v.value;
        *error = v.error;
        Ok(())
    })
}

/// Number of boundary elements used for the forces.
///
/// # Safety
/// `forces` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn casimir_forces_elements(forces: *const CasimirForces) -> usize {
    forces.as_ref().map_or(0, |f| f.inner.elements)
}

/// Release a result; null is ignored.
///
/// # Safety
/// `forces` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn casimir_forces_free(forces: *mut CasimirForces) {
    if !forces.is_null() {
        drop(Box::from_raw(forces));
    }
}

/// Closed-form force between flat plates at distance `gap`, per unit length
/// (2D) or area (3D), massless field.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_flat_plate_force(dim: CasimirDimensionality, gap: f64, out: *mut f64) -> CasimirStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = flat_plate_force(dimensionality(dim), gap, 0.0).map_err(core_err)?;
        Ok(())
    })
}

/// Modified Bessel function `K_order(x)` for order 0, 1 or 2.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn casimir_bessel_k(order: u32, x: f64, out: *mut f64) -> CasimirStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = bessel_k(order, x).map_err(core_err)?;
        Ok(())
    })
}

/// Whether a configuration uses the rack family (1) or an explicit profile
/// (0).
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn casimir_config_is_rack(config: *const CasimirConfig) -> i32 {
    config.as_ref().map_or(0, |c| matches!(c.inner.geometry, PlateGeometry::Rack(_)) as i32)
}
