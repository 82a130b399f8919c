//! C ABI over the `cnls` laboratory.
//!
//! Objects cross the boundary as opaque handles (`CnlsBundle`, `CnlsField`)
//! created and destroyed by this library. Every fallible call returns a
//! [`CnlsStatus`]; on failure the message is kept per thread and read back
//! with [`cnls_last_error_message`].

use cnls::classify::{self, Region};
use cnls::cli::{datum, Family};
use cnls::evolve::{self, EvolveConfig, Monitors, Termination};
use cnls::groundstate::{build_bundle, GroundStateBundle};
use cnls::{LabError, PhysParams, RadialField, RadialGrid};
use libc::{c_char, size_t};
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDimension = 3,
    BelowHardy = 4,
    InvalidGrid = 5,
    Pohozaev = 6,
    NonFinite = 7,
    Numerical = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnlsFamily {
    ScaledGround = 0,
    Gaussian = 1,
    Bump = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnlsRegion {
    ScatterSub = 0,
    BlowupSub = 1,
    ScatterThreshold = 2,
    BlowupThreshold = 3,
    GroundStateOrbit = 4,
    AboveThreshold = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnlsTermination {
    Completed = 0,
    BlowupDetected = 1,
    ConservationFailure = 2,
}

/// Ground-state constants of a bundle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CnlsGroundState {
    pub d: u32,
    pub a: f64,
    pub beta: f64,
    pub sigma: f64,
    pub kinetic_sq: f64,
    pub crit_mass: f64,
    pub cgn: f64,
    pub m_a: f64,
    pub pohozaev_residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnlsVerdict {
    pub region: CnlsRegion,
    pub energy_margin: f64,
    pub kinetic_margin: f64,
    pub mass: f64,
    pub e_a: f64,
    pub kinetic_sq: f64,
    pub k_a: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnlsRunSummary {
    pub termination: CnlsTermination,
    pub t_final: f64,
    /// NaN unless the run blew up
    pub t_star: f64,
    pub steps: size_t,
    pub rejected_steps: size_t,
    pub mass_drift: f64,
    pub e_a_drift: f64,
    pub kinetic_max: f64,
}

/// Parameters, grid and ground state for one `(d, a)`.
pub struct CnlsBundle {
    params: PhysParams,
    grid: Arc<RadialGrid>,
    bundle: GroundStateBundle,
}

/// A complex radial field on the grid of the bundle it was made from.
pub struct CnlsField {
    field: RadialField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> CnlsStatus {
    match e {
        LabError::InvalidDimension(_) => CnlsStatus::InvalidDimension,
        LabError::BelowHardy { .. } => CnlsStatus::BelowHardy,
        LabError::InvalidGrid(_) | LabError::GridMismatch(_) => CnlsStatus::InvalidGrid,
        LabError::Pohozaev { .. } => CnlsStatus::Pohozaev,
        LabError::NonFinite { .. } => CnlsStatus::NonFinite,
        LabError::Config(_) | LabError::Precondition(_) | LabError::InvalidRadius(_) => CnlsStatus::InvalidArgument,
        _ => CnlsStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (CnlsStatus, String)>) -> CnlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CnlsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CnlsStatus::Panic
        }
    }
}

fn lab<T>(r: cnls::Result<T>) -> Result<T, (CnlsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CnlsStatus, String) {
    (CnlsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: String) -> (CnlsStatus, String) {
    (CnlsStatus::InvalidArgument, msg)
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CnlsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (CnlsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn region_code(r: Region) -> CnlsRegion {
    match r {
        Region::ScatterSub => CnlsRegion::ScatterSub,
        Region::BlowupSub => CnlsRegion::BlowupSub,
        Region::ScatterThreshold => CnlsRegion::ScatterThreshold,
        Region::BlowupThreshold => CnlsRegion::BlowupThreshold,
        Region::GroundStateOrbit => CnlsRegion::GroundStateOrbit,
        Region::AboveThreshold => CnlsRegion::AboveThreshold,
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cnls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn cnls_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Builds `W_a` on a uniform grid of `n` nodes up to `r_max` and checks the
/// Pohozaev identity.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cnls_bundle_new(d: u32, a: f64, r_max: f64, n: size_t, out_bundle: *mut *mut CnlsBundle) -> CnlsStatus {
    guard(|| {
        let slot = out(out_bundle, "out_bundle")?;
        *slot = ptr::null_mut();
        let params = lab(PhysParams::new(d, a))?;
        let grid = lab(RadialGrid::new(d, r_max, n))?;
        let bundle = lab(build_bundle(&params, &grid))?;
        *slot = Box::into_raw(Box::new(CnlsBundle { params, grid, bundle }));
        Ok(())
    })
}

/// # Safety
/// `b` must be null or a handle from [`cnls_bundle_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cnls_bundle_free(b: *mut CnlsBundle) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `b` must be a live bundle handle and `info` writable.
#[no_mangle]
pub unsafe extern "C" fn cnls_bundle_info(b: *const CnlsBundle, info: *mut CnlsGroundState) -> CnlsStatus {
    guard(|| {
        let b = deref(b, "bundle")?;
        let g = &b.bundle;
        *out(info, "info")? = CnlsGroundState {
            d: b.params.d(),
            a: b.params.a(),
            beta: b.params.beta(),
            sigma: b.params.sigma(),
            kinetic_sq: g.kinetic_sq,
            crit_mass: g.crit_mass,
            cgn: g.cgn,
            m_a: g.m_a,
            pohozaev_residual: g.pohozaev_residual,
        };
        Ok(())
    })
}

/// Number of grid nodes, 0 for a null handle.
///
/// # Safety
/// `b` must be null or a live bundle handle.
#[no_mangle]
pub unsafe extern "C" fn cnls_bundle_len(b: *const CnlsBundle) -> size_t {
    b.as_ref().map_or(0, |b| b.grid.n())
}

/// Copies the node radii into `r[0..len]`; `len` must equal the grid size.
///
/// # Safety
/// `b` must be a live bundle handle and `r` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cnls_bundle_nodes(b: *const CnlsBundle, r: *mut f64, len: size_t) -> CnlsStatus {
    guard(|| {
        let b = deref(b, "bundle")?;
        check_len(len, b.grid.n())?;
        if r.is_null() {
            return Err(null("r"));
        }
        std::slice::from_raw_parts_mut(r, len).copy_from_slice(b.grid.nodes());
        Ok(())
    })
}

fn check_len(len: usize, n: usize) -> Result<(), (CnlsStatus, String)> {
    if len != n {
        return Err(invalid(format!("buffer length {len} does not match the grid size {n}")));
    }
    Ok(())
}

/// Field from node values. `im` may be null for real data.
///
/// # Safety
/// `b` must be a live bundle handle, `re` (and `im` unless null) valid for
/// `len` reads, and `out_field` writable.
#[no_mangle]
pub unsafe extern "C" fn cnls_field_from_values(
    b: *const CnlsBundle,
    re: *const f64,
    im: *const f64,
    len: size_t,
    out_field: *mut *mut CnlsField,
) -> CnlsStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let b = deref(b, "bundle")?;
        check_len(len, b.grid.n())?;
        if re.is_null() {
            return Err(null("re"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let vals: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&x, &y)| Complex64::new(x, y)).collect()
        };
        let field = lab(RadialField::from_values(&b.grid, vals))?;
        *slot = Box::into_raw(Box::new(CnlsField { field }));
        Ok(())
    })
}

/// `scale_H1inv(c * base, s)` for the chosen base profile, optionally times
/// a smooth cutoff between `window_in` and `window_out`. Pass NaN for both
/// to skip the cutoff.
///
/// # Safety
/// `b` must be a live bundle handle and `out_field` writable.
#[no_mangle]
pub unsafe extern "C" fn cnls_field_datum(
    b: *const CnlsBundle,
    family: CnlsFamily,
    c: f64,
    s: f64,
    window_in: f64,
    window_out: f64,
    out_field: *mut *mut CnlsField,
) -> CnlsStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        *slot = ptr::null_mut();
        let b = deref(b, "bundle")?;
        let family = match family {
            CnlsFamily::ScaledGround => Family::ScaledGround,
            CnlsFamily::Gaussian => Family::Gaussian,
            CnlsFamily::Bump => Family::Bump,
        };
        let window = match (window_in.is_nan(), window_out.is_nan()) {
            (true, true) => None,
            (false, false) if 0.0 <= window_in && window_in < window_out => Some((window_in, window_out)),
            _ => return Err(invalid(format!("bad window ({window_in}, {window_out})"))),
        };
        if !c.is_finite() {
            return Err(invalid(format!("amplitude c = {c} is not finite")));
        }
        let field = lab(datum(&b.params, &b.grid, family, c, s, window))?;
        *slot = Box::into_raw(Box::new(CnlsField { field }));
        Ok(())
    })
}

/// Copies node values out; either buffer may be null to skip it.
///
/// # Safety
/// `f` must be a live field handle; non-null buffers valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cnls_field_values(f: *const CnlsField, re: *mut f64, im: *mut f64, len: size_t) -> CnlsStatus {
    guard(|| {
        let f = deref(f, "field")?;
        check_len(len, f.field.values().len())?;
        if !re.is_null() {
            let re = std::slice::from_raw_parts_mut(re, len);
            for (o, z) in re.iter_mut().zip(f.field.values()) {
                *o = z.re;
            }
        }
        if !im.is_null() {
            let im = std::slice::from_raw_parts_mut(im, len);
            for (o, z) in im.iter_mut().zip(f.field.values()) {
                *o = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a field handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cnls_field_free(f: *mut CnlsField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

fn same_grid(b: &CnlsBundle, f: &CnlsField) -> Result<(), (CnlsStatus, String)> {
    lab(f.field.same_grid_as(&b.grid))
}

/// Places `f` relative to the ground-state threshold.
///
/// # Safety
/// `b` and `f` must be live handles and `verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn cnls_classify(b: *const CnlsBundle, f: *const CnlsField, verdict: *mut CnlsVerdict) -> CnlsStatus {
    guard(|| {
        let b = deref(b, "bundle")?;
        let f = deref(f, "field")?;
        let slot = out(verdict, "verdict")?;
        same_grid(b, f)?;
        let v = lab(classify::classify(&f.field, &b.params, &b.bundle, classify::default_tol(&b.bundle)))?;
        *slot = CnlsVerdict {
            region: region_code(v.region),
            energy_margin: v.energy_margin,
            kinetic_margin: v.kinetic_margin,
            mass: v.report.mass,
            e_a: v.report.e_a,
            kinetic_sq: v.report.kinetic_sq,
            k_a: v.report.k_a,
        };
        Ok(())
    })
}

/// Evolves `f` with the default detector settings and no monitors. On
/// success `final_field`, if not null, receives a new handle holding the
/// last state.
///
/// # Safety
/// `b` and `f` must be live handles, `summary` writable, and `final_field`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn cnls_evolve(
    b: *const CnlsBundle,
    f: *const CnlsField,
    dt: f64,
    t_end: f64,
    stride: size_t,
    summary: *mut CnlsRunSummary,
    final_field: *mut *mut CnlsField,
) -> CnlsStatus {
    guard(|| {
        let b = deref(b, "bundle")?;
        let f = deref(f, "field")?;
        let slot = out(summary, "summary")?;
        if let Some(ff) = final_field.as_mut() {
            *ff = ptr::null_mut();
        }
        same_grid(b, f)?;
        let cfg = EvolveConfig {
            dt,
            t_end,
            snapshot_stride: stride,
            ..Default::default()
        };
        let rec = lab(evolve::run(&f.field, &b.params, &b.bundle, &cfg, &Monitors::none()))?;
        let termination = match rec.termination {
            Termination::Completed => CnlsTermination::Completed,
            Termination::BlowupDetected { .. } => CnlsTermination::BlowupDetected,
            Termination::ConservationFailure { .. } => CnlsTermination::ConservationFailure,
        };
        *slot = CnlsRunSummary {
            termination,
            t_final: rec.snapshots.last().map_or(0.0, |s| s.t),
            t_star: rec.termination.t_star().unwrap_or(f64::NAN),
            steps: rec.steps,
            rejected_steps: rec.rejected_steps,
            mass_drift: rec.mass_drift(),
            e_a_drift: rec.energy_drift(),
            kinetic_max: rec.snapshots.iter().map(|s| s.kinetic_sq).fold(0.0, f64::max),
        };
        if let (Some(ff), Some(u)) = (final_field.as_mut(), rec.final_state) {
            *ff = Box::into_raw(Box::new(CnlsField { field: u }));
        }
        Ok(())
    })
}
