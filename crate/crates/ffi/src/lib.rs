//! C ABI over `blowup_lab`: closed-form solutions, evolution runs and the
//! claims audit behind opaque handles and integer status codes.
//!
//! Every fallible call returns a [`BlStatus`]; on failure the message is
//! available from [`bl_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blowup_lab::audit::run_audit;
use blowup_lab::closedform::{ClosedFormSolution, Family};
use blowup_lab::config::{EvolveSetup, RunConfig};
use blowup_lab::evolution::{evolve, fit_blowup_rate, EvolutionRun};
use blowup_lab::residual::{residual_at, residual_at_axis, EquationId};
use blowup_lab::stability::solve_mode_quadratic;
use blowup_lab::LabError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Degenerate = 4,
    Numerical = 5,
    Config = 6,
    Utf8 = 7,
    NotRun = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlFamily {
    BornInfeldLog = 0,
    SpherePlus = 1,
    SphereMinus = 2,
    SpacelikeLogClaimed = 3,
    SpacelikeArctanCorrected = 4,
    ConstantProfile = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlEquation {
    BornInfeld = 0,
    RadialMembrane = 1,
    Spacelike = 2,
    DivergenceForm = 3,
    Eikonal = 4,
}

/// Value and derivatives up to second order in `(a, b)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlJet {
    pub value: f64,
    pub da: f64,
    pub db: f64,
    pub daa: f64,
    pub dab: f64,
    pub dbb: f64,
}

/// Opaque closed-form solution.
pub struct BlSolution(ClosedFormSolution);

/// Opaque evolution, configured on creation and run on demand.
pub struct BlEvolution {
    setup: EvolveSetup,
    run: Option<EvolutionRun>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> BlStatus {
    match e {
        LabError::Invalid(_) | LabError::Arity { .. } => BlStatus::InvalidArgument,
        LabError::Domain(_) | LabError::Singular(_) | LabError::Boundary { .. } => BlStatus::Domain,
        LabError::Degeneracy { .. } => BlStatus::Degenerate,
        LabError::Config { .. } | LabError::Io(_) => BlStatus::Config,
        LabError::NonFinite { .. } | LabError::Regularity(_) => BlStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BlStatus>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside blowup-lab");
            BlStatus::Panic
        }
    }
}

fn lab<T>(r: blowup_lab::Result<T>) -> Result<T, BlStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), BlStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(BlStatus::NullPointer);
    }
    Ok(())
}

fn into_c_string(s: String, out: *mut *mut c_char) -> Result<(), BlStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("string contains an interior NUL");
        BlStatus::Utf8
    })?;
    // SAFETY: callers check `out` for null first.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn bl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library (`bl_audit_json`) and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn family_of(f: BlFamily) -> Family {
    match f {
        BlFamily::BornInfeldLog => Family::BornInfeldLog,
        BlFamily::SpherePlus => Family::MembraneSpherePlus,
        BlFamily::SphereMinus => Family::MembraneSphereMinus,
        BlFamily::SpacelikeLogClaimed => Family::SpacelikeLogClaimed,
        BlFamily::SpacelikeArctanCorrected => Family::SpacelikeArctanCorrected,
        BlFamily::ConstantProfile => Family::ConstantProfile,
    }
}

fn equation_of(e: BlEquation) -> EquationId {
    match e {
        BlEquation::BornInfeld => EquationId::BornInfeld,
        BlEquation::RadialMembrane => EquationId::RadialMembrane,
        BlEquation::Spacelike => EquationId::SpacelikeZmc,
        BlEquation::DivergenceForm => EquationId::DivergenceForm,
        BlEquation::Eikonal => EquationId::Eikonal,
    }
}

/// # Safety
/// `out` must be a valid pointer to a `BlSolution *`.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_new(
    family: BlFamily,
    blowup_time: f64,
    k: f64,
    out: *mut *mut BlSolution,
) -> BlStatus {
    guard(|| {
        non_null(out, "out")?;
        let sol = lab(ClosedFormSolution::new(family_of(family), blowup_time, k))?;
        *out = Box::into_raw(Box::new(BlSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `bl_solution_new` and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_free(h: *mut BlSolution) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live solution handle and `out` a valid `double *`.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_value(
    h: *const BlSolution,
    a: f64,
    b: f64,
    out: *mut f64,
) -> BlStatus {
    guard(|| {
        non_null(h, "solution")?;
        non_null(out, "out")?;
        *out = lab((*h).0.value((a, b)))?;
        Ok(())
    })
}

/// # Safety
/// `h` must be a live solution handle and `out` a valid `BlJet *`.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_jet(
    h: *const BlSolution,
    a: f64,
    b: f64,
    out: *mut BlJet,
) -> BlStatus {
    guard(|| {
        non_null(h, "solution")?;
        non_null(out, "out")?;
        let j = lab((*h).0.evaluate_jet((a, b)))?;
        *out = BlJet {
            value: j.value,
            da: j.da,
            db: j.db,
            daa: j.daa,
            dab: j.dab,
            dbb: j.dbb,
        };
        Ok(())
    })
}

/// Residual of `equation` on the solution at `(a, b)`; the radial membrane
/// uses its axis limit at `b = 0`.
///
/// # Safety
/// `h` must be a live solution handle and `out` a valid `double *`.
#[no_mangle]
pub unsafe extern "C" fn bl_solution_residual(
    h: *const BlSolution,
    equation: BlEquation,
    a: f64,
    b: f64,
    out: *mut f64,
) -> BlStatus {
    guard(|| {
        non_null(h, "solution")?;
        non_null(out, "out")?;
        let eq = equation_of(equation);
        let jet = lab((*h).0.evaluate_jet((a, b)))?;
        *out = if eq == EquationId::RadialMembrane && b == 0.0 {
            lab(residual_at_axis(&jet))?
        } else {
            lab(residual_at(eq, &jet, (a, b)))?
        };
        Ok(())
    })
}

/// Builds an evolution from `key=value` config text.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid `BlEvolution **`.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_new(
    config: *const c_char,
    out: *mut *mut BlEvolution,
) -> BlStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(config).to_str().map_err(|_| {
            set_error("config is not UTF-8");
            BlStatus::Utf8
        })?;
        let cfg = lab(RunConfig::parse(text))?;
        let setup = lab(EvolveSetup::from_config(&cfg))?;
        *out = Box::into_raw(Box::new(BlEvolution { setup, run: None }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `bl_evolution_new` and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_free(h: *mut BlEvolution) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Runs to a stop condition. Running again restarts from the initial data.
///
/// # Safety
/// `h` must be a live evolution handle.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_run(h: *mut BlEvolution) -> BlStatus {
    guard(|| {
        non_null(h, "evolution")?;
        let e = &mut *h;
        e.run = Some(lab(evolve(e.setup.initial.clone(), &e.setup.config))?);
        Ok(())
    })
}

unsafe fn finished<'a>(h: *const BlEvolution) -> Result<&'a EvolutionRun, BlStatus> {
    non_null(h, "evolution")?;
    (*h).run.as_ref().ok_or_else(|| {
        set_error("evolution has not been run");
        BlStatus::NotRun
    })
}

/// Final time, step count and sup error against the closed form (NaN when
/// the data did not come from one).
///
/// # Safety
/// `h` must be a live evolution handle; each out pointer valid or null.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_summary(
    h: *const BlEvolution,
    t_final: *mut f64,
    steps: *mut usize,
    sup_error: *mut f64,
) -> BlStatus {
    guard(|| {
        let run = finished(h)?;
        if !t_final.is_null() {
            *t_final = run.final_state.t;
        }
        if !steps.is_null() {
            *steps = run.steps;
        }
        if !sup_error.is_null() {
            *sup_error = match (*h).setup.reference {
                Some(sol) => lab(run.error_against(&sol))?,
                None => f64::NAN,
            };
        }
        Ok(())
    })
}

/// Copies up to `cap` values of `u` on the active nodes into `buf` and
/// writes the active node count to `len`.
///
/// # Safety
/// `buf` must hold `cap` doubles (or be null with `cap = 0`); `len` valid.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_copy_u(
    h: *const BlEvolution,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BlStatus {
    guard(|| {
        let run = finished(h)?;
        non_null(len, "len")?;
        let s = &run.final_state;
        let active = &s.u[s.active.0..=s.active.1];
        *len = active.len();
        if cap > 0 {
            non_null(buf, "buf")?;
            let n = cap.min(active.len());
            ptr::copy_nonoverlapping(active.as_ptr(), buf, n);
        }
        Ok(())
    })
}

/// Log-log fit of `|u_x(t, 0)|` against `1 / (T - t)` over `[lo, hi]`.
///
/// # Safety
/// `h` must be a live evolution handle; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_fit_blowup(
    h: *const BlEvolution,
    lo: f64,
    hi: f64,
    exponent: *mut f64,
    amplitude: *mut f64,
) -> BlStatus {
    guard(|| {
        let run = finished(h)?;
        non_null(exponent, "exponent")?;
        non_null(amplitude, "amplitude")?;
        let tt = (*h).setup.config.blowup_time_hint.ok_or_else(|| {
            set_error("no blow-up time: data did not come from a closed form");
            BlStatus::InvalidArgument
        })?;
        let (ts, gs) = run.origin_series();
        let fit = lab(fit_blowup_rate(&ts, &gs, tt, (lo, hi)))?;
        *exponent = fit.fitted_exponent;
        *amplitude = fit.fitted_amplitude;
        Ok(())
    })
}

/// Relative drift of the flux-corrected momentum; NaN when undefined.
///
/// # Safety
/// `h` must be a live evolution handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bl_evolution_momentum_drift(
    h: *const BlEvolution,
    out: *mut f64,
) -> BlStatus {
    guard(|| {
        let run = finished(h)?;
        non_null(out, "out")?;
        *out = run.momentum_drift().unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Roots of the mode quadratic, larger first.
///
/// # Safety
/// `out` must point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bl_mode_roots(out: *mut f64) -> BlStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = solve_mode_quadratic().roots;
        *out = r[0];
        *out.add(1) = r[1];
        Ok(())
    })
}

/// Runs the claims audit. `json` receives a string to release with
/// `bl_string_free`; `all_expected` (may be null) receives 1 when every
/// claim reproduced its expected verdict.
///
/// # Safety
/// `json` must be a valid `char **`; `all_expected` valid or null.
#[no_mangle]
pub unsafe extern "C" fn bl_audit_json(json: *mut *mut c_char, all_expected: *mut i32) -> BlStatus {
    guard(|| {
        non_null(json, "json")?;
        let report = lab(run_audit())?;
        if !all_expected.is_null() {
            *all_expected = i32::from(report.all_expected);
        }
        into_c_string(report.to_json(), json)
    })
}
