//! C ABI for `actdeg`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Every fallible call returns an
//! [`ActdegStatus`] and leaves a message for [`actdeg_last_error`] on the
//! calling thread. Matrices cross the boundary as dense row-major `double`
//! arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use actdeg::cli::ExitCode;
use actdeg::degradation::degradation_report;
use actdeg::lti::{h2_norm, hinf_norm, NormKind, StateSpace};
use actdeg::model::ModelFile;
use actdeg::report::RunReport;
use actdeg::synthesis::{build_lmi, solve, validate, H2BoundConvention, SynthesisSpec, SynthesisStatus};
use actdeg::Error;
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActdegStatus {
    Ok = 0,
    InvalidInput = 1,
    Infeasible = 2,
    NumericalFailure = 3,
    VerificationFailed = 4,
    Diverged = 5,
    Unstable = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    NoSolution = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActdegNorm {
    H2 = 0,
    Hinf = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActdegH2Convention {
    /// `||G||_2^2 <= gamma`.
    Trace = 0,
    /// `||G||_2 <= gamma`.
    Norm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActdegSynthOptions {
    pub norm: ActdegNorm,
    pub gamma: f64,
    pub lambda_a: f64,
    pub lambda_wc: f64,
    pub lambda_xf: f64,
    pub h2_convention: ActdegH2Convention,
    /// Constraint tolerance for validation; `<= 0` keeps the default
    /// (or `ACTDEG_SOLVER_TOL` when set).
    pub solver_tol: f64,
}

/// Plant and its model metadata.
pub struct ActdegPlant {
    model: ModelFile,
    sys: StateSpace,
}

/// Outcome of one synthesis run.
pub struct ActdegResult {
    report: RunReport,
    status: ActdegStatus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(ActdegStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Unstable { .. } => ActdegStatus::Unstable,
            _ => status_from_exit(ExitCode::from_error(&e)),
        };
        Failure(status, e.to_string())
    }
}

fn status_from_exit(code: ExitCode) -> ActdegStatus {
    match code {
        ExitCode::Ok => ActdegStatus::Ok,
        ExitCode::InputError => ActdegStatus::InvalidInput,
        ExitCode::Infeasible => ActdegStatus::Infeasible,
        ExitCode::NumericalFailure => ActdegStatus::NumericalFailure,
        ExitCode::VerificationFailed => ActdegStatus::VerificationFailed,
        ExitCode::Diverged => ActdegStatus::Diverged,
    }
}

fn null(what: &str) -> Failure {
    Failure(ActdegStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<ActdegStatus, Failure>) -> ActdegStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ActdegStatus::Panic
        }
    }
}

unsafe fn matrix(ptr: *const f64, rows: usize, cols: usize, what: &str) -> Result<DMatrix<f64>, Failure> {
    if rows * cols == 0 {
        return Ok(DMatrix::zeros(rows, cols));
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    let data = std::slice::from_raw_parts(ptr, rows * cols);
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_to(values: &[f64], buf: *mut f64, len: usize) -> Result<ActdegStatus, Failure> {
    if len < values.len() {
        return Err(Failure(
            ActdegStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(ActdegStatus::Ok);
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(ActdegStatus::Ok)
}

unsafe fn plant_ref<'a>(p: *const ActdegPlant) -> Result<&'a ActdegPlant, Failure> {
    p.as_ref().ok_or_else(|| null("plant"))
}

unsafe fn result_ref<'a>(r: *const ActdegResult) -> Result<&'a ActdegResult, Failure> {
    r.as_ref().ok_or_else(|| null("result"))
}

fn into_plant(model: ModelFile) -> Result<*mut ActdegPlant, Failure> {
    let sys = model.plant()?;
    Ok(Box::into_raw(Box::new(ActdegPlant { model, sys })))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn actdeg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next `actdeg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn actdeg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default options: unit weights on all three objective terms and the
/// trace convention for H2.
#[no_mangle]
pub extern "C" fn actdeg_synth_options_default(norm: ActdegNorm, gamma: f64) -> ActdegSynthOptions {
    ActdegSynthOptions {
        norm,
        gamma,
        lambda_a: 1.0,
        lambda_wc: 1.0,
        lambda_xf: 1.0,
        h2_convention: ActdegH2Convention::Trace,
        solver_tol: 0.0,
    }
}

/// Parse a model document (`actdeg-model` schema).
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actdeg_plant_from_json(json: *const c_char, out: *mut *mut ActdegPlant) -> ActdegStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(ActdegStatus::InvalidInput, "model JSON is not UTF-8".into()))?;
        let p = into_plant(ModelFile::from_json(text)?)?;
        write_out(out, p, "out").inspect_err(|_| drop(Box::from_raw(p)))?;
        Ok(ActdegStatus::Ok)
    })
}

/// The bundled F-16 longitudinal model.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actdeg_plant_f16(out: *mut *mut ActdegPlant) -> ActdegStatus {
    guard(|| {
        let p = into_plant(actdeg::f16::model_file())?;
        write_out(out, p, "out").inspect_err(|_| drop(Box::from_raw(p)))?;
        Ok(ActdegStatus::Ok)
    })
}

/// Build a plant from row-major arrays. `dd` may be NULL for a zero
/// feedthrough; `wd` holds `nd` disturbance weights.
///
/// # Safety
/// Each non-NULL array must hold the number of values implied by the
/// dimensions; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actdeg_plant_new(
    nx: usize,
    nu: usize,
    nd: usize,
    nz: usize,
    a: *const f64,
    bu: *const f64,
    bd: *const f64,
    cz: *const f64,
    dd: *const f64,
    wd: *const f64,
    out: *mut *mut ActdegPlant,
) -> ActdegStatus {
    guard(|| {
        let dd = if dd.is_null() { DMatrix::zeros(nz, nd) } else { matrix(dd, nz, nd, "dd")? };
        let sys = StateSpace::new(
            matrix(a, nx, nx, "a")?,
            matrix(bu, nx, nu, "bu")?,
            matrix(bd, nx, nd, "bd")?,
            matrix(cz, nz, nx, "cz")?,
            dd,
        )?;
        let wd = matrix(wd, 1, nd, "wd")?;
        let p = into_plant(ModelFile::from_plant("ffi", &sys, wd.as_slice()))?;
        write_out(out, p, "out").inspect_err(|_| drop(Box::from_raw(p)))?;
        Ok(ActdegStatus::Ok)
    })
}

/// # Safety
/// `plant` must be NULL or a handle from an `actdeg_plant_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn actdeg_plant_free(plant: *mut ActdegPlant) {
    if !plant.is_null() {
        drop(Box::from_raw(plant));
    }
}

/// # Safety
/// `plant` must be a live handle; output pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn actdeg_plant_dims(
    plant: *const ActdegPlant,
    nx: *mut usize,
    nu: *mut usize,
    nd: *mut usize,
    nz: *mut usize,
) -> ActdegStatus {
    guard(|| {
        let p = plant_ref(plant)?;
        for (out, v) in [(nx, p.sys.nx()), (nu, p.sys.nu()), (nd, p.sys.nd()), (nz, p.sys.nz())] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(ActdegStatus::Ok)
    })
}

/// Model document for the plant. Free with [`actdeg_string_free`].
///
/// # Safety
/// `plant` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn actdeg_plant_to_json(plant: *const ActdegPlant) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        out = to_c_string(plant_ref(plant)?.model.to_json()?)?;
        Ok(ActdegStatus::Ok)
    });
    out
}

unsafe fn norm_inputs(
    n: usize,
    m: usize,
    p: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
) -> Result<[DMatrix<f64>; 3], Failure> {
    Ok([matrix(a, n, n, "a")?, matrix(b, n, m, "b")?, matrix(c, p, n, "c")?])
}

/// H2 norm of `(A, B, C)` with `n` states, `m` inputs and `p` outputs.
///
/// # Safety
/// Arrays must be row-major of the implied sizes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn actdeg_h2_norm(
    n: usize,
    m: usize,
    p: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    out: *mut f64,
) -> ActdegStatus {
    guard(|| {
        let [a, b, c] = norm_inputs(n, m, p, a, b, c)?;
        write_out(out, h2_norm(&a, &b, &c)?.value, "out")?;
        Ok(ActdegStatus::Ok)
    })
}

/// H-infinity norm of `(A, B, C)` to relative tolerance `tol`.
///
/// # Safety
/// Arrays must be row-major of the implied sizes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn actdeg_hinf_norm(
    n: usize,
    m: usize,
    p: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    tol: f64,
    out: *mut f64,
) -> ActdegStatus {
    guard(|| {
        let [a, b, c] = norm_inputs(n, m, p, a, b, c)?;
        write_out(out, hinf_norm(&a, &b, &c, tol)?.value, "out")?;
        Ok(ActdegStatus::Ok)
    })
}

fn spec_for(p: &ActdegPlant, o: &ActdegSynthOptions) -> Result<SynthesisSpec, Failure> {
    let norm = match o.norm {
        ActdegNorm::H2 => NormKind::H2,
        ActdegNorm::Hinf => NormKind::HInf,
    };
    let mut spec = SynthesisSpec::new(norm, o.gamma, p.model.wd.clone())
        .with_weights(o.lambda_a, o.lambda_wc, o.lambda_xf);
    spec.h2_convention = match o.h2_convention {
        ActdegH2Convention::Trace => H2BoundConvention::Trace,
        ActdegH2Convention::Norm => H2BoundConvention::Norm,
    };
    let mut spec = spec.with_env_overrides()?;
    if o.solver_tol > 0.0 {
        spec.solver_tol = o.solver_tol;
    }
    Ok(spec)
}

/// Solve the synthesis program and validate the optimum.
///
/// A result handle is written to `out` whenever the solver ran, including
/// infeasible and unverified outcomes; the return value is then the same as
/// [`actdeg_result_status`]. On input errors `*out` is set to NULL.
///
/// # Safety
/// `plant` must be a live handle, `options` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn actdeg_synthesize(
    plant: *const ActdegPlant,
    options: *const ActdegSynthOptions,
    out: *mut *mut ActdegResult,
) -> ActdegStatus {
    if !out.is_null() {
        out.write(ptr::null_mut());
    }
    guard(|| {
        let p = plant_ref(plant)?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = spec_for(p, o)?;
        let problem = build_lmi(&p.sys, &spec)?;
        let result = solve(&problem, &spec)?;
        let mut report = RunReport::new(&p.model.name, spec.clone(), result);
        let mut status = match report.status {
            SynthesisStatus::Optimal => ActdegStatus::Ok,
            SynthesisStatus::Infeasible => ActdegStatus::Infeasible,
            SynthesisStatus::NumericalFailure => ActdegStatus::NumericalFailure,
        };
        if let Some(point) = &report.result.point {
            report.degradation = Some(degradation_report(
                &point.degradation,
                &point.v,
                point.objective,
                p.model.input_labels(),
            )?);
            let v = validate(&report.result, &p.sys, &spec);
            if !v.passed {
                status = ActdegStatus::VerificationFailed;
                let failed: Vec<&str> = v.failures().map(|c| c.name.as_str()).collect();
                set_error(format!("validation failed: {}", failed.join(", ")));
            }
            report.validation = Some(v);
        }
        match status {
            ActdegStatus::Infeasible => set_error("synthesis program is infeasible"),
            ActdegStatus::NumericalFailure => {
                set_error(format!("solver stopped with {}", report.result.diagnostics.raw_status))
            }
            _ => {}
        }
        out.write(Box::into_raw(Box::new(ActdegResult { report, status })));
        Ok(status)
    })
}

/// # Safety
/// `result` must be NULL or a live handle from [`actdeg_synthesize`].
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_free(result: *mut ActdegResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_status(result: *const ActdegResult) -> ActdegStatus {
    match result.as_ref() {
        Some(r) => r.status,
        None => ActdegStatus::NullPointer,
    }
}

/// Number of actuators and plant states of the gain `K` (`nu x nx`).
///
/// # Safety
/// `result` must be a live handle; output pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_dims(result: *const ActdegResult, nu: *mut usize, nx: *mut usize) -> ActdegStatus {
    guard(|| {
        let point = point(result_ref(result)?)?;
        if !nu.is_null() {
            nu.write(point.k.nrows());
        }
        if !nx.is_null() {
            nx.write(point.k.ncols());
        }
        Ok(ActdegStatus::Ok)
    })
}

fn point(r: &ActdegResult) -> Result<&actdeg::synthesis::OptimalPoint, Failure> {
    r.report
        .result
        .point
        .as_ref()
        .ok_or_else(|| Failure(ActdegStatus::NoSolution, format!("no optimal point ({:?})", r.report.status)))
}

/// Copy the gain `K` (row-major, `nu x nx`) into `buf`.
///
/// # Safety
/// `result` must be a live handle and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_gain(result: *const ActdegResult, buf: *mut f64, len: usize) -> ActdegStatus {
    guard(|| {
        let k = &point(result_ref(result)?)?.k;
        let rows: Vec<f64> = k.transpose().as_slice().to_vec();
        copy_to(&rows, buf, len)
    })
}

/// Copy the actuator cutoff frequencies (rad/s, `nu` values).
///
/// # Safety
/// `result` must be a live handle and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_omega_c(result: *const ActdegResult, buf: *mut f64, len: usize) -> ActdegStatus {
    guard(|| copy_to(&point(result_ref(result)?)?.degradation.omega_c, buf, len))
}

/// Copy the inverse noise intensities `kappa_a` (`nu` values).
///
/// # Safety
/// `result` must be a live handle and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_kappa_a(result: *const ActdegResult, buf: *mut f64, len: usize) -> ActdegStatus {
    guard(|| copy_to(&point(result_ref(result)?)?.degradation.kappa_a, buf, len))
}

/// Copy the noise scalings `1/sqrt(kappa_a)` (`nu` values).
///
/// # Safety
/// `result` must be a live handle and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_noise_scale(result: *const ActdegResult, buf: *mut f64, len: usize) -> ActdegStatus {
    guard(|| copy_to(&point(result_ref(result)?)?.degradation.noise_scaling(), buf, len))
}

/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_objective(result: *const ActdegResult, out: *mut f64) -> ActdegStatus {
    guard(|| {
        write_out(out, point(result_ref(result)?)?.objective, "out")?;
        Ok(ActdegStatus::Ok)
    })
}

/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_gamma_xf(result: *const ActdegResult, out: *mut f64) -> ActdegStatus {
    guard(|| {
        write_out(out, point(result_ref(result)?)?.degradation.gamma_xf, "out")?;
        Ok(ActdegStatus::Ok)
    })
}

/// Independently computed closed-loop norm of the optimum (squared H2 norm
/// under the trace convention).
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_verified_norm(result: *const ActdegResult, out: *mut f64) -> ActdegStatus {
    guard(|| {
        let r = result_ref(result)?;
        let v = r
            .report
            .result
            .verification
            .as_ref()
            .ok_or_else(|| Failure(ActdegStatus::NoSolution, "result carries no verified norm".into()))?;
        write_out(out, v.value, "out")?;
        Ok(ActdegStatus::Ok)
    })
}

/// Full run report (`actdeg-report` schema). Free with
/// [`actdeg_string_free`]; NULL on failure.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn actdeg_result_to_json(result: *const ActdegResult) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        out = to_c_string(result_ref(result)?.report.to_json()?)?;
        Ok(ActdegStatus::Ok)
    });
    out
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(ActdegStatus::InvalidInput, "string contains NUL".into()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn actdeg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
