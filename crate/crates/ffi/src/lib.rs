//! C ABI for ldlcert.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! call returns an [`LdlcertStatus`]; on failure a message is available from
//! [`ldlcert_last_error`] on the same thread. Strings returned through out
//! parameters are owned by the caller and released with
//! [`ldlcert_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ldlcert::analysis::{analyze_joint, critical_ratio, extract_hardy_terms, AnalyzeOptions, ErrorMethod};
use ldlcert::correlations::{
    condition_on_inputs, from_counts, postselect, Behavior, EfficiencyMap, EstimatorConfig, JointDistribution,
};
use ldlcert::files::{self, DataFile};
use ldlcert::ldl::{enumerate_ldl_vertices, membership_against, separation_margin, DetectionBounds, Efficiencies};
use ldlcert::lp::{Certificate, Scalar, SolverOptions};
use ldlcert::quantum::hardy_behavior;
use ldlcert::Error;
use num_rational::BigRational;

/// Result of every call. `Infeasible` is a verdict, not an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdlcertStatus {
    Ok = 0,
    Infeasible = 1,
    /// Malformed JSON or a table that fails validation.
    InvalidData = 2,
    /// Arguments outside their domain (bounds, efficiencies, indices).
    InvalidArgument = 3,
    /// The operation does not apply to this scenario or convention.
    Unsupported = 4,
    TooLarge = 5,
    /// The linear-program solver failed to reach a verified verdict.
    SolverFailure = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Conditional table `P(a|x)`.
pub struct LdlcertBehavior(Behavior);

/// Unconditional table `P(a, x)`, optionally with per-entry errors.
pub struct LdlcertJoint(JointDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LdlcertStatus {
    match e {
        Error::InvalidScenario(_)
        | Error::InvalidTable(_)
        | Error::EmptyData
        | Error::ZeroInputMass { .. }
        | Error::NoDetections { .. }
        | Error::Parse(_)
        | Error::SignalingInput { .. } => LdlcertStatus::InvalidData,
        Error::InvalidEfficiency { .. } | Error::InvalidBounds(_) | Error::DegenerateBounds => {
            LdlcertStatus::InvalidArgument
        }
        Error::Shape { .. } | Error::UnsupportedConvention(_) => LdlcertStatus::Unsupported,
        Error::TooLarge { .. } => LdlcertStatus::TooLarge,
        Error::IllFormed(_) | Error::Unsolved { .. } | Error::Numerical(_) => LdlcertStatus::SolverFailure,
    }
}

struct Fail(LdlcertStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LdlcertStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<LdlcertStatus, Fail>) -> LdlcertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            LdlcertStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(LdlcertStatus::InvalidData, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<LdlcertStatus, Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(LdlcertStatus::Ok)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
    Ok(())
}

/// Last error message on this thread, or null. Valid until the next failing
/// call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn ldlcert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ldlcert_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a data file with kind `joint_probabilities` or `counts`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_joint_from_json(json: *const c_char, out: *mut *mut LdlcertJoint) -> LdlcertStatus {
    guard(|| {
        let j = match files::parse(read_str(json, "json")?)? {
            DataFile::Joint(j) => j,
            DataFile::Counts(c) => from_counts(&c, &EstimatorConfig::default())?,
            other => {
                return Err(Fail(
                    LdlcertStatus::InvalidData,
                    format!("expected a joint table or counts, got {:?}", other.kind()),
                ))
            }
        };
        put(out, LdlcertJoint(j))
    })
}

/// Parses any outcome table into a conditional behavior: joint tables and
/// counts are conditioned on the inputs, lossy tables postselected.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_behavior_from_json(
    json: *const c_char,
    out: *mut *mut LdlcertBehavior,
) -> LdlcertStatus {
    guard(|| {
        let b = match files::parse(read_str(json, "json")?)? {
            DataFile::Behavior(b) => b,
            DataFile::Joint(j) => condition_on_inputs(&j)?.0,
            DataFile::Counts(c) => condition_on_inputs(&from_counts(&c, &EstimatorConfig::default())?)?.0,
            DataFile::Lossy(l) => postselect(&l)?.0,
            DataFile::Efficiencies(_) => {
                return Err(Fail(LdlcertStatus::InvalidData, "expected a table of outcomes".into()))
            }
        };
        put(out, LdlcertBehavior(b))
    })
}

/// `P(a|x)` from a joint table.
///
/// # Safety
/// `joint` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_behavior_from_joint(
    joint: *const LdlcertJoint,
    out: *mut *mut LdlcertBehavior,
) -> LdlcertStatus {
    guard(|| {
        let j = handle(joint, "joint")?;
        put(out, LdlcertBehavior(condition_on_inputs(&j.0)?.0))
    })
}

/// The ideal two-qubit Hardy behavior.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_hardy_behavior(out: *mut *mut LdlcertBehavior) -> LdlcertStatus {
    guard(|| put(out, LdlcertBehavior(hardy_behavior())))
}

/// Reads `P(a|x)`; `outcomes` and `inputs` hold `parties` entries each.
///
/// # Safety
/// `behavior` must be a live handle, the arrays readable for `parties`
/// elements and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_behavior_get(
    behavior: *const LdlcertBehavior,
    outcomes: *const usize,
    inputs: *const usize,
    parties: usize,
    out: *mut f64,
) -> LdlcertStatus {
    guard(|| {
        let b = &handle(behavior, "behavior")?.0;
        if outcomes.is_null() || inputs.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let s = b.scenario();
        if parties != s.parties() {
            return Err(Fail(
                LdlcertStatus::InvalidArgument,
                format!("{parties} parties given, scenario has {}", s.parties()),
            ));
        }
        let a = std::slice::from_raw_parts(outcomes, parties);
        let x = std::slice::from_raw_parts(inputs, parties);
        let in_range = |v: &[usize], r: &[usize]| v.iter().zip(r).all(|(d, m)| d < m);
        if !in_range(a, s.outcomes()) || !in_range(x, s.inputs()) {
            return Err(Fail(LdlcertStatus::InvalidArgument, "index out of range".into()));
        }
        *out = b.get(a, x);
        Ok(LdlcertStatus::Ok)
    })
}

/// Critical ratio of the Hardy-type inequality; `+inf` when `P(00|00) = 0`.
///
/// # Safety
/// `behavior` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_critical_ratio(behavior: *const LdlcertBehavior, out: *mut f64) -> LdlcertStatus {
    guard(|| {
        let b = &handle(behavior, "behavior")?.0;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = critical_ratio(&extract_hardy_terms(b)?);
        Ok(LdlcertStatus::Ok)
    })
}

/// Membership in the postselected LDL set with per-party detection bounds.
///
/// `efficiencies` holds one observed detection probability per input tuple
/// (`n_efficiencies` entries), or is null for a common unknown value.
/// Returns `Ok` when feasible and `Infeasible` otherwise; either way
/// `report_json` receives the certificate.
///
/// # Safety
/// `behavior` must be a live handle, `efficiencies` readable when non-null,
/// `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_membership_ldlps(
    behavior: *const LdlcertBehavior,
    eta_min: f64,
    eta_max: f64,
    efficiencies: *const f64,
    n_efficiencies: usize,
    exact: bool,
    report_json: *mut *mut c_char,
) -> LdlcertStatus {
    guard(|| {
        let b = &handle(behavior, "behavior")?.0;
        if report_json.is_null() {
            return Err(null("output pointer"));
        }
        let eff = if efficiencies.is_null() {
            Efficiencies::UniformUnknown
        } else {
            let v = std::slice::from_raw_parts(efficiencies, n_efficiencies).to_vec();
            Efficiencies::Known(EfficiencyMap::new(b.scenario().clone(), v).map_err(|e| {
                let msg = e.to_string();
                Fail(LdlcertStatus::InvalidArgument, msg)
            })?)
        };
        let bounds = DetectionBounds::per_party(eta_min, eta_max)?;
        let vs = enumerate_ldl_vertices(b.scenario(), &[bounds])?;
        let opts = SolverOptions::default();
        let (report, feasible) = if exact {
            membership_report::<BigRational>(&vs, b, &eff, &opts)?
        } else {
            membership_report::<f64>(&vs, b, &eff, &opts)?
        };
        put_string(report_json, report.to_string())?;
        Ok(if feasible { LdlcertStatus::Ok } else { LdlcertStatus::Infeasible })
    })
}

fn membership_report<T: Scalar>(
    vs: &ldlcert::ldl::VertexSet,
    b: &Behavior,
    eff: &Efficiencies,
    opts: &SolverOptions,
) -> Result<(serde_json::Value, bool), Fail> {
    let m = membership_against::<T>(vs, b, eff, opts)?;
    let margin = match &m.certificate {
        Certificate::Infeasible { dual } => separation_margin(vs, b, eff, dual)?,
        Certificate::Feasible { .. } => None,
    };
    let feasible = m.certificate.is_feasible();
    Ok((
        serde_json::json!({
            "status": if feasible { "feasible" } else { "infeasible" },
            "certificate": m.certificate.to_json(),
            "detected_mass": m.detected_mass.as_ref().map(Scalar::to_json),
            "separation_margin": margin.as_ref().map(Scalar::to_json),
            "vertices": m.vertices,
            "notes": m.notes,
        }),
        feasible,
    ))
}

/// Analysis report of a joint table as JSON. `eta_max` lists
/// `n_eta_max` upper detection bounds at which to report the required lower
/// bound (null for the defaults 1, 0.5, 0.1).
///
/// # Safety
/// `joint` must be a live handle, `eta_max` readable when non-null and
/// `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_analyze_json(
    joint: *const LdlcertJoint,
    eta_max: *const f64,
    n_eta_max: usize,
    report_json: *mut *mut c_char,
) -> LdlcertStatus {
    guard(|| {
        let j = &handle(joint, "joint")?.0;
        let mut opts = AnalyzeOptions { errors: Some(ErrorMethod::Delta), ..AnalyzeOptions::default() };
        if !eta_max.is_null() {
            opts.eta_max = std::slice::from_raw_parts(eta_max, n_eta_max).to_vec();
        }
        let r = analyze_joint(j, &opts)?;
        put_string(report_json, r.to_json().to_string())?;
        Ok(LdlcertStatus::Ok)
    })
}

/// # Safety
/// `b` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_behavior_free(b: *mut LdlcertBehavior) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `j` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ldlcert_joint_free(j: *mut LdlcertJoint) {
    if !j.is_null() {
        drop(Box::from_raw(j));
    }
}
