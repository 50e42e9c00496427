//! C ABI over `pvtrack`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_load`/`*_simulate` function and released by the matching
//! `*_free`. Fallible calls return a [`PvtStatus`] and write results through
//! out-pointers; the message of the last failure on the calling thread is
//! available from [`pvt_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pvtrack::controllers::ProbeKind;
use pvtrack::metrics::{thd, tracking_efficiency, WaveformSamples};
use pvtrack::pv_model::{open_circuit_voltage, panel_current, true_mpp};
use pvtrack::{Controller, ControllerKind, EnvSample, Error, Measurement, PanelParams, Scenario, Trace};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonConvergence = 3,
    NoLight = 4,
    DutyOutOfRange = 5,
    TargetAboveBus = 6,
    InvalidK = 7,
    Config = 8,
    Simulation = 9,
    Io = 10,
    InsufficientSamples = 11,
    ZeroFundamental = 12,
    EmptyTrace = 13,
    ZeroIdeal = 14,
    OutOfRange = 15,
    NotSettled = 16,
    Panic = 17,
}

/// Probe flag carried by a measurement.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvtProbe {
    None = 0,
    OpenCircuit = 1,
    ShortCircuit = 2,
}

/// Single-diode panel parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PvtPanelParams {
    pub voc_n: f64,
    pub isc_n: f64,
    pub kv: f64,
    pub ki: f64,
    pub n_series: u32,
    pub ideality: f64,
    pub r_s: f64,
    pub r_sh: f64,
}

/// A point on the I-V curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PvtPoint {
    pub v: f64,
    pub i: f64,
    pub p: f64,
}

/// One sensed sample handed to a controller.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PvtMeasurement {
    pub v_pv: f64,
    pub i_pv: f64,
    pub t: f64,
    pub time: f64,
    pub probe: PvtProbe,
}

/// One row of a simulation trace. `mode` is a static NUL-terminated string,
/// empty when the controller reports none.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PvtRecord {
    pub time: f64,
    pub g: f64,
    pub t: f64,
    pub duty: f64,
    pub v_pv: f64,
    pub i_pv: f64,
    pub p_pv: f64,
    pub p_ideal: f64,
    pub mode: *const c_char,
}

pub struct PvtPanel(PanelParams);
pub struct PvtScenario(Scenario);
pub struct PvtTrace(Trace);
pub struct PvtController(Box<dyn Controller>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> PvtStatus {
    match e {
        Error::NonConvergence { .. } => PvtStatus::NonConvergence,
        Error::NoLight => PvtStatus::NoLight,
        Error::DutyOutOfRange { .. } => PvtStatus::DutyOutOfRange,
        Error::TargetAboveBus { .. } => PvtStatus::TargetAboveBus,
        Error::InvalidK(_) => PvtStatus::InvalidK,
        Error::OutOfRange { .. } => PvtStatus::OutOfRange,
        Error::InvalidParameter { .. } => PvtStatus::InvalidArgument,
        Error::EmptyTrace => PvtStatus::EmptyTrace,
        Error::ZeroIdeal { .. } => PvtStatus::ZeroIdeal,
        Error::NotSettled => PvtStatus::NotSettled,
        Error::InsufficientSamples(_) => PvtStatus::InsufficientSamples,
        Error::ZeroFundamental => PvtStatus::ZeroFundamental,
        Error::Config { .. } => PvtStatus::Config,
        Error::Simulation { .. } => PvtStatus::Simulation,
        Error::Io(_) => PvtStatus::Io,
    }
}

fn fail(e: Error) -> PvtStatus {
    set_last_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> PvtStatus {
    set_last_error(format!("null pointer: {what}"));
    PvtStatus::NullPointer
}

fn invalid(msg: impl Into<String>) -> PvtStatus {
    set_last_error(msg);
    PvtStatus::InvalidArgument
}

/// Runs `f`, converting a panic into [`PvtStatus::Panic`].
fn guard(f: impl FnOnce() -> PvtStatus) -> PvtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_last_error("internal panic");
            PvtStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PvtStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn mode_cstr(mode: Option<pvtrack::Mode>) -> *const c_char {
    let s: &'static CStr = match mode {
        None => c"",
        Some(pvtrack::Mode::Calc) => c"calc",
        Some(pvtrack::Mode::Fine) => c"fine",
        Some(pvtrack::Mode::Probe) => c"probe",
        Some(pvtrack::Mode::Hold) => c"hold",
    };
    s.as_ptr()
}

impl From<PvtPanelParams> for PanelParams {
    fn from(p: PvtPanelParams) -> Self {
        PanelParams {
            voc_n: p.voc_n,
            isc_n: p.isc_n,
            kv: p.kv,
            ki: p.ki,
            n_series: p.n_series,
            ideality: p.ideality,
            r_s: p.r_s,
            r_sh: p.r_sh,
        }
    }
}

impl From<&PanelParams> for PvtPanelParams {
    fn from(p: &PanelParams) -> Self {
        PvtPanelParams {
            voc_n: p.voc_n,
            isc_n: p.isc_n,
            kv: p.kv,
            ki: p.ki,
            n_series: p.n_series,
            ideality: p.ideality,
            r_s: p.r_s,
            r_sh: p.r_sh,
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pvt_version() -> *const c_char {
    const V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// Message describing the last failure on this thread, or NULL if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pvt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn pvt_status_str(status: PvtStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PvtStatus::Ok => c"ok",
        PvtStatus::NullPointer => c"null pointer",
        PvtStatus::InvalidArgument => c"invalid argument",
        PvtStatus::NonConvergence => c"non-convergence",
        PvtStatus::NoLight => c"no light",
        PvtStatus::DutyOutOfRange => c"duty out of range",
        PvtStatus::TargetAboveBus => c"target above bus",
        PvtStatus::InvalidK => c"invalid fractional constant",
        PvtStatus::Config => c"configuration error",
        PvtStatus::Simulation => c"simulation error",
        PvtStatus::Io => c"i/o error",
        PvtStatus::InsufficientSamples => c"insufficient samples",
        PvtStatus::ZeroFundamental => c"zero fundamental",
        PvtStatus::EmptyTrace => c"empty trace",
        PvtStatus::ZeroIdeal => c"zero ideal power",
        PvtStatus::OutOfRange => c"out of range",
        PvtStatus::NotSettled => c"not settled",
        PvtStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

// ---- panel ----

/// Parameters of the built-in synthetic reference panel.
#[no_mangle]
pub extern "C" fn pvt_panel_params_reference() -> PvtPanelParams {
    (&PanelParams::reference()).into()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pvt_panel_new(params: PvtPanelParams, out: *mut *mut PvtPanel) -> PvtStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let p = PanelParams::from(params);
        if let Err(e) = p.validate() {
            return fail(e);
        }
        *out = Box::into_raw(Box::new(PvtPanel(p)));
        PvtStatus::Ok
    })
}

/// # Safety
/// `panel` must be NULL or a handle from `pvt_panel_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pvt_panel_free(panel: *mut PvtPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Panel current at terminal voltage `v` under irradiance `g` (W/m²) and cell
/// temperature `t` (°C).
///
/// # Safety
/// `panel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_panel_current(
    panel: *const PvtPanel,
    v: f64,
    g: f64,
    t: f64,
    out: *mut f64,
) -> PvtStatus {
    guard(|| {
        if panel.is_null() || out.is_null() {
            return null("panel/out");
        }
        match panel_current(v, &EnvSample::new(g, t), &(*panel).0) {
            Ok(i) => {
                *out = i;
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `panel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_panel_voc(panel: *const PvtPanel, g: f64, t: f64, out: *mut f64) -> PvtStatus {
    guard(|| {
        if panel.is_null() || out.is_null() {
            return null("panel/out");
        }
        match open_circuit_voltage(&EnvSample::new(g, t), &(*panel).0) {
            Ok(v) => {
                *out = v;
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `panel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_panel_true_mpp(
    panel: *const PvtPanel,
    g: f64,
    t: f64,
    out: *mut PvtPoint,
) -> PvtStatus {
    guard(|| {
        if panel.is_null() || out.is_null() {
            return null("panel/out");
        }
        match true_mpp(&EnvSample::new(g, t), &(*panel).0) {
            Ok(pt) => {
                *out = PvtPoint { v: pt.v, i: pt.i, p: pt.p };
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---- scenario ----

/// Load a scenario from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_scenario_load(path: *const c_char, out: *mut *mut PvtScenario) -> PvtStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Scenario::load(path) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(PvtScenario(s)));
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_scenario_parse(toml: *const c_char, out: *mut *mut PvtScenario) -> PvtStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let src = match str_arg(toml, "toml") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Scenario::from_toml_str(src) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(PvtScenario(s)));
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `scenario` must be NULL or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn pvt_scenario_free(scenario: *mut PvtScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// 64-bit content hash of the scenario.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_scenario_hash(scenario: *const PvtScenario, out: *mut u64) -> PvtStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return null("scenario/out");
        }
        match u64::from_str_radix(&(*scenario).0.hash(), 16) {
            Ok(h) => {
                *out = h;
                PvtStatus::Ok
            }
            Err(e) => invalid(e.to_string()),
        }
    })
}

fn controller_kind(name: *const c_char, default: ControllerKind) -> Result<ControllerKind, PvtStatus> {
    if name.is_null() {
        return Ok(default);
    }
    let s = unsafe { str_arg(name, "controller") }?;
    s.parse::<ControllerKind>().map_err(fail)
}

// ---- simulation ----

/// Run the scenario. `controller` overrides the scenario's controller name
/// when non-NULL.
///
/// # Safety
/// `scenario` must be a live handle, `controller` NULL or a NUL-terminated
/// string, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_simulate(
    scenario: *const PvtScenario,
    controller: *const c_char,
    out: *mut *mut PvtTrace,
) -> PvtStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return null("scenario/out");
        }
        let mut s = (*scenario).0.clone();
        s.controller.name = match controller_kind(controller, s.controller.name) {
            Ok(k) => k,
            Err(st) => return st,
        };
        match pvtrack::simulate(&s) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(PvtTrace(t)));
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `trace` must be NULL or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn pvt_trace_free(trace: *mut PvtTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of records; 0 for a NULL handle.
///
/// # Safety
/// `trace` must be NULL or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn pvt_trace_len(trace: *const PvtTrace) -> usize {
    if trace.is_null() {
        0
    } else {
        (*trace).0.len()
    }
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_trace_record(trace: *const PvtTrace, index: usize, out: *mut PvtRecord) -> PvtStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return null("trace/out");
        }
        let trace = &*trace;
        let Some(r) = trace.0.records.get(index) else {
            return invalid(format!("record index {index} out of bounds"));
        };
        *out = PvtRecord {
            time: r.time,
            g: r.g,
            t: r.t,
            duty: r.duty,
            v_pv: r.v_pv,
            i_pv: r.i_pv,
            p_pv: r.p_pv,
            p_ideal: r.p_ideal,
            mode: mode_cstr(r.mode),
        };
        PvtStatus::Ok
    })
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_trace_efficiency(trace: *const PvtTrace, out: *mut f64) -> PvtStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return null("trace/out");
        }
        match tracking_efficiency(&(*trace).0) {
            Ok(e) => {
                *out = e;
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Write the trace as CSV.
///
/// # Safety
/// `trace` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pvt_trace_write_csv(trace: *const PvtTrace, path: *const c_char) -> PvtStatus {
    guard(|| {
        if trace.is_null() {
            return null("trace");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match (*trace).0.save_csv(path) {
            Ok(()) => PvtStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

// ---- controller ----

/// Build a controller from a scenario's settings. `name` overrides the
/// scenario's controller when non-NULL.
///
/// # Safety
/// `scenario` must be a live handle, `name` NULL or a NUL-terminated string,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_controller_new(
    scenario: *const PvtScenario,
    name: *const c_char,
    out: *mut *mut PvtController,
) -> PvtStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return null("scenario/out");
        }
        let s = &(*scenario).0;
        let kind = match controller_kind(name, s.controller.name) {
            Ok(k) => k,
            Err(st) => return st,
        };
        match s.controller.build_kind(kind, &s.panel, &s.bus) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(PvtController(c)));
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `controller` must be NULL or a live controller handle.
#[no_mangle]
pub unsafe extern "C" fn pvt_controller_free(controller: *mut PvtController) {
    if !controller.is_null() {
        drop(Box::from_raw(controller));
    }
}

/// Current duty command; NaN for a NULL handle.
///
/// # Safety
/// `controller` must be NULL or a live controller handle.
#[no_mangle]
pub unsafe extern "C" fn pvt_controller_duty(controller: *const PvtController) -> f64 {
    if controller.is_null() {
        f64::NAN
    } else {
        (*controller).0.duty()
    }
}

/// Whether the controller wants the panel disconnected at `time` before the
/// next step, and which probe.
///
/// # Safety
/// `controller` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_controller_probe(
    controller: *mut PvtController,
    time: f64,
    out: *mut PvtProbe,
) -> PvtStatus {
    guard(|| {
        if controller.is_null() || out.is_null() {
            return null("controller/out");
        }
        *out = match (*controller).0.probe(time) {
            None => PvtProbe::None,
            Some(ProbeKind::OpenCircuit) => PvtProbe::OpenCircuit,
            Some(ProbeKind::ShortCircuit) => PvtProbe::ShortCircuit,
        };
        PvtStatus::Ok
    })
}

/// Feed one measurement; writes the new duty command.
///
/// # Safety
/// `controller` must be a live handle and `out_duty` writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_controller_step(
    controller: *mut PvtController,
    m: PvtMeasurement,
    out_duty: *mut f64,
) -> PvtStatus {
    guard(|| {
        if controller.is_null() || out_duty.is_null() {
            return null("controller/out_duty");
        }
        let mut meas = Measurement::new(m.v_pv, m.i_pv, m.t, m.time);
        meas.probe = match m.probe {
            PvtProbe::None => None,
            PvtProbe::OpenCircuit => Some(ProbeKind::OpenCircuit),
            PvtProbe::ShortCircuit => Some(ProbeKind::ShortCircuit),
        };
        match (*controller).0.step(&meas) {
            Ok(d) => {
                *out_duty = d;
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---- waveform ----

/// Total harmonic distortion in percent of `len` samples taken at `fs` Hz
/// with fundamental `f0` Hz, using harmonics 2..=`n_harmonics`.
///
/// # Safety
/// `samples` must point to `len` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pvt_thd(
    samples: *const f64,
    len: usize,
    fs: f64,
    f0: f64,
    n_harmonics: usize,
    out: *mut f64,
) -> PvtStatus {
    guard(|| {
        if samples.is_null() || out.is_null() {
            return null("samples/out");
        }
        let data = std::slice::from_raw_parts(samples, len).to_vec();
        match thd(&WaveformSamples::new(data, fs, f0), n_harmonics) {
            Ok(v) => {
                *out = v;
                PvtStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
