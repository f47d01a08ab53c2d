//! C ABI for the womkit toolkit.
//!
//! Every function returns a [`WkStatus`]; results travel through out
//! pointers. Aggregate results (simulation reports, capacity solutions) are
//! opaque handles with accessor functions and a matching `_free`. The header
//! `include/womkit.h` is regenerated by the build script via cbindgen.
//!
//! Pointer-taking functions are `unsafe` in the Rust sense: callers must
//! pass pointers that are either valid or null (null is checked and
//! reported as [`WkStatus::NullPointer`]). Handles are immutable after
//! creation, safe to read from any thread, and must be freed exactly once.
//! That single contract covers every function below.
#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, CString};

use womkit::bound_math::{self, GibbsParams};
use womkit::capacity::{self, RateTuple, WomChain};
use womkit::womsim::{self, SimConfig, SimReport};
use womkit::Error;

/// Result of a womkit call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter was outside its documented domain.
    InvalidArgument = 2,
    /// The requested payload lies outside `(0, log2 K]`.
    InfeasiblePayload = 3,
    /// A conditional chain violated row-stochasticity or monotonicity.
    InvalidChain = 4,
    /// The stage has no bins; nothing can be recorded or decoded.
    DeadStage = 5,
    /// The message does not fit the stage's bin count.
    MessageOutOfRange = 6,
    /// The brute-force oracle refused an instance beyond its budget.
    OracleTooLarge = 7,
    /// An index argument was out of bounds for the handle.
    IndexOutOfRange = 8,
}

fn status_of(error: &Error) -> WkStatus {
    match error {
        Error::InfeasiblePayload { .. } => WkStatus::InfeasiblePayload,
        Error::InvalidChain(_) => WkStatus::InvalidChain,
        Error::DeadStage(_) => WkStatus::DeadStage,
        Error::MessageOutOfRange { .. } => WkStatus::MessageOutOfRange,
        Error::OracleTooLarge { .. } => WkStatus::OracleTooLarge,
        _ => WkStatus::InvalidArgument,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn wk_status_message(status: WkStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        WkStatus::Ok => b"ok\0",
        WkStatus::NullPointer => b"required pointer argument was null\0",
        WkStatus::InvalidArgument => b"parameter outside its documented domain\0",
        WkStatus::InfeasiblePayload => b"payload outside the feasible interval (0, log2 K]\0",
        WkStatus::InvalidChain => b"conditional chain violates its invariants\0",
        WkStatus::DeadStage => b"stage has no bins left\0",
        WkStatus::MessageOutOfRange => b"message does not fit the stage's bin count\0",
        WkStatus::OracleTooLarge => b"instance exceeds the brute-force oracle budget\0",
        WkStatus::IndexOutOfRange => b"index out of bounds for this handle\0",
    };
    text.as_ptr() as *const c_char
}

macro_rules! out_write {
    ($ptr:expr, $value:expr) => {{
        if $ptr.is_null() {
            return WkStatus::NullPointer;
        }
        unsafe { *$ptr = $value };
        WkStatus::Ok
    }};
}

// ---------------------------------------------------------------------------
// Closed-form bound functions
// ---------------------------------------------------------------------------

fn gibbs_eval(beta: f64, levels: u32, out: *mut f64, f: impl Fn(&GibbsParams) -> f64) -> WkStatus {
    match GibbsParams::new(beta, levels) {
        Ok(params) => out_write!(out, f(&params)),
        Err(err) => status_of(&err),
    }
}

/// Expected level drop per write of the Gibbs-form distribution.
#[no_mangle]
pub unsafe extern "C" fn wk_cost(beta: f64, levels: u32, out: *mut f64) -> WkStatus {
    gibbs_eval(beta, levels, out, GibbsParams::cost)
}

/// Entropy per write in nats.
#[no_mangle]
pub unsafe extern "C" fn wk_rate_nats(beta: f64, levels: u32, out: *mut f64) -> WkStatus {
    gibbs_eval(beta, levels, out, GibbsParams::rate_nats)
}

/// Entropy per write in bits.
#[no_mangle]
pub unsafe extern "C" fn wk_rate_bits(beta: f64, levels: u32, out: *mut f64) -> WkStatus {
    gibbs_eval(beta, levels, out, GibbsParams::rate_bits)
}

/// Stage coding efficiency `rate/cost` in nats per level.
#[no_mangle]
pub unsafe extern "C" fn wk_stage_efficiency_nats(beta: f64, levels: u32, out: *mut f64) -> WkStatus {
    gibbs_eval(beta, levels, out, GibbsParams::stage_efficiency_nats)
}

/// Stage coding efficiency `rate/cost` in bits per level.
#[no_mangle]
pub unsafe extern "C" fn wk_stage_efficiency_bits(beta: f64, levels: u32, out: *mut f64) -> WkStatus {
    gibbs_eval(beta, levels, out, GibbsParams::stage_efficiency_bits)
}

/// Largest feasible payload for `levels`, in bits.
#[no_mangle]
pub unsafe extern "C" fn wk_max_payload_bits(levels: u32, out: *mut f64) -> WkStatus {
    if levels < 2 {
        return WkStatus::InvalidArgument;
    }
    out_write!(out, bound_math::max_payload_bits(levels))
}

/// The beta at which the rate equals `p_bits`.
#[no_mangle]
pub unsafe extern "C" fn wk_solve_beta_for_payload(p_bits: f64, levels: u32, out: *mut f64) -> WkStatus {
    match bound_math::solve_beta_for_payload(p_bits, levels) {
        Ok(beta) => out_write!(out, beta),
        Err(err) => status_of(&err),
    }
}

/// One point of the payload -> efficiency upper bound curve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WkBoundPoint {
    pub payload: f64,
    pub beta: f64,
    pub cost: f64,
    pub efficiency_upper: f64,
    pub alpha: f64,
}

/// Efficiency upper bound at payload `p_bits` for a `levels`-level cell.
#[no_mangle]
pub unsafe extern "C" fn wk_upper_bound_efficiency(
    p_bits: f64,
    levels: u32,
    alpha: f64,
    out: *mut WkBoundPoint,
) -> WkStatus {
    match bound_math::upper_bound_efficiency(p_bits, levels, alpha) {
        Ok(point) => out_write!(
            out,
            WkBoundPoint {
                payload: point.payload,
                beta: point.beta,
                cost: point.cost,
                efficiency_upper: point.efficiency_upper,
                alpha: point.alpha,
            }
        ),
        Err(err) => status_of(&err),
    }
}

// ---------------------------------------------------------------------------
// Scheme closed forms
// ---------------------------------------------------------------------------

/// Bin count of a stage: `floor((1-epsilon) * (cells - dropped))`.
#[no_mangle]
pub unsafe extern "C" fn wk_stage_bins(cells: u64, dropped: u64, epsilon: f64, out: *mut u64) -> WkStatus {
    if !(epsilon > 0.0 && epsilon < 1.0) || cells < 2 {
        return WkStatus::InvalidArgument;
    }
    out_write!(
        out,
        womsim::stage_bins(cells as usize, dropped as usize, epsilon)
    )
}

/// Exact failure probability of a stage encode.
#[no_mangle]
pub unsafe extern "C" fn wk_exact_stage_error(
    cells: u64,
    dropped: u64,
    epsilon: f64,
    out: *mut f64,
) -> WkStatus {
    if !(epsilon > 0.0 && epsilon < 1.0) || cells < 2 {
        return WkStatus::InvalidArgument;
    }
    match womsim::exact_stage_error(cells as usize, dropped as usize, epsilon) {
        Ok(p) => out_write!(out, p),
        Err(err) => status_of(&err),
    }
}

/// Lower bound on the expected bits recorded per erase cycle.
#[no_mangle]
pub unsafe extern "C" fn wk_expected_rate_lower_bound(
    cells: u64,
    levels: u32,
    epsilon: f64,
    out: *mut f64,
) -> WkStatus {
    if !(epsilon > 0.0 && epsilon < 1.0) || cells < 2 || !(2..=256).contains(&levels) {
        return WkStatus::InvalidArgument;
    }
    out_write!(
        out,
        womsim::expected_rate_lower_bound(cells as usize, levels as u16, epsilon)
    )
}

/// All-success payload of the scheme, bits per cell per write.
#[no_mangle]
pub unsafe extern "C" fn wk_payload_formula(cells: u64, epsilon: f64, out: *mut f64) -> WkStatus {
    if !(epsilon > 0.0 && epsilon < 1.0) || cells < 2 {
        return WkStatus::InvalidArgument;
    }
    out_write!(out, womsim::payload_formula(cells as usize, epsilon))
}

/// Large-block efficiency lower bound at epsilon = 0.5 (log base 2).
#[no_mangle]
pub unsafe extern "C" fn wk_efficiency_lower_bound_asymptotic(
    cells: u64,
    alpha: f64,
    out: *mut f64,
) -> WkStatus {
    if cells < 2 || !alpha.is_finite() || alpha <= 0.0 {
        return WkStatus::InvalidArgument;
    }
    out_write!(
        out,
        womsim::efficiency_lower_bound_asymptotic(cells as usize, alpha)
    )
}

// ---------------------------------------------------------------------------
// Simulation handle
// ---------------------------------------------------------------------------

/// Opaque aggregated simulation report; read through `wk_sim_report_*`.
pub struct WkSimReport {
    inner: SimReport,
}

/// Per-stage statistics row of a simulation report.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WkStageRow {
    pub epoch_level: u32,
    pub dropped_count: u32,
    pub bins: u64,
    pub bits: f64,
    pub attempts: u64,
    pub failures: u64,
    pub empirical_failure_rate: f64,
    pub exact_failure_prob: f64,
}

/// Runs the rewriting-scheme simulation and returns a report handle.
/// Free with `wk_sim_report_free`.
#[no_mangle]
pub unsafe extern "C" fn wk_simulate(
    cells: u64,
    levels: u32,
    epsilon: f64,
    seed: u64,
    trials: u64,
    alpha: f64,
    out: *mut *mut WkSimReport,
) -> WkStatus {
    if out.is_null() {
        return WkStatus::NullPointer;
    }
    let levels = match u16::try_from(levels) {
        Ok(l) => l,
        Err(_) => return WkStatus::InvalidArgument,
    };
    let config = match SimConfig::new(cells as usize, levels, epsilon, seed, trials, alpha) {
        Ok(config) => config,
        Err(err) => return status_of(&err),
    };
    let report = womsim::run_block(&config);
    let handle = Box::new(WkSimReport { inner: report });
    unsafe { *out = Box::into_raw(handle) };
    WkStatus::Ok
}

fn sim_field<T>(
    report: *const WkSimReport,
    out: *mut T,
    extract: impl Fn(&SimReport) -> T,
) -> WkStatus {
    if report.is_null() {
        return WkStatus::NullPointer;
    }
    let value = extract(unsafe { &(*report).inner });
    out_write!(out, value)
}

/// Measured payload, bits per cell per write.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_payload(
    report: *const WkSimReport,
    out: *mut f64,
) -> WkStatus {
    sim_field(report, out, |r| r.payload)
}

/// Payload if every live stage had succeeded; equals the payload formula.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_payload_planned(
    report: *const WkSimReport,
    out: *mut f64,
) -> WkStatus {
    sim_field(report, out, |r| r.payload_planned)
}

/// Measured coding efficiency, bits per level cost times alpha.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_efficiency(
    report: *const WkSimReport,
    out: *mut f64,
) -> WkStatus {
    sim_field(report, out, |r| r.efficiency)
}

/// Bits offered by the live schedule per erase cycle.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_bits_attempted(
    report: *const WkSimReport,
    out: *mut f64,
) -> WkStatus {
    sim_field(report, out, |r| r.bits_attempted)
}

/// Mean bits recorded per trial.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_bits_recorded(
    report: *const WkSimReport,
    out: *mut f64,
) -> WkStatus {
    sim_field(report, out, |r| r.bits_recorded)
}

/// Mean bits lost to encode misses per trial.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_bits_lost(
    report: *const WkSimReport,
    out: *mut f64,
) -> WkStatus {
    sim_field(report, out, |r| r.bits_lost)
}

/// Total encode misses across all trials.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_failures(
    report: *const WkSimReport,
    out: *mut u64,
) -> WkStatus {
    sim_field(report, out, |r| r.failures)
}

#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_trials(
    report: *const WkSimReport,
    out: *mut u64,
) -> WkStatus {
    sim_field(report, out, |r| r.trials)
}

/// Live stages executed per trial.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_stages_run(
    report: *const WkSimReport,
    out: *mut u64,
) -> WkStatus {
    sim_field(report, out, |r| r.stages_run as u64)
}

/// Planned stage slots per erase cycle: `(K-1) * N`.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_stages_planned(
    report: *const WkSimReport,
    out: *mut u64,
) -> WkStatus {
    sim_field(report, out, |r| r.stages_planned as u64)
}

/// Number of per-stage statistics rows.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_stage_count(
    report: *const WkSimReport,
    out: *mut u64,
) -> WkStatus {
    sim_field(report, out, |r| r.per_stage.len() as u64)
}

/// Copies per-stage statistics row `index` into `out`.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_stage(
    report: *const WkSimReport,
    index: u64,
    out: *mut WkStageRow,
) -> WkStatus {
    if report.is_null() {
        return WkStatus::NullPointer;
    }
    let inner = unsafe { &(*report).inner };
    let Some(stage) = inner.per_stage.get(index as usize) else {
        return WkStatus::IndexOutOfRange;
    };
    out_write!(
        out,
        WkStageRow {
            epoch_level: stage.epoch_level as u32,
            dropped_count: stage.dropped_count,
            bins: stage.bins,
            bits: stage.bits,
            attempts: stage.attempts,
            failures: stage.failures,
            empirical_failure_rate: stage.empirical_failure_rate,
            exact_failure_prob: stage.exact_failure_prob,
        }
    )
}

/// Serializes the whole report as JSON. Free the string with
/// `wk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_json(
    report: *const WkSimReport,
    out: *mut *mut c_char,
) -> WkStatus {
    if report.is_null() || out.is_null() {
        return WkStatus::NullPointer;
    }
    let inner = unsafe { &(*report).inner };
    let json = serde_json::to_string(inner).expect("report serializes");
    let c = CString::new(json).expect("JSON has no interior NUL");
    unsafe { *out = c.into_raw() };
    WkStatus::Ok
}

/// Releases a report handle. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wk_sim_report_free(report: *mut WkSimReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Releases a string returned by this library. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wk_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

// ---------------------------------------------------------------------------
// Capacity handle
// ---------------------------------------------------------------------------

/// Opaque capacity solution; read through `wk_capacity_*`.
pub struct WkCapacityResult {
    rates: RateTuple,
    chain: WomChain,
}

/// Maximizes the total achievable rate over monotone level chains.
/// Free the handle with `wk_capacity_free`.
#[no_mangle]
pub unsafe extern "C" fn wk_max_sum_rate(
    levels: u32,
    writes: u32,
    restarts: u32,
    seed: u64,
    out: *mut *mut WkCapacityResult,
) -> WkStatus {
    if out.is_null() {
        return WkStatus::NullPointer;
    }
    match capacity::max_sum_rate(levels, writes, restarts, seed) {
        Ok((rates, chain)) => {
            let handle = Box::new(WkCapacityResult { rates, chain });
            unsafe { *out = Box::into_raw(handle) };
            WkStatus::Ok
        }
        Err(err) => status_of(&err),
    }
}

/// Independent brute-force grid maximum for small instances.
#[no_mangle]
pub unsafe extern "C" fn wk_brute_force_sum_rate(
    levels: u32,
    writes: u32,
    grid_steps: u32,
    out: *mut f64,
) -> WkStatus {
    match capacity::brute_force_sum_rate(levels, writes, grid_steps) {
        Ok(rates) => out_write!(out, rates.sum_rate),
        Err(err) => status_of(&err),
    }
}

#[no_mangle]
pub unsafe extern "C" fn wk_capacity_sum_rate(
    result: *const WkCapacityResult,
    out: *mut f64,
) -> WkStatus {
    if result.is_null() {
        return WkStatus::NullPointer;
    }
    let sum_rate = unsafe { &*result }.rates.sum_rate;
    out_write!(out, sum_rate)
}

#[no_mangle]
pub unsafe extern "C" fn wk_capacity_writes(result: *const WkCapacityResult, out: *mut u64) -> WkStatus {
    if result.is_null() {
        return WkStatus::NullPointer;
    }
    let writes = unsafe { &*result }.chain.writes() as u64;
    out_write!(out, writes)
}

#[no_mangle]
pub unsafe extern "C" fn wk_capacity_levels(result: *const WkCapacityResult, out: *mut u64) -> WkStatus {
    if result.is_null() {
        return WkStatus::NullPointer;
    }
    let levels = unsafe { &*result }.chain.levels() as u64;
    out_write!(out, levels)
}

/// Per-write entropy budget of the solution, in bits.
#[no_mangle]
pub unsafe extern "C" fn wk_capacity_rate(
    result: *const WkCapacityResult,
    write_index: u64,
    out: *mut f64,
) -> WkStatus {
    if result.is_null() {
        return WkStatus::NullPointer;
    }
    let rates = &unsafe { &*result }.rates.rates;
    let Some(&rate) = rates.get(write_index as usize) else {
        return WkStatus::IndexOutOfRange;
    };
    out_write!(out, rate)
}

/// Conditional probability `P(U(write+1) = to | U(write) = from)` of the
/// solution chain.
#[no_mangle]
pub unsafe extern "C" fn wk_capacity_conditional(
    result: *const WkCapacityResult,
    write_index: u64,
    from_level: u64,
    to_level: u64,
    out: *mut f64,
) -> WkStatus {
    if result.is_null() {
        return WkStatus::NullPointer;
    }
    let chain = &unsafe { &*result }.chain;
    let Some(p) = chain
        .conditionals()
        .get(write_index as usize)
        .and_then(|m| m.get(from_level as usize))
        .and_then(|row| row.get(to_level as usize))
    else {
        return WkStatus::IndexOutOfRange;
    };
    out_write!(out, *p)
}

/// Releases a capacity handle. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wk_capacity_free(result: *mut WkCapacityResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}
