//! C ABI over the `fsqca` engine.
//!
//! Every fallible function returns an [`FsqcaStatus`]; on failure the
//! message is available from [`fsqca_last_error`] on the same thread.
//! Truth tables and solutions are opaque handles released with their
//! `_free` function. Strings returned to the caller are released with
//! [`fsqca_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fsqca::calibration::{calibrate, CalibrationSpec};
use fsqca::error::ExitClass;
use fsqca::fuzzyset::{consistency, coverage};
use fsqca::minimize::solve;
use fsqca::pipeline::{self, Inputs};
use fsqca::scoring::{bonus_band, ScoringStats};
use fsqca::truthtable::build_truth_table;
use fsqca::{
    ConditionDef, ConditionGroup, DirectionalExpectation, Expectation, FuzzyDataset, Literal, Material,
    MembershipVector, OutcomeCode, Solution, SolutionKind, Thresholds, TruthTable,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsqcaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// Input data was rejected (bad file, unknown id, exact 0.5 ...).
    Data = 4,
    /// Engine invariant failed.
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsqcaOutcomeCode {
    Positive = 0,
    Negative = 1,
    Remainder = 2,
    Contradiction = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsqcaKind {
    Complex = 0,
    Parsimonious = 1,
    Intermediate = 2,
}

/// One literal of a solution term.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsqcaLiteral {
    Absent = 0,
    Present = 1,
    DontCare = 2,
}

/// Directional expectation per condition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsqcaExpectation {
    Agnostic = 0,
    Present = 1,
    Absent = 2,
}

/// Opaque truth table handle.
pub struct FsqcaTruthTable(TruthTable);

/// Opaque solution handle.
pub struct FsqcaSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(FsqcaStatus, String);

impl Fail {
    fn new(status: FsqcaStatus, msg: impl Into<String>) -> Self {
        Fail(status, msg.into())
    }
}

impl From<fsqca::Error> for Fail {
    fn from(e: fsqca::Error) -> Self {
        let status = match e.exit_class() {
            ExitClass::Internal => FsqcaStatus::Internal,
            _ => FsqcaStatus::Data,
        };
        Fail(status, e.to_string())
    }
}

fn data<E: Into<fsqca::Error>>(e: E) -> Fail {
    Fail::from(e.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FsqcaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsqcaStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside fsqca");
            FsqcaStatus::Panic
        }
    }
}

fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: caller promises `p` is either null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| Fail::new(FsqcaStatus::NullPointer, format!("{name} is null")))
}

fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::new(FsqcaStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: caller promises `len` readable values at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::new(FsqcaStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: caller promises a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail::new(FsqcaStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NUL removed").into_raw()
}

fn table<'a>(t: *const FsqcaTruthTable) -> Result<&'a TruthTable, Fail> {
    // SAFETY: handle came from `fsqca_truth_table_new` and was not freed.
    unsafe { t.as_ref() }
        .map(|h| &h.0)
        .ok_or_else(|| Fail::new(FsqcaStatus::NullPointer, "table is null"))
}

fn solution<'a>(s: *const FsqcaSolution) -> Result<&'a Solution, Fail> {
    // SAFETY: handle came from `fsqca_solve` and was not freed.
    unsafe { s.as_ref() }
        .map(|h| &h.0)
        .ok_or_else(|| Fail::new(FsqcaStatus::NullPointer, "solution is null"))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next `fsqca_*` call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn fsqca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fsqca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Log-odds calibration of `x` with anchors full-in, crossover, full-out.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_calibrate(
    x: f64,
    full_in: f64,
    crossover: f64,
    full_out: f64,
    out: *mut f64,
) -> FsqcaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = CalibrationSpec::new(full_in, crossover, full_out).map_err(data)?;
        *out = calibrate(x, &spec).map_err(data)?.value();
        Ok(())
    })
}

/// Bonus band 1..=5 of `value` against a population mean and sd.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_bonus_band(value: f64, mean: f64, sd: f64, out: *mut u8) -> FsqcaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = bonus_band(value, &ScoringStats::new(mean, sd)).map_err(data)?;
        Ok(())
    })
}

fn measure(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
    f: fn(&MembershipVector, &MembershipVector) -> Result<f64, fsqca::fuzzyset::MeasureError>,
) -> FsqcaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let x = MembershipVector::new(slice(x, len, "x")?.to_vec());
        let y = MembershipVector::new(slice(y, len, "y")?.to_vec());
        *out = f(&x, &y).map_err(data)?;
        Ok(())
    })
}

/// Consistency of X as sufficient for Y over `len` cases.
///
/// # Safety
/// `x` and `y` must point to `len` values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_consistency(x: *const f64, y: *const f64, len: usize, out: *mut f64) -> FsqcaStatus {
    measure(x, y, len, out, consistency)
}

/// Coverage of Y by X over `len` cases.
///
/// # Safety
/// `x` and `y` must point to `len` values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_coverage(x: *const f64, y: *const f64, len: usize, out: *mut f64) -> FsqcaStatus {
    measure(x, y, len, out, coverage)
}

/// Builds a truth table from a row-major `n_cases x k` membership matrix
/// and an outcome column. Conditions are named `c0..c{k-1}`.
///
/// # Safety
/// `memberships` must hold `n_cases * k` values, `outcome` `n_cases`
/// values, and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_truth_table_new(
    memberships: *const f64,
    n_cases: usize,
    k: usize,
    outcome: *const f64,
    freq_threshold: usize,
    cons_threshold: f64,
    out: *mut *mut FsqcaTruthTable,
) -> FsqcaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if k == 0 || n_cases == 0 {
            return Err(Fail::new(FsqcaStatus::InvalidArgument, "need k > 0 and n_cases > 0"));
        }
        let len = n_cases
            .checked_mul(k)
            .ok_or_else(|| Fail::new(FsqcaStatus::InvalidArgument, "n_cases * k overflows"))?;
        let m = slice(memberships, len, "memberships")?;
        let y = slice(outcome, n_cases, "outcome")?;
        let ids: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        let mut conditions: Vec<ConditionDef> = ids
            .iter()
            .map(|id| ConditionDef::new(id, id, ConditionGroup::Other, Material::Quantitative))
            .collect();
        conditions.push(ConditionDef::new(
            "y",
            "y",
            ConditionGroup::Outcome,
            Material::Quantitative,
        ));
        let rows = m
            .chunks(k)
            .zip(y)
            .map(|(row, &o)| row.iter().copied().chain([o]).collect())
            .collect();
        let d = FuzzyDataset {
            cases: (1..=n_cases).map(|i| format!("case{i}")).collect(),
            conditions,
            memberships: rows,
            nudged: vec![],
        };
        let th = Thresholds::new(freq_threshold, cons_threshold).map_err(data)?;
        let t = build_truth_table(&d, &ids, "y", th).map_err(data)?;
        *out = Box::into_raw(Box::new(FsqcaTruthTable(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from `fsqca_truth_table_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsqca_truth_table_free(t: *mut FsqcaTruthTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of conditions; the table has `1 << k` rows. Returns 0 for null.
///
/// # Safety
/// `t` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fsqca_truth_table_k(t: *const FsqcaTruthTable) -> usize {
    table(t).map_or(0, |t| t.k)
}

/// Reads one row. Condition `c0` is the most significant of the `k`
/// corner bits, so `corner` reads like the pattern `c0 c1 ...`. A row without
/// any membership reports a NaN consistency.
///
/// # Safety
/// `t` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_truth_table_row(
    t: *const FsqcaTruthTable,
    corner: u32,
    n_cases: *mut usize,
    row_consistency: *mut f64,
    code: *mut FsqcaOutcomeCode,
) -> FsqcaStatus {
    guard(|| {
        let t = table(t)?;
        let (n, c, o) = (
            out_ptr(n_cases, "n_cases")?,
            out_ptr(row_consistency, "row_consistency")?,
            out_ptr(code, "code")?,
        );
        let row = t
            .rows
            .get(corner as usize)
            .ok_or_else(|| Fail::new(FsqcaStatus::InvalidArgument, format!("corner {corner} out of range")))?;
        *n = row.n_cases;
        *c = row.row_consistency.unwrap_or(f64::NAN);
        *o = match row.outcome_code {
            OutcomeCode::Positive => FsqcaOutcomeCode::Positive,
            OutcomeCode::Negative => FsqcaOutcomeCode::Negative,
            OutcomeCode::Remainder => FsqcaOutcomeCode::Remainder,
            OutcomeCode::Contradiction => FsqcaOutcomeCode::Contradiction,
        };
        Ok(())
    })
}

/// Minimizes a table. `kind` is an `FsqcaKind` value. `expectations` may
/// be null (all agnostic) or hold one `FsqcaExpectation` value per
/// condition.
///
/// # Safety
/// `t` must be a live handle, `expectations` null or `k` entries long,
/// and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_solve(
    t: *const FsqcaTruthTable,
    kind: i32,
    expectations: *const i32,
    out: *mut *mut FsqcaSolution,
) -> FsqcaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let t = table(t)?;
        let exp = if expectations.is_null() {
            DirectionalExpectation::agnostic(t.k)
        } else {
            // SAFETY: caller promises `k` entries.
            let raw = std::slice::from_raw_parts(expectations, t.k);
            DirectionalExpectation(
                raw.iter()
                    .map(|&e| match e {
                        x if x == FsqcaExpectation::Agnostic as i32 => Ok(Expectation::Agnostic),
                        x if x == FsqcaExpectation::Present as i32 => Ok(Expectation::Present),
                        x if x == FsqcaExpectation::Absent as i32 => Ok(Expectation::Absent),
                        x => Err(Fail::new(FsqcaStatus::InvalidArgument, format!("bad expectation {x}"))),
                    })
                    .collect::<Result<_, _>>()?,
            )
        };
        let kind = match kind {
            x if x == FsqcaKind::Complex as i32 => SolutionKind::Complex,
            x if x == FsqcaKind::Parsimonious as i32 => SolutionKind::Parsimonious,
            x if x == FsqcaKind::Intermediate as i32 => SolutionKind::Intermediate,
            x => return Err(Fail::new(FsqcaStatus::InvalidArgument, format!("bad kind {x}"))),
        };
        let s = solve(t, kind, &exp).map_err(data)?;
        *out = Box::into_raw(Box::new(FsqcaSolution(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from `fsqca_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsqca_solution_free(s: *mut FsqcaSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of terms. Returns 0 for null.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fsqca_solution_term_count(s: *const FsqcaSolution) -> usize {
    solution(s).map_or(0, |s| s.terms.len())
}

/// Literal of `condition` in `term`, and whether it is a core condition.
///
/// # Safety
/// `s` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_solution_literal(
    s: *const FsqcaSolution,
    term: usize,
    condition: usize,
    literal: *mut FsqcaLiteral,
    core: *mut bool,
) -> FsqcaStatus {
    guard(|| {
        let s = solution(s)?;
        let (l, c) = (out_ptr(literal, "literal")?, out_ptr(core, "core")?);
        if term >= s.terms.len() || condition >= s.k() {
            return Err(Fail::new(
                FsqcaStatus::InvalidArgument,
                format!("term {term} / condition {condition} out of range"),
            ));
        }
        *l = match s.terms[term].literal(condition) {
            Literal::Absent => FsqcaLiteral::Absent,
            Literal::Present => FsqcaLiteral::Present,
            Literal::DontCare => FsqcaLiteral::DontCare,
        };
        *c = s.is_core(term, condition);
        Ok(())
    })
}

/// Boolean expression such as `c0*~c2 + c1`. Free with `fsqca_string_free`.
/// Returns null for a null handle.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fsqca_solution_expression(s: *const FsqcaSolution) -> *mut c_char {
    solution(s).map_or(ptr::null_mut(), |s| to_c(s.expression()))
}

/// Runs the configured pipeline. Outputs go to `out_dir`, or the config's
/// own output directory when null. When `bundle_json` is non-null it
/// receives the bundle text, freed with `fsqca_string_free`.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` null or one;
/// `bundle_json` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fsqca_run_pipeline(
    config_path: *const c_char,
    out_dir: *const c_char,
    bundle_json: *mut *mut c_char,
) -> FsqcaStatus {
    guard(|| {
        let config = string(config_path, "config_path")?;
        let inputs = Inputs::load(config)?;
        let dir = if out_dir.is_null() {
            inputs.out_dir()
        } else {
            string(out_dir, "out_dir")?.into()
        };
        let output = pipeline::run_pipeline(&inputs)?;
        pipeline::write_outputs(&output, &dir)?;
        if let Some(b) = bundle_json.as_mut() {
            *b = to_c(output.bundle_json);
        }
        Ok(())
    })
}
