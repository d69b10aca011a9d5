//! Truth tables: cases sorted into the `2^k` corners of the property space.
//!
//! A case belongs to the one corner in which its membership exceeds 0.5.
//! Each row then gets a consistency score against the outcome (computed over
//! all cases, not just the members) and one of four codes.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::FuzzyDataset;
use crate::fuzzyset::{self, Implicant, MeasureError, MembershipVector, MAX_CONDITIONS};

#[derive(Debug, Error, PartialEq)]
pub enum TruthTableError {
    #[error("membership exactly 0.5 in condition {index} (`{condition}`) for case `{case}`")]
    ExactHalf {
        case: String,
        condition: String,
        index: usize,
    },
    #[error("dataset has no cases")]
    Empty,
    #[error("no conditions selected")]
    NoConditions,
    #[error("{0} conditions exceeds the limit of {MAX_CONDITIONS}")]
    TooManyConditions(usize),
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
    #[error("outcome `{0}` is also listed as a condition")]
    OutcomeAsCondition(String),
    #[error("condition `{0}` listed twice")]
    DuplicateCondition(String),
    #[error("invalid thresholds: {0}")]
    BadThresholds(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("truth table csv: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeCode {
    Positive,
    Negative,
    Contradiction,
    Remainder,
}

impl OutcomeCode {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeCode::Positive => "1",
            OutcomeCode::Negative => "0",
            OutcomeCode::Contradiction => "C",
            OutcomeCode::Remainder => "R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Rows with fewer member cases are remainders.
    pub freq_threshold: usize,
    /// Minimum row consistency for a positive code.
    pub cons_threshold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            freq_threshold: 1,
            cons_threshold: 0.8,
        }
    }
}

impl Thresholds {
    pub fn new(freq_threshold: usize, cons_threshold: f64) -> Result<Self, TruthTableError> {
        let t = Self {
            freq_threshold,
            cons_threshold,
        };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), TruthTableError> {
        if self.freq_threshold < 1 {
            return Err(TruthTableError::BadThresholds(
                "frequency threshold must be at least 1".into(),
            ));
        }
        if !(self.cons_threshold > 0.0 && self.cons_threshold <= 1.0) {
            return Err(TruthTableError::BadThresholds(format!(
                "consistency threshold {} outside (0, 1]",
                self.cons_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTableRow {
    pub corner: u32,
    pub n_cases: usize,
    /// `None` when no case has any membership in the corner.
    pub row_consistency: Option<f64>,
    pub outcome_code: OutcomeCode,
    /// Ids of member cases (row membership > 0.5), in dataset order.
    pub cases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub conditions: Vec<String>,
    pub outcome: String,
    pub k: usize,
    pub rows: Vec<TruthTableRow>,
    pub freq_threshold: usize,
    pub cons_threshold: f64,
}

/// A corner whose member cases disagree on the outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub corner: u32,
    pub cases: Vec<String>,
}

/// Corner a case falls into and its membership in that corner.
pub fn assign_corner(memberships: &[f64]) -> Result<(u32, f64), usize> {
    let k = memberships.len();
    let mut corner = 0u32;
    for (i, &m) in memberships.iter().enumerate() {
        if m == 0.5 {
            return Err(i);
        }
        if m > 0.5 {
            corner |= 1 << (k - 1 - i);
        }
    }
    let m = fuzzyset::term_membership(memberships, &Implicant::from_corner(k, corner))
        .expect("dimension matches by construction");
    Ok((corner, m))
}

fn resolve_columns(
    d: &FuzzyDataset,
    conditions: &[String],
    outcome: &str,
) -> Result<(Vec<usize>, usize), TruthTableError> {
    if conditions.is_empty() {
        return Err(TruthTableError::NoConditions);
    }
    if conditions.len() > MAX_CONDITIONS {
        return Err(TruthTableError::TooManyConditions(conditions.len()));
    }
    let y = d
        .condition_index(outcome)
        .ok_or_else(|| TruthTableError::UnknownCondition(outcome.to_string()))?;
    let mut idx = Vec::with_capacity(conditions.len());
    for c in conditions {
        if c == outcome {
            return Err(TruthTableError::OutcomeAsCondition(c.clone()));
        }
        let j = d
            .condition_index(c)
            .ok_or_else(|| TruthTableError::UnknownCondition(c.clone()))?;
        if idx.contains(&j) {
            return Err(TruthTableError::DuplicateCondition(c.clone()));
        }
        idx.push(j);
    }
    Ok((idx, y))
}

pub fn build_truth_table(
    d: &FuzzyDataset,
    conditions: &[String],
    outcome: &str,
    thresholds: Thresholds,
) -> Result<TruthTable, TruthTableError> {
    thresholds.check()?;
    let (idx, y_idx) = resolve_columns(d, conditions, outcome)?;
    if d.n_cases() == 0 {
        return Err(TruthTableError::Empty);
    }
    let k = idx.len();
    let n_rows = 1usize << k;

    let case_rows: Vec<Vec<f64>> = (0..d.n_cases()).map(|c| d.case_slice(c, &idx)).collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
    for (c, m) in case_rows.iter().enumerate() {
        let (corner, _) = assign_corner(m).map_err(|i| TruthTableError::ExactHalf {
            case: d.cases[c].clone(),
            condition: conditions[i].clone(),
            index: i,
        })?;
        members[corner as usize].push(c);
    }

    let y = d.column(y_idx);
    let mut rows = Vec::with_capacity(n_rows);
    for (corner, member_cases) in members.into_iter().enumerate() {
        let corner = corner as u32;
        let term = Implicant::from_corner(k, corner);
        let x = MembershipVector::new(
            case_rows
                .iter()
                .map(|m| fuzzyset::term_membership(m, &term))
                .collect::<Result<_, _>>()?,
        );
        let row_consistency = match fuzzyset::consistency(&x, &y) {
            Ok(v) => Some(v),
            Err(MeasureError::ZeroSum(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let n_cases = member_cases.len();
        let outcome_code = if n_cases < thresholds.freq_threshold {
            OutcomeCode::Remainder
        } else if is_contradictory(&member_cases, y.values()) {
            OutcomeCode::Contradiction
        } else if row_consistency.is_some_and(|c| c >= thresholds.cons_threshold) {
            OutcomeCode::Positive
        } else {
            OutcomeCode::Negative
        };
        rows.push(TruthTableRow {
            corner,
            n_cases,
            row_consistency,
            outcome_code,
            cases: member_cases.iter().map(|&c| d.cases[c].clone()).collect(),
        });
    }

    Ok(TruthTable {
        conditions: conditions.to_vec(),
        outcome: outcome.to_string(),
        k,
        rows,
        freq_threshold: thresholds.freq_threshold,
        cons_threshold: thresholds.cons_threshold,
    })
}

fn is_contradictory(member_cases: &[usize], y: &[f64]) -> bool {
    let high = member_cases.iter().any(|&c| y[c] > 0.5);
    let low = member_cases.iter().any(|&c| y[c] <= 0.5);
    high && low
}

/// Rows whose member cases split on the outcome, with the cases involved.
/// Remainder rows are never reported.
pub fn detect_contradictions(
    t: &TruthTable,
    d: &FuzzyDataset,
    outcome: &str,
) -> Result<Vec<Contradiction>, TruthTableError> {
    let y_idx = d
        .condition_index(outcome)
        .ok_or_else(|| TruthTableError::UnknownCondition(outcome.to_string()))?;
    let y = d.column(y_idx);
    let mut out = Vec::new();
    for row in &t.rows {
        if row.n_cases < t.freq_threshold {
            continue;
        }
        let idx: Vec<usize> = row
            .cases
            .iter()
            .map(|id| {
                d.cases
                    .iter()
                    .position(|c| c == id)
                    .ok_or_else(|| TruthTableError::UnknownCondition(id.clone()))
            })
            .collect::<Result<_, _>>()?;
        if is_contradictory(&idx, y.values()) {
            out.push(Contradiction {
                corner: row.corner,
                cases: row.cases.clone(),
            });
        }
    }
    Ok(out)
}

impl TruthTable {
    fn corners_with(&self, code: OutcomeCode) -> Vec<u32> {
        self.rows
            .iter()
            .filter(|r| r.outcome_code == code)
            .map(|r| r.corner)
            .collect()
    }

    pub fn positive(&self) -> Vec<u32> {
        self.corners_with(OutcomeCode::Positive)
    }

    pub fn negative(&self) -> Vec<u32> {
        self.corners_with(OutcomeCode::Negative)
    }

    pub fn remainders(&self) -> Vec<u32> {
        self.corners_with(OutcomeCode::Remainder)
    }

    pub fn contradictions(&self) -> Vec<u32> {
        self.corners_with(OutcomeCode::Contradiction)
    }

    pub fn row(&self, corner: u32) -> &TruthTableRow {
        &self.rows[corner as usize]
    }

    pub fn corner_bits(&self, corner: u32) -> String {
        Implicant::from_corner(self.k, corner).to_string()
    }

    /// Writes `run,corner,bits,n_cases,consistency,code` rows. The
    /// condition order behind `bits` is the table's `conditions` list.
    pub fn write_csv<W: Write>(
        &self,
        run: &str,
        wtr: &mut csv::Writer<W>,
        header: bool,
    ) -> Result<(), TruthTableError> {
        let fail = |e: csv::Error| TruthTableError::Format(e.to_string());
        if header {
            wtr.write_record(["run", "corner", "bits", "n_cases", "consistency", "code"])
                .map_err(fail)?;
        }
        for r in &self.rows {
            wtr.write_record([
                run.to_string(),
                r.corner.to_string(),
                self.corner_bits(r.corner),
                r.n_cases.to_string(),
                r.row_consistency.map(|c| c.to_string()).unwrap_or_default(),
                r.outcome_code.as_str().to_string(),
            ])
            .map_err(fail)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ConditionDef, ConditionGroup, Material};

    fn fuzzy(rows: Vec<Vec<f64>>, k: usize) -> FuzzyDataset {
        let mut conditions: Vec<ConditionDef> = (0..k)
            .map(|i| ConditionDef::new(format!("c{i}"), format!("C{i}"), ConditionGroup::Other, Material::Mixed))
            .collect();
        conditions.push(ConditionDef::new("y", "Y", ConditionGroup::Outcome, Material::Mixed));
        FuzzyDataset {
            cases: (0..rows.len()).map(|i| format!("case{i}")).collect(),
            conditions,
            memberships: rows,
            nudged: vec![],
        }
    }

    fn conds(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn corners_by_hand() {
        assert_eq!(assign_corner(&[0.8, 0.3]), Ok((0b10, 0.7)));
        assert_eq!(assign_corner(&[0.9, 0.9, 0.9]), Ok((0b111, 0.9)));
        assert_eq!(assign_corner(&[0.5, 0.8]), Err(0));
    }

    #[test]
    fn exact_half_names_condition() {
        let d = fuzzy(vec![vec![0.9, 0.5, 0.9]], 2);
        let err = build_truth_table(&d, &conds(2), "y", Thresholds::default()).unwrap_err();
        assert_eq!(
            err,
            TruthTableError::ExactHalf {
                case: "case0".into(),
                condition: "c1".into(),
                index: 1
            }
        );
    }

    #[test]
    fn four_case_fixture() {
        let d = fuzzy(
            vec![
                vec![0.9, 0.8, 0.95],
                vec![0.7, 0.9, 0.92],
                vec![0.8, 0.8, 0.91],
                vec![0.95, 0.6, 0.97],
            ],
            2,
        );
        let t = build_truth_table(&d, &conds(2), "y", Thresholds::new(1, 0.8).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.positive(), vec![0b11]);
        assert_eq!(t.remainders(), vec![0b00, 0b01, 0b10]);
        assert_eq!(t.row(0b11).n_cases, 4);
        assert_eq!(t.row(0b11).row_consistency, Some(1.0));
        assert!(t.rows.windows(2).all(|w| w[0].corner < w[1].corner));

        let t = build_truth_table(&d, &conds(2), "y", Thresholds::new(5, 0.8).unwrap()).unwrap();
        assert!(t.rows.iter().all(|r| r.outcome_code == OutcomeCode::Remainder));
    }

    #[test]
    fn perfect_threshold_marks_imperfect_rows_negative() {
        let d = fuzzy(vec![vec![0.9, 0.8, 0.75], vec![0.7, 0.9, 0.92]], 2);
        let t = build_truth_table(&d, &conds(2), "y", Thresholds::new(1, 1.0).unwrap()).unwrap();
        assert!(t.row(0b11).row_consistency.unwrap() < 1.0);
        assert_eq!(t.row(0b11).outcome_code, OutcomeCode::Negative);
    }

    #[test]
    fn contradictions_are_coded_and_listed() {
        let d = fuzzy(vec![vec![0.9, 0.8, 0.9], vec![0.7, 0.9, 0.2]], 2);
        let t = build_truth_table(&d, &conds(2), "y", Thresholds::default()).unwrap();
        assert_eq!(t.row(0b11).outcome_code, OutcomeCode::Contradiction);
        let c = detect_contradictions(&t, &d, "y").unwrap();
        assert_eq!(
            c,
            vec![Contradiction {
                corner: 0b11,
                cases: vec!["case0".into(), "case1".into()]
            }]
        );

        let d = fuzzy(vec![vec![0.9, 0.8, 0.9], vec![0.7, 0.9, 0.8]], 2);
        let t = build_truth_table(&d, &conds(2), "y", Thresholds::default()).unwrap();
        assert!(detect_contradictions(&t, &d, "y").unwrap().is_empty());
        assert!(t.contradictions().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = fuzzy(vec![vec![0.9, 0.8, 0.9]], 2);
        assert!(Thresholds::new(0, 0.8).is_err());
        assert!(Thresholds::new(1, 0.0).is_err());
        assert!(Thresholds::new(1, 1.1).is_err());
        assert_eq!(
            build_truth_table(&d, &["c0".into(), "y".into()], "y", Thresholds::default()),
            Err(TruthTableError::OutcomeAsCondition("y".into()))
        );
        assert_eq!(
            build_truth_table(&d, &["zz".into()], "y", Thresholds::default()),
            Err(TruthTableError::UnknownCondition("zz".into()))
        );
        let empty = fuzzy(vec![], 2);
        assert_eq!(
            build_truth_table(&empty, &conds(2), "y", Thresholds::default()),
            Err(TruthTableError::Empty)
        );
        let too_many: Vec<String> = (0..17).map(|i| format!("x{i}")).collect();
        assert_eq!(
            build_truth_table(&d, &too_many, "y", Thresholds::default()),
            Err(TruthTableError::TooManyConditions(17))
        );
    }

    #[test]
    fn csv_export() {
        let d = fuzzy(vec![vec![0.9, 0.2, 0.9]], 2);
        let t = build_truth_table(&d, &conds(2), "y", Thresholds::default()).unwrap();
        let mut wtr = csv::Writer::from_writer(Vec::new());
        t.write_csv("r", &mut wtr, true).unwrap();
        let text = String::from_utf8(wtr.into_inner().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "run,corner,bits,n_cases,consistency,code");
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("r,2,10,1,1,1"), "{}", lines[3]);
    }
}
