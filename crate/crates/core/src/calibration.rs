//! Direct calibration of scores into fuzzy set memberships.
//!
//! Three anchors define the transform: full membership, the crossover and
//! full non-membership. The distance to the crossover is scaled so that the
//! full-membership anchor lands on log-odds `+3` and the non-membership
//! anchor on `-3`, then passed through the logistic function.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ConditionDef, RawDataset, Schema};
use crate::fuzzyset::MembershipVector;

/// Log-odds assigned to the full-membership anchor.
pub const ANCHOR_LOG_ODDS: f64 = 3.0;

/// Amount subtracted from an exact 0.5 membership when nudging is enabled.
pub const HALF_NUDGE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("anchors must satisfy full_in > crossover > full_out, got ({full_in}, {crossover}, {full_out})")]
    BadAnchors {
        full_in: f64,
        crossover: f64,
        full_out: f64,
    },
    #[error("score {0} is not finite")]
    NonFinite(f64),
    #[error("no calibration anchors for condition `{0}`")]
    MissingSpec(String),
    #[error("calibration anchors given for unknown condition `{0}`")]
    UnknownCondition(String),
    #[error("cannot derive default anchors for `{0}`: percentiles coincide")]
    DegenerateDefault(String),
    #[error(
        "membership exactly 0.5 at {}; adjust anchors or enable nudging",
        list_cells(.0)
    )]
    ExactHalf(Vec<(String, String)>),
    #[error("membership file: {0}")]
    Format(String),
}

fn list_cells(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(case, cond)| format!("case {case}/condition {cond}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Degree of membership in a fuzzy set, always within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Membership(f64);

impl Membership {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSpec {
    pub full_in: f64,
    pub crossover: f64,
    pub full_out: f64,
}

impl CalibrationSpec {
    pub fn new(full_in: f64, crossover: f64, full_out: f64) -> Result<Self, CalibrationError> {
        let spec = Self {
            full_in,
            crossover,
            full_out,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), CalibrationError> {
        let finite = self.full_in.is_finite() && self.crossover.is_finite() && self.full_out.is_finite();
        if finite && self.full_in > self.crossover && self.crossover > self.full_out {
            Ok(())
        } else {
            Err(CalibrationError::BadAnchors {
                full_in: self.full_in,
                crossover: self.crossover,
                full_out: self.full_out,
            })
        }
    }

    /// Default anchors: 95th percentile, median and 5th percentile.
    pub fn from_percentiles(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self::new(
            percentile(&sorted, 0.95),
            percentile(&sorted, 0.50),
            percentile(&sorted, 0.05),
        )
        .ok()
    }

    pub fn log_odds(&self, x: f64) -> f64 {
        let d = x - self.crossover;
        if d >= 0.0 {
            ANCHOR_LOG_ODDS * d / (self.full_in - self.crossover)
        } else {
            ANCHOR_LOG_ODDS * d / (self.crossover - self.full_out)
        }
    }
}

/// Linear interpolation between closest ranks of an ascending slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn calibrate(x: f64, spec: &CalibrationSpec) -> Result<Membership, CalibrationError> {
    spec.check()?;
    if !x.is_finite() {
        return Err(CalibrationError::NonFinite(x));
    }
    let lo = spec.log_odds(x);
    Ok(Membership(1.0 / (1.0 + (-lo).exp())))
}

/// Where a condition's anchors came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSource {
    Explicit,
    DefaultPercentiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSpec {
    pub condition: String,
    #[serde(flatten)]
    pub spec: CalibrationSpec,
    pub source: SpecSource,
}

/// Pairs every dataset condition with anchors, filling gaps with the
/// percentile defaults.
pub fn resolve_specs(
    d: &RawDataset,
    explicit: &BTreeMap<String, CalibrationSpec>,
) -> Result<Vec<ResolvedSpec>, CalibrationError> {
    if let Some(unknown) = explicit.keys().find(|k| d.condition_index(k).is_none()) {
        return Err(CalibrationError::UnknownCondition(unknown.clone()));
    }
    d.conditions
        .iter()
        .enumerate()
        .map(|(j, c)| match explicit.get(&c.id) {
            Some(spec) => {
                spec.check()?;
                Ok(ResolvedSpec {
                    condition: c.id.clone(),
                    spec: *spec,
                    source: SpecSource::Explicit,
                })
            }
            None => CalibrationSpec::from_percentiles(&d.column(j))
                .map(|spec| ResolvedSpec {
                    condition: c.id.clone(),
                    spec,
                    source: SpecSource::DefaultPercentiles,
                })
                .ok_or_else(|| CalibrationError::DegenerateDefault(c.id.clone())),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Move exact 0.5 memberships down by [`HALF_NUDGE`] instead of failing.
    pub nudge_half: bool,
}

/// Cases × conditions matrix of memberships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyDataset {
    pub cases: Vec<String>,
    pub conditions: Vec<ConditionDef>,
    /// Row per case.
    pub memberships: Vec<Vec<f64>>,
    /// Cells moved off 0.5, as (case, condition).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nudged: Vec<(String, String)>,
}

impl FuzzyDataset {
    pub fn n_cases(&self) -> usize {
        self.cases.len()
    }

    pub fn condition_index(&self, id: &str) -> Option<usize> {
        self.conditions.iter().position(|c| c.id == id)
    }

    pub fn column(&self, index: usize) -> MembershipVector {
        MembershipVector::new(self.memberships.iter().map(|r| r[index]).collect())
    }

    pub fn column_by_id(&self, id: &str) -> Option<MembershipVector> {
        self.condition_index(id).map(|j| self.column(j))
    }

    /// Memberships of one case restricted to `indices`, in that order.
    pub fn case_slice(&self, case: usize, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&j| self.memberships[case][j]).collect()
    }

    /// Writes the matrix as csv with a `case` column followed by condition ids.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CalibrationError> {
        let fail = |e: csv::Error| CalibrationError::Format(e.to_string());
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["case".to_string()];
        header.extend(self.conditions.iter().map(|c| c.id.clone()));
        wtr.write_record(&header).map_err(fail)?;
        for (case, row) in self.cases.iter().zip(&self.memberships) {
            let mut rec = vec![case.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec).map_err(fail)?;
        }
        wtr.flush().map_err(|e| CalibrationError::Format(e.to_string()))
    }

    /// Reads a membership csv; condition metadata comes from `schema`.
    pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Self, CalibrationError> {
        let fail = |e: csv::Error| CalibrationError::Format(e.to_string());
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(fail)?.clone();
        let conditions = header
            .iter()
            .skip(1)
            .map(|id| {
                schema
                    .get(id)
                    .cloned()
                    .ok_or_else(|| CalibrationError::UnknownCondition(id.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut cases = Vec::new();
        let mut memberships = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(fail)?;
            cases.push(rec[0].to_string());
            let row = rec
                .iter()
                .skip(1)
                .zip(&conditions)
                .map(|(cell, c)| {
                    cell.parse::<f64>()
                        .ok()
                        .filter(|v| (0.0..=1.0).contains(v))
                        .ok_or_else(|| {
                            CalibrationError::Format(format!(
                                "row {}, column `{}`: `{cell}` is not a membership",
                                i + 2,
                                c.id
                            ))
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            memberships.push(row);
        }
        Ok(Self {
            cases,
            conditions,
            memberships,
            nudged: Vec::new(),
        })
    }
}

/// Calibrates every cell. `specs` must cover every condition of `d`.
pub fn calibrate_dataset(
    d: &RawDataset,
    specs: &[ResolvedSpec],
    options: CalibrationOptions,
) -> Result<FuzzyDataset, CalibrationError> {
    let by_id: BTreeMap<&str, &CalibrationSpec> = specs.iter().map(|r| (r.condition.as_str(), &r.spec)).collect();
    let column_specs = d
        .conditions
        .iter()
        .map(|c| {
            by_id
                .get(c.id.as_str())
                .copied()
                .ok_or_else(|| CalibrationError::MissingSpec(c.id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut halves = Vec::new();
    let mut memberships = Vec::with_capacity(d.n_cases());
    for (case, row) in d.cases.iter().zip(&d.values) {
        let mut out = Vec::with_capacity(row.len());
        for ((x, spec), def) in row.iter().zip(&column_specs).zip(&d.conditions) {
            let mut m = calibrate(*x, spec)?.value();
            if m == 0.5 {
                halves.push((case.clone(), def.id.clone()));
                if options.nudge_half {
                    m -= HALF_NUDGE;
                }
            }
            out.push(m);
        }
        memberships.push(out);
    }
    if !halves.is_empty() && !options.nudge_half {
        return Err(CalibrationError::ExactHalf(halves));
    }
    Ok(FuzzyDataset {
        cases: d.cases.clone(),
        conditions: d.conditions.clone(),
        memberships,
        nudged: halves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ConditionGroup, Material};

    fn logistic_by_hand(log_odds: f64) -> f64 {
        // e^3 = 20.085536923187668
        1.0 / (1.0 + (-log_odds).exp())
    }

    #[test]
    fn anchors_map_to_fixed_points() {
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        assert_eq!(calibrate(5.0, &spec).unwrap().value(), 0.5);
        let hi = calibrate(8.0, &spec).unwrap().value();
        let lo = calibrate(2.0, &spec).unwrap().value();
        assert!((hi - 0.952_574_126_822_433_4).abs() < 1e-12);
        assert!((lo - 0.047_425_873_177_566_78).abs() < 1e-12);
        assert!((hi - logistic_by_hand(3.0)).abs() < 1e-15);
    }

    #[test]
    fn approaches_one() {
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        let mut prev = 0.0;
        for x in [9.0, 20.0, 100.0, 1e3] {
            let m = calibrate(x, &spec).unwrap().value();
            assert!(m >= prev && m <= 1.0);
            prev = m;
        }
        assert!(prev > 1.0 - 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CalibrationSpec::new(5.0, 5.0, 2.0).is_err());
        assert!(CalibrationSpec::new(2.0, 5.0, 8.0).is_err());
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        assert!(matches!(
            calibrate(f64::NAN, &spec),
            Err(CalibrationError::NonFinite(_))
        ));
    }

    fn dataset(values: Vec<Vec<f64>>) -> RawDataset {
        let conds = vec![
            ConditionDef::new("a", "A", ConditionGroup::Other, Material::Quantitative),
            ConditionDef::new("y", "Y", ConditionGroup::Outcome, Material::Mixed),
        ];
        let cases = (0..values.len()).map(|i| format!("c{i}")).collect();
        RawDataset::new(cases, conds, values).unwrap()
    }

    fn explicit(spec: CalibrationSpec) -> BTreeMap<String, CalibrationSpec> {
        [("a".to_string(), spec), ("y".to_string(), spec)].into()
    }

    #[test]
    fn crossover_matrix_is_flagged() {
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        let d = dataset(vec![vec![5.0, 5.0], vec![5.0, 5.0]]);
        let specs = resolve_specs(&d, &explicit(spec)).unwrap();
        match calibrate_dataset(&d, &specs, CalibrationOptions::default()) {
            Err(CalibrationError::ExactHalf(cells)) => assert_eq!(cells.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
        let f = calibrate_dataset(&d, &specs, CalibrationOptions { nudge_half: true }).unwrap();
        assert_eq!(f.nudged.len(), 4);
        assert!(f.memberships.iter().flatten().all(|&m| m == 0.5 - HALF_NUDGE));
    }

    #[test]
    fn column_spec_applies() {
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        let d = dataset(vec![vec![8.0, 1.0], vec![3.0, 9.0]]);
        let specs = resolve_specs(&d, &explicit(spec)).unwrap();
        let f = calibrate_dataset(&d, &specs, CalibrationOptions::default()).unwrap();
        assert!((f.memberships[0][0] - logistic_by_hand(3.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_dataset() {
        let d = dataset(vec![]);
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        let specs = resolve_specs(&d, &explicit(spec)).unwrap();
        let f = calibrate_dataset(&d, &specs, CalibrationOptions::default()).unwrap();
        assert_eq!(f.n_cases(), 0);
    }

    #[test]
    fn missing_and_unknown_specs() {
        let d = dataset(vec![vec![1.0, 2.0]]);
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        let only_a = vec![ResolvedSpec {
            condition: "a".into(),
            spec,
            source: SpecSource::Explicit,
        }];
        assert_eq!(
            calibrate_dataset(&d, &only_a, CalibrationOptions::default()).unwrap_err(),
            CalibrationError::MissingSpec("y".into())
        );
        let mut bad = explicit(spec);
        bad.insert("zz".into(), spec);
        assert_eq!(
            resolve_specs(&d, &bad).unwrap_err(),
            CalibrationError::UnknownCondition("zz".into())
        );
    }

    #[test]
    fn percentile_defaults() {
        let values: Vec<f64> = (0..=100).map(f64::from).collect();
        let spec = CalibrationSpec::from_percentiles(&values).unwrap();
        assert_eq!((spec.full_in, spec.crossover, spec.full_out), (95.0, 50.0, 5.0));
        assert!(CalibrationSpec::from_percentiles(&[3.0, 3.0, 3.0]).is_none());

        let d = dataset(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![9.0, 8.0]]);
        let specs = resolve_specs(&d, &BTreeMap::new()).unwrap();
        assert!(specs.iter().all(|s| s.source == SpecSource::DefaultPercentiles));
        assert_eq!(specs[0].spec.crossover, 3.0);
    }

    #[test]
    fn membership_csv_round_trip() {
        let spec = CalibrationSpec::new(8.0, 5.0, 2.0).unwrap();
        let d = dataset(vec![vec![8.0, 1.0], vec![3.0, 9.0]]);
        let specs = resolve_specs(&d, &explicit(spec)).unwrap();
        let f = calibrate_dataset(&d, &specs, CalibrationOptions::default()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = FuzzyDataset::read_csv(buf.as_slice(), &d.schema()).unwrap();
        assert_eq!(back, f);
    }
}
