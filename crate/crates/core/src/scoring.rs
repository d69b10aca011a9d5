//! Valuation rules that turn coded case material into `[0, 10]` scores.
//!
//! Every index starts from a base score fixed by the kind of material
//! available (qualitative only 1, quantitative only 3, both 5) and earns
//! bonus marks on top, capped at 10. Yes/none indexes map straight to 10/1.
//!
//! Quantitative bonuses come from the deviation of a case's measurement from
//! the index mean, in half standard deviations:
//!
//! | band                         | bonus |
//! |------------------------------|-------|
//! | `v >= mean + sd`             | +5    |
//! | `mean + sd/2 <= v < mean+sd` | +4    |
//! | `mean - sd/2 < v < mean+sd/2`| +3    |
//! | `mean - sd < v <= mean-sd/2` | +2    |
//! | `v <= mean - sd`             | +1    |

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Material, SCORE_MAX};

/// Relative slack applied at band edges so that values printed at an edge
/// land in the band the edge belongs to despite binary rounding of
/// `mean ± k·sd`.
const EDGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("standard deviation is zero; the index only earns its start score")]
    DegenerateIndex,
    #[error("need at least two distinct measurements, found {0}")]
    TooFewValues(usize),
    #[error("material {0:?} cannot be scored this way")]
    WrongMaterial(MaterialKind),
    #[error("no sub-scores to aggregate")]
    EmptyAggregate,
    #[error("refined item count must be zero in the low execution phase")]
    ItemsOnLowExecution,
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error("score plan: {0}")]
    Plan(String),
    #[error("coding sheet: {0}")]
    Sheet(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringStats {
    pub mean: f64,
    pub sd: f64,
}

impl ScoringStats {
    pub fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }

    /// Mean and sample standard deviation (n − 1 denominator).
    pub fn from_values(values: &[f64]) -> Result<Self, ScoringError> {
        if values.len() < 2 {
            return Err(ScoringError::TooFewValues(values.len()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Ok(Self {
            mean,
            sd: (ss / (n - 1.0)).sqrt(),
        })
    }

    pub fn band_edges(&self) -> BandEdges {
        BandEdges {
            upper_full: self.mean + self.sd,
            upper_half: self.mean + 0.5 * self.sd,
            lower_half: self.mean - 0.5 * self.sd,
            lower_full: self.mean - self.sd,
        }
    }
}

/// The four thresholds separating the five bonus bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub upper_full: f64,
    pub upper_half: f64,
    pub lower_half: f64,
    pub lower_full: f64,
}

fn at_or_above(value: f64, edge: f64) -> bool {
    value >= edge - EDGE_TOLERANCE * edge.abs().max(1.0)
}

fn at_or_below(value: f64, edge: f64) -> bool {
    value <= edge + EDGE_TOLERANCE * edge.abs().max(1.0)
}

/// Bonus points 1..=5 for a quantitative measurement.
pub fn bonus_band(value: f64, stats: &ScoringStats) -> Result<u8, ScoringError> {
    if stats.sd <= 0.0 || !stats.sd.is_finite() {
        return Err(ScoringError::DegenerateIndex);
    }
    let e = stats.band_edges();
    let band = if at_or_above(value, e.upper_full) {
        5
    } else if at_or_above(value, e.upper_half) {
        4
    } else if at_or_below(value, e.lower_full) {
        1
    } else if at_or_below(value, e.lower_half) {
        2
    } else {
        3
    };
    Ok(band)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    QualitativeOnly,
    QuantitativeOnly,
    Both,
    Boolean,
}

impl MaterialKind {
    /// Base score before bonuses; yes/none indexes have none.
    pub fn start_score(self) -> Option<f64> {
        match self {
            MaterialKind::QualitativeOnly => Some(1.0),
            MaterialKind::QuantitativeOnly => Some(3.0),
            MaterialKind::Both => Some(5.0),
            MaterialKind::Boolean => None,
        }
    }
}

impl From<Material> for MaterialKind {
    fn from(m: Material) -> Self {
        match m {
            Material::Qualitative => MaterialKind::QualitativeOnly,
            Material::Quantitative => MaterialKind::QuantitativeOnly,
            Material::Mixed => MaterialKind::Both,
            Material::Boolean => MaterialKind::Boolean,
        }
    }
}

fn cap(score: f64) -> f64 {
    score.min(SCORE_MAX)
}

/// Score of one measurement against fixed population statistics.
pub fn score_quantitative_value(value: f64, stats: &ScoringStats, material: MaterialKind) -> Result<f64, ScoringError> {
    let start = match material {
        MaterialKind::QuantitativeOnly | MaterialKind::Both => material.start_score().unwrap(),
        other => return Err(ScoringError::WrongMaterial(other)),
    };
    Ok(cap(start + f64::from(bonus_band(value, stats)?)))
}

/// Scores a whole index column. Statistics come from the measurements that
/// are present; cases without a measurement receive the start score alone.
pub fn score_quantitative_index(values: &[Option<f64>], material: MaterialKind) -> Result<Vec<f64>, ScoringError> {
    let start = match material {
        MaterialKind::QuantitativeOnly | MaterialKind::Both => material.start_score().unwrap(),
        other => return Err(ScoringError::WrongMaterial(other)),
    };
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let distinct: HashSet<u64> = present.iter().map(|v| v.to_bits()).collect();
    if distinct.len() < 2 {
        return Err(ScoringError::TooFewValues(distinct.len()));
    }
    let stats = ScoringStats::from_values(&present)?;
    values
        .iter()
        .map(|v| match v {
            Some(v) => score_quantitative_value(*v, &stats, material),
            None => Ok(start),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clarity {
    Fuzzy,
    Distinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Low,
    High,
}

/// Coding of one qualitative index for one case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualitativeCoding {
    pub clarity: Clarity,
    pub execution: Execution,
    pub refined_items: u32,
}

impl QualitativeCoding {
    pub fn new(clarity: Clarity, execution: Execution, refined_items: u32) -> Result<Self, ScoringError> {
        if execution == Execution::Low && refined_items != 0 {
            return Err(ScoringError::ItemsOnLowExecution);
        }
        Ok(Self {
            clarity,
            execution,
            refined_items,
        })
    }

    pub fn clarity_mark(&self) -> u32 {
        match self.clarity {
            Clarity::Fuzzy => 1,
            Clarity::Distinct => 2,
        }
    }

    /// One mark per started pair of refined items, never below one.
    pub fn execution_mark(&self) -> u32 {
        match self.execution {
            Execution::Low => 1,
            Execution::High => self.refined_items.div_ceil(2).max(1),
        }
    }
}

/// Accepts `clarity/execution[/items]`, e.g. `distinct/high/4` or `fuzzy/low`.
impl FromStr for QualitativeCoding {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScoringError::Parse(s.to_string());
        let parts: Vec<&str> = s.trim().split('/').map(str::trim).collect();
        let clarity = match parts.first().copied() {
            Some("fuzzy") => Clarity::Fuzzy,
            Some("distinct") => Clarity::Distinct,
            _ => return Err(bad()),
        };
        let execution = match parts.get(1).copied() {
            Some("low") => Execution::Low,
            Some("high") => Execution::High,
            _ => return Err(bad()),
        };
        let items = match parts.get(2) {
            Some(n) => n.parse().map_err(|_| bad())?,
            None => 0,
        };
        if parts.len() > 3 {
            return Err(bad());
        }
        QualitativeCoding::new(clarity, execution, items)
    }
}

impl fmt::Display for QualitativeCoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.clarity {
            Clarity::Fuzzy => "fuzzy",
            Clarity::Distinct => "distinct",
        };
        match self.execution {
            Execution::Low => write!(f, "{c}/low"),
            Execution::High => write!(f, "{c}/high/{}", self.refined_items),
        }
    }
}

pub fn score_qualitative_index(coding: &QualitativeCoding, material: MaterialKind) -> Result<f64, ScoringError> {
    let start = match material {
        MaterialKind::QualitativeOnly | MaterialKind::Both => material.start_score().unwrap(),
        other => return Err(ScoringError::WrongMaterial(other)),
    };
    let marks = coding.clarity_mark() + coding.execution_mark();
    Ok(cap(start + f64::from(marks)))
}

pub fn score_boolean_index(present: bool) -> f64 {
    if present {
        10.0
    } else {
        1.0
    }
}

/// Equal-weight mean of secondary index scores.
pub fn aggregate_index(sub_scores: &[f64]) -> Result<f64, ScoringError> {
    if sub_scores.is_empty() {
        return Err(ScoringError::EmptyAggregate);
    }
    Ok(sub_scores.iter().sum::<f64>() / sub_scores.len() as f64)
}

// ---------------------------------------------------------------------------
// Score plans: how a raw coding sheet maps onto index scores.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    /// Numeric measurement scored by deviation bands.
    Quantitative,
    /// `clarity/execution[/items]` coding.
    Qualitative,
    /// `yes` / `none`.
    Boolean,
    /// Already a `[0, 10]` score; copied through.
    Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnPlan {
    pub id: String,
    pub method: ScoreMethod,
    #[serde(default)]
    pub material: Option<MaterialKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPlan {
    pub id: String,
    pub columns: Vec<String>,
}

/// TOML description of a coding sheet. Without `[[index]]` entries every
/// column becomes its own index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePlan {
    #[serde(rename = "column")]
    pub columns: Vec<ColumnPlan>,
    #[serde(rename = "index", default)]
    pub indexes: Vec<IndexPlan>,
}

impl ScorePlan {
    pub fn from_toml_str(text: &str) -> Result<Self, ScoringError> {
        toml::from_str(text).map_err(|e| ScoringError::Plan(e.to_string()))
    }
}

/// A coding sheet: case ids plus raw cells keyed by column id.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingSheet {
    pub cases: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSheet {
    pub cases: Vec<String>,
    pub indexes: Vec<String>,
    /// Row per case.
    pub scores: Vec<Vec<f64>>,
}

impl CodingSheet {
    /// First column holds case ids; the header names the remaining columns.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self, ScoringError> {
        let fail = |e: csv::Error| ScoringError::Sheet(e.to_string());
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(fail)?.clone();
        if header.is_empty() {
            return Err(ScoringError::Sheet("empty header".into()));
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut cases = Vec::new();
        let mut cells = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(fail)?;
            let mut it = rec.iter();
            cases.push(it.next().unwrap_or_default().to_string());
            cells.push(it.map(str::to_string).collect());
        }
        Ok(Self { cases, columns, cells })
    }
}

impl ScoredSheet {
    /// Writes `case,<index>...` in the dataset file layout.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), ScoringError> {
        let fail = |e: csv::Error| ScoringError::Sheet(e.to_string());
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["case".to_string()];
        header.extend(self.indexes.iter().cloned());
        wtr.write_record(&header).map_err(fail)?;
        for (case, row) in self.cases.iter().zip(&self.scores) {
            let mut rec = vec![case.clone()];
            rec.extend(row.iter().map(f64::to_string));
            wtr.write_record(&rec).map_err(fail)?;
        }
        wtr.flush().map_err(|e| ScoringError::Sheet(e.to_string()))
    }
}

fn parse_flag(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "yes" | "y" | "1" | "true" => Some(true),
        "none" | "no" | "n" | "0" | "false" => Some(false),
        _ => None,
    }
}

pub fn apply_plan(sheet: &CodingSheet, plan: &ScorePlan) -> Result<ScoredSheet, ScoringError> {
    let n = sheet.cases.len();
    let mut column_scores: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for col in &plan.columns {
        let j = sheet
            .columns
            .iter()
            .position(|c| *c == col.id)
            .ok_or_else(|| ScoringError::Plan(format!("column `{}` not in sheet", col.id)))?;
        let cells: Vec<&str> = sheet.cells.iter().map(|r| r[j].trim()).collect();
        let cell_err = |i: usize| {
            ScoringError::Plan(format!(
                "case `{}`, column `{}`: cannot read `{}`",
                sheet.cases[i], col.id, cells[i]
            ))
        };
        let scores = match col.method {
            ScoreMethod::Quantitative => {
                let material = col.material.unwrap_or(MaterialKind::QuantitativeOnly);
                let mut values = Vec::with_capacity(n);
                for (i, c) in cells.iter().enumerate() {
                    if c.is_empty() {
                        values.push(None);
                    } else {
                        let v: f64 = c.parse().map_err(|_| cell_err(i))?;
                        if !v.is_finite() {
                            return Err(cell_err(i));
                        }
                        values.push(Some(v));
                    }
                }
                score_quantitative_index(&values, material)?
            }
            ScoreMethod::Qualitative => {
                let material = col.material.unwrap_or(MaterialKind::QualitativeOnly);
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let coding: QualitativeCoding = c.parse().map_err(|_| cell_err(i))?;
                        score_qualitative_index(&coding, material)
                    })
                    .collect::<Result<_, _>>()?
            }
            ScoreMethod::Boolean => cells
                .iter()
                .enumerate()
                .map(|(i, c)| parse_flag(c).map(score_boolean_index).ok_or_else(|| cell_err(i)))
                .collect::<Result<_, _>>()?,
            ScoreMethod::Score => cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| (0.0..=SCORE_MAX).contains(v))
                        .ok_or_else(|| cell_err(i))
                })
                .collect::<Result<_, _>>()?,
        };
        column_scores.insert(col.id.as_str(), scores);
    }

    let indexes: Vec<IndexPlan> = if plan.indexes.is_empty() {
        plan.columns
            .iter()
            .map(|c| IndexPlan {
                id: c.id.clone(),
                columns: vec![c.id.clone()],
            })
            .collect()
    } else {
        plan.indexes.clone()
    };

    let mut scores = vec![Vec::with_capacity(indexes.len()); n];
    for idx in &indexes {
        let cols: Vec<&Vec<f64>> = idx
            .columns
            .iter()
            .map(|c| {
                column_scores
                    .get(c.as_str())
                    .ok_or_else(|| ScoringError::Plan(format!("index `{}` uses unplanned column `{c}`", idx.id)))
            })
            .collect::<Result<_, _>>()?;
        for (i, row) in scores.iter_mut().enumerate() {
            let subs: Vec<f64> = cols.iter().map(|c| c[i]).collect();
            row.push(aggregate_index(&subs)?);
        }
    }

    Ok(ScoredSheet {
        cases: sheet.cases.clone(),
        indexes: indexes.into_iter().map(|i| i.id).collect(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2() -> ScoringStats {
        ScoringStats::new(8.26, 7.02)
    }

    #[test]
    fn table2_bands() {
        let s = table2();
        assert_eq!(bonus_band(15.28, &s).unwrap(), 5);
        assert_eq!(bonus_band(11.77, &s).unwrap(), 4);
        assert_eq!(bonus_band(8.26, &s).unwrap(), 3);
        assert_eq!(bonus_band(4.75, &s).unwrap(), 2);
        assert_eq!(bonus_band(1.24, &s).unwrap(), 1);
        assert_eq!(bonus_band(100.0, &s).unwrap(), 5);
        assert_eq!(bonus_band(-100.0, &s).unwrap(), 1);
    }

    #[test]
    fn mean_is_center_band() {
        for sd in [0.001, 1.0, 42.0] {
            assert_eq!(bonus_band(3.3, &ScoringStats::new(3.3, sd)).unwrap(), 3);
        }
    }

    #[test]
    fn zero_sd_is_degenerate() {
        assert_eq!(
            bonus_band(1.0, &ScoringStats::new(1.0, 0.0)),
            Err(ScoringError::DegenerateIndex)
        );
    }

    #[test]
    fn quantitative_scores() {
        let s = table2();
        let q = MaterialKind::QuantitativeOnly;
        assert_eq!(score_quantitative_value(15.28, &s, q).unwrap(), 8.0);
        assert_eq!(score_quantitative_value(15.28, &s, MaterialKind::Both).unwrap(), 10.0);
        assert_eq!(score_quantitative_value(1.24, &s, q).unwrap(), 4.0);
        assert!(matches!(
            score_quantitative_value(1.0, &s, MaterialKind::QualitativeOnly),
            Err(ScoringError::WrongMaterial(_))
        ));
    }

    #[test]
    fn index_needs_two_distinct_values() {
        let q = MaterialKind::QuantitativeOnly;
        assert_eq!(
            score_quantitative_index(&[Some(2.0), Some(2.0), None], q),
            Err(ScoringError::TooFewValues(1))
        );
        let scores = score_quantitative_index(&[Some(0.0), Some(10.0), None], q).unwrap();
        // mean 5, sd 7.07: both ends sit in the half-sd bands
        assert_eq!(scores, vec![5.0, 7.0, 3.0]);
    }

    #[test]
    fn qualitative_scores() {
        let q = MaterialKind::QualitativeOnly;
        let c = QualitativeCoding::new(Clarity::Fuzzy, Execution::Low, 0).unwrap();
        assert_eq!(score_qualitative_index(&c, q).unwrap(), 3.0);
        let c = QualitativeCoding::new(Clarity::Distinct, Execution::High, 4).unwrap();
        assert_eq!(score_qualitative_index(&c, q).unwrap(), 5.0);
        let c = QualitativeCoding::new(Clarity::Distinct, Execution::High, 20).unwrap();
        assert_eq!(score_qualitative_index(&c, MaterialKind::Both).unwrap(), 10.0);
        let c = QualitativeCoding::new(Clarity::Fuzzy, Execution::High, 0).unwrap();
        assert_eq!(c.execution_mark(), 1);
        let c = QualitativeCoding::new(Clarity::Fuzzy, Execution::High, 3).unwrap();
        assert_eq!(c.execution_mark(), 2);
        assert_eq!(
            QualitativeCoding::new(Clarity::Fuzzy, Execution::Low, 2),
            Err(ScoringError::ItemsOnLowExecution)
        );
    }

    #[test]
    fn coding_parses() {
        let c: QualitativeCoding = "distinct/high/4".parse().unwrap();
        assert_eq!(c.to_string(), "distinct/high/4");
        assert_eq!(c.refined_items, 4);
        let c: QualitativeCoding = "fuzzy/low".parse().unwrap();
        assert_eq!(c.execution, Execution::Low);
        assert!("blurry/low".parse::<QualitativeCoding>().is_err());
        assert!("fuzzy/low/2".parse::<QualitativeCoding>().is_err());
    }

    #[test]
    fn boolean_round_trip() {
        assert_eq!(score_boolean_index(false), 1.0);
        assert_eq!(score_boolean_index(true), 10.0);
        for flag in [true, false] {
            assert_eq!(score_boolean_index(flag) > 5.5, flag);
        }
    }

    #[test]
    fn aggregation() {
        assert_eq!(aggregate_index(&[10.0]).unwrap(), 10.0);
        assert_eq!(aggregate_index(&[1.0, 10.0]).unwrap(), 5.5);
        assert_eq!(aggregate_index(&[3.0, 4.0, 8.0]).unwrap(), 5.0);
        assert_eq!(aggregate_index(&[]), Err(ScoringError::EmptyAggregate));
    }

    #[test]
    fn plan_scores_sheet() {
        let plan = ScorePlan::from_toml_str(
            r#"
            [[column]]
            id = "pcs"
            method = "quantitative"
            [[column]]
            id = "portal"
            method = "boolean"
            [[column]]
            id = "policy"
            method = "qualitative"
            material = "both"
            [[index]]
            id = "terminal"
            columns = ["pcs", "portal"]
            [[index]]
            id = "policy"
            columns = ["policy"]
            "#,
        )
        .unwrap();
        let sheet = CodingSheet {
            cases: vec!["c1".into(), "c2".into(), "c3".into()],
            columns: vec!["pcs".into(), "portal".into(), "policy".into()],
            cells: vec![
                vec!["0".into(), "yes".into(), "distinct/high/4".into()],
                vec!["10".into(), "none".into(), "fuzzy/low".into()],
                vec!["".into(), "yes".into(), "fuzzy/high/1".into()],
            ],
        };
        let out = apply_plan(&sheet, &plan).unwrap();
        assert_eq!(out.indexes, vec!["terminal", "policy"]);
        assert_eq!(out.scores[0], vec![(5.0 + 10.0) / 2.0, 9.0]);
        assert_eq!(out.scores[1], vec![(7.0 + 1.0) / 2.0, 7.0]);
        assert_eq!(out.scores[2], vec![(3.0 + 10.0) / 2.0, 7.0]);
    }
}
