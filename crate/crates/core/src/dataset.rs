//! Case-level raw data and the condition schema that describes it.
//!
//! A dataset is a comma-separated file with one header row. The first column
//! holds case ids, every other column is a condition named by its schema id.
//! The schema is a TOML sidecar:
//!
//! ```toml
//! [[condition]]
//! id = "terminal"
//! label = "Terminal"
//! group = "information_architecture"
//! material = "quantitative"
//! provenance = "device counts from community reports"
//! ```

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{Diagnostic, Location};

/// Upper end of the valuation field for scored indexes.
pub const SCORE_MAX: f64 = 10.0;
pub const SCORE_MIN: f64 = 0.0;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema parse error: {0}")]
    SchemaParse(String),
    #[error("duplicate condition id `{0}` in schema")]
    DuplicateCondition(String),
    #[error("more than one outcome condition in schema: {0:?}")]
    MultipleOutcomes(Vec<String>),
    #[error("header column `{0}` is not defined in the schema")]
    UnknownColumn(String),
    #[error("schema condition `{0}` has no column in the dataset")]
    MissingColumn(String),
    #[error("header names column `{0}` twice")]
    DuplicateColumn(String),
    #[error("duplicate case id `{0}`")]
    DuplicateCase(String),
    #[error("row {row}, column `{column}`: expected a finite number, found `{value}`")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("row {row} has {found} cells, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionGroup {
    InformationArchitecture,
    BusinessModel,
    Outcome,
    Other,
}

impl ConditionGroup {
    pub fn display_name(self) -> &'static str {
        match self {
            ConditionGroup::InformationArchitecture => "Information Architectures",
            ConditionGroup::BusinessModel => "Business Models",
            ConditionGroup::Outcome => "Outcome",
            ConditionGroup::Other => "Other Conditions",
        }
    }
}

/// Kind of source material an index was coded from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    Quantitative,
    Qualitative,
    Mixed,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionDef {
    pub id: String,
    pub label: String,
    pub group: ConditionGroup,
    pub material: Material,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub provenance: String,
}

impl ConditionDef {
    pub fn new(id: impl Into<String>, label: impl Into<String>, group: ConditionGroup, material: Material) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            group,
            material,
            provenance: String::new(),
        }
    }
}

/// Ordered list of condition definitions, parsed from the schema sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    #[serde(rename = "condition", default)]
    pub conditions: Vec<ConditionDef>,
}

impl Schema {
    pub fn new(conditions: Vec<ConditionDef>) -> Result<Self, DatasetError> {
        let schema = Self { conditions };
        schema.check()?;
        Ok(schema)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DatasetError> {
        let schema: Schema = toml::from_str(text).map_err(|e| DatasetError::SchemaParse(e.to_string()))?;
        schema.check()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes to toml")
    }

    pub fn get(&self, id: &str) -> Option<&ConditionDef> {
        self.conditions.iter().find(|c| c.id == id)
    }

    fn check(&self) -> Result<(), DatasetError> {
        let mut seen = HashSet::new();
        for c in &self.conditions {
            if !seen.insert(c.id.as_str()) {
                return Err(DatasetError::DuplicateCondition(c.id.clone()));
            }
        }
        let outcomes: Vec<String> = self
            .conditions
            .iter()
            .filter(|c| c.group == ConditionGroup::Outcome)
            .map(|c| c.id.clone())
            .collect();
        if outcomes.len() > 1 {
            return Err(DatasetError::MultipleOutcomes(outcomes));
        }
        Ok(())
    }
}

/// Cases × conditions matrix of raw scores. Rows follow case order, columns
/// follow condition order, both as read from the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDataset {
    pub cases: Vec<String>,
    pub conditions: Vec<ConditionDef>,
    pub values: Vec<Vec<f64>>,
}

impl RawDataset {
    pub fn new(cases: Vec<String>, conditions: Vec<ConditionDef>, values: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        if values.len() != cases.len() {
            return Err(DatasetError::Shape(format!(
                "{} cases but {} value rows",
                cases.len(),
                values.len()
            )));
        }
        for (row, v) in values.iter().enumerate() {
            if v.len() != conditions.len() {
                return Err(DatasetError::RowLength {
                    row: row + 1,
                    found: v.len(),
                    expected: conditions.len(),
                });
            }
        }
        let mut seen = HashSet::new();
        for c in &cases {
            if !seen.insert(c.as_str()) {
                return Err(DatasetError::DuplicateCase(c.clone()));
            }
        }
        let mut seen = HashSet::new();
        for c in &conditions {
            if !seen.insert(c.id.as_str()) {
                return Err(DatasetError::DuplicateCondition(c.id.clone()));
            }
        }
        Ok(Self {
            cases,
            conditions,
            values,
        })
    }

    pub fn n_cases(&self) -> usize {
        self.cases.len()
    }

    pub fn n_conditions(&self) -> usize {
        self.conditions.len()
    }

    pub fn condition_index(&self, id: &str) -> Option<usize> {
        self.conditions.iter().position(|c| c.id == id)
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[index]).collect()
    }

    pub fn column_by_id(&self, id: &str) -> Result<Vec<f64>, DatasetError> {
        let idx = self
            .condition_index(id)
            .ok_or_else(|| DatasetError::UnknownCondition(id.to_string()))?;
        Ok(self.column(idx))
    }

    pub fn outcome(&self) -> Option<&ConditionDef> {
        self.conditions.iter().find(|c| c.group == ConditionGroup::Outcome)
    }

    pub fn schema(&self) -> Schema {
        Schema {
            conditions: self.conditions.clone(),
        }
    }
}

/// Reads a dataset file, resolving header columns against `schema`.
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<RawDataset, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(file, schema)
}

pub fn read_dataset<R: Read>(reader: R, schema: &Schema) -> Result<RawDataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    let mut conditions = Vec::with_capacity(header.len().saturating_sub(1));
    let mut seen = HashSet::new();
    for name in header.iter().skip(1) {
        if !seen.insert(name.to_string()) {
            return Err(DatasetError::DuplicateColumn(name.to_string()));
        }
        let def = schema
            .get(name)
            .ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))?;
        conditions.push(def.clone());
    }
    if let Some(missing) = schema.conditions.iter().find(|c| !seen.contains(&c.id)) {
        return Err(DatasetError::MissingColumn(missing.id.clone()));
    }

    let mut cases = Vec::new();
    let mut values = Vec::new();
    let mut seen_cases = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let row = i + 2;
        if record.len() != header.len() {
            return Err(DatasetError::RowLength {
                row,
                found: record.len(),
                expected: header.len(),
            });
        }
        let case = record[0].to_string();
        if !seen_cases.insert(case.clone()) {
            return Err(DatasetError::DuplicateCase(case));
        }
        let mut cells = Vec::with_capacity(conditions.len());
        for (cell, def) in record.iter().skip(1).zip(&conditions) {
            let v = parse_cell(cell).ok_or_else(|| DatasetError::NonNumeric {
                row,
                column: def.id.clone(),
                value: cell.to_string(),
            })?;
            cells.push(v);
        }
        cases.push(case);
        values.push(cells);
    }
    RawDataset::new(cases, conditions, values)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes `d` in the same format [`read_dataset`] accepts.
pub fn write_dataset<W: Write>(d: &RawDataset, writer: W) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["case".to_string()];
    header.extend(d.conditions.iter().map(|c| c.id.clone()));
    wtr.write_record(&header)?;
    for (case, row) in d.cases.iter().zip(&d.values) {
        let mut rec = vec![case.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|source| DatasetError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

/// Checks every dataset invariant and reports what is wrong without failing.
///
/// Scored columns (all groups except the outcome) must stay inside
/// `[0, 10]`. The outcome column only has to be finite; its scale is left to
/// calibration. Zero-variance columns are reported as warnings.
pub fn validate_dataset(d: &RawDataset) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if d.values.len() != d.cases.len() {
        diags.push(Diagnostic::error(
            Location::default(),
            format!("{} cases but {} value rows", d.cases.len(), d.values.len()),
        ));
    }

    let mut case_counts: HashMap<&str, usize> = HashMap::new();
    for c in &d.cases {
        *case_counts.entry(c.as_str()).or_default() += 1;
    }
    for c in &d.cases {
        if case_counts.get(c.as_str()).copied().unwrap_or(0) > 1 {
            diags.push(Diagnostic::error(Location::case(c), "duplicate case id"));
            case_counts.insert(c.as_str(), 0);
        }
    }

    let mut seen = HashSet::new();
    for c in &d.conditions {
        if !seen.insert(c.id.as_str()) {
            diags.push(Diagnostic::error(Location::condition(&c.id), "duplicate condition id"));
        }
    }
    let outcomes = d
        .conditions
        .iter()
        .filter(|c| c.group == ConditionGroup::Outcome)
        .count();
    if outcomes > 1 {
        diags.push(Diagnostic::error(
            Location::default(),
            format!("{outcomes} conditions are marked as outcome; at most one is allowed"),
        ));
    }

    for (case, row) in d.cases.iter().zip(&d.values) {
        if row.len() != d.conditions.len() {
            diags.push(Diagnostic::error(
                Location::case(case),
                format!("row has {} cells, expected {}", row.len(), d.conditions.len()),
            ));
            continue;
        }
        for (v, def) in row.iter().zip(&d.conditions) {
            if !v.is_finite() {
                diags.push(Diagnostic::error(
                    Location::cell(case, &def.id),
                    format!("value {v} is not finite"),
                ));
            } else if def.group != ConditionGroup::Outcome && !(SCORE_MIN..=SCORE_MAX).contains(v) {
                diags.push(Diagnostic::error(
                    Location::cell(case, &def.id),
                    format!("score {v} outside the valuation field [0, 10]"),
                ));
            }
        }
    }

    if d.values.iter().all(|r| r.len() == d.conditions.len()) && d.n_cases() > 0 {
        for (j, def) in d.conditions.iter().enumerate() {
            let first = d.values[0][j];
            if d.values.iter().all(|r| r[j] == first) {
                diags.push(Diagnostic::warning(
                    Location::condition(&def.id),
                    "column is constant; calibration anchors will be degenerate",
                ));
            }
        }
    }

    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema2() -> Schema {
        Schema::new(vec![
            ConditionDef::new(
                "a",
                "A",
                ConditionGroup::InformationArchitecture,
                Material::Quantitative,
            ),
            ConditionDef::new("y", "Y", ConditionGroup::Outcome, Material::Mixed),
        ])
        .unwrap()
    }

    #[test]
    fn reads_in_file_order() {
        let csv = "case,y,a\nc1,1.5,2\nc2,3,4\n";
        let d = read_dataset(csv.as_bytes(), &schema2()).unwrap();
        assert_eq!(d.cases, vec!["c1", "c2"]);
        assert_eq!(d.conditions[0].id, "y");
        assert_eq!(d.values, vec![vec![1.5, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn duplicate_case_is_named() {
        let csv = "case,a,y\nc1,1,2\nc1,3,4\n";
        let err = read_dataset(csv.as_bytes(), &schema2()).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateCase(ref id) if id == "c1"));
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let csv = "case,a,y\nc1,1,2\nc2,n/a,4\n";
        let err = read_dataset(csv.as_bytes(), &schema2()).unwrap_err();
        match err {
            DatasetError::NonNumeric { row, column, value } => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
                assert_eq!(value, "n/a");
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = read_dataset("case,a,y\nc1,,2\n".as_bytes(), &schema2())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("row 2") && msg.contains("`a`"), "{msg}");
    }

    #[test]
    fn header_schema_mismatch() {
        let err = read_dataset("case,a,z\nc1,1,2\n".as_bytes(), &schema2()).unwrap_err();
        assert!(matches!(err, DatasetError::UnknownColumn(ref c) if c == "z"));
        let err = read_dataset("case,a\nc1,1\n".as_bytes(), &schema2()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingColumn(ref c) if c == "y"));
    }

    #[test]
    fn missing_file() {
        let err = load_dataset("/definitely/not/here.csv", &schema2()).unwrap_err();
        assert!(matches!(err, DatasetError::Io { .. }));
    }

    #[test]
    fn schema_rejects_two_outcomes() {
        let text = r#"
            [[condition]]
            id = "y1"
            label = "Y1"
            group = "outcome"
            material = "mixed"
            [[condition]]
            id = "y2"
            label = "Y2"
            group = "outcome"
            material = "mixed"
        "#;
        assert!(matches!(
            Schema::from_toml_str(text),
            Err(DatasetError::MultipleOutcomes(_))
        ));
    }

    #[test]
    fn validation_range_and_constant() {
        let d = read_dataset("case,a,y\nc1,1,2\nc2,3,4\n".as_bytes(), &schema2()).unwrap();
        assert!(validate_dataset(&d).is_empty());

        let d = read_dataset("case,a,y\nc1,12.3,2\nc2,3,4\n".as_bytes(), &schema2()).unwrap();
        let diags = validate_dataset(&d);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert_eq!(diags[0].location, Location::cell("c1", "a"));

        // outcome column is not range-checked
        let d = read_dataset("case,a,y\nc1,1,120\nc2,3,4\n".as_bytes(), &schema2()).unwrap();
        assert!(validate_dataset(&d).is_empty());

        let d = read_dataset("case,a,y\nc1,5,2\nc2,5,4\n".as_bytes(), &schema2()).unwrap();
        let diags = validate_dataset(&d);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, crate::Severity::Warning);
        assert_eq!(diags[0].location, Location::condition("a"));
    }

    #[test]
    fn validation_is_repeatable() {
        let d = read_dataset("case,a,y\nc1,12,2\nc2,-1,4\n".as_bytes(), &schema2()).unwrap();
        assert_eq!(validate_dataset(&d), validate_dataset(&d));
        assert_eq!(validate_dataset(&d).len(), 2);
    }
}
