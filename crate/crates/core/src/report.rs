//! Configuration charts in the Fiss layout and the JSON result bundle.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::SolutionMeasures;
use crate::dataset::{ConditionGroup, Schema};
use crate::fuzzyset::Literal;
use crate::minimize::Solution;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{solutions} solutions but {measures} measure sets")]
    Misaligned { solutions: usize, measures: usize },
    #[error("solution `{label}` has {terms} terms but measures for {measures}")]
    TermMismatch {
        label: String,
        terms: usize,
        measures: usize,
    },
    #[error("condition `{0}` is not in the schema")]
    UnknownCondition(String),
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Glyph {
    CorePresent,
    PeripheralPresent,
    CoreAbsent,
    PeripheralAbsent,
    Blank,
}

impl Glyph {
    pub fn symbol(self, ascii: bool) -> &'static str {
        match (self, ascii) {
            (Glyph::CorePresent, false) => "●",
            (Glyph::PeripheralPresent, false) => "•",
            (Glyph::CoreAbsent | Glyph::PeripheralAbsent, false) => "⊗",
            (Glyph::CorePresent, true) => "O",
            (Glyph::PeripheralPresent, true) => "o",
            (Glyph::CoreAbsent | Glyph::PeripheralAbsent, true) => "X",
            (Glyph::Blank, _) => " ",
        }
    }

    pub fn of(literal: Literal, core: bool) -> Self {
        match (literal, core) {
            (Literal::Present, true) => Glyph::CorePresent,
            (Literal::Present, false) => Glyph::PeripheralPresent,
            (Literal::Absent, true) => Glyph::CoreAbsent,
            (Literal::Absent, false) => Glyph::PeripheralAbsent,
            (Literal::DontCare, _) => Glyph::Blank,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartRow {
    pub condition: String,
    pub label: String,
    pub group: ConditionGroup,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartColumn {
    pub label: String,
    /// One glyph per chart row.
    pub cells: Vec<Glyph>,
    pub consistency: f64,
    pub raw_coverage: f64,
    pub unique_coverage: f64,
    /// Set on the first column of each solution.
    pub overall: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigurationChart {
    pub title: String,
    pub rows: Vec<ChartRow>,
    pub columns: Vec<ChartColumn>,
    pub notes: Vec<String>,
}

pub struct LabeledSolution<'a> {
    pub label: &'a str,
    pub solution: &'a Solution,
}

const GROUP_ORDER: [ConditionGroup; 4] = [
    ConditionGroup::InformationArchitecture,
    ConditionGroup::BusinessModel,
    ConditionGroup::Other,
    ConditionGroup::Outcome,
];

fn column_name(i: usize) -> String {
    let mut n = i;
    let mut s = String::new();
    loop {
        s.insert(0, (b'A' + (n % 26) as u8) as char);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    s
}

/// Lays out one column per term across all solutions.
pub fn build_chart(
    title: &str,
    solutions: &[LabeledSolution<'_>],
    measures: &[SolutionMeasures],
    schema: &Schema,
) -> Result<ConfigurationChart, ReportError> {
    if solutions.len() != measures.len() {
        return Err(ReportError::Misaligned {
            solutions: solutions.len(),
            measures: measures.len(),
        });
    }
    let mut used: Vec<&str> = Vec::new();
    for s in solutions {
        for c in &s.solution.conditions {
            if schema.get(c).is_none() {
                return Err(ReportError::UnknownCondition(c.clone()));
            }
            if !used.contains(&c.as_str()) {
                used.push(c);
            }
        }
    }
    let mut rows = Vec::new();
    for g in GROUP_ORDER {
        for def in schema.conditions.iter().filter(|d| d.group == g) {
            if used.contains(&def.id.as_str()) {
                rows.push(ChartRow {
                    condition: def.id.clone(),
                    label: def.label.clone(),
                    group: def.group,
                });
            }
        }
    }

    let single = solutions.len() == 1;
    let mut columns = Vec::new();
    let mut notes = Vec::new();
    for (ls, m) in solutions.iter().zip(measures) {
        let s = ls.solution;
        if s.terms.len() != m.terms.len() {
            return Err(ReportError::TermMismatch {
                label: ls.label.to_string(),
                terms: s.terms.len(),
                measures: m.terms.len(),
            });
        }
        if s.terms.is_empty() {
            notes.push(format!("{}: no solution", ls.label));
        }
        for (ti, (t, tm)) in s.terms.iter().zip(&m.terms).enumerate() {
            let label = if single {
                column_name(ti)
            } else {
                format!("{}{}", ls.label, ti + 1)
            };
            let cells: Vec<Glyph> = rows
                .iter()
                .map(|r| match s.conditions.iter().position(|c| *c == r.condition) {
                    Some(j) => Glyph::of(t.literal(j), s.is_core(ti, j)),
                    None => Glyph::Blank,
                })
                .collect();
            let core_absent: Vec<&str> = rows
                .iter()
                .zip(&cells)
                .filter(|(_, g)| **g == Glyph::CoreAbsent)
                .map(|(r, _)| r.label.as_str())
                .collect();
            if !core_absent.is_empty() {
                notes.push(format!("{label}: core absence of {}", core_absent.join(", ")));
            }
            columns.push(ChartColumn {
                overall: (ti == 0).then_some((m.solution_consistency, m.solution_coverage)),
                label,
                cells,
                consistency: tm.consistency,
                raw_coverage: tm.raw_coverage,
                unique_coverage: tm.unique_coverage,
            });
        }
    }
    Ok(ConfigurationChart {
        title: title.to_string(),
        rows,
        columns,
        notes,
    })
}

/// Two decimals; exact ties round to even.
pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn display_width(s: &str) -> usize {
    s.chars().count()
}

fn pad(s: &str, width: usize) -> String {
    let w = display_width(s);
    format!("{s}{}", " ".repeat(width.saturating_sub(w)))
}

fn center(s: &str, width: usize) -> String {
    let w = display_width(s);
    let left = width.saturating_sub(w) / 2;
    let right = width.saturating_sub(w) - left;
    format!("{}{s}{}", " ".repeat(left), " ".repeat(right))
}

pub fn render(chart: &ConfigurationChart, ascii: bool) -> String {
    const FOOTER: [&str; 5] = [
        "Consistency",
        "Raw Coverage",
        "Unique Coverage",
        "Overall Solution Consistency",
        "Overall Solution Coverage",
    ];
    let mut stub = FOOTER.iter().map(|s| display_width(s)).max().unwrap_or(0);
    for r in &chart.rows {
        stub = stub.max(display_width(&r.label) + 2);
        stub = stub.max(display_width(r.group.display_name()));
    }
    let col = chart
        .columns
        .iter()
        .map(|c| display_width(&c.label))
        .max()
        .unwrap_or(0)
        .max(6);

    let mut out = String::new();
    let _ = writeln!(out, "{}", chart.title);
    let line_width = stub + chart.columns.len() * (col + 1);
    let rule = "-".repeat(line_width);
    let _ = writeln!(out, "{rule}");
    let mut header = pad("Configuration", stub);
    for c in &chart.columns {
        header.push(' ');
        header.push_str(&center(&c.label, col));
    }
    let _ = writeln!(out, "{}", header.trim_end());
    let _ = writeln!(out, "{rule}");

    let mut group: Option<ConditionGroup> = None;
    for (i, r) in chart.rows.iter().enumerate() {
        if group != Some(r.group) {
            group = Some(r.group);
            let _ = writeln!(out, "{}", r.group.display_name());
        }
        let mut line = pad(&format!("  {}", r.label), stub);
        for c in &chart.columns {
            line.push(' ');
            line.push_str(&center(c.cells[i].symbol(ascii), col));
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let _ = writeln!(out, "{rule}");

    let footer_line = |name: &str, value: &dyn Fn(&ChartColumn) -> Option<f64>| {
        let mut line = pad(name, stub);
        for c in &chart.columns {
            line.push(' ');
            let v = value(c).map(fmt2).unwrap_or_default();
            line.push_str(&center(&v, col));
        }
        line.trim_end().to_string()
    };
    let _ = writeln!(out, "{}", footer_line(FOOTER[0], &|c| Some(c.consistency)));
    let _ = writeln!(out, "{}", footer_line(FOOTER[1], &|c| Some(c.raw_coverage)));
    let _ = writeln!(out, "{}", footer_line(FOOTER[2], &|c| Some(c.unique_coverage)));
    let _ = writeln!(out, "{}", footer_line(FOOTER[3], &|c| c.overall.map(|o| o.0)));
    let _ = writeln!(out, "{}", footer_line(FOOTER[4], &|c| c.overall.map(|o| o.1)));
    let _ = writeln!(out, "{rule}");

    let (cp, pp, ab) = (
        Glyph::CorePresent.symbol(ascii),
        Glyph::PeripheralPresent.symbol(ascii),
        Glyph::CoreAbsent.symbol(ascii),
    );
    let _ = writeln!(
        out,
        "{cp} core present, {pp} peripheral present, {ab} absent, blank don't care"
    );
    if chart.columns.is_empty() && chart.notes.is_empty() {
        let _ = writeln!(out, "no solution");
    }
    for n in &chart.notes {
        let _ = writeln!(out, "{n}");
    }
    out
}

/// Builds and renders in one step.
pub fn render_chart(
    title: &str,
    solutions: &[LabeledSolution<'_>],
    measures: &[SolutionMeasures],
    schema: &Schema,
    ascii: bool,
) -> Result<String, ReportError> {
    build_chart(title, solutions, measures, schema).map(|c| render(&c, ascii))
}

/// Deterministic pretty JSON with a trailing newline.
pub fn export_bundle<T: Serialize>(bundle: &T) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(bundle)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::TermMeasures;
    use crate::dataset::{ConditionDef, Material};
    use crate::minimize::SolutionKind;

    fn schema() -> Schema {
        let ia = ConditionGroup::InformationArchitecture;
        let bm = ConditionGroup::BusinessModel;
        Schema::new(vec![
            ConditionDef::new("networking", "Networking", ia, Material::Mixed),
            ConditionDef::new("data_warehouse", "Data Warehouse", ia, Material::Mixed),
            ConditionDef::new("terminal", "Terminal", ia, Material::Mixed),
            ConditionDef::new("sensors", "Sensors", ia, Material::Mixed),
            ConditionDef::new("payment", "Interaction & Payment", ia, Material::Mixed),
            ConditionDef::new("public_info", "Public Information", bm, Material::Mixed),
        ])
        .unwrap()
    }

    fn solution(conds: &[&str], terms: &[&str], core: Vec<Vec<bool>>) -> Solution {
        Solution {
            kind: SolutionKind::Intermediate,
            conditions: conds.iter().map(|c| c.to_string()).collect(),
            terms: terms.iter().map(|t| t.parse().unwrap()).collect(),
            core_flags: core,
            ties: vec![],
            remainders_used: vec![],
            notes: vec![],
        }
    }

    fn measures(s: &Solution, vals: &[(f64, f64, f64)], overall: (f64, f64)) -> SolutionMeasures {
        SolutionMeasures {
            terms: s
                .terms
                .iter()
                .zip(vals)
                .map(|(t, &(c, r, u))| TermMeasures {
                    term: *t,
                    expression: String::new(),
                    consistency: c,
                    raw_coverage: r,
                    unique_coverage: u,
                })
                .collect(),
            solution_consistency: overall.0,
            solution_coverage: overall.1,
        }
    }

    #[test]
    fn half_even_at_two_places() {
        assert_eq!(fmt2(0.125), "0.12");
        assert_eq!(fmt2(0.375), "0.38");
        assert_eq!(fmt2(0.93), "0.93");
        assert_eq!(fmt2(1.0), "1.00");
    }

    #[test]
    fn facilities_management_row() {
        let conds = ["networking", "data_warehouse", "terminal", "sensors", "payment"];
        let s = solution(&conds, &["11010"], vec![vec![true; 5]]);
        let m = measures(&s, &[(0.91, 0.29, 0.29)], (0.91, 0.29));
        let chart = build_chart(
            "fm",
            &[LabeledSolution {
                label: "F5",
                solution: &s,
            }],
            &[m],
            &schema(),
        )
        .unwrap();
        use Glyph::*;
        assert_eq!(
            chart.columns[0].cells,
            vec![CorePresent, CorePresent, CoreAbsent, CorePresent, CoreAbsent]
        );
        let text = render(&chart, false);
        let terminal = text.lines().find(|l| l.contains("Terminal")).unwrap();
        assert!(terminal.contains('⊗'));
        let cons = text.lines().find(|l| l.starts_with("Consistency")).unwrap();
        assert!(cons.ends_with("0.91"));
        let cov = text
            .lines()
            .find(|l| l.starts_with("Overall Solution Coverage"))
            .unwrap();
        assert!(cov.ends_with("0.29"));
        assert!(text.contains("A: core absence of Terminal, Interaction & Payment"));
    }

    #[test]
    fn peripheral_and_ascii() {
        let s = solution(
            &["terminal", "sensors", "public_info"],
            &["11-", "1-1"],
            vec![vec![true, false, false], vec![false, false, true]],
        );
        let m = measures(&s, &[(0.95, 0.3, 0.1), (0.9, 0.25, 0.05)], (0.93, 0.33));
        let ls = [LabeledSolution {
            label: "dev",
            solution: &s,
        }];
        let text = render_chart("t", &ls, std::slice::from_ref(&m), &schema(), true).unwrap();
        let sensors = text.lines().find(|l| l.contains("Sensors")).unwrap();
        assert!(sensors.contains('o'));
        let overall = text
            .lines()
            .find(|l| l.starts_with("Overall Solution Consistency"))
            .unwrap();
        assert_eq!(overall.matches("0.93").count(), 1);
        assert!(!text.contains('●'));
        let unicode = render_chart("t", &ls, &[m], &schema(), false).unwrap();
        assert!(unicode.contains('●') && unicode.contains('•'));
    }

    #[test]
    fn misaligned_and_empty() {
        let s = solution(&["terminal"], &["1"], vec![vec![true]]);
        assert!(matches!(
            build_chart(
                "t",
                &[LabeledSolution {
                    label: "x",
                    solution: &s
                }],
                &[],
                &schema()
            ),
            Err(ReportError::Misaligned { .. })
        ));
        let text = render_chart("t", &[], &[], &schema(), false).unwrap();
        assert!(text.contains("no solution"));
        assert!(text.contains("Overall Solution Coverage"));
    }

    #[test]
    fn multi_solution_labels() {
        let a = solution(&["terminal"], &["1"], vec![vec![true]]);
        let b = solution(&["sensors"], &["0", "1"], vec![vec![true], vec![false]]);
        let ma = measures(&a, &[(1.0, 0.5, 0.5)], (1.0, 0.5));
        let mb = measures(&b, &[(1.0, 0.5, 0.5), (0.9, 0.4, 0.4)], (0.95, 0.9));
        let chart = build_chart(
            "t",
            &[
                LabeledSolution {
                    label: "E",
                    solution: &a,
                },
                LabeledSolution {
                    label: "F",
                    solution: &b,
                },
            ],
            &[ma, mb],
            &schema(),
        )
        .unwrap();
        let labels: Vec<&str> = chart.columns.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["E1", "F1", "F2"]);
        assert_eq!(chart.columns[2].cells[1], Glyph::PeripheralPresent);
        assert_eq!(chart.columns[1].overall, Some((0.95, 0.9)));
        assert_eq!(chart.columns[2].overall, None);
    }
}
