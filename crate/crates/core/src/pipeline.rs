//! End-to-end runs: config → dataset → memberships → truth tables →
//! solutions → analysis → chart and bundle.
//!
//! Everything is computed in memory first; files are only written once the
//! whole run has succeeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    case_back, check_group_integration, compare_outcome_solutions, solution_measures, CaseSupport, Distinctness,
    GroupIntegration, SolutionMeasures,
};
use crate::calibration::{calibrate_dataset, resolve_specs, CalibrationOptions, FuzzyDataset, ResolvedSpec};
use crate::config::{ConfigError, PipelineConfig, RunConfig};
use crate::dataset::{read_dataset, validate_dataset, ConditionGroup, RawDataset, Schema};
use crate::diagnostic::Diagnostic;
use crate::error::{Error, Result};
use crate::fuzzyset::Implicant;
use crate::minimize::{solve_all, DirectionalExpectation, Expectation, MinimizeError, Solution, SolutionSet, MAX_TIES};
use crate::report::{export_bundle, render_chart, LabeledSolution};
use crate::truthtable::{build_truth_table, Thresholds, TruthTable};

pub const CHART_FILE: &str = "chart.txt";
pub const BUNDLE_FILE: &str = "bundle.json";
pub const TRUTH_TABLE_FILE: &str = "truth_table.csv";

/// Command-line settings that take precedence over the config's `[output]`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub ascii: Option<bool>,
    pub nudge_half: Option<bool>,
    pub out: Option<PathBuf>,
}

/// Raw bytes of every input, read up front.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub config: PipelineConfig,
    pub config_text: String,
    pub schema_name: String,
    pub schema_text: String,
    pub dataset_name: String,
    pub dataset_text: String,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

impl Inputs {
    pub fn load(config_path: impl AsRef<Path>) -> Result<Self> {
        let (config, config_text) = PipelineConfig::load(config_path)?;
        let schema_path = config.resolve(&config.schema);
        let dataset_path = config.resolve(&config.dataset);
        Ok(Self {
            schema_name: file_name(&schema_path),
            schema_text: read(&schema_path)?,
            dataset_name: file_name(&dataset_path),
            dataset_text: read(&dataset_path)?,
            config,
            config_text,
        })
    }

    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        if let Some(a) = o.ascii {
            self.config.output.ascii = a;
        }
        if let Some(n) = o.nudge_half {
            self.config.output.nudge_half = n;
        }
        if let Some(out) = &o.out {
            self.config.output.dir = out.clone();
        }
        self
    }

    pub fn out_dir(&self) -> PathBuf {
        self.config.resolve(&self.config.output.dir)
    }
}

/// Dataset read, validated and calibrated.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub schema: Schema,
    pub raw: RawDataset,
    pub specs: Vec<ResolvedSpec>,
    pub fuzzy: FuzzyDataset,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn prepare(inputs: &Inputs) -> Result<Prepared> {
    prepare_with(inputs, None)
}

/// As [`prepare`], but takes memberships from an edited membership file
/// instead of calibrating.
pub fn prepare_with(inputs: &Inputs, memberships: Option<&str>) -> Result<Prepared> {
    let schema = Schema::from_toml_str(&inputs.schema_text)?;
    inputs.config.validate(&schema)?;
    let raw = read_dataset(inputs.dataset_text.as_bytes(), &schema)?;
    let diagnostics = validate_dataset(&raw);
    if diagnostics.iter().any(Diagnostic::is_error) {
        return Err(Error::Validation(diagnostics));
    }
    let specs = resolve_specs(&raw, &inputs.config.calibration_specs()?)?;
    let fuzzy = match memberships {
        Some(text) => FuzzyDataset::read_csv(text.as_bytes(), &schema)?,
        None => calibrate_dataset(
            &raw,
            &specs,
            CalibrationOptions {
                nudge_half: inputs.config.output.nudge_half,
            },
        )?,
    };
    Ok(Prepared {
        schema,
        raw,
        specs,
        fuzzy,
        diagnostics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KindAnalysis {
    /// Terms left after dropping those without case support.
    pub retained: Vec<Implicant>,
    pub support: Vec<CaseSupport>,
    /// Unsupported terms, kept for audit.
    pub eliminated: Vec<CaseSupport>,
    pub measures: Option<SolutionMeasures>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunAnalysis {
    pub run: String,
    pub outcome: String,
    pub complex: Option<KindAnalysis>,
    pub parsimonious: Option<KindAnalysis>,
    pub intermediate: Option<KindAnalysis>,
}

/// Everything one `[[run]]` produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub conditions: Vec<String>,
    pub expectations: DirectionalExpectation,
    pub table: TruthTable,
    pub solutions: Option<SolutionSet>,
    /// Intermediate solution after case-back, used for charts and verdicts.
    pub reported: Solution,
    pub analysis: RunAnalysis,
}

fn empty_solution(conditions: &[String]) -> Solution {
    Solution {
        kind: crate::minimize::SolutionKind::Intermediate,
        conditions: conditions.to_vec(),
        terms: Vec::new(),
        core_flags: Vec::new(),
        ties: Vec::new(),
        remainders_used: Vec::new(),
        notes: vec!["no positive truth table rows: no solution".to_string()],
    }
}

fn analyze_kind(s: &Solution, d: &FuzzyDataset, outcome: &str) -> Result<(KindAnalysis, Solution)> {
    let cb = case_back(s, d, outcome)?;
    let measures = if cb.retained.terms.is_empty() {
        None
    } else {
        Some(solution_measures(&cb.retained, d, outcome)?)
    };
    Ok((
        KindAnalysis {
            retained: cb.retained.terms.clone(),
            support: cb.support,
            eliminated: cb.eliminated,
            measures,
        },
        cb.retained,
    ))
}

pub fn run_one(inputs: &Inputs, prepared: &Prepared, run: &RunConfig) -> Result<RunResult> {
    let cfg = &inputs.config;
    let conditions = cfg.run_conditions(run, &prepared.schema);
    let thresholds = Thresholds::new(cfg.truth_table.freq_threshold, cfg.truth_table.cons_threshold)?;
    let table = build_truth_table(&prepared.fuzzy, &conditions, &run.outcome, thresholds)?;
    let expectations = DirectionalExpectation(
        conditions
            .iter()
            .map(|c| cfg.expectations.get(c).copied().unwrap_or_default())
            .collect(),
    );
    let solutions = match solve_all(&table, &expectations) {
        Ok(s) => Some(s),
        Err(MinimizeError::NoPositiveRows) => None,
        Err(e) => return Err(e.into()),
    };

    let mut analysis = RunAnalysis {
        run: run.name.clone(),
        outcome: run.outcome.clone(),
        complex: None,
        parsimonious: None,
        intermediate: None,
    };
    let reported = match &solutions {
        Some(set) => {
            let d = &prepared.fuzzy;
            analysis.complex = Some(analyze_kind(&set.complex, d, &run.outcome)?.0);
            analysis.parsimonious = Some(analyze_kind(&set.parsimonious, d, &run.outcome)?.0);
            let (ka, retained) = analyze_kind(&set.intermediate, d, &run.outcome)?;
            analysis.intermediate = Some(ka);
            retained
        }
        None => empty_solution(&conditions),
    };
    Ok(RunResult {
        config: run.clone(),
        conditions,
        expectations,
        table,
        solutions,
        reported,
        analysis,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

fn digest(name: &str, text: &str) -> FileDigest {
    let hash = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for b in hash {
        let _ = write!(hex, "{b:02x}");
    }
    FileDigest {
        name: name.to_string(),
        sha256: hex,
        bytes: text.len(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BundleInputs {
    pub config: FileDigest,
    pub schema: FileDigest,
    pub dataset: FileDigest,
    pub cases: Vec<String>,
    pub conditions: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRun {
    pub name: String,
    pub outcome: String,
    pub conditions: Vec<String>,
    pub expectations: DirectionalExpectation,
}

#[derive(Debug, Clone, Serialize)]
pub struct BundleSettings {
    pub truth_table: Thresholds,
    pub calibration: Vec<ResolvedSpec>,
    pub expectations: BTreeMap<String, Expectation>,
    pub nudge_half: bool,
    pub ascii: bool,
    pub max_ties: usize,
    pub runs: Vec<ResolvedRun>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunTable {
    pub run: String,
    pub table: TruthTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSolutions {
    pub run: String,
    pub solutions: Option<SolutionSet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypotheses {
    pub group_integration: BTreeMap<String, GroupIntegration>,
    pub distinct_outcomes: Option<Distinctness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BundleAnalysis {
    pub runs: Vec<RunAnalysis>,
    pub hypotheses: Hypotheses,
    pub diagnostics: Vec<Diagnostic>,
    /// Cells moved off an exact 0.5, as (case, condition).
    pub nudged: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bundle {
    pub inputs: BundleInputs,
    pub settings: BundleSettings,
    pub truth_tables: Vec<RunTable>,
    pub solutions: Vec<RunSolutions>,
    pub analysis: BundleAnalysis,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub bundle: Bundle,
    pub bundle_json: String,
    pub chart: String,
    pub truth_table_csv: String,
    pub runs: Vec<RunResult>,
}

fn groups(schema: &Schema) -> BTreeMap<String, ConditionGroup> {
    schema.conditions.iter().map(|c| (c.id.clone(), c.group)).collect()
}

pub fn evaluate_hypotheses(cfg: &PipelineConfig, schema: &Schema, runs: &[RunResult]) -> Result<Hypotheses> {
    let reported = |name: &str| {
        runs.iter()
            .find(|r| r.config.name == name)
            .map(|r| &r.reported)
            .ok_or_else(|| {
                Error::Config(ConfigError::UnknownRun {
                    context: "hypotheses".into(),
                    name: name.to_string(),
                })
            })
    };
    let g = groups(schema);
    let mut group_integration = BTreeMap::new();
    for name in &cfg.hypotheses.group_integration {
        group_integration.insert(name.clone(), check_group_integration(reported(name)?, &g)?);
    }
    let distinct_outcomes = if cfg.hypotheses.distinct_outcomes.is_empty() {
        None
    } else {
        let mut per = BTreeMap::new();
        for name in &cfg.hypotheses.distinct_outcomes {
            per.insert(name.clone(), reported(name)?.clone());
        }
        Some(compare_outcome_solutions(&per)?)
    };
    Ok(Hypotheses {
        group_integration,
        distinct_outcomes,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn render_text(inputs: &Inputs, prepared: &Prepared, runs: &[RunResult], hypotheses: &Hypotheses) -> Result<String> {
    let ascii = inputs.config.output.ascii;
    let mut out = String::new();
    for r in runs {
        let outcome_label = prepared
            .schema
            .get(&r.config.outcome)
            .map(|c| c.label.as_str())
            .unwrap_or(&r.config.outcome);
        let title = format!("Run {}: configurations for {}", r.config.name, outcome_label);
        let measures = r.analysis.intermediate.as_ref().and_then(|k| k.measures.clone());
        let chart = match measures {
            Some(m) => render_chart(
                &title,
                &[LabeledSolution {
                    label: &r.config.name,
                    solution: &r.reported,
                }],
                &[m],
                &prepared.schema,
                ascii,
            )?,
            None => render_chart(&title, &[], &[], &prepared.schema, ascii)?,
        };
        out.push_str(&chart);
        match &r.solutions {
            Some(set) => {
                let _ = writeln!(out, "complex:      {}", set.complex.expression());
                let _ = writeln!(out, "parsimonious: {}", set.parsimonious.expression());
                let _ = writeln!(out, "intermediate: {}", set.intermediate.expression());
                for s in [&set.complex, &set.parsimonious, &set.intermediate] {
                    if !s.ties.is_empty() {
                        let _ = writeln!(out, "{:?} solution has {} tied alternative(s)", s.kind, s.ties.len());
                    }
                }
                for n in set.intermediate.notes.iter().chain(&r.reported.notes) {
                    let _ = writeln!(out, "note: {n}");
                }
            }
            None => {
                let _ = writeln!(out, "note: no positive truth table rows");
            }
        }
        let _ = writeln!(out);
    }
    for (run, gi) in &hypotheses.group_integration {
        let _ = writeln!(out, "Group integration ({run}): {}", yes_no(gi.verdict));
        if gi.degenerate {
            let _ = writeln!(out, "  vacuous: the solution has no terms");
        }
        for (i, v) in gi.terms.iter().enumerate() {
            let _ = writeln!(out, "  term {}: {}", i + 1, yes_no(*v));
        }
    }
    if let Some(d) = &hypotheses.distinct_outcomes {
        let _ = writeln!(out, "Distinct outcomes: {}", yes_no(d.verdict));
        for p in &d.pairs {
            let verdict = if p.differ { "differ" } else { "no difference" };
            let _ = writeln!(out, "  {} vs {}: {verdict}", p.a, p.b);
        }
    }
    Ok(out)
}

pub fn truth_table_csv(runs: &[RunResult]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for (i, r) in runs.iter().enumerate() {
        r.table.write_csv(&r.config.name, &mut wtr, i == 0)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io(TRUTH_TABLE_FILE, e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn run_pipeline(inputs: &Inputs) -> Result<PipelineOutput> {
    run_pipeline_with(inputs, prepare(inputs)?)
}

pub fn run_pipeline_with(inputs: &Inputs, prepared: Prepared) -> Result<PipelineOutput> {
    let cfg = &inputs.config;
    let runs = cfg
        .runs
        .iter()
        .map(|r| run_one(inputs, &prepared, r))
        .collect::<Result<Vec<_>>>()?;
    let hypotheses = evaluate_hypotheses(cfg, &prepared.schema, &runs)?;
    let chart = render_text(inputs, &prepared, &runs, &hypotheses)?;
    let truth_table_csv = truth_table_csv(&runs)?;

    let expectations = prepared
        .raw
        .conditions
        .iter()
        .map(|c| (c.id.clone(), cfg.expectations.get(&c.id).copied().unwrap_or_default()))
        .collect();
    let bundle = Bundle {
        inputs: BundleInputs {
            config: digest("config", &inputs.config_text),
            schema: digest(&inputs.schema_name, &inputs.schema_text),
            dataset: digest(&inputs.dataset_name, &inputs.dataset_text),
            cases: prepared.raw.cases.clone(),
            conditions: prepared.raw.conditions.iter().map(|c| c.id.clone()).collect(),
        },
        settings: BundleSettings {
            truth_table: cfg.truth_table,
            calibration: prepared.specs.clone(),
            expectations,
            nudge_half: cfg.output.nudge_half,
            ascii: cfg.output.ascii,
            max_ties: MAX_TIES,
            runs: runs
                .iter()
                .map(|r| ResolvedRun {
                    name: r.config.name.clone(),
                    outcome: r.config.outcome.clone(),
                    conditions: r.conditions.clone(),
                    expectations: r.expectations.clone(),
                })
                .collect(),
        },
        truth_tables: runs
            .iter()
            .map(|r| RunTable {
                run: r.config.name.clone(),
                table: r.table.clone(),
            })
            .collect(),
        solutions: runs
            .iter()
            .map(|r| RunSolutions {
                run: r.config.name.clone(),
                solutions: r.solutions.clone(),
            })
            .collect(),
        analysis: BundleAnalysis {
            runs: runs.iter().map(|r| r.analysis.clone()).collect(),
            hypotheses,
            diagnostics: prepared.diagnostics.clone(),
            nudged: prepared.fuzzy.nudged.clone(),
        },
    };
    let bundle_json = export_bundle(&bundle)?;
    Ok(PipelineOutput {
        bundle,
        bundle_json,
        chart,
        truth_table_csv,
        runs,
    })
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

/// Writes chart, bundle and truth table export.
pub fn write_outputs(output: &PipelineOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write_file(dir, CHART_FILE, &output.chart)?,
        write_file(dir, BUNDLE_FILE, &output.bundle_json)?,
        write_file(dir, TRUTH_TABLE_FILE, &output.truth_table_csv)?,
    ])
}
