use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::calibration::CalibrationError;
use crate::config::ConfigError;
use crate::dataset::DatasetError;
use crate::diagnostic::Diagnostic;
use crate::fuzzyset::MeasureError;
use crate::minimize::MinimizeError;
use crate::report::ReportError;
use crate::scoring::ScoringError;
use crate::synth::SynthError;
use crate::truthtable::TruthTableError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error. Each variant names the stage that failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("dataset validation failed:\n{}", render_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("scoring: {0}")]
    Scoring(#[from] ScoringError),
    #[error("calibration: {0}")]
    Calibration(#[from] CalibrationError),
    #[error("fuzzyset: {0}")]
    Measure(#[from] MeasureError),
    #[error("truthtable: {0}")]
    TruthTable(#[from] TruthTableError),
    #[error("minimize: {0}")]
    Minimize(#[from] MinimizeError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("synth: {0}")]
    Synth(#[from] SynthError),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Process exit status classes used by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Usage = 1,
    Data = 2,
    Internal = 3,
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Config(ConfigError::Parse { .. }) => ExitClass::Usage,
            Error::Minimize(e) if e.is_internal() => ExitClass::Internal,
            Error::Report(ReportError::Serialize(_)) => ExitClass::Internal,
            _ => ExitClass::Data,
        }
    }
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .filter(|d| d.is_error())
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}
