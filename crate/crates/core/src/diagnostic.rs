use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

/// Where in a dataset a diagnostic points. Either coordinate may be absent
/// for whole-row or whole-column findings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

impl Location {
    pub fn cell(case: impl Into<String>, condition: impl Into<String>) -> Self {
        Self {
            case: Some(case.into()),
            condition: Some(condition.into()),
        }
    }

    pub fn case(case: impl Into<String>) -> Self {
        Self {
            case: Some(case.into()),
            condition: None,
        }
    }

    pub fn condition(condition: impl Into<String>) -> Self {
        Self {
            case: None,
            condition: Some(condition.into()),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.case, &self.condition) {
            (Some(c), Some(k)) => write!(f, "case {c}, condition {k}"),
            (Some(c), None) => write!(f, "case {c}"),
            (None, Some(k)) => write!(f, "condition {k}"),
            (None, None) => write!(f, "dataset"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            location,
            message: message.into(),
        }
    }

    pub fn warning(location: Location, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            location,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.location, self.message)
    }
}
