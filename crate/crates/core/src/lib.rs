//! Fuzzy-set qualitative comparative analysis (fsQCA).
//!
//! The crate walks a cases × conditions dataset through the usual fsQCA
//! stages:
//!
//! 1. [`scoring`] turns coded case material into `[0, 10]` index scores.
//! 2. [`calibration`] maps scores onto fuzzy memberships with the
//!    three-anchor logistic transform.
//! 3. [`truthtable`] sorts cases into the `2^k` corners of the property
//!    space and codes each row.
//! 4. [`minimize`] derives complex, parsimonious and intermediate solutions
//!    (Quine–McCluskey plus exact set cover).
//! 5. [`analysis`] computes consistency and coverage, checks every term
//!    against the cases that support it and evaluates structural
//!    hypotheses.
//! 6. [`report`] renders configuration charts and the JSON bundle.
//!
//! [`pipeline`] wires all of it together from a [`config::PipelineConfig`].

pub mod analysis;
pub mod calibration;
pub mod config;
pub mod dataset;
pub mod diagnostic;
pub mod error;
pub mod fuzzyset;
pub mod minimize;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod synth;
pub mod truthtable;

pub use calibration::{CalibrationSpec, FuzzyDataset, Membership};
pub use dataset::{ConditionDef, ConditionGroup, Material, RawDataset, Schema};
pub use diagnostic::{Diagnostic, Severity};
pub use error::{Error, Result};
pub use fuzzyset::{Implicant, Literal, MembershipVector};
pub use minimize::{DirectionalExpectation, Expectation, Solution, SolutionKind, SolutionSet};
pub use truthtable::{OutcomeCode, Thresholds, TruthTable, TruthTableRow};
