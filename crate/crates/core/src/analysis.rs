//! Solution-level measures, case-back verification and the two structural
//! hypothesis predicates.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::FuzzyDataset;
use crate::dataset::ConditionGroup;
use crate::fuzzyset::{consistency, coverage, Implicant, Literal, MeasureError, MembershipVector};
use crate::minimize::Solution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("condition `{0}` is not in the dataset")]
    UnknownCondition(String),
    #[error("condition `{0}` has no group")]
    UnmappedCondition(String),
    #[error("solution has no terms")]
    EmptySolution,
    #[error("need at least 2 outcomes to compare, got {0}")]
    TooFewOutcomes(usize),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermMeasures {
    pub term: Implicant,
    pub expression: String,
    pub consistency: f64,
    pub raw_coverage: f64,
    pub unique_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionMeasures {
    pub terms: Vec<TermMeasures>,
    pub solution_consistency: f64,
    pub solution_coverage: f64,
}

fn columns(s: &Solution, d: &FuzzyDataset, outcome: &str) -> Result<(Vec<usize>, MembershipVector), AnalysisError> {
    let idx = s
        .conditions
        .iter()
        .map(|c| {
            d.condition_index(c)
                .ok_or_else(|| AnalysisError::UnknownCondition(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let y = d
        .column_by_id(outcome)
        .ok_or_else(|| AnalysisError::UnknownCondition(outcome.to_string()))?;
    Ok((idx, y))
}

fn term_vector(term: &Implicant, d: &FuzzyDataset, idx: &[usize]) -> Result<MembershipVector, AnalysisError> {
    let values = (0..d.n_cases())
        .map(|c| term.membership(&d.case_slice(c, idx)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MembershipVector::new(values))
}

fn union(vectors: &[&MembershipVector], n: usize) -> MembershipVector {
    vectors.iter().fold(MembershipVector::zeros(n), |acc, v| acc.or(v))
}

/// Membership of every case in each term of `s`.
pub fn term_memberships(s: &Solution, d: &FuzzyDataset) -> Result<Vec<MembershipVector>, AnalysisError> {
    let idx = s
        .conditions
        .iter()
        .map(|c| {
            d.condition_index(c)
                .ok_or_else(|| AnalysisError::UnknownCondition(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    s.terms.iter().map(|t| term_vector(t, d, &idx)).collect()
}

/// Membership of every case in the solution (max over terms).
pub fn solution_membership(s: &Solution, d: &FuzzyDataset) -> Result<MembershipVector, AnalysisError> {
    let terms = term_memberships(s, d)?;
    Ok(union(&terms.iter().collect::<Vec<_>>(), d.n_cases()))
}

pub fn solution_measures(s: &Solution, d: &FuzzyDataset, outcome: &str) -> Result<SolutionMeasures, AnalysisError> {
    if s.terms.is_empty() {
        return Err(AnalysisError::EmptySolution);
    }
    let (idx, y) = columns(s, d, outcome)?;
    let n = d.n_cases();
    let vectors = s
        .terms
        .iter()
        .map(|t| term_vector(t, d, &idx))
        .collect::<Result<Vec<_>, _>>()?;
    let all: Vec<&MembershipVector> = vectors.iter().collect();
    let whole = union(&all, n);
    let solution_coverage = coverage(&whole, &y)?;
    let solution_consistency = consistency(&whole, &y)?;

    let mut terms = Vec::with_capacity(s.terms.len());
    for (i, v) in vectors.iter().enumerate() {
        let others: Vec<&MembershipVector> = all
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| *v)
            .collect();
        let rest = coverage(&union(&others, n), &y)?;
        terms.push(TermMeasures {
            term: s.terms[i],
            expression: s.term_expression(i),
            consistency: consistency(v, &y)?,
            raw_coverage: coverage(v, &y)?,
            unique_coverage: solution_coverage - rest,
        });
    }
    Ok(SolutionMeasures {
        terms,
        solution_consistency,
        solution_coverage,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSupport {
    pub term: Implicant,
    pub expression: String,
    pub supporting_case_ids: Vec<String>,
    pub best_case_id: Option<String>,
    /// No case supports the term.
    pub eliminate: bool,
}

/// Cases with term membership and outcome membership both above 0.5.
pub fn supporting_cases(
    term: &Implicant,
    conditions: &[String],
    d: &FuzzyDataset,
    outcome: &str,
) -> Result<CaseSupport, AnalysisError> {
    let idx = conditions
        .iter()
        .map(|c| {
            d.condition_index(c)
                .ok_or_else(|| AnalysisError::UnknownCondition(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let y = d
        .column_by_id(outcome)
        .ok_or_else(|| AnalysisError::UnknownCondition(outcome.to_string()))?;
    let x = term_vector(term, d, &idx)?;

    let mut ids = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    for (c, (&xm, &ym)) in x.values().iter().zip(y.values()).enumerate() {
        if xm > 0.5 && ym > 0.5 {
            ids.push(d.cases[c].clone());
            let joint = xm.min(ym);
            if best.is_none_or(|(b, _)| joint > b) {
                best = Some((joint, c));
            }
        }
    }
    let expression = Solution {
        kind: crate::minimize::SolutionKind::Complex,
        conditions: conditions.to_vec(),
        terms: vec![*term],
        core_flags: vec![],
        ties: vec![],
        remainders_used: vec![],
        notes: vec![],
    }
    .term_expression(0);
    Ok(CaseSupport {
        term: *term,
        expression,
        eliminate: ids.is_empty(),
        supporting_case_ids: ids,
        best_case_id: best.map(|(_, c)| d.cases[c].clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseBack {
    /// The solution with unsupported terms removed.
    pub retained: Solution,
    pub support: Vec<CaseSupport>,
    /// Removed terms, kept for audit.
    pub eliminated: Vec<CaseSupport>,
}

pub fn case_back(s: &Solution, d: &FuzzyDataset, outcome: &str) -> Result<CaseBack, AnalysisError> {
    let mut retained = s.clone();
    retained.terms.clear();
    retained.core_flags.clear();
    let mut support = Vec::new();
    let mut eliminated = Vec::new();
    for (i, t) in s.terms.iter().enumerate() {
        let cs = supporting_cases(t, &s.conditions, d, outcome)?;
        if cs.eliminate {
            eliminated.push(cs);
        } else {
            retained.terms.push(*t);
            if let Some(f) = s.core_flags.get(i) {
                retained.core_flags.push(f.clone());
            }
            support.push(cs);
        }
    }
    if !eliminated.is_empty() {
        retained
            .notes
            .push(format!("{} term(s) without case support removed", eliminated.len()));
    }
    Ok(CaseBack {
        retained,
        support,
        eliminated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupIntegration {
    /// Per term: has a present literal from both groups.
    pub terms: Vec<bool>,
    pub verdict: bool,
    /// The solution had no terms; the verdict holds vacuously.
    pub degenerate: bool,
}

pub fn check_group_integration(
    s: &Solution,
    groups: &BTreeMap<String, ConditionGroup>,
) -> Result<GroupIntegration, AnalysisError> {
    let g = s
        .conditions
        .iter()
        .map(|c| {
            groups
                .get(c)
                .copied()
                .ok_or_else(|| AnalysisError::UnmappedCondition(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let terms: Vec<bool> = s
        .terms
        .iter()
        .map(|t| {
            let has = |want: ConditionGroup| {
                t.literals()
                    .zip(&g)
                    .any(|(l, grp)| l == Literal::Present && *grp == want)
            };
            has(ConditionGroup::InformationArchitecture) && has(ConditionGroup::BusinessModel)
        })
        .collect();
    Ok(GroupIntegration {
        verdict: terms.iter().all(|&v| v),
        degenerate: terms.is_empty(),
        terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub differ: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinctness {
    pub pairs: Vec<PairComparison>,
    pub verdict: bool,
}

type TermKey = BTreeMap<String, Literal>;

fn term_keys(s: &Solution) -> BTreeSet<TermKey> {
    s.terms
        .iter()
        .map(|t| {
            t.literals()
                .zip(&s.conditions)
                .filter(|(l, _)| *l != Literal::DontCare)
                .map(|(l, c)| (c.clone(), l))
                .collect()
        })
        .collect()
}

/// Pairwise comparison of term sets, keyed by condition id so solutions
/// over different condition orders compare correctly.
pub fn compare_outcome_solutions(per_outcome: &BTreeMap<String, Solution>) -> Result<Distinctness, AnalysisError> {
    if per_outcome.len() < 2 {
        return Err(AnalysisError::TooFewOutcomes(per_outcome.len()));
    }
    let keyed: Vec<(&String, BTreeSet<TermKey>)> = per_outcome.iter().map(|(k, s)| (k, term_keys(s))).collect();
    let mut pairs = Vec::new();
    for i in 0..keyed.len() {
        for j in i + 1..keyed.len() {
            pairs.push(PairComparison {
                a: keyed[i].0.clone(),
                b: keyed[j].0.clone(),
                differ: keyed[i].1 != keyed[j].1,
            });
        }
    }
    Ok(Distinctness {
        verdict: pairs.iter().any(|p| p.differ),
        pairs,
    })
}
