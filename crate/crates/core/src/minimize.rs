//! Boolean minimization of a coded truth table.
//!
//! Prime implicants come from Quine–McCluskey merging over `(mask, bits)`
//! words. Covers are found exactly: essential implicants first, then a
//! branch-and-bound search that returns every cover of minimum size.
//!
//! Three solutions are derived from one table:
//!
//! * complex: remainders are not used;
//! * parsimonious: every remainder may be used;
//! * intermediate: each complex term is widened to its parsimonious term,
//!   keeping the literals theory expects. With no expectations at all the
//!   intermediate solution is the complex one.
//!
//! The three are nested term by term (complex ⊆ intermediate ⊆
//! parsimonious), which makes the case-level membership chain hold.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzyset::{Implicant, Literal, MAX_CONDITIONS};
use crate::truthtable::TruthTable;

/// Upper bound on the number of tied minimum covers kept per search.
pub const MAX_TIES: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimizeError {
    #[error("no positive truth table rows: no solution")]
    NoPositiveRows,
    #[error("corner {0} is in both the on-set and the don't-care set")]
    Overlap(u32),
    #[error("corner {corner} does not fit in {k} conditions")]
    CornerOutOfRange { corner: u32, k: usize },
    #[error("{0} conditions exceeds the limit of {MAX_CONDITIONS}")]
    TooManyConditions(usize),
    #[error("expected {expected} directional expectations, found {found}")]
    ExpectationLength { expected: usize, found: usize },
    #[error("solutions are over different condition lists")]
    ConditionMismatch,
    #[error("internal: corner {0} is not covered by any implicant")]
    Uncoverable(u32),
    #[error("internal: {0}")]
    Unsound(String),
}

impl MinimizeError {
    pub fn is_internal(&self) -> bool {
        matches!(self, MinimizeError::Uncoverable(_) | MinimizeError::Unsound(_))
    }
}

fn check_corners(corners: &[u32], k: usize) -> Result<(), MinimizeError> {
    if k > MAX_CONDITIONS {
        return Err(MinimizeError::TooManyConditions(k));
    }
    let limit = 1u64 << k;
    match corners.iter().find(|&&c| u64::from(c) >= limit) {
        Some(&corner) => Err(MinimizeError::CornerOutOfRange { corner, k }),
        None => Ok(()),
    }
}

/// Maximal implicants of `on ∪ dc` that cover at least one `on` corner,
/// sorted by pattern.
pub fn prime_implicants(on: &[u32], dc: &[u32], k: usize) -> Result<Vec<Implicant>, MinimizeError> {
    if on.is_empty() {
        return Err(MinimizeError::NoPositiveRows);
    }
    check_corners(on, k)?;
    check_corners(dc, k)?;
    let on_set: HashSet<u32> = on.iter().copied().collect();
    if let Some(&c) = dc.iter().find(|c| on_set.contains(c)) {
        return Err(MinimizeError::Overlap(c));
    }

    let full = if k == 0 { 0 } else { u32::MAX >> (32 - k) };
    // (mask, bits) pairs of the current merge level
    let mut level: HashSet<(u32, u32)> = on.iter().chain(dc).map(|&c| (full, c)).collect();
    let mut primes = Vec::new();
    while !level.is_empty() {
        let mut merged: HashSet<(u32, u32)> = HashSet::new();
        let mut used: HashSet<(u32, u32)> = HashSet::new();
        for &(mask, bits) in &level {
            let mut m = mask;
            while m != 0 {
                let b = m & m.wrapping_neg();
                m &= m - 1;
                if bits & b == 0 {
                    continue;
                }
                let partner = (mask, bits & !b);
                if level.contains(&partner) {
                    used.insert((mask, bits));
                    used.insert(partner);
                    merged.insert((mask & !b, bits & !b));
                }
            }
        }
        primes.extend(
            level
                .iter()
                .filter(|t| !used.contains(t))
                .map(|&(mask, bits)| Implicant::from_raw(k, mask, bits)),
        );
        level = merged;
    }

    let mut primes: Vec<Implicant> = primes
        .into_iter()
        .filter(|p| on.iter().any(|&c| p.covers_corner(c)))
        .collect();
    primes.sort();
    Ok(primes)
}

// ---------------------------------------------------------------------------
// Exact set cover

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn clear_all(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let t = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + t)
            })
        })
    }
}

/// Result of an exact cover search over candidate indices.
pub(crate) struct CoverSearch {
    pub covers: Vec<Vec<usize>>,
    pub truncated: bool,
}

struct Search<'a> {
    sets: &'a [Bits],
    elem_sets: &'a [Vec<usize>],
    best: usize,
    found: Vec<Vec<usize>>,
    truncated: bool,
}

impl Search<'_> {
    fn lower_bound(&self, uncovered: &Bits, forbidden: &[bool]) -> usize {
        let remaining = uncovered.count();
        if remaining == 0 {
            return 0;
        }
        let widest = self
            .sets
            .iter()
            .enumerate()
            .filter(|(i, _)| !forbidden[*i])
            .map(|(_, s)| s.and_count(uncovered))
            .max()
            .unwrap_or(0);
        if widest == 0 {
            usize::MAX
        } else {
            remaining.div_ceil(widest)
        }
    }

    fn run(&mut self, uncovered: &mut Bits, chosen: &mut Vec<usize>, forbidden: &mut Vec<bool>) {
        if uncovered.count() == 0 {
            let size = chosen.len();
            if size < self.best {
                self.best = size;
                self.found.clear();
                self.truncated = false;
            }
            if size == self.best {
                if self.found.len() < MAX_TIES {
                    let mut c = chosen.clone();
                    c.sort_unstable();
                    self.found.push(c);
                } else {
                    self.truncated = true;
                }
            }
            return;
        }
        let lb = self.lower_bound(uncovered, forbidden);
        if lb == usize::MAX || chosen.len() + lb > self.best {
            return;
        }

        // branch on the uncovered element with the fewest usable sets
        let mut pick: Option<(usize, usize)> = None;
        for e in uncovered.ones() {
            let n = self.elem_sets[e].iter().filter(|&&s| !forbidden[s]).count();
            if n == 0 {
                return;
            }
            if pick.is_none_or(|(_, best_n)| n < best_n) {
                pick = Some((e, n));
                if n == 1 {
                    break;
                }
            }
        }
        let (e, _) = pick.expect("uncovered set is non-empty");
        let options: Vec<usize> = self.elem_sets[e].iter().copied().filter(|&s| !forbidden[s]).collect();
        let mut newly_forbidden = Vec::new();
        for s in options {
            let saved = uncovered.clone();
            uncovered.clear_all(&self.sets[s]);
            chosen.push(s);
            self.run(uncovered, chosen, forbidden);
            chosen.pop();
            *uncovered = saved;
            // later siblings never reuse this set, so each cover is produced once
            forbidden[s] = true;
            newly_forbidden.push(s);
        }
        for s in newly_forbidden {
            forbidden[s] = false;
        }
    }
}

fn greedy_size(sets: &[Bits], n_elems: usize) -> usize {
    let mut uncovered = Bits::new(n_elems);
    for e in 0..n_elems {
        uncovered.set(e);
    }
    let mut size = 0;
    while uncovered.count() > 0 {
        let Some(best) = sets.iter().max_by_key(|s| s.and_count(&uncovered)) else {
            break;
        };
        if best.and_count(&uncovered) == 0 {
            break;
        }
        uncovered.clear_all(best);
        size += 1;
    }
    size
}

/// All minimum-cardinality selections of `sets` covering `0..n_elems`.
/// Returns the first uncoverable element on failure.
pub(crate) fn exact_min_covers(
    n_candidates: usize,
    n_elems: usize,
    covers: impl Fn(usize, usize) -> bool,
) -> Result<CoverSearch, usize> {
    let mut sets = vec![Bits::new(n_elems); n_candidates];
    let mut elem_sets = vec![Vec::new(); n_elems];
    for (s, bits) in sets.iter_mut().enumerate() {
        for (e, owners) in elem_sets.iter_mut().enumerate() {
            if covers(s, e) {
                bits.set(e);
                owners.push(s);
            }
        }
    }
    if let Some(e) = elem_sets.iter().position(Vec::is_empty) {
        return Err(e);
    }

    // essential candidates: sole cover of some element
    let mut uncovered = Bits::new(n_elems);
    for e in 0..n_elems {
        uncovered.set(e);
    }
    let mut chosen: Vec<usize> = Vec::new();
    for owners in &elem_sets {
        if let [only] = owners.as_slice() {
            if !chosen.contains(only) {
                chosen.push(*only);
            }
        }
    }
    for &s in &chosen {
        uncovered.clear_all(&sets[s]);
    }

    let mut search = Search {
        sets: &sets,
        elem_sets: &elem_sets,
        best: greedy_size(&sets, n_elems).max(chosen.len()) + 1,
        found: Vec::new(),
        truncated: false,
    };
    let mut forbidden = vec![false; n_candidates];
    search.run(&mut uncovered, &mut chosen, &mut forbidden);
    Ok(CoverSearch {
        covers: search.found,
        truncated: search.truncated,
    })
}

fn sort_covers(mut covers: Vec<Vec<Implicant>>) -> Vec<Vec<Implicant>> {
    for c in &mut covers {
        c.sort();
    }
    covers.sort();
    covers.dedup();
    covers
}

fn covers_over_corners(pis: &[Implicant], on: &[u32]) -> Result<(Vec<Vec<Implicant>>, bool), MinimizeError> {
    let search = exact_min_covers(pis.len(), on.len(), |s, e| pis[s].covers_corner(on[e]))
        .map_err(|e| MinimizeError::Uncoverable(on[e]))?;
    let covers = search
        .covers
        .into_iter()
        .map(|c| c.into_iter().map(|i| pis[i]).collect())
        .collect();
    Ok((sort_covers(covers), search.truncated))
}

/// Every minimum-size subset of `pis` covering all of `on`, each sorted by
/// pattern, in lexicographic order.
pub fn minimal_covers(pis: &[Implicant], on: &[u32]) -> Result<Vec<Vec<Implicant>>, MinimizeError> {
    covers_over_corners(pis, on).map(|(c, _)| c)
}

// ---------------------------------------------------------------------------
// Solutions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Complex,
    Parsimonious,
    Intermediate,
}

impl std::str::FromStr for SolutionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complex" => Ok(SolutionKind::Complex),
            "parsimonious" => Ok(SolutionKind::Parsimonious),
            "intermediate" => Ok(SolutionKind::Intermediate),
            other => Err(format!("unknown solution kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Present,
    Absent,
    #[default]
    Agnostic,
}

impl Expectation {
    fn literal(self) -> Option<Literal> {
        match self {
            Expectation::Present => Some(Literal::Present),
            Expectation::Absent => Some(Literal::Absent),
            Expectation::Agnostic => None,
        }
    }
}

/// Theory-driven direction per condition, in truth table condition order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirectionalExpectation(pub Vec<Expectation>);

impl DirectionalExpectation {
    pub fn agnostic(k: usize) -> Self {
        Self(vec![Expectation::Agnostic; k])
    }

    pub fn is_agnostic(&self) -> bool {
        self.0.iter().all(|e| *e == Expectation::Agnostic)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub kind: SolutionKind,
    pub conditions: Vec<String>,
    pub terms: Vec<Implicant>,
    /// `core_flags[t][i]`: literal `i` of term `t` is a core condition.
    /// Always false for don't-care positions.
    pub core_flags: Vec<Vec<bool>>,
    /// Alternative covers of the same size, excluding `terms`.
    pub ties: Vec<Vec<Implicant>>,
    /// Remainder corners the terms cover.
    pub remainders_used: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Solution {
    pub fn k(&self) -> usize {
        self.conditions.len()
    }

    /// Fuzzy OR over terms; an empty solution has membership 0.
    pub fn membership(&self, memberships: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.membership(memberships).expect("dimension checked by caller"))
            .fold(0.0, f64::max)
    }

    pub fn covers_corner(&self, corner: u32) -> bool {
        self.terms.iter().any(|t| t.covers_corner(corner))
    }

    pub fn is_core(&self, term: usize, condition: usize) -> bool {
        self.core_flags
            .get(term)
            .and_then(|f| f.get(condition))
            .copied()
            .unwrap_or(false)
    }

    /// Term written with condition ids, e.g. `terminal*~sensors`.
    pub fn term_expression(&self, term: usize) -> String {
        let t = &self.terms[term];
        let parts: Vec<String> = t
            .literals()
            .zip(&self.conditions)
            .filter_map(|(l, c)| match l {
                Literal::Present => Some(c.clone()),
                Literal::Absent => Some(format!("~{c}")),
                Literal::DontCare => None,
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    pub fn expression(&self) -> String {
        if self.terms.is_empty() {
            return "(no solution)".to_string();
        }
        (0..self.terms.len())
            .map(|i| self.term_expression(i))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn all_core(&mut self) {
        self.core_flags = self
            .terms
            .iter()
            .map(|t| t.literals().map(|l| l != Literal::DontCare).collect())
            .collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub complex: Solution,
    pub parsimonious: Solution,
    pub intermediate: Solution,
}

impl SolutionSet {
    pub fn get(&self, kind: SolutionKind) -> &Solution {
        match kind {
            SolutionKind::Complex => &self.complex,
            SolutionKind::Parsimonious => &self.parsimonious,
            SolutionKind::Intermediate => &self.intermediate,
        }
    }
}

/// Marks each specified literal of `intermediate` as core when a
/// parsimonious term implied by that intermediate term carries it.
pub fn label_core_peripheral(intermediate: &Solution, parsimonious: &Solution) -> Result<Solution, MinimizeError> {
    if intermediate.conditions != parsimonious.conditions {
        return Err(MinimizeError::ConditionMismatch);
    }
    let mut out = intermediate.clone();
    out.core_flags = intermediate
        .terms
        .iter()
        .map(|term| {
            let contained: Vec<&Implicant> = parsimonious.terms.iter().filter(|p| term.implies(p)).collect();
            (0..term.k())
                .map(|i| {
                    term.literal(i) != Literal::DontCare && contained.iter().any(|p| p.literal(i) == term.literal(i))
                })
                .collect()
        })
        .collect();
    Ok(out)
}

/// Drops duplicate terms and terms implied by another term, then sorts.
fn absorb(mut terms: Vec<Implicant>) -> Vec<Implicant> {
    terms.sort();
    terms.dedup();
    let kept: Vec<Implicant> = terms
        .iter()
        .filter(|t| !terms.iter().any(|o| o != *t && t.implies(o)))
        .copied()
        .collect();
    kept
}

fn used_remainders(terms: &[Implicant], remainders: &[u32]) -> Vec<u32> {
    remainders
        .iter()
        .copied()
        .filter(|&r| terms.iter().any(|t| t.covers_corner(r)))
        .collect()
}

fn check_sound(s: &Solution, t: &TruthTable) -> Result<(), MinimizeError> {
    for c in t.positive() {
        if !s.covers_corner(c) {
            return Err(MinimizeError::Unsound(format!(
                "{:?} solution misses positive corner {}",
                s.kind,
                t.corner_bits(c)
            )));
        }
    }
    for c in t.negative().into_iter().chain(t.contradictions()) {
        if s.covers_corner(c) {
            return Err(MinimizeError::Unsound(format!(
                "{:?} solution covers excluded corner {}",
                s.kind,
                t.corner_bits(c)
            )));
        }
    }
    Ok(())
}

/// Derives all three solutions from one table.
pub fn solve_all(t: &TruthTable, expectations: &DirectionalExpectation) -> Result<SolutionSet, MinimizeError> {
    let k = t.k;
    if expectations.len() != k {
        return Err(MinimizeError::ExpectationLength {
            expected: k,
            found: expectations.len(),
        });
    }
    let on = t.positive();
    if on.is_empty() {
        return Err(MinimizeError::NoPositiveRows);
    }
    let remainders = t.remainders();
    let base = |kind| Solution {
        kind,
        conditions: t.conditions.clone(),
        terms: Vec::new(),
        core_flags: Vec::new(),
        ties: Vec::new(),
        remainders_used: Vec::new(),
        notes: Vec::new(),
    };

    // complex
    let complex_pis = prime_implicants(&on, &[], k)?;
    let (mut complex_covers, truncated) = covers_over_corners(&complex_pis, &on)?;
    let mut complex = base(SolutionKind::Complex);
    complex.terms = complex_covers.remove(0);
    complex.ties = complex_covers;
    if truncated {
        complex.notes.push(format!("tie list truncated at {MAX_TIES} covers"));
    }

    // parsimonious, nested over the primary complex cover
    let pars_pis = prime_implicants(&on, &remainders, k)?;
    let (mut pars_covers, truncated) = covers_over_corners(&pars_pis, &on)?;
    let nests = |cover: &[Implicant]| complex.terms.iter().all(|c| cover.iter().any(|p| c.implies(p)));
    let mut parsimonious = base(SolutionKind::Parsimonious);
    if truncated {
        parsimonious
            .notes
            .push(format!("tie list truncated at {MAX_TIES} covers"));
    }
    match pars_covers.iter().position(|c| nests(c)) {
        Some(i) => {
            parsimonious.terms = pars_covers.remove(i);
            parsimonious.ties = pars_covers;
        }
        None => {
            let search = exact_min_covers(pars_pis.len(), complex.terms.len(), |s, e| {
                complex.terms[e].implies(&pars_pis[s])
            })
            .map_err(|e| {
                MinimizeError::Unsound(format!(
                    "complex term {} has no parsimonious prime above it",
                    complex.terms[e]
                ))
            })?;
            let mut nested = sort_covers(
                search
                    .covers
                    .into_iter()
                    .map(|c| c.into_iter().map(|i| pars_pis[i]).collect())
                    .collect(),
            );
            parsimonious.terms = nested.remove(0);
            parsimonious.ties = nested;
            parsimonious
                .notes
                .push("no minimum cover contains every complex term; cover enlarged to nest them".to_string());
        }
    }
    parsimonious.remainders_used = used_remainders(&parsimonious.terms, &remainders);
    parsimonious.all_core();

    // intermediate
    let mut intermediate = base(SolutionKind::Intermediate);
    if expectations.is_agnostic() {
        intermediate.terms = complex.terms.clone();
        intermediate.ties = complex.ties.clone();
        intermediate
            .notes
            .push("no directional expectations: intermediate equals complex".to_string());
    } else {
        let mut terms = Vec::with_capacity(complex.terms.len());
        for c in &complex.terms {
            let p = parsimonious
                .terms
                .iter()
                .find(|p| c.implies(p))
                .ok_or_else(|| MinimizeError::Unsound(format!("complex term {c} not nested")))?;
            let mut term = *p;
            for (i, e) in expectations.0.iter().enumerate() {
                if let Some(lit) = e.literal() {
                    if c.literal(i) == lit {
                        term = term.with_literal(i, lit);
                    }
                }
            }
            terms.push(term);
        }
        intermediate.terms = absorb(terms);
    }
    intermediate.remainders_used = used_remainders(&intermediate.terms, &remainders);
    let intermediate = label_core_peripheral(&intermediate, &parsimonious)?;
    let complex = label_core_peripheral(&complex, &parsimonious)?;

    for s in [&complex, &parsimonious, &intermediate] {
        check_sound(s, t)?;
    }
    Ok(SolutionSet {
        complex,
        parsimonious,
        intermediate,
    })
}

pub fn solve(
    t: &TruthTable,
    kind: SolutionKind,
    expectations: &DirectionalExpectation,
) -> Result<Solution, MinimizeError> {
    let set = solve_all(t, expectations)?;
    Ok(match kind {
        SolutionKind::Complex => set.complex,
        SolutionKind::Parsimonious => set.parsimonious,
        SolutionKind::Intermediate => set.intermediate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truthtable::{OutcomeCode, TruthTableRow};

    fn imp(s: &str) -> Implicant {
        s.parse().unwrap()
    }

    fn imps(v: &[&str]) -> Vec<Implicant> {
        v.iter().map(|s| imp(s)).collect()
    }

    fn table(k: usize, codes: &[(u32, OutcomeCode)]) -> TruthTable {
        let rows = (0..(1u32 << k))
            .map(|c| {
                let code = codes
                    .iter()
                    .find(|(cc, _)| *cc == c)
                    .map(|(_, code)| *code)
                    .unwrap_or(OutcomeCode::Negative);
                TruthTableRow {
                    corner: c,
                    n_cases: if code == OutcomeCode::Remainder { 0 } else { 1 },
                    row_consistency: Some(0.9),
                    outcome_code: code,
                    cases: vec![],
                }
            })
            .collect();
        TruthTable {
            conditions: (0..k).map(|i| format!("c{i}")).collect(),
            outcome: "y".into(),
            k,
            rows,
            freq_threshold: 1,
            cons_threshold: 0.8,
        }
    }

    #[test]
    fn primes_by_hand() {
        assert_eq!(prime_implicants(&[0b11, 0b10], &[], 2).unwrap(), imps(&["1-"]));
        assert_eq!(
            prime_implicants(&[0b000, 0b001, 0b011, 0b111], &[], 3).unwrap(),
            imps(&["00-", "0-1", "-11"])
        );
        assert_eq!(
            prime_implicants(&[0b11], &[0b01, 0b10], 2).unwrap(),
            imps(&["1-", "-1"])
        );
        assert_eq!(
            prime_implicants(&[0, 1, 2, 3], &[], 2).unwrap(),
            vec![Implicant::universal(2)]
        );
    }

    #[test]
    fn prime_errors() {
        assert_eq!(prime_implicants(&[], &[1], 2), Err(MinimizeError::NoPositiveRows));
        assert_eq!(prime_implicants(&[1], &[1], 2), Err(MinimizeError::Overlap(1)));
        assert!(matches!(
            prime_implicants(&[4], &[], 2),
            Err(MinimizeError::CornerOutOfRange { .. })
        ));
    }

    #[test]
    fn covers_by_hand() {
        let pis = imps(&["00-", "0-1", "-11"]);
        assert_eq!(
            minimal_covers(&pis, &[0b000, 0b001, 0b011, 0b111]).unwrap(),
            vec![imps(&["00-", "-11"])]
        );
        let pis = imps(&["1-", "-1"]);
        assert_eq!(
            minimal_covers(&pis, &[0b11]).unwrap(),
            vec![imps(&["1-"]), imps(&["-1"])]
        );
        let pis = imps(&["--"]);
        assert_eq!(minimal_covers(&pis, &[0, 1, 3]).unwrap(), vec![imps(&["--"])]);
        assert_eq!(
            minimal_covers(&imps(&["1-"]), &[0b01]),
            Err(MinimizeError::Uncoverable(0b01))
        );
    }

    #[test]
    fn cyclic_cover_ties() {
        // classic cyclic core: 6 primes, two minimum covers of size 3
        let on = [0, 1, 2, 5, 6, 7];
        let pis = prime_implicants(&on, &[], 3).unwrap();
        assert_eq!(pis.len(), 6);
        let covers = minimal_covers(&pis, &on).unwrap();
        assert_eq!(covers.len(), 2);
        assert!(covers.iter().all(|c| c.len() == 3));
    }

    fn two_condition_table() -> TruthTable {
        table(
            2,
            &[
                (0b11, OutcomeCode::Positive),
                (0b01, OutcomeCode::Remainder),
                (0b10, OutcomeCode::Remainder),
            ],
        )
    }

    #[test]
    fn three_solution_kinds() {
        let t = two_condition_table();
        let agn = DirectionalExpectation::agnostic(2);
        let c = solve(&t, SolutionKind::Complex, &agn).unwrap();
        assert_eq!(c.terms, imps(&["11"]));
        assert_eq!(c.expression(), "c0*c1");

        let p = solve(&t, SolutionKind::Parsimonious, &agn).unwrap();
        assert_eq!(p.terms, imps(&["1-"]));
        assert_eq!(p.ties, vec![imps(&["-1"])]);
        assert_eq!(p.remainders_used, vec![0b10]);

        let exp = DirectionalExpectation(vec![Expectation::Present, Expectation::Agnostic]);
        let i = solve(&t, SolutionKind::Intermediate, &exp).unwrap();
        assert_eq!(i.terms, imps(&["1-"]));

        let i = solve(&t, SolutionKind::Intermediate, &agn).unwrap();
        assert_eq!(i.terms, imps(&["11"]));
        assert!(i.notes.iter().any(|n| n.contains("equals complex")));
    }

    #[test]
    fn expectations_keep_matching_literals() {
        // on = {110, 111}; remainders everything with c0 = 1
        let t = table(
            3,
            &[
                (0b110, OutcomeCode::Positive),
                (0b111, OutcomeCode::Positive),
                (0b100, OutcomeCode::Remainder),
                (0b101, OutcomeCode::Remainder),
            ],
        );
        let exp = DirectionalExpectation(vec![Expectation::Agnostic, Expectation::Present, Expectation::Agnostic]);
        let s = solve_all(&t, &exp).unwrap();
        assert_eq!(s.complex.terms, imps(&["11-"]));
        assert_eq!(s.parsimonious.terms, imps(&["1--"]));
        assert_eq!(s.intermediate.terms, imps(&["11-"]));
        assert_eq!(s.intermediate.core_flags, vec![vec![true, false, false]]);

        let exp = DirectionalExpectation(vec![Expectation::Agnostic, Expectation::Absent, Expectation::Agnostic]);
        let s = solve_all(&t, &exp).unwrap();
        assert_eq!(s.intermediate.terms, imps(&["1--"]));
    }

    #[test]
    fn core_labels() {
        let sol = |terms: &[&str]| Solution {
            kind: SolutionKind::Intermediate,
            conditions: vec!["a".into(), "b".into(), "c".into()],
            terms: imps(terms),
            core_flags: vec![],
            ties: vec![],
            remainders_used: vec![],
            notes: vec![],
        };
        let l = label_core_peripheral(&sol(&["11-"]), &sol(&["1--"])).unwrap();
        assert_eq!(l.core_flags, vec![vec![true, false, false]]);
        let l = label_core_peripheral(&sol(&["11-"]), &sol(&["11-"])).unwrap();
        assert_eq!(l.core_flags, vec![vec![true, true, false]]);
        let l = label_core_peripheral(&sol(&["11-"]), &sol(&["1--", "--0"])).unwrap();
        assert_eq!(l.core_flags, vec![vec![true, false, false]]);

        let mut other = sol(&["1--"]);
        other.conditions[0] = "z".into();
        assert_eq!(
            label_core_peripheral(&sol(&["11-"]), &other),
            Err(MinimizeError::ConditionMismatch)
        );
    }

    #[test]
    fn no_positive_rows() {
        let t = table(2, &[(0, OutcomeCode::Remainder)]);
        assert_eq!(
            solve(&t, SolutionKind::Complex, &DirectionalExpectation::agnostic(2)),
            Err(MinimizeError::NoPositiveRows)
        );
        assert!(matches!(
            solve(
                &two_condition_table(),
                SolutionKind::Complex,
                &DirectionalExpectation::agnostic(3)
            ),
            Err(MinimizeError::ExpectationLength { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn contradictions_are_excluded() {
        let t = table(
            2,
            &[
                (0b11, OutcomeCode::Positive),
                (0b10, OutcomeCode::Contradiction),
                (0b01, OutcomeCode::Remainder),
            ],
        );
        let p = solve(&t, SolutionKind::Parsimonious, &DirectionalExpectation::agnostic(2)).unwrap();
        assert_eq!(p.terms, imps(&["-1"]));
    }
}
