//! Fuzzy set algebra over conditions and the set-theoretic fit measures.
//!
//! AND is `min`, OR is `max`, NOT is `1 - x`. Consistency of `X ⊆ Y` is
//! `Σ min(x, y) / Σ x` and coverage is `Σ min(x, y) / Σ y`. All sums are
//! compensated so the two measures agree bit-for-bit when roles swap.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Most conditions a truth table or implicant may span.
pub const MAX_CONDITIONS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("membership sum of the {0} is zero")]
    ZeroSum(&'static str),
    #[error("pattern has {pattern} conditions, case has {case}")]
    DimensionMismatch { pattern: usize, case: usize },
    #[error("bad implicant pattern `{0}`")]
    BadPattern(String),
    #[error("{0} conditions exceeds the limit of {MAX_CONDITIONS}")]
    TooManyConditions(usize),
}

/// State of one condition inside an implicant. The declaration order is the
/// sort order used for deterministic reporting: absent, present, don't care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Literal {
    Absent,
    Present,
    DontCare,
}

impl Literal {
    pub fn symbol(self) -> char {
        match self {
            Literal::Absent => '0',
            Literal::Present => '1',
            Literal::DontCare => '-',
        }
    }
}

/// A product term over `k` conditions.
///
/// Bit `k - 1 - i` of `mask` is set when condition `i` is specified; the same
/// bit of `bits` holds its required value. Corners of the property space use
/// the same layout, so condition 0 is the most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Implicant {
    k: u8,
    mask: u32,
    bits: u32,
}

#[inline]
fn bit(k: usize, i: usize) -> u32 {
    1 << (k - 1 - i)
}

#[inline]
fn full_mask(k: usize) -> u32 {
    if k == 0 {
        0
    } else {
        u32::MAX >> (32 - k)
    }
}

impl Implicant {
    pub fn from_literals(literals: &[Literal]) -> Result<Self, MeasureError> {
        let k = literals.len();
        if k > MAX_CONDITIONS {
            return Err(MeasureError::TooManyConditions(k));
        }
        let mut mask = 0;
        let mut bits = 0;
        for (i, l) in literals.iter().enumerate() {
            match l {
                Literal::Present => {
                    mask |= bit(k, i);
                    bits |= bit(k, i);
                }
                Literal::Absent => mask |= bit(k, i),
                Literal::DontCare => {}
            }
        }
        Ok(Self { k: k as u8, mask, bits })
    }

    /// Builds from raw mask/bits words; bits outside `mask` are cleared.
    pub fn from_raw(k: usize, mask: u32, bits: u32) -> Self {
        assert!(k <= MAX_CONDITIONS);
        let mask = mask & full_mask(k);
        Self {
            k: k as u8,
            mask,
            bits: bits & mask,
        }
    }

    pub fn universal(k: usize) -> Self {
        Self::from_raw(k, 0, 0)
    }

    /// Fully specified term for one corner of the property space.
    pub fn from_corner(k: usize, corner: u32) -> Self {
        Self::from_raw(k, full_mask(k), corner)
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_universal(&self) -> bool {
        self.mask == 0
    }

    pub fn literal(&self, i: usize) -> Literal {
        let b = bit(self.k(), i);
        if self.mask & b == 0 {
            Literal::DontCare
        } else if self.bits & b != 0 {
            Literal::Present
        } else {
            Literal::Absent
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        (0..self.k()).map(|i| self.literal(i))
    }

    pub fn with_literal(&self, i: usize, literal: Literal) -> Self {
        let b = bit(self.k(), i);
        let (mask, bits) = match literal {
            Literal::DontCare => (self.mask & !b, self.bits & !b),
            Literal::Absent => (self.mask | b, self.bits & !b),
            Literal::Present => (self.mask | b, self.bits | b),
        };
        Self { k: self.k, mask, bits }
    }

    pub fn specified(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn covers_corner(&self, corner: u32) -> bool {
        corner & self.mask == self.bits
    }

    /// True when every corner of `self` is also a corner of `other`, i.e.
    /// `other`'s literals are a subset of `self`'s.
    pub fn implies(&self, other: &Implicant) -> bool {
        self.k == other.k && other.mask & !self.mask == 0 && self.bits & other.mask == other.bits
    }

    /// All corners the term covers, ascending.
    pub fn corners(&self) -> Vec<u32> {
        let free = full_mask(self.k()) & !self.mask;
        let mut out = Vec::with_capacity(1 << free.count_ones());
        // enumerate submasks of `free`
        let mut sub = free;
        loop {
            out.push(self.bits | sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        out.sort_unstable();
        out
    }

    /// Membership of a case in this term. `memberships[i]` is the case's
    /// membership in condition `i`.
    pub fn membership(&self, memberships: &[f64]) -> Result<f64, MeasureError> {
        term_membership(memberships, self)
    }
}

impl Ord for Implicant {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k.cmp(&other.k).then_with(|| self.literals().cmp(other.literals()))
    }
}

impl PartialOrd for Implicant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Implicant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.literals() {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Implicant {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let literals = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Literal::Absent),
                '1' => Ok(Literal::Present),
                '-' => Ok(Literal::DontCare),
                _ => Err(MeasureError::BadPattern(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Implicant::from_literals(&literals)
    }
}

impl Serialize for Implicant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Implicant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-case memberships in one set expression.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MembershipVector(Vec<f64>);

impl MembershipVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.0.iter().copied())
    }

    pub fn negate(&self) -> Self {
        Self(self.0.iter().map(|x| 1.0 - x).collect())
    }

    pub fn and(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.min(*b)).collect())
    }

    pub fn or(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.max(*b)).collect())
    }
}

impl From<Vec<f64>> for MembershipVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Neumaier's variant of Kahan summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Minimum over the specified literals, `m` for present and `1 - m` for
/// absent. The universal term has membership 1.
pub fn term_membership(memberships: &[f64], term: &Implicant) -> Result<f64, MeasureError> {
    if memberships.len() != term.k() {
        return Err(MeasureError::DimensionMismatch {
            pattern: term.k(),
            case: memberships.len(),
        });
    }
    let mut m = 1.0f64;
    for (x, l) in memberships.iter().zip(term.literals()) {
        match l {
            Literal::Present => m = m.min(*x),
            Literal::Absent => m = m.min(1.0 - x),
            Literal::DontCare => {}
        }
    }
    Ok(m)
}

fn overlap(x: &MembershipVector, y: &MembershipVector) -> Result<f64, MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::LengthMismatch(x.len(), y.len()));
    }
    Ok(compensated_sum(
        x.values().iter().zip(y.values()).map(|(a, b)| a.min(*b)),
    ))
}

/// Degree to which `x` is a subset of `y`.
pub fn consistency(x: &MembershipVector, y: &MembershipVector) -> Result<f64, MeasureError> {
    let num = overlap(x, y)?;
    let den = x.sum();
    if den <= 0.0 {
        return Err(MeasureError::ZeroSum("condition"));
    }
    Ok(num / den)
}

/// Share of `y` accounted for by `x`.
pub fn coverage(x: &MembershipVector, y: &MembershipVector) -> Result<f64, MeasureError> {
    let num = overlap(x, y)?;
    let den = y.sum();
    if den <= 0.0 {
        return Err(MeasureError::ZeroSum("outcome"));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn imp(s: &str) -> Implicant {
        s.parse().unwrap()
    }

    fn mv(v: &[f64]) -> MembershipVector {
        MembershipVector::new(v.to_vec())
    }

    #[test]
    fn term_membership_by_hand() {
        assert_eq!(term_membership(&[0.8, 0.3], &imp("10")).unwrap(), 0.7);
        assert_eq!(term_membership(&[0.8, 0.3], &imp("11")).unwrap(), 0.3);
        assert_eq!(term_membership(&[0.8, 0.3], &imp("--")).unwrap(), 1.0);
        assert!(matches!(
            term_membership(&[0.8], &imp("11")),
            Err(MeasureError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn measures_by_hand() {
        let x = mv(&[0.2, 0.8]);
        let y = mv(&[0.4, 0.6]);
        assert!((consistency(&x, &y).unwrap() - 0.8).abs() < 1e-15);
        assert!((coverage(&x, &y).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(consistency(&x, &x).unwrap(), 1.0);
        assert_eq!(coverage(&y, &y).unwrap(), 1.0);
        assert_eq!(consistency(&mv(&[1.0, 1.0]), &mv(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(
            consistency(&mv(&[0.0, 0.0]), &y),
            Err(MeasureError::ZeroSum("condition"))
        );
        assert_eq!(coverage(&x, &mv(&[0.0, 0.0])), Err(MeasureError::ZeroSum("outcome")));
        assert!(matches!(
            coverage(&x, &mv(&[0.1])),
            Err(MeasureError::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn pattern_round_trip_and_order() {
        for s in ["1-0", "---", "0", "1111111111111111"] {
            assert_eq!(imp(s).to_string(), s);
        }
        assert!("1x".parse::<Implicant>().is_err());
        let mut v = vec![imp("-11"), imp("0-1"), imp("00-")];
        v.sort();
        assert_eq!(v, vec![imp("00-"), imp("0-1"), imp("-11")]);
        assert!(imp("1-") < imp("-1"));
    }

    #[test]
    fn implication_and_corners() {
        assert!(imp("110").implies(&imp("1--")));
        assert!(imp("1--").implies(&imp("---")));
        assert!(!imp("1--").implies(&imp("11-")));
        assert!(!imp("0--").implies(&imp("1--")));
        assert_eq!(imp("1-0").corners(), vec![0b100, 0b110]);
        assert_eq!(imp("--").corners(), vec![0, 1, 2, 3]);
        assert!(imp("10").covers_corner(0b10));
        assert_eq!(Implicant::from_corner(3, 5).to_string(), "101");
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let v = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    fn patterns(k: usize) -> impl Strategy<Value = Vec<Literal>> {
        prop::collection::vec(
            prop_oneof![Just(Literal::Absent), Just(Literal::Present), Just(Literal::DontCare)],
            k,
        )
    }

    proptest! {
        #[test]
        fn duality(pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..80)) {
            let x = mv(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let y = mv(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            prop_assume!(x.sum() > 0.0 && y.sum() > 0.0);
            prop_assert_eq!(consistency(&x, &y).unwrap(), coverage(&y, &x).unwrap());
        }

        #[test]
        fn term_never_exceeds_literals(m in prop::collection::vec(0.0f64..=1.0, 4), p in patterns(4)) {
            let term = Implicant::from_literals(&p).unwrap();
            let t = term_membership(&m, &term).unwrap();
            for (i, l) in p.iter().enumerate() {
                match l {
                    Literal::Present => prop_assert!(t <= m[i]),
                    Literal::Absent => prop_assert!(t <= 1.0 - m[i]),
                    Literal::DontCare => {}
                }
            }
        }

        #[test]
        fn specialization_is_antimonotone(
            m in prop::collection::vec(0.0f64..=1.0, 5),
            p in patterns(5),
            i in 0usize..5,
            present in any::<bool>(),
        ) {
            let term = Implicant::from_literals(&p).unwrap();
            let lit = if present { Literal::Present } else { Literal::Absent };
            let special = term.with_literal(i, lit);
            if term.literal(i) == Literal::DontCare {
                prop_assert!(special.membership(&m).unwrap() <= term.membership(&m).unwrap());
            }
        }

        #[test]
        fn double_negation(x in 0.0f64..=1.0) {
            let v = mv(&[x]);
            prop_assert_eq!(v.negate().negate().values()[0], 1.0 - (1.0 - x));
            let once = term_membership(&[x], &imp("0")).unwrap();
            let twice = term_membership(&[once], &imp("0")).unwrap();
            prop_assert!((twice - x).abs() < 1e-15);
        }
    }
}
