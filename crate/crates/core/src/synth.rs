//! Synthetic datasets with planted recipes, the exhaustive cover oracle,
//! and the bundled demo dataset.
//!
//! Randomness comes from ChaCha8 seeded with `SynthSpec::seed`, so a spec
//! always yields the same dataset on every platform.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::CalibrationSpec;
use crate::dataset::{write_dataset, ConditionDef, ConditionGroup, Material, RawDataset, Schema};
use crate::error::{Error, Result};
use crate::fuzzyset::{Implicant, Literal, MAX_CONDITIONS};

/// Half-width of the band around 0.5 that generated memberships avoid.
pub const DEFAULT_MARGIN: f64 = 0.4;
/// Largest `k` the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_K: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("case count must be positive")]
    NoCases,
    #[error("condition count must be in 1..={MAX_CONDITIONS}, got {0}")]
    BadConditionCount(usize),
    #[error("at least one planted term is required")]
    NoPlanted,
    #[error("planted term {term} has {found} positions, expected {expected}")]
    PlantedLength {
        term: String,
        found: usize,
        expected: usize,
    },
    #[error("noise must lie in [0, 1), got {0}")]
    BadNoise(f64),
    #[error("margin must lie in [0, 0.5), got {0}")]
    BadMargin(f64),
    #[error("exhaustive search is limited to k <= {BRUTE_FORCE_MAX_K}, got {0}")]
    OracleTooLarge(usize),
    #[error("corner {corner} does not fit in {k} conditions")]
    CornerOutOfRange { corner: u32, k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub k: usize,
    pub n: usize,
    pub planted: Vec<Implicant>,
    pub noise: f64,
    pub seed: u64,
    pub margin: f64,
}

impl SynthSpec {
    pub fn new(k: usize, n: usize, planted: Vec<Implicant>, noise: f64, seed: u64) -> Self {
        Self {
            k,
            n,
            planted,
            noise,
            seed,
            margin: DEFAULT_MARGIN,
        }
    }

    fn check(&self) -> Result<(), SynthError> {
        if self.n == 0 {
            return Err(SynthError::NoCases);
        }
        if self.k == 0 || self.k > MAX_CONDITIONS {
            return Err(SynthError::BadConditionCount(self.k));
        }
        if self.planted.is_empty() {
            return Err(SynthError::NoPlanted);
        }
        if let Some(t) = self.planted.iter().find(|t| t.k() != self.k) {
            return Err(SynthError::PlantedLength {
                term: t.to_string(),
                found: t.k(),
                expected: self.k,
            });
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(SynthError::BadNoise(self.noise));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(SynthError::BadMargin(self.margin));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted: Vec<Implicant>,
    pub conditions: Vec<String>,
    pub outcome: String,
    /// Cases whose outcome was flipped by noise.
    pub flipped: Vec<String>,
}

/// Anchors that map generated raw scores back onto their memberships'
/// side of 0.5 (symmetric about 5, so negation commutes with calibration).
pub fn synth_calibration() -> CalibrationSpec {
    CalibrationSpec::new(9.5, 5.0, 0.5).expect("valid anchors")
}

pub fn synth_condition_ids(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("c{i}")).collect()
}

fn draw(rng: &mut ChaCha8Rng, margin: f64) -> f64 {
    let u: f64 = rng.random();
    let width = 0.5 - margin;
    if u < 0.5 {
        2.0 * u * width
    } else {
        0.5 + margin + 2.0 * (u - 0.5) * width
    }
}

/// Draws memberships, applies the planted recipes and noise, and rescales
/// everything to raw scores in `[0, 10]`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(RawDataset, GroundTruth), SynthError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ids = synth_condition_ids(spec.k);
    let mut conditions: Vec<ConditionDef> = ids
        .iter()
        .map(|c| ConditionDef::new(c, c, ConditionGroup::Other, Material::Quantitative))
        .collect();
    conditions.push(ConditionDef::new(
        "y",
        "y",
        ConditionGroup::Outcome,
        Material::Quantitative,
    ));

    let width = (spec.n.max(1) as f64).log10().floor() as usize + 1;
    let cases: Vec<String> = (1..=spec.n).map(|i| format!("s{i:0width$}")).collect();
    let mut values = Vec::with_capacity(spec.n);
    let mut flipped = Vec::new();
    for case in &cases {
        let m: Vec<f64> = (0..spec.k).map(|_| draw(&mut rng, spec.margin)).collect();
        let mut y = spec
            .planted
            .iter()
            .map(|t| t.membership(&m).expect("length checked"))
            .fold(0.0, f64::max);
        let roll: f64 = rng.random();
        if roll < spec.noise {
            y = 1.0 - y;
            flipped.push(case.clone());
        }
        let mut row: Vec<f64> = m.iter().map(|v| 10.0 * v).collect();
        row.push(10.0 * y);
        values.push(row);
    }
    let d = RawDataset::new(cases, conditions, values).expect("generated shape is valid");
    Ok((
        d,
        GroundTruth {
            planted: spec.planted.clone(),
            conditions: ids,
            outcome: "y".to_string(),
            flipped,
        },
    ))
}

/// Every implicant over `k` conditions, in pattern order.
fn all_implicants(k: usize) -> Vec<Implicant> {
    let total = 3usize.pow(k as u32);
    let mut out: Vec<Implicant> = (0..total)
        .map(|mut code| {
            let lits: Vec<Literal> = (0..k)
                .map(|_| {
                    let l = match code % 3 {
                        0 => Literal::Absent,
                        1 => Literal::Present,
                        _ => Literal::DontCare,
                    };
                    code /= 3;
                    l
                })
                .collect();
            Implicant::from_literals(&lits).expect("k within limit")
        })
        .collect();
    out.sort();
    out
}

/// Exhaustive search for every minimum cover of `on` by implicants that
/// avoid the off-set. Only maximal implicants are considered, so the
/// returned covers consist of prime implicants.
pub fn brute_force_minimal_dnf(on: &[u32], dc: &[u32], k: usize) -> Result<Vec<Vec<Implicant>>, SynthError> {
    if k > BRUTE_FORCE_MAX_K {
        return Err(SynthError::OracleTooLarge(k));
    }
    if let Some(&corner) = on.iter().chain(dc).find(|&&c| c >= 1 << k) {
        return Err(SynthError::CornerOutOfRange { corner, k });
    }
    let allowed = |c: u32| on.contains(&c) || dc.contains(&c);
    let valid: Vec<Implicant> = all_implicants(k)
        .into_iter()
        .filter(|t| t.corners().into_iter().all(allowed))
        .collect();
    let maximal: Vec<Implicant> = valid
        .iter()
        .filter(|t| !valid.iter().any(|o| o != *t && t.implies(o)))
        .copied()
        .collect();
    let target: u32 = on.iter().fold(0, |acc, &c| acc | 1 << c);
    if target == 0 {
        return Ok(vec![Vec::new()]);
    }
    let masks: Vec<u32> = maximal
        .iter()
        .map(|t| t.corners().into_iter().fold(0, |acc, c| acc | 1 << c) & target)
        .collect();

    fn choose(
        start: usize,
        left: usize,
        acc: u32,
        masks: &[u32],
        target: u32,
        picked: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            if acc == target {
                out.push(picked.clone());
            }
            return;
        }
        for i in start..masks.len() {
            picked.push(i);
            choose(i + 1, left - 1, acc | masks[i], masks, target, picked, out);
            picked.pop();
        }
    }

    for size in 1..=maximal.len() {
        let mut found = Vec::new();
        choose(0, size, 0, &masks, target, &mut Vec::new(), &mut found);
        if !found.is_empty() {
            let mut covers: Vec<Vec<Implicant>> = found
                .into_iter()
                .map(|idx| {
                    let mut c: Vec<Implicant> = idx.into_iter().map(|i| maximal[i]).collect();
                    c.sort();
                    c
                })
                .collect();
            covers.sort();
            return Ok(covers);
        }
    }
    unreachable!("every on corner is covered by a maximal implicant")
}

// ---------------------------------------------------------------------------
// Demo dataset

pub const DEMO_SEED: u64 = 69;
pub const DEMO_CASES: usize = 69;

const IA: [(&str, &str); 5] = [
    ("networking", "Networking"),
    ("data_warehouse", "Data Warehouse"),
    ("terminal", "Terminal"),
    ("sensors", "Sensors"),
    ("interaction_payment", "Interaction & Payment"),
];

const BM: [(&str, &str); 5] = [
    ("public_information", "Public Information"),
    ("facilities_management", "Facilities Management"),
    ("healthcare", "Healthcare"),
    ("education", "Education"),
    ("accessibility", "Accessibility"),
];

const OUTCOME: (&str, &str) = ("development", "Smart Community Development");

/// Recipes over the five IA conditions, one list per BM pattern.
const BM_RECIPES: [&[&str]; 5] = [
    &["--11-"],
    &["11-1-"],
    &["---11", "1-0--"],
    &["-11--", "0---1"],
    &["--1-1"],
];

/// Development recipes over IA then BM, each with present literals in
/// both groups.
const DEVELOPMENT_RECIPES: [&str; 2] = ["--11-1----", "1------1--"];

pub struct Demo {
    pub schema: Schema,
    pub dataset: RawDataset,
    pub config: String,
}

/// Largest perturbation added to derived demo columns; smaller than the
/// gap between generated memberships and 0.5.
const DEMO_JITTER: f64 = 0.08;

fn jitter(rng: &mut ChaCha8Rng, m: f64) -> f64 {
    let u: f64 = rng.random();
    (m + (2.0 * u - 1.0) * DEMO_JITTER).clamp(0.0, 1.0)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn fuzzy_or(recipes: &[&str], m: &[f64]) -> f64 {
    recipes
        .iter()
        .map(|r| {
            let t: Implicant = r.parse().expect("static recipe");
            t.membership(m).expect("static recipe length")
        })
        .fold(0.0, f64::max)
}

/// Builds the demo: 69 communities, five IA conditions, five BM patterns
/// derived from IA recipes, and a development outcome over both groups.
/// Derived columns carry a small jitter that never crosses 0.5.
pub fn demo() -> Demo {
    let mut rng = ChaCha8Rng::seed_from_u64(DEMO_SEED);
    let material = Material::Mixed;
    let mut conditions: Vec<ConditionDef> = IA
        .iter()
        .map(|(id, label)| ConditionDef::new(*id, *label, ConditionGroup::InformationArchitecture, material))
        .collect();
    conditions.extend(
        BM.iter()
            .map(|(id, label)| ConditionDef::new(*id, *label, ConditionGroup::BusinessModel, material)),
    );
    conditions.push(ConditionDef::new(
        OUTCOME.0,
        OUTCOME.1,
        ConditionGroup::Outcome,
        material,
    ));

    let cases: Vec<String> = (1..=DEMO_CASES).map(|i| format!("community_{i:02}")).collect();
    let mut values = Vec::with_capacity(DEMO_CASES);
    for _ in 0..DEMO_CASES {
        let ia: Vec<f64> = (0..IA.len())
            .map(|_| round2(10.0 * draw(&mut rng, DEFAULT_MARGIN)) / 10.0)
            .collect();
        let bm: Vec<f64> = BM_RECIPES
            .iter()
            .map(|r| round2(10.0 * jitter(&mut rng, fuzzy_or(r, &ia))) / 10.0)
            .collect();
        let all: Vec<f64> = ia.iter().chain(&bm).copied().collect();
        let dev = round2(10.0 * jitter(&mut rng, fuzzy_or(&DEVELOPMENT_RECIPES, &all)));
        let mut row: Vec<f64> = all.iter().map(|m| round2(10.0 * m)).collect();
        row.push(dev);
        values.push(row);
    }
    let dataset = RawDataset::new(cases, conditions.clone(), values).expect("demo shape");
    let schema = Schema::new(conditions).expect("demo schema");
    Demo {
        schema,
        dataset,
        config: demo_config(),
    }
}

fn demo_config() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dataset = \"dataset.csv\"");
    let _ = writeln!(s, "schema = \"schema.toml\"");
    let _ = writeln!(s);
    let _ = writeln!(s, "[truth_table]");
    let _ = writeln!(s, "freq_threshold = 1");
    let _ = writeln!(s, "cons_threshold = 0.8");
    let _ = writeln!(s);
    let _ = writeln!(s, "# scores are on [0, 10]; anchors are full in, crossover, full out");
    let _ = writeln!(s, "[calibration]");
    for (id, _) in IA.iter().chain(&BM).chain(std::iter::once(&OUTCOME)) {
        let _ = writeln!(s, "{id} = [9.5, 5.0, 0.5]");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[expectations]");
    for (id, _) in IA.iter().chain(&BM) {
        let _ = writeln!(s, "{id} = \"present\"");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[[run]]");
    let _ = writeln!(s, "name = \"development\"");
    let _ = writeln!(s, "outcome = \"development\"");
    for (id, _) in &BM {
        let _ = writeln!(s);
        let _ = writeln!(s, "[[run]]");
        let _ = writeln!(s, "name = \"{id}\"");
        let _ = writeln!(s, "outcome = \"{id}\"");
        let ia: Vec<String> = IA.iter().map(|(c, _)| format!("\"{c}\"")).collect();
        let _ = writeln!(s, "conditions = [{}]", ia.join(", "));
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[hypotheses]");
    let _ = writeln!(s, "group_integration = [\"development\"]");
    let bm: Vec<String> = BM.iter().map(|(c, _)| format!("\"{c}\"")).collect();
    let _ = writeln!(s, "distinct_outcomes = [{}]", bm.join(", "));
    let _ = writeln!(s);
    let _ = writeln!(s, "[output]");
    let _ = writeln!(s, "dir = \"out\"");
    s
}

impl Demo {
    pub fn dataset_csv(&self) -> String {
        let mut buf = Vec::new();
        write_dataset(&self.dataset, &mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Writes `schema.toml`, `dataset.csv` and `config.toml` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let files = [
            ("schema.toml", self.schema.to_toml_string()),
            ("dataset.csv", self.dataset_csv()),
            ("config.toml", self.config.clone()),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn imps(v: &[&str]) -> Vec<Implicant> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            brute_force_minimal_dnf(&[0b11], &[0b01, 0b10], 2).unwrap(),
            vec![imps(&["1-"]), imps(&["-1"])]
        );
        assert_eq!(
            brute_force_minimal_dnf(&[0b000, 0b001, 0b011, 0b111], &[], 3).unwrap(),
            vec![imps(&["00-", "-11"])]
        );
        assert_eq!(
            brute_force_minimal_dnf(&(0..8).collect::<Vec<_>>(), &[], 3).unwrap(),
            vec![vec![Implicant::universal(3)]]
        );
        assert_eq!(
            brute_force_minimal_dnf(&[0], &[], 5),
            Err(SynthError::OracleTooLarge(5))
        );
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = SynthSpec::new(6, 69, imps(&["10----"]), 0.05, 7);
        let (a, ga) = generate_synthetic(&spec).unwrap();
        let (b, gb) = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ga, gb);
        let (c, _) = generate_synthetic(&SynthSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_values_avoid_the_crossover() {
        let spec = SynthSpec::new(4, 200, imps(&["1-0-"]), 0.0, 1);
        let (d, _) = generate_synthetic(&spec).unwrap();
        for row in &d.values {
            for v in row {
                assert!((0.0..=10.0).contains(v));
                assert!((v - 5.0).abs() >= 10.0 * spec.margin - 1e-9);
            }
        }
    }

    #[test]
    fn invalid_specs() {
        let ok = SynthSpec::new(3, 10, imps(&["1--"]), 0.0, 0);
        assert_eq!(
            generate_synthetic(&SynthSpec { n: 0, ..ok.clone() }).unwrap_err(),
            SynthError::NoCases
        );
        assert_eq!(
            generate_synthetic(&SynthSpec {
                planted: vec![],
                ..ok.clone()
            })
            .unwrap_err(),
            SynthError::NoPlanted
        );
        assert!(matches!(
            generate_synthetic(&SynthSpec {
                planted: imps(&["1-"]),
                ..ok.clone()
            }),
            Err(SynthError::PlantedLength { .. })
        ));
        assert!(matches!(
            generate_synthetic(&SynthSpec {
                noise: 1.0,
                ..ok.clone()
            }),
            Err(SynthError::BadNoise(_))
        ));
        assert!(matches!(
            generate_synthetic(&SynthSpec { k: 17, ..ok }),
            Err(SynthError::BadConditionCount(17))
        ));
    }

    #[test]
    fn demo_shape() {
        let d = demo();
        assert_eq!(d.dataset.n_cases(), 69);
        let count = |g| d.schema.conditions.iter().filter(|c| c.group == g).count();
        assert_eq!(count(ConditionGroup::InformationArchitecture), 5);
        assert_eq!(count(ConditionGroup::BusinessModel), 5);
        assert_eq!(count(ConditionGroup::Outcome), 1);
        for row in &d.dataset.values {
            assert!(row.iter().all(|v| (v - 5.0).abs() > 1.0));
        }
    }
}
