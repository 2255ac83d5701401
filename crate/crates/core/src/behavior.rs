//! Behaviors: conditional outcome statistics, their validation, evaluation of
//! expressions on them, and bound-based classification.
//!
//! The canonical form is the reduced table `P([sum r]_k = r | s)`. A full table
//! `P(r_1..r_n | s)` is optional and only needed for no-signaling checks and
//! for the party-recursive decomposition.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{BoundKind, BoundReport};
use crate::scenario::{BellExpression, Scenario};

/// Tolerance for probability validity checks.
pub const VALIDITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    reduced: Vec<f64>,
    full: Option<Vec<f64>>,
}

/// JSON schema: settings keys are comma-joined decimal integers.
#[derive(Debug, Serialize, Deserialize)]
struct BehaviorDoc {
    n: usize,
    m: usize,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reduced: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    full: Option<BTreeMap<String, Vec<f64>>>,
}

pub(crate) fn settings_key(s: &[usize]) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn parse_key(scenario: &Scenario, key: &str) -> Result<usize> {
    let s = key
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Schema(format!("malformed settings key \"{key}\"")))?;
    scenario
        .settings_index(&s)
        .map_err(|e| Error::Schema(format!("settings key \"{key}\": {e}")))
}

fn table_from_map(
    scenario: &Scenario,
    map: &BTreeMap<String, Vec<f64>>,
    row_len: usize,
    what: &str,
) -> Result<Vec<f64>> {
    let rows = scenario
        .num_settings_vectors()
        .ok_or_else(|| Error::Schema("scenario too large".into()))?;
    let mut table: Vec<Option<&Vec<f64>>> = vec![None; rows];
    for (key, row) in map {
        let idx = parse_key(scenario, key)?;
        if row.len() != row_len {
            return Err(Error::Schema(format!(
                "{what} row \"{key}\" has {} entries, expected {row_len}",
                row.len()
            )));
        }
        if table[idx].replace(row).is_some() {
            return Err(Error::Schema(format!("duplicate {what} key \"{key}\"")));
        }
    }
    let mut out = Vec::with_capacity(rows * row_len);
    for (idx, row) in table.into_iter().enumerate() {
        let row = row.ok_or_else(|| {
            Error::Schema(format!(
                "{what} table is missing settings \"{}\"",
                settings_key(&scenario.settings_from_index(idx))
            ))
        })?;
        out.extend_from_slice(row);
    }
    Ok(out)
}

fn check_rows(scenario: &Scenario, table: &[f64], row_len: usize) -> Result<()> {
    for (idx, row) in table.chunks(row_len).enumerate() {
        let key = || settings_key(&scenario.settings_from_index(idx));
        if let Some(&v) = row.iter().find(|v| !v.is_finite() || **v < -VALIDITY_TOL) {
            return Err(Error::NegativeProbability { settings: key(), value: v });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::Normalization { settings: key(), sum });
        }
    }
    Ok(())
}

/// Outcome-sum residue of the joint outcome with mixed-radix index `idx`.
fn outcome_sum(mut idx: usize, n: usize, k: usize) -> usize {
    let mut sum = 0;
    for _ in 0..n {
        sum += idx % k;
        idx /= k;
    }
    sum % k
}

fn outcomes_from_index(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    let mut r = vec![0; n];
    for slot in r.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
    r
}

fn outcome_index(r: &[usize], k: usize) -> usize {
    r.iter().fold(0, |acc, &ri| acc * k + ri)
}

fn reduce_full(scenario: &Scenario, full: &[f64]) -> Vec<f64> {
    let n = scenario.parties();
    let k = scenario.outcomes();
    let width = k.pow(n as u32);
    full.chunks(width)
        .flat_map(|row| {
            let mut reduced = vec![0.0; k];
            for (idx, p) in row.iter().enumerate() {
                reduced[outcome_sum(idx, n, k)] += p;
            }
            reduced
        })
        .collect()
}

impl Behavior {
    /// Builds and validates a behavior from a reduced table
    /// (`m^n` rows of `k` entries, rows in settings-index order).
    pub fn from_reduced(scenario: Scenario, reduced: Vec<f64>) -> Result<Self> {
        let rows = scenario.num_settings_vectors().unwrap_or(usize::MAX);
        if reduced.len() != rows.saturating_mul(scenario.outcomes()) {
            return Err(Error::DimensionMismatch(format!(
                "reduced table for {scenario} needs {} entries, got {}",
                rows.saturating_mul(scenario.outcomes()),
                reduced.len()
            )));
        }
        check_rows(&scenario, &reduced, scenario.outcomes())?;
        Ok(Self { scenario, reduced, full: None })
    }

    /// Builds from a full table (`m^n` rows of `k^n` entries); the reduced table is derived.
    pub fn from_full(scenario: Scenario, full: Vec<f64>) -> Result<Self> {
        let width = scenario
            .outcomes()
            .checked_pow(scenario.parties() as u32)
            .ok_or_else(|| Error::DimensionMismatch("full table too large".into()))?;
        let rows = scenario.num_settings_vectors().unwrap_or(usize::MAX);
        if full.len() != rows.saturating_mul(width) {
            return Err(Error::DimensionMismatch(format!(
                "full table for {scenario} needs {} entries, got {}",
                rows.saturating_mul(width),
                full.len()
            )));
        }
        check_rows(&scenario, &full, width)?;
        let reduced = reduce_full(&scenario, &full);
        Ok(Self { scenario, reduced, full: Some(full) })
    }

    /// Full and reduced tables together; they must agree within tolerance.
    pub fn from_tables(scenario: Scenario, reduced: Vec<f64>, full: Vec<f64>) -> Result<Self> {
        let stated = Self::from_reduced(scenario, reduced)?;
        let derived = Self::from_full(scenario, full)?;
        let k = scenario.outcomes();
        for (idx, (a, b)) in stated
            .reduced
            .chunks(k)
            .zip(derived.reduced.chunks(k))
            .enumerate()
        {
            if a.iter().zip(b).any(|(x, y)| (x - y).abs() > VALIDITY_TOL) {
                return Err(Error::ReductionMismatch {
                    settings: settings_key(&scenario.settings_from_index(idx)),
                });
            }
        }
        Ok(Self { full: derived.full, ..stated })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BehaviorDoc =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let scenario = Scenario::new(doc.n, doc.m, doc.k)?;
        let reduced = doc
            .reduced
            .as_ref()
            .map(|map| table_from_map(&scenario, map, scenario.outcomes(), "reduced"))
            .transpose()?;
        let full = doc
            .full
            .as_ref()
            .map(|map| {
                let width = scenario
                    .outcomes()
                    .checked_pow(scenario.parties() as u32)
                    .ok_or_else(|| Error::Schema("full table too large".into()))?;
                table_from_map(&scenario, map, width, "full")
            })
            .transpose()?;
        match (reduced, full) {
            (Some(r), Some(f)) => Self::from_tables(scenario, r, f),
            (Some(r), None) => Self::from_reduced(scenario, r),
            (None, Some(f)) => Self::from_full(scenario, f),
            (None, None) => Err(Error::Schema("behavior needs a \"reduced\" or \"full\" table".into())),
        }
    }

    pub fn ingest(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let to_map = |table: &[f64], width: usize| -> BTreeMap<String, Vec<f64>> {
            table
                .chunks(width)
                .enumerate()
                .map(|(idx, row)| (settings_key(&self.scenario.settings_from_index(idx)), row.to_vec()))
                .collect()
        };
        let k = self.scenario.outcomes();
        let doc = BehaviorDoc {
            n: self.scenario.parties(),
            m: self.scenario.settings(),
            k,
            reduced: Some(to_map(&self.reduced, k)),
            full: self
                .full
                .as_ref()
                .map(|f| to_map(f, k.pow(self.scenario.parties() as u32))),
        };
        serde_json::to_string(&doc).expect("behavior serializes")
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn reduced(&self) -> &[f64] {
        &self.reduced
    }

    pub fn full(&self) -> Option<&[f64]> {
        self.full.as_deref()
    }

    pub fn has_full(&self) -> bool {
        self.full.is_some()
    }

    /// `P([sum r]_k = r | s)`.
    pub fn prob_sum(&self, s: &[usize], r: usize) -> Result<f64> {
        let idx = self.scenario.settings_index(s)?;
        if r >= self.scenario.outcomes() {
            return Err(Error::IndexOutOfRange(format!("residue {r}")));
        }
        Ok(self.reduced[idx * self.scenario.outcomes() + r])
    }

    /// `P(r_1..r_n | s)` from the full table.
    pub fn prob_joint(&self, s: &[usize], r: &[usize]) -> Result<f64> {
        let full = self.full.as_ref().ok_or(Error::FullTableAbsent)?;
        let k = self.scenario.outcomes();
        if r.len() != self.scenario.parties() || r.iter().any(|&ri| ri >= k) {
            return Err(Error::IndexOutOfRange(format!("outcome vector {r:?}")));
        }
        let width = k.pow(self.scenario.parties() as u32);
        Ok(full[self.scenario.settings_index(s)? * width + outcome_index(r, k)])
    }

    /// Uniform distribution over all joint outcomes.
    pub fn uniform(scenario: Scenario) -> Result<Self> {
        let width = scenario.outcomes().pow(scenario.parties() as u32);
        let rows = scenario
            .num_settings_vectors()
            .ok_or_else(|| Error::DimensionMismatch("scenario too large".into()))?;
        Self::from_full(scenario, vec![1.0 / width as f64; rows * width])
    }

    /// The Popescu-Rohrlich box: `a + b = x * y (mod 2)` with uniform marginals.
    pub fn pr_box() -> Self {
        let scenario = Scenario::new(2, 2, 2).expect("valid");
        let mut full = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        if (a + b) % 2 == x * y {
                            full[(x * 2 + y) * 4 + a * 2 + b] = 0.5;
                        }
                    }
                }
            }
        }
        Self::from_full(scenario, full).expect("PR box is valid")
    }

    /// Deterministic behavior from per-party response tables `responses[i][s_i]`.
    pub fn deterministic(scenario: Scenario, responses: &[Vec<usize>]) -> Result<Self> {
        let n = scenario.parties();
        let k = scenario.outcomes();
        if responses.len() != n
            || responses
                .iter()
                .any(|t| t.len() != scenario.settings() || t.iter().any(|&r| r >= k))
        {
            return Err(Error::DimensionMismatch(format!(
                "deterministic strategy does not fit {scenario}"
            )));
        }
        let width = k.pow(n as u32);
        let mut full = Vec::new();
        for s in scenario.settings_vectors() {
            let outcome: Vec<usize> = s.iter().enumerate().map(|(i, &si)| responses[i][si]).collect();
            let mut row = vec![0.0; width];
            row[outcome_index(&outcome, k)] = 1.0;
            full.extend(row);
        }
        Self::from_full(scenario, full)
    }

    /// Full-correlation box: `P(r | s) = q_s([sum r]_k) / k^(n-1)`.
    ///
    /// Every proper subset of parties sees uniform marginals, so such boxes are
    /// no-signaling for any choice of the sum distributions `q_s`.
    pub fn sum_box(scenario: Scenario, sum_distributions: Vec<f64>) -> Result<Self> {
        let reduced = Self::from_reduced(scenario, sum_distributions)?.reduced;
        let n = scenario.parties();
        let k = scenario.outcomes();
        let width = k.pow(n as u32);
        let scale = (k as f64).powi(n as i32 - 1);
        let full = reduced
            .chunks(k)
            .flat_map(|q| (0..width).map(move |idx| q[outcome_sum(idx, n, k)] / scale))
            .collect();
        Self::from_tables(scenario, reduced, full)
    }

    /// A random no-signaling behavior: a mixture of random deterministic
    /// strategies and a random full-correlation box.
    pub fn random_no_signaling<R: Rng + ?Sized>(scenario: Scenario, rng: &mut R) -> Result<Self> {
        let n = scenario.parties();
        let m = scenario.settings();
        let k = scenario.outcomes();
        let rows = scenario
            .num_settings_vectors()
            .ok_or_else(|| Error::DimensionMismatch("scenario too large".into()))?;
        let mut weights: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);

        let mut sums = Vec::with_capacity(rows * k);
        for _ in 0..rows {
            let row: Vec<f64> = (0..k).map(|_| rng.random::<f64>().powi(3)).collect();
            let z: f64 = row.iter().sum::<f64>().max(1e-300);
            sums.extend(row.iter().map(|p| p / z));
        }
        let mut mix = Self::sum_box(scenario, sums)?;
        let mut mixed_weight = weights[0];
        for &w in &weights[1..] {
            let responses: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..m).map(|_| rng.random_range(0..k)).collect())
                .collect();
            let det = Self::deterministic(scenario, &responses)?;
            mixed_weight += w;
            mix = mix.mix(&det, (mixed_weight - w) / mixed_weight)?;
        }
        Ok(mix)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Behavior, lambda: f64) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario.to_string(),
                found: other.scenario.to_string(),
            });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::IndexOutOfRange(format!("mixing weight {lambda}")));
        }
        let blend = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect()
        };
        Ok(Self {
            scenario: self.scenario,
            reduced: blend(&self.reduced, &other.reduced),
            full: match (&self.full, &other.full) {
                (Some(a), Some(b)) => Some(blend(a, b)),
                _ => None,
            },
        })
    }

    /// Checks that every marginal of every proper subset of parties is
    /// independent of the settings of the remaining parties.
    pub fn check_no_signaling(&self) -> Result<NoSignalingVerdict> {
        let full = self.full.as_ref().ok_or(Error::FullTableAbsent)?;
        let n = self.scenario.parties();
        let k = self.scenario.outcomes();
        let width = k.pow(n as u32);
        let mut worst = NoSignalingVerdict { no_signaling: true, max_deviation: 0.0, witness: None };

        for subset in 1..(1usize << n) - 1 {
            let members: Vec<usize> = (0..n).filter(|i| subset >> i & 1 == 1).collect();
            let mut reference: BTreeMap<Vec<usize>, (Vec<usize>, Vec<f64>)> = BTreeMap::new();
            for (sidx, s) in self.scenario.settings_vectors().enumerate() {
                let key: Vec<usize> = members.iter().map(|&i| s[i]).collect();
                let mut marginal = vec![0.0; k.pow(members.len() as u32)];
                for (ridx, p) in full[sidx * width..(sidx + 1) * width].iter().enumerate() {
                    let r = outcomes_from_index(ridx, n, k);
                    let sub: Vec<usize> = members.iter().map(|&i| r[i]).collect();
                    marginal[outcome_index(&sub, k)] += p;
                }
                match reference.get(&key) {
                    None => {
                        reference.insert(key, (s, marginal));
                    }
                    Some((first, expected)) => {
                        let dev = expected
                            .iter()
                            .zip(&marginal)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        if dev > worst.max_deviation {
                            worst.max_deviation = dev;
                            worst.witness = Some(format!(
                                "parties {:?}: settings {} vs {}",
                                members.iter().map(|i| i + 1).collect::<Vec<_>>(),
                                settings_key(first),
                                settings_key(&s)
                            ));
                        }
                    }
                }
            }
        }
        worst.no_signaling = worst.max_deviation <= VALIDITY_TOL;
        if worst.no_signaling {
            worst.witness = None;
        }
        Ok(worst)
    }

    /// `P(r_party = r | s)` read off at the given settings vector.
    pub(crate) fn party_marginal(&self, s: &[usize], party: usize, r: usize) -> Result<f64> {
        let full = self.full.as_ref().ok_or(Error::FullTableAbsent)?;
        let n = self.scenario.parties();
        let k = self.scenario.outcomes();
        let width = k.pow(n as u32);
        let sidx = self.scenario.settings_index(s)?;
        Ok(full[sidx * width..(sidx + 1) * width]
            .iter()
            .enumerate()
            .filter(|(ridx, _)| outcomes_from_index(*ridx, n, k)[party] == r)
            .map(|(_, p)| p)
            .sum())
    }
}

pub(crate) fn joint_outcomes(idx: usize, n: usize, k: usize) -> Vec<usize> {
    outcomes_from_index(idx, n, k)
}

pub(crate) fn joint_index(r: &[usize], k: usize) -> usize {
    outcome_index(r, k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignalingVerdict {
    pub no_signaling: bool,
    pub max_deviation: f64,
    /// Description of the worst offending marginal, when signaling.
    pub witness: Option<String>,
}

/// `sum_s sum_r coefficient(s, r) * P([sum r]_k = r | s)`.
pub fn evaluate(expr: &BellExpression, behavior: &Behavior) -> Result<f64> {
    if expr.scenario() != behavior.scenario {
        return Err(Error::ScenarioMismatch {
            expected: expr.scenario().to_string(),
            found: behavior.scenario.to_string(),
        });
    }
    let k = behavior.scenario.outcomes();
    Ok(behavior
        .scenario
        .settings_vectors()
        .zip(behavior.reduced.chunks(k))
        .map(|(s, row)| {
            let sum: usize = s.iter().sum();
            row.iter()
                .enumerate()
                .map(|(r, p)| expr.coefficient_by_sum(sum, r) * p)
                .sum::<f64>()
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: BoundKind,
    pub bound: f64,
    pub violated: bool,
    /// `value - bound`; negative when the behavior dips below the bound.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub value: f64,
    pub verdicts: Vec<Verdict>,
}

impl std::fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "value {}", fmt_num(self.value))?;
        for v in &self.verdicts {
            let word = if v.violated { "violates" } else { "satisfies" };
            write!(f, "; {word} {} (margin {})", v.kind, fmt_num(v.margin))?;
        }
        Ok(())
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Compares the expression value on `behavior` against every supplied bound.
pub fn classify(
    expr: &BellExpression,
    behavior: &Behavior,
    bounds: &[BoundReport],
) -> Result<ClassificationReport> {
    let scenario = expr.scenario();
    for b in bounds {
        if let Err(why) = b.compatible_with(&scenario) {
            return Err(Error::BoundExpressionMismatch(why));
        }
    }
    let value = evaluate(expr, behavior)?;
    let verdicts = bounds
        .iter()
        .map(|b| {
            let bound = b.value.as_f64();
            Verdict {
                kind: b.kind,
                bound,
                violated: value < bound - VALIDITY_TOL,
                margin: value - bound,
            }
        })
        .collect();
    Ok(ClassificationReport { value, verdicts })
}
