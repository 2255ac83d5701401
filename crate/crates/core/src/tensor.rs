use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Dense coefficient tensor over `(settings vector, outcome residue)`.
///
/// Entry order is settings vectors in lexicographic order, then residue.
/// Serializes as a JSON list of `{"s": [...], "r": r, "c": coefficient}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TensorEntry>", into = "Vec<TensorEntry>")]
pub struct ExpandedTensor {
    scenario: Scenario,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub s: Vec<usize>,
    pub r: usize,
    pub c: f64,
}

impl ExpandedTensor {
    pub fn from_values(scenario: Scenario, values: Vec<f64>) -> Result<Self> {
        let expected = scenario
            .num_settings_vectors()
            .and_then(|v| v.checked_mul(scenario.outcomes()));
        if expected != Some(values.len()) {
            return Err(Error::DimensionMismatch(format!(
                "tensor for {scenario} needs m^n*k entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor"));
        }
        Ok(Self { scenario, values })
    }

    /// Builds a tensor by evaluating `coefficient(s, r)` on every entry.
    pub fn from_fn(scenario: Scenario, coefficient: impl Fn(&[usize], usize) -> f64) -> Result<Self> {
        let k = scenario.outcomes();
        let values = scenario
            .settings_vectors()
            .flat_map(|s| (0..k).map(|r| coefficient(&s, r)).collect::<Vec<_>>())
            .collect();
        Self::from_values(scenario, values)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, s: &[usize], r: usize) -> Result<f64> {
        let idx = self.scenario.settings_index(s)?;
        if r >= self.scenario.outcomes() {
            return Err(Error::IndexOutOfRange(format!("residue {r}")));
        }
        Ok(self.values[idx * self.scenario.outcomes() + r])
    }

    pub fn entries(&self) -> impl Iterator<Item = TensorEntry> + '_ {
        let k = self.scenario.outcomes();
        self.values.iter().enumerate().map(move |(i, &c)| TensorEntry {
            s: self.scenario.settings_from_index(i / k),
            r: i % k,
            c,
        })
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute entry-wise difference, or `None` when scenarios differ.
    pub fn max_abs_diff(&self, other: &ExpandedTensor) -> Option<f64> {
        (self.scenario == other.scenario).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn approx_eq(&self, other: &ExpandedTensor, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }

    /// Integer view of the entries, when all of them are exact integers.
    pub fn as_integers(&self) -> Option<Vec<i64>> {
        const LIMIT: f64 = (1u64 << 40) as f64;
        self.values
            .iter()
            .map(|&v| (v.fract() == 0.0 && v.abs() < LIMIT).then_some(v as i64))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tensor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl TryFrom<Vec<TensorEntry>> for ExpandedTensor {
    type Error = Error;

    fn try_from(entries: Vec<TensorEntry>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Schema("empty tensor".into()))?;
        let n = first.s.len();
        let m = entries.iter().flat_map(|e| e.s.iter()).max().map_or(0, |x| x + 1);
        let k = entries.iter().map(|e| e.r).max().map_or(0, |x| x + 1);
        let scenario = Scenario::new(n, m, k)?;
        let total = scenario
            .num_settings_vectors()
            .and_then(|v| v.checked_mul(k))
            .ok_or_else(|| Error::Schema("tensor too large".into()))?;
        let mut values = vec![None; total];
        for e in &entries {
            let idx = scenario.settings_index(&e.s)? * k + e.r;
            if values[idx].replace(e.c).is_some() {
                return Err(Error::Schema(format!("duplicate entry s={:?} r={}", e.s, e.r)));
            }
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Schema("tensor is missing entries".into()))?;
        Self::from_values(scenario, values)
    }
}

impl From<ExpandedTensor> for Vec<TensorEntry> {
    fn from(t: ExpandedTensor) -> Self {
        t.entries().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{BellExpression, CoefficientFunction};

    #[test]
    fn chsh_tensor_counts() {
        let t = BellExpression::omega(Scenario::new(2, 2, 2).unwrap()).expand().unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.nonzero_count(), 4);
        assert_eq!(t.sum(), 4.0);
    }

    #[test]
    fn zero_function_gives_zero_tensor() {
        let scenario = Scenario::new(3, 3, 4).unwrap();
        let e = BellExpression::general(scenario, CoefficientFunction::zero(3, 4).unwrap()).unwrap();
        let t = e.expand().unwrap();
        assert_eq!(t.len(), 27 * 4);
        assert_eq!(t.nonzero_count(), 0);
    }

    #[test]
    fn expand_agrees_with_coefficient() {
        let scenario = Scenario::new(3, 3, 3).unwrap();
        let e = BellExpression::omega(scenario);
        let t = e.expand().unwrap();
        for entry in t.entries() {
            assert_eq!(entry.c, e.coefficient(&entry.s, entry.r).unwrap());
        }
    }

    #[test]
    fn size_guard() {
        let e = BellExpression::omega(Scenario::new(12, 4, 2).unwrap());
        match e.expand() {
            Err(Error::SizeGuardExceeded { entries, guard }) => {
                assert_eq!(entries, 4u128.pow(12) * 2);
                assert_eq!(guard, 10_000_000);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
        let small = BellExpression::omega(Scenario::new(2, 2, 2).unwrap());
        assert!(small.expand_with_guard(7).is_err());
        assert!(small.expand_with_guard(8).is_ok());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let t = BellExpression::omega(Scenario::new(2, 3, 3).unwrap()).expand().unwrap();
        let text = t.to_json();
        assert!(text.starts_with(r#"[{"s":[0,0],"r":0,"c":0.0}"#));
        let back = ExpandedTensor::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_rejects_incomplete_or_duplicate() {
        assert!(ExpandedTensor::from_json("[]").is_err());
        assert!(ExpandedTensor::from_json(r#"[{"s":[0,1],"r":1,"c":1.0}]"#).is_err());
        let dup = r#"[{"s":[0,0],"r":0,"c":0},{"s":[0,0],"r":0,"c":0},{"s":[0,1],"r":1,"c":0},
            {"s":[1,0],"r":0,"c":0},{"s":[1,0],"r":1,"c":0},{"s":[1,1],"r":0,"c":0},
            {"s":[1,1],"r":1,"c":0},{"s":[0,1],"r":0,"c":0}]"#;
        assert!(matches!(ExpandedTensor::from_json(dup), Err(Error::Json(_))));
    }
}
