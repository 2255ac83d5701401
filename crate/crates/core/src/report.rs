use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combinatorial::Strategy;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Local,
    Svetlichny,
    /// Parties split into exactly this many collaborating groups.
    GGroup(usize),
    Biseparable,
    Tsirelson,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundKind::Local => f.write_str("local"),
            BoundKind::Svetlichny => f.write_str("svetlichny"),
            BoundKind::GGroup(g) => write!(f, "g_group:{g}"),
            BoundKind::Biseparable => f.write_str("biseparable"),
            BoundKind::Tsirelson => f.write_str("tsirelson"),
        }
    }
}

impl FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "local" => Ok(BoundKind::Local),
            "svetlichny" => Ok(BoundKind::Svetlichny),
            "biseparable" | "diew" => Ok(BoundKind::Biseparable),
            "tsirelson" => Ok(BoundKind::Tsirelson),
            other => other
                .strip_prefix("g_group:")
                .and_then(|g| g.parse().ok())
                .map(BoundKind::GGroup)
                .ok_or_else(|| format!("unknown bound kind \"{other}\"")),
        }
    }
}

impl Serialize for BoundKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BoundKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "combinatorial-exact")]
    CombinatorialExact,
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "quantum-achieved-upper")]
    QuantumAchievedUpper,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::CombinatorialExact => "combinatorial-exact",
            Method::ClosedForm => "closed-form",
            Method::QuantumAchievedUpper => "quantum-achieved-upper",
        })
    }
}

/// Integer values stay exact end to end; everything else is a double.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Integer(i64),
    Real(f64),
}

impl BoundValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            BoundValue::Integer(v) => v as f64,
            BoundValue::Real(v) => v,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match *self {
            BoundValue::Integer(v) => Some(v),
            BoundValue::Real(_) => None,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Integer(v) => write!(f, "{v}"),
            BoundValue::Real(v) => write!(f, "{v:.6}"),
        }
    }
}

/// A lower bound on an expression together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: BoundValue,
    pub method: Method,
    #[serde(default)]
    pub witness: Option<Strategy>,
}

impl BoundReport {
    pub fn new(kind: BoundKind, value: BoundValue, method: Method) -> Self {
        Self { kind, value, method, witness: None }
    }

    pub fn with_witness(mut self, witness: Strategy) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Whether this bound can describe an expression over `scenario`.
    pub fn compatible_with(&self, scenario: &Scenario) -> Result<(), String> {
        let n = scenario.parties();
        match self.kind {
            BoundKind::Svetlichny | BoundKind::Biseparable if n < 3 => {
                return Err(format!("{} bound needs at least 3 parties, expression has {n}", self.kind));
            }
            BoundKind::GGroup(g) if g < 2 || g > n => {
                return Err(format!("{} bound does not fit {n} parties", self.kind));
            }
            _ => {}
        }
        if let Some(w) = &self.witness {
            w.check(scenario).map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::{DeterministicStrategy, GroupedStrategy};

    #[test]
    fn kind_strings() {
        for kind in [
            BoundKind::Local,
            BoundKind::Svetlichny,
            BoundKind::GGroup(3),
            BoundKind::Biseparable,
            BoundKind::Tsirelson,
        ] {
            assert_eq!(kind.to_string().parse::<BoundKind>().unwrap(), kind);
        }
        assert!("g_group:x".parse::<BoundKind>().is_err());
    }

    #[test]
    fn report_json_shape() {
        let r = BoundReport::new(BoundKind::Local, BoundValue::Integer(1), Method::CombinatorialExact)
            .with_witness(Strategy::Deterministic(DeterministicStrategy::new(vec![vec![0, 0], vec![0, 1]])));
        let text = r.to_json();
        assert_eq!(
            text,
            r#"{"kind":"local","value":1,"method":"combinatorial-exact","witness":[[0,0],[0,1]]}"#
        );
        let back = BoundReport::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);

        let q = BoundReport::new(BoundKind::Tsirelson, BoundValue::Real(2.0 - 2f64.sqrt()), Method::ClosedForm);
        let text = q.to_json();
        assert_eq!(
            text,
            r#"{"kind":"tsirelson","value":0.5857864376269049,"method":"closed-form","witness":null}"#
        );
        assert_eq!(BoundReport::from_json(&text).unwrap(), q);

        let g = BoundReport::new(BoundKind::Svetlichny, BoundValue::Real(2.0), Method::ClosedForm)
            .with_witness(Strategy::Grouped(GroupedStrategy::new(
                vec![vec![1], vec![2, 3]],
                vec![vec![0, 1], vec![0, 0, 1, 1]],
            )));
        let text = g.to_json();
        assert!(text.contains(r#""value":2.0"#));
        assert!(text.contains(r#""witness":{"groups":[[1],[2,3]],"tables":[[0,1],[0,0,1,1]]}"#));
        let back = BoundReport::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
    }
}
