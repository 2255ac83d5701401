//! Scenarios, coefficient functions and the symmetric full-correlation
//! expressions built from them.
//!
//! An expression is stored as its scenario plus the `m x k` table `f(s, r)`.
//! The coefficient of `P([sum r]_k = r | s)` is `f([sum s]_m, [r - floor(sum s / m)]_k)`
//! and is computed on demand; [`BellExpression::expand`] materializes the full
//! tensor behind a size guard.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::ExpandedTensor;

/// Default cap on the number of entries [`BellExpression::expand`] will materialize.
pub const DEFAULT_EXPAND_GUARD: u128 = 10_000_000;

/// `[x]_d`, always in `0..d`.
#[inline]
pub fn modulo(x: i64, d: usize) -> usize {
    x.rem_euclid(d as i64) as usize
}

/// `floor(x / d)` for possibly negative `x`.
#[inline]
pub fn floor_div(x: i64, d: usize) -> i64 {
    x.div_euclid(d as i64)
}

/// Checked `base^exp` in `u128`, saturating at `u128::MAX`.
pub(crate) fn pow_sat(base: usize, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// A Bell scenario: `n` parties, `m` settings each, `k` outcomes per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    n: usize,
    m: usize,
    k: usize,
}

#[derive(Deserialize)]
struct RawScenario {
    n: usize,
    m: usize,
    k: usize,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        Scenario::new(raw.n, raw.m, raw.k)
    }
}

impl Scenario {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        if n < 2 || m < 2 || k < 2 {
            return Err(Error::InvalidScenario { n, m, k });
        }
        Ok(Self { n, m, k })
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn settings(&self) -> usize {
        self.m
    }

    pub fn outcomes(&self) -> usize {
        self.k
    }

    /// Number of settings vectors, `m^n`, if it fits in memory-addressable range.
    pub fn num_settings_vectors(&self) -> Option<usize> {
        self.m.checked_pow(self.n as u32)
    }

    pub(crate) fn num_settings_vectors_sat(&self) -> u128 {
        pow_sat(self.m, self.n)
    }

    /// Lexicographic index of a settings vector, `s_1` most significant.
    pub fn settings_index(&self, s: &[usize]) -> Result<usize> {
        self.check_settings(s)?;
        Ok(s.iter().fold(0, |acc, &si| acc * self.m + si))
    }

    pub fn settings_from_index(&self, mut idx: usize) -> Vec<usize> {
        let mut s = vec![0; self.n];
        for slot in s.iter_mut().rev() {
            *slot = idx % self.m;
            idx /= self.m;
        }
        s
    }

    pub fn check_settings(&self, s: &[usize]) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::IndexOutOfRange(format!(
                "settings vector has {} entries, scenario has {} parties",
                s.len(),
                self.n
            )));
        }
        if let Some(&bad) = s.iter().find(|&&si| si >= self.m) {
            return Err(Error::IndexOutOfRange(format!(
                "setting {bad} is not below m={}",
                self.m
            )));
        }
        Ok(())
    }

    /// All settings vectors in lexicographic order.
    pub fn settings_vectors(&self) -> SettingsVectors {
        SettingsVectors {
            m: self.m,
            next: Some(vec![0; self.n]),
        }
    }

    /// Same `m` and `k` with a different number of parties.
    pub fn with_parties(&self, n: usize) -> Result<Self> {
        Scenario::new(n, self.m, self.k)
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.n, self.m, self.k)
    }
}

/// Odometer over `{0..m-1}^n`.
#[derive(Debug, Clone)]
pub struct SettingsVectors {
    m: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for SettingsVectors {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for digit in succ.iter_mut().rev() {
            *digit += 1;
            if *digit < self.m {
                carried = false;
                break;
            }
            *digit = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// The real table `f(s, r)` that fully characterizes an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFunction {
    m: usize,
    k: usize,
    table: Vec<f64>,
}

impl CoefficientFunction {
    /// Builds from rows indexed by setting `s`, columns by outcome `r`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(Error::DimensionMismatch(
                "coefficient table must have at least one row and one column".into(),
            ));
        }
        if let Some(row) = rows.iter().find(|row| row.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "ragged coefficient table: expected {k} columns, found a row with {}",
                row.len()
            )));
        }
        let table: Vec<f64> = rows.into_iter().flatten().collect();
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficient table"));
        }
        Ok(Self { m, k, table })
    }

    pub fn from_fn(m: usize, k: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let rows = (0..m).map(|s| (0..k).map(|r| f(s, r)).collect()).collect();
        Self::new(rows)
    }

    /// `f(0, r) = r`, `f(1, r) = [-r]_k`, zero elsewhere.
    pub fn f_i(m: usize, k: usize) -> Result<Self> {
        Self::from_fn(m, k, |s, r| match s {
            0 => r as f64,
            1 => modulo(-(r as i64), k) as f64,
            _ => 0.0,
        })
    }

    /// `f(s, r) = g(s) * r`.
    pub fn product(g: &[f64], k: usize) -> Result<Self> {
        Self::from_fn(g.len(), k, |s, r| g[s] * r as f64)
    }

    /// `f(s, r) = delta_{s,0} * r`.
    pub fn mabk(m: usize, k: usize) -> Result<Self> {
        Self::from_fn(m, k, |s, r| if s == 0 { r as f64 } else { 0.0 })
    }

    /// `f(s, r) = cos((s - delta) pi / m) * r`.
    pub fn cosine(m: usize, k: usize, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::NonFinite("cosine offset"));
        }
        Self::from_fn(m, k, |s, r| ((s as f64 - delta) * PI / m as f64).cos() * r as f64)
    }

    pub fn zero(m: usize, k: usize) -> Result<Self> {
        Self::from_fn(m, k, |_, _| 0.0)
    }

    pub fn settings(&self) -> usize {
        self.m
    }

    pub fn outcomes(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, s: usize, r: usize) -> f64 {
        self.table[s * self.k + r]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.table.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    /// The table as exact integers, when every entry is an integer of moderate size.
    pub fn as_integers(&self) -> Option<Vec<i64>> {
        const LIMIT: f64 = (1u64 << 40) as f64;
        self.table
            .iter()
            .map(|&v| (v.fract() == 0.0 && v.abs() < LIMIT).then_some(v as i64))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.as_integers().is_some()
    }

    /// Returns `g` when `f(s, r) = g(s) * r` for every entry.
    pub fn product_weights(&self) -> Option<Vec<f64>> {
        let g: Vec<f64> = (0..self.m).map(|s| self.get(s, 1)).collect();
        let matches = (0..self.m).all(|s| {
            (0..self.k).all(|r| {
                let want = g[s] * r as f64;
                (self.get(s, r) - want).abs() <= 1e-12 * want.abs().max(1.0)
            })
        });
        matches.then_some(g)
    }
}

/// A symmetric full-correlation expression: a scenario plus its coefficient function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpressionDoc", into = "ExpressionDoc")]
pub struct BellExpression {
    scenario: Scenario,
    f: CoefficientFunction,
}

/// JSON form `{"n":…, "m":…, "k":…, "f": [[…]…]}`.
#[derive(Serialize, Deserialize)]
struct ExpressionDoc {
    n: usize,
    m: usize,
    k: usize,
    f: Vec<Vec<f64>>,
}

impl TryFrom<ExpressionDoc> for BellExpression {
    type Error = Error;

    fn try_from(doc: ExpressionDoc) -> Result<Self> {
        let scenario = Scenario::new(doc.n, doc.m, doc.k)?;
        BellExpression::general(scenario, CoefficientFunction::new(doc.f)?)
    }
}

impl From<BellExpression> for ExpressionDoc {
    fn from(expr: BellExpression) -> Self {
        ExpressionDoc {
            n: expr.scenario.n,
            m: expr.scenario.m,
            k: expr.scenario.k,
            f: expr.f.rows(),
        }
    }
}

impl BellExpression {
    /// The unified expression built from `f_I`.
    pub fn omega(scenario: Scenario) -> Self {
        let f = CoefficientFunction::f_i(scenario.m, scenario.k)
            .expect("scenario dimensions are at least 2");
        Self { scenario, f }
    }

    pub fn general(scenario: Scenario, f: CoefficientFunction) -> Result<Self> {
        if f.m != scenario.m || f.k != scenario.k {
            return Err(Error::DimensionMismatch(format!(
                "coefficient table is {}x{}, scenario needs {}x{}",
                f.m, f.k, scenario.m, scenario.k
            )));
        }
        Ok(Self { scenario, f })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn function(&self) -> &CoefficientFunction {
        &self.f
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expression serializes")
    }

    /// Coefficient of `P([sum r]_k = r | s)`.
    pub fn coefficient(&self, s: &[usize], r: usize) -> Result<f64> {
        self.scenario.check_settings(s)?;
        if r >= self.scenario.k {
            return Err(Error::IndexOutOfRange(format!(
                "outcome residue {r} is not below k={}",
                self.scenario.k
            )));
        }
        Ok(self.coefficient_by_sum(s.iter().sum(), r))
    }

    /// Coefficient as a function of the settings sum only.
    #[inline]
    pub fn coefficient_by_sum(&self, setting_sum: usize, r: usize) -> f64 {
        let m = self.scenario.m;
        let k = self.scenario.k;
        let wraps = (setting_sum / m) as i64;
        self.f.get(setting_sum % m, modulo(r as i64 - wraps, k))
    }

    pub fn expand(&self) -> Result<ExpandedTensor> {
        self.expand_with_guard(DEFAULT_EXPAND_GUARD)
    }

    pub fn expand_with_guard(&self, guard: u128) -> Result<ExpandedTensor> {
        let entries = self
            .scenario
            .num_settings_vectors_sat()
            .saturating_mul(self.scenario.k as u128);
        if entries > guard {
            return Err(Error::SizeGuardExceeded { entries, guard });
        }
        let k = self.scenario.k;
        let values = self
            .scenario
            .settings_vectors()
            .flat_map(|s| {
                let sum: usize = s.iter().sum();
                (0..k).map(move |r| self.coefficient_by_sum(sum, r))
            })
            .collect();
        ExpandedTensor::from_values(self.scenario, values)
    }

    /// Constant and correlator weights for binary outcomes and `f = g * r`.
    ///
    /// The value on a behavior is `constant + sum_s weight(s) * E_s` with
    /// `E_s = P([sum r]_2 = 0 | s) - P([sum r]_2 = 1 | s)`.
    pub fn correlator_form(&self) -> Result<CorrelatorForm> {
        if self.scenario.k != 2 {
            return Err(Error::NotBinaryOutcome(self.scenario.k));
        }
        let g = self.f.product_weights().ok_or(Error::NotProductForm)?;
        let Scenario { n, m, .. } = self.scenario;
        let constant = 0.5 * (m as f64).powi(n as i32 - 1) * g.iter().sum::<f64>();
        let weights = self
            .scenario
            .settings_vectors()
            .map(|s| {
                let sum: usize = s.iter().sum();
                let sign = if (sum / m).is_multiple_of(2) { 1.0 } else { -1.0 };
                -0.5 * g[sum % m] * sign
            })
            .collect();
        Ok(CorrelatorForm {
            scenario: self.scenario,
            constant,
            weights,
        })
    }
}

/// `value = constant + sum_s weights[s] * E_s`, weights indexed like [`Scenario::settings_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorForm {
    pub scenario: Scenario,
    pub constant: f64,
    pub weights: Vec<f64>,
}

impl CorrelatorForm {
    pub fn weight(&self, s: &[usize]) -> Result<f64> {
        Ok(self.weights[self.scenario.settings_index(s)?])
    }

    pub fn evaluate(&self, correlators: &[f64]) -> Result<f64> {
        if correlators.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} correlators, got {}",
                self.weights.len(),
                correlators.len()
            )));
        }
        Ok(self.constant
            + self
                .weights
                .iter()
                .zip(correlators)
                .map(|(w, e)| w * e)
                .sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(n: usize, m: usize, k: usize) -> Scenario {
        Scenario::new(n, m, k).unwrap()
    }

    #[test]
    fn rejects_small_scenarios() {
        for (n, m, k) in [(1, 2, 2), (2, 1, 2), (2, 2, 1), (0, 0, 0)] {
            assert!(matches!(
                Scenario::new(n, m, k),
                Err(Error::InvalidScenario { .. })
            ));
        }
    }

    #[test]
    fn settings_vectors_are_lexicographic() {
        let s = sc(2, 3, 2);
        let all: Vec<_> = s.settings_vectors().collect();
        assert_eq!(all.len(), 9);
        for (idx, v) in all.iter().enumerate() {
            assert_eq!(s.settings_index(v).unwrap(), idx);
            assert_eq!(&s.settings_from_index(idx), v);
        }
        assert_eq!(all[5], vec![1, 2]);
    }

    #[test]
    fn omega_chsh_coefficients() {
        let omega = BellExpression::omega(sc(2, 2, 2));
        assert_eq!(omega.coefficient(&[0, 0], 1).unwrap(), 1.0);
        assert_eq!(omega.coefficient(&[0, 0], 0).unwrap(), 0.0);
        // sum 2 wraps once: [r - 1]_2 at r = 0
        assert_eq!(omega.coefficient(&[1, 1], 0).unwrap(), 1.0);
        assert_eq!(omega.coefficient(&[1, 1], 1).unwrap(), 0.0);
    }

    #[test]
    fn omega_only_touches_sums_zero_and_one() {
        let scenario = sc(3, 4, 3);
        let omega = BellExpression::omega(scenario);
        for s in scenario.settings_vectors() {
            let sum: usize = s.iter().sum();
            let any = (0..3).any(|r| omega.coefficient(&s, r).unwrap() != 0.0);
            assert_eq!(any, sum % 4 <= 1, "settings {s:?}");
        }
    }

    #[test]
    fn coefficient_examples() {
        let e = BellExpression::omega(sc(2, 3, 2));
        assert_eq!(e.coefficient(&[2, 2], 0).unwrap(), 1.0);
        let e = BellExpression::omega(sc(2, 2, 3));
        assert_eq!(e.coefficient(&[0, 0], 2).unwrap(), 2.0);
    }

    #[test]
    fn coefficient_index_errors() {
        let e = BellExpression::omega(sc(2, 2, 2));
        assert!(matches!(e.coefficient(&[0, 2], 0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(e.coefficient(&[0, 0], 2), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(e.coefficient(&[0], 0), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn general_with_f_i_is_omega() {
        for (n, m, k) in [(2, 2, 2), (3, 3, 2), (2, 4, 5), (4, 2, 3)] {
            let scenario = sc(n, m, k);
            let general =
                BellExpression::general(scenario, CoefficientFunction::f_i(m, k).unwrap()).unwrap();
            assert_eq!(general, BellExpression::omega(scenario));
            assert_eq!(general.expand().unwrap(), BellExpression::omega(scenario).expand().unwrap());
        }
    }

    #[test]
    fn general_rejects_mismatched_table() {
        let f = CoefficientFunction::f_i(3, 2).unwrap();
        assert!(matches!(
            BellExpression::general(sc(2, 2, 2), f),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn table_validation() {
        assert!(CoefficientFunction::new(vec![]).is_err());
        assert!(CoefficientFunction::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(matches!(
            CoefficientFunction::new(vec![vec![f64::NAN, 0.0], vec![0.0, 0.0]]),
            Err(Error::NonFinite(_))
        ));
        assert!(CoefficientFunction::cosine(3, 2, f64::INFINITY).is_err());
    }

    #[test]
    fn named_constructors() {
        let f = CoefficientFunction::f_i(3, 4).unwrap();
        assert_eq!(f.rows()[1], vec![0.0, 3.0, 2.0, 1.0]);
        assert_eq!(f.rows()[2], vec![0.0; 4]);
        let g = CoefficientFunction::mabk(2, 2).unwrap();
        assert_eq!(g.product_weights(), Some(vec![1.0, 0.0]));
        let c = CoefficientFunction::cosine(3, 2, 0.5).unwrap();
        let w = c.product_weights().unwrap();
        assert!((w[1] - (0.5 * PI / 3.0).cos()).abs() < 1e-15);
        assert!(!c.is_integral());
        assert!(CoefficientFunction::f_i(3, 3).unwrap().product_weights().is_none());
        // k = 2 makes f_I a product form with g_I = (1, 1, 0, ...)
        assert_eq!(
            CoefficientFunction::f_i(4, 2).unwrap().product_weights(),
            Some(vec![1.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn correlator_form_chsh() {
        let form = BellExpression::omega(sc(2, 2, 2)).correlator_form().unwrap();
        assert_eq!(form.constant, 2.0);
        assert_eq!(form.weights, vec![-0.5, -0.5, -0.5, 0.5]);
    }

    #[test]
    fn correlator_form_zero_and_errors() {
        let zero = BellExpression::general(sc(3, 3, 2), CoefficientFunction::zero(3, 2).unwrap())
            .unwrap();
        let form = zero.correlator_form().unwrap();
        assert_eq!(form.constant, 0.0);
        assert!(form.weights.iter().all(|&w| w == 0.0));
        assert!(matches!(
            BellExpression::omega(sc(2, 2, 3)).correlator_form(),
            Err(Error::NotBinaryOutcome(3))
        ));
        let not_product = CoefficientFunction::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e = BellExpression::general(sc(2, 2, 2), not_product).unwrap();
        assert!(matches!(e.correlator_form(), Err(Error::NotProductForm)));
    }

    #[test]
    fn correlator_form_n_3_2_signs() {
        for n in 2..=4 {
            let scenario = sc(n, 3, 2);
            let form = BellExpression::omega(scenario).correlator_form().unwrap();
            for s in scenario.settings_vectors() {
                let sum: usize = s.iter().sum();
                let w = form.weight(&s).unwrap();
                if sum % 3 <= 1 {
                    let sign = if (sum / 3).is_multiple_of(2) { -0.5 } else { 0.5 };
                    assert_eq!(w, sign, "{s:?}");
                } else {
                    assert_eq!(w, 0.0);
                }
            }
        }
    }

    #[test]
    fn expression_json_round_trip() {
        let e = BellExpression::general(sc(3, 2, 2), CoefficientFunction::mabk(2, 2).unwrap())
            .unwrap();
        let text = e.to_json();
        assert_eq!(text, r#"{"n":3,"m":2,"k":2,"f":[[0.0,1.0],[0.0,0.0]]}"#);
        let back = BellExpression::from_json(&text).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.to_json(), text);
        assert!(BellExpression::from_json(r#"{"n":1,"m":2,"k":2,"f":[[0,1],[0,0]]}"#).is_err());
        assert!(BellExpression::from_json(r#"{"n":2,"m":2,"k":2,"f":[[0,1,2],[0,0,0]]}"#).is_err());
    }
}
