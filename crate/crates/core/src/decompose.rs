//! Party-recursive decomposition.
//!
//! Fixing one party's setting `s_p` and outcome `r_p`, the remaining `n-1`
//! parties see an expression with the same coefficient function once a
//! partner party absorbs the fixed party:
//!
//! * effective input  `[s_q + s_p]_m`
//! * effective output `[r_q + r_p - floor((s_q + s_p) / m)]_k`
//!
//! The partner is the lowest-numbered party other than the fixed one.

use crate::behavior::{evaluate, joint_index, joint_outcomes, Behavior};
use crate::error::{Error, Result};
use crate::scenario::{modulo, BellExpression, Scenario};
use crate::tensor::ExpandedTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct SubExpression {
    parent: BellExpression,
    party: usize,
    partner: usize,
    fixed_setting: usize,
    fixed_output: usize,
}

/// The `m * k` sub-expressions for fixing `party` (1-based), ordered by setting then outcome.
pub fn decompose(expr: &BellExpression, party: usize) -> Result<Vec<SubExpression>> {
    let scenario = expr.scenario();
    let n = scenario.parties();
    if n < 3 {
        return Err(Error::TooFewParties { n, min: 3 });
    }
    if party == 0 || party > n {
        return Err(Error::InvalidPartyIndex { party, n });
    }
    let partner = if party == 1 { 2 } else { 1 };
    let mut subs = Vec::with_capacity(scenario.settings() * scenario.outcomes());
    for fixed_setting in 0..scenario.settings() {
        for fixed_output in 0..scenario.outcomes() {
            subs.push(SubExpression {
                parent: expr.clone(),
                party,
                partner,
                fixed_setting,
                fixed_output,
            });
        }
    }
    Ok(subs)
}

impl SubExpression {
    pub fn party(&self) -> usize {
        self.party
    }

    pub fn partner(&self) -> usize {
        self.partner
    }

    pub fn fixed_setting(&self) -> usize {
        self.fixed_setting
    }

    pub fn fixed_output(&self) -> usize {
        self.fixed_output
    }

    fn m(&self) -> usize {
        self.parent.scenario().settings()
    }

    fn k(&self) -> usize {
        self.parent.scenario().outcomes()
    }

    pub fn effective_input(&self, partner_setting: usize) -> usize {
        (partner_setting + self.fixed_setting) % self.m()
    }

    pub fn effective_output(&self, partner_setting: usize, partner_output: usize) -> usize {
        let wraps = ((partner_setting + self.fixed_setting) / self.m()) as i64;
        modulo(partner_output as i64 + self.fixed_output as i64 - wraps, self.k())
    }

    /// The `(n-1)`-party expression with the parent's coefficient function.
    pub fn induced_expression(&self) -> BellExpression {
        let scenario = self
            .parent
            .scenario()
            .with_parties(self.parent.scenario().parties() - 1)
            .expect("parent has at least 3 parties");
        BellExpression::general(scenario, self.parent.function().clone())
            .expect("same m and k as the parent")
    }

    /// Remaining parties' settings after substitution, in party order.
    fn effective_settings(&self, s: &[usize]) -> Vec<usize> {
        s.iter()
            .enumerate()
            .filter(|&(i, _)| i + 1 != self.party)
            .map(|(i, &si)| if i + 1 == self.partner { self.effective_input(si) } else { si })
            .collect()
    }

    /// Parent settings whose substituted form is `effective`.
    fn parent_settings(&self, effective: &[usize]) -> Vec<usize> {
        let m = self.m();
        let mut s = Vec::with_capacity(effective.len() + 1);
        let mut rest = effective.iter();
        for i in 1..=effective.len() + 1 {
            if i == self.party {
                s.push(self.fixed_setting);
            } else {
                let v = *rest.next().expect("enough settings");
                s.push(if i == self.partner { (v + m - self.fixed_setting) % m } else { v });
            }
        }
        s
    }

    /// Coefficient this sub-expression assigns to the parent entry `(s, r)`,
    /// where `r` is the parent's outcome-sum residue. Requires `s[party] = fixed_setting`.
    pub fn lifted_coefficient(&self, s: &[usize], r: usize) -> Result<f64> {
        self.parent.scenario().check_settings(s)?;
        if s[self.party - 1] != self.fixed_setting {
            return Err(Error::IndexOutOfRange(format!(
                "settings {s:?} do not fix party {} to {}",
                self.party, self.fixed_setting
            )));
        }
        if r >= self.k() {
            return Err(Error::IndexOutOfRange(format!("residue {r}")));
        }
        let wraps = ((s[self.partner - 1] + self.fixed_setting) / self.m()) as i64;
        let effective_sum = modulo(r as i64 - wraps, self.k());
        self.induced_expression()
            .coefficient(&self.effective_settings(s), effective_sum)
    }

    /// `(n-1)`-party behavior of the remaining parties conditioned on the fixed
    /// party answering `fixed_output`, with the partner's input and output substituted.
    pub fn induced_behavior(&self, behavior: &Behavior) -> Result<Behavior> {
        let scenario = self.parent.scenario();
        if behavior.scenario() != scenario {
            return Err(Error::ScenarioMismatch {
                expected: scenario.to_string(),
                found: behavior.scenario().to_string(),
            });
        }
        let full = behavior.full().ok_or(Error::FullTableAbsent)?;
        let (n, m, k) = (scenario.parties(), scenario.settings(), scenario.outcomes());
        let sub = Scenario::new(n - 1, m, k)?;
        let width = k.pow(n as u32);
        let sub_width = k.pow(n as u32 - 1);
        let mut table = Vec::with_capacity(sub.num_settings_vectors().unwrap_or(0) * sub_width);

        for effective in sub.settings_vectors() {
            let s = self.parent_settings(&effective);
            let sidx = scenario.settings_index(&s)?;
            let mut row = vec![0.0; sub_width];
            let mut mass = 0.0;
            for (ridx, &p) in full[sidx * width..(sidx + 1) * width].iter().enumerate() {
                let r = joint_outcomes(ridx, n, k);
                if r[self.party - 1] != self.fixed_output {
                    continue;
                }
                let rest: Vec<usize> = (0..n)
                    .filter(|&i| i + 1 != self.party)
                    .map(|i| {
                        if i + 1 == self.partner {
                            self.effective_output(s[i], r[i])
                        } else {
                            r[i]
                        }
                    })
                    .collect();
                row[joint_index(&rest, k)] += p;
                mass += p;
            }
            if mass > 1e-300 {
                row.iter_mut().for_each(|p| *p /= mass);
            } else {
                row.fill(1.0 / sub_width as f64);
            }
            table.extend(row);
        }
        Behavior::from_full(sub, table)
    }

    /// `P(r_party = fixed_output | s_party = fixed_setting)`, read with the
    /// other parties' settings at 0 (setting-independent under no-signaling).
    pub fn weight(&self, behavior: &Behavior) -> Result<f64> {
        let mut s = vec![0; self.parent.scenario().parties()];
        s[self.party - 1] = self.fixed_setting;
        behavior.party_marginal(&s, self.party - 1, self.fixed_output)
    }
}

/// Parent value rebuilt as `sum_{s_p, r_p} P(r_p | s_p) * value(sub-expression)`.
pub fn evaluate_decomposed(expr: &BellExpression, behavior: &Behavior, party: usize) -> Result<f64> {
    let mut total = 0.0;
    for sub in decompose(expr, party)? {
        let w = sub.weight(behavior)?;
        if w == 0.0 {
            continue;
        }
        total += w * evaluate(&sub.induced_expression(), &sub.induced_behavior(behavior)?)?;
    }
    Ok(total)
}

/// Parent tensor assembled from the lifted sub-expression coefficients,
/// one fixed-setting slice per sub-expression with `fixed_output = 0`.
pub fn assemble(expr: &BellExpression, party: usize) -> Result<ExpandedTensor> {
    let subs = decompose(expr, party)?;
    let scenario = expr.scenario();
    let k = scenario.outcomes();
    let mut values = Vec::new();
    for s in scenario.settings_vectors() {
        let sub = &subs[s[party - 1] * k];
        for r in 0..k {
            values.push(sub.lifted_coefficient(&s, r)?);
        }
    }
    ExpandedTensor::from_values(scenario, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CoefficientFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn omega(n: usize, m: usize, k: usize) -> BellExpression {
        BellExpression::omega(Scenario::new(n, m, k).unwrap())
    }

    #[test]
    fn preconditions() {
        assert!(matches!(decompose(&omega(2, 2, 2), 1), Err(Error::TooFewParties { .. })));
        assert!(matches!(decompose(&omega(3, 2, 2), 0), Err(Error::InvalidPartyIndex { .. })));
        assert!(matches!(decompose(&omega(3, 2, 2), 4), Err(Error::InvalidPartyIndex { .. })));
    }

    #[test]
    fn three_party_split_has_chsh_structure() {
        let subs = decompose(&omega(3, 2, 2), 3).unwrap();
        assert_eq!(subs.len(), 4);
        let chsh = omega(2, 2, 2);
        for sub in &subs {
            assert_eq!(sub.induced_expression(), chsh);
            assert_eq!(sub.induced_expression().expand().unwrap(), chsh.expand().unwrap());
        }
    }

    #[test]
    fn substitution_formulas() {
        let subs = decompose(&omega(3, 3, 4), 3).unwrap();
        // fixed setting 2, fixed output 3
        let sub = &subs[2 * 4 + 3];
        assert_eq!(sub.effective_input(0), 2);
        assert_eq!(sub.effective_input(2), 1);
        // (1 + 2) / 3 wraps once: [r + 3 - 1]_4
        assert_eq!(sub.effective_output(1, 0), 2);
        assert_eq!(sub.effective_output(0, 3), 2);
    }

    #[test]
    fn assembled_tensor_matches_parent() {
        for (m, k) in [(2, 2), (3, 2), (2, 3)] {
            let e = omega(3, m, k);
            for party in 1..=3 {
                assert_eq!(assemble(&e, party).unwrap(), e.expand().unwrap());
            }
        }
    }

    #[test]
    fn lifted_coefficient_ignores_fixed_output() {
        let e = omega(3, 3, 3);
        let subs = decompose(&e, 2).unwrap();
        for s in e.scenario().settings_vectors() {
            for sub in subs.iter().filter(|x| x.fixed_setting() == s[1]) {
                for r in 0..3 {
                    assert_eq!(sub.lifted_coefficient(&s, r).unwrap(), e.coefficient(&s, r).unwrap());
                }
            }
        }
        assert!(subs[0].lifted_coefficient(&[0, 1, 0], 0).is_err());
    }

    #[test]
    fn decomposed_evaluation_on_random_behaviors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scenario = Scenario::new(3, 2, 3).unwrap();
        let e = BellExpression::general(scenario, CoefficientFunction::from_fn(2, 3, |s, r| (s * 3 + r) as f64 * 0.7 - 1.0).unwrap()).unwrap();
        for _ in 0..10 {
            let b = Behavior::random_no_signaling(scenario, &mut rng).unwrap();
            let direct = evaluate(&e, &b).unwrap();
            for party in 1..=3 {
                let split = evaluate_decomposed(&e, &b, party).unwrap();
                assert!((direct - split).abs() < 1e-12, "{direct} vs {split}");
            }
        }
    }

    #[test]
    fn needs_full_table() {
        let scenario = Scenario::new(3, 2, 2).unwrap();
        let b = Behavior::from_reduced(scenario, vec![0.5; 16]).unwrap();
        let subs = decompose(&omega(3, 2, 2), 1).unwrap();
        assert!(matches!(subs[0].induced_behavior(&b), Err(Error::FullTableAbsent)));
    }
}
