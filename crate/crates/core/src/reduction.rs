//! Input/output relabellings that map the unified expression onto the known
//! bipartite chained form (BKP) and the two-setting Svetlichny-CGLMP form.
//!
//! A relabelling sends party `i`'s setting `s` to `input_maps[i][s]` and its
//! outcome `r` to `[sign_i * r + shift_i(s)]_k`. A tensor keyed by the plain
//! outcome sum `sum_i r_i` becomes a tensor keyed by `sum_i sign_i * r'_i`.

use crate::error::{Error, Result};
use crate::scenario::{floor_div, modulo, BellExpression, Scenario};
use crate::tensor::ExpandedTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Relabelling {
    scenario: Scenario,
    input_maps: Vec<Vec<usize>>,
    signs: Vec<i64>,
    shifts: Vec<Vec<i64>>,
}

impl Relabelling {
    pub fn new(
        scenario: Scenario,
        input_maps: Vec<Vec<usize>>,
        signs: Vec<i64>,
        shifts: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let (n, m) = (scenario.parties(), scenario.settings());
        let shape_ok = input_maps.len() == n
            && signs.len() == n
            && shifts.len() == n
            && shifts.iter().all(|s| s.len() == m)
            && signs.iter().all(|&s| s == 1 || s == -1);
        if !shape_ok {
            return Err(Error::DimensionMismatch(format!("relabelling does not fit {scenario}")));
        }
        for map in &input_maps {
            let mut seen = vec![false; m];
            if map.len() != m || map.iter().any(|&x| x >= m || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::DimensionMismatch("input map is not a permutation".into()));
            }
        }
        Ok(Self { scenario, input_maps, signs, shifts })
    }

    /// `B'_0 = [-B_0]_k`, `B'_{m-y} = [1 - B_y]_k` for `y >= 1`; Alice unchanged.
    pub fn bkp(m: usize, k: usize) -> Result<Self> {
        let scenario = Scenario::new(2, m, k)?;
        let identity: Vec<usize> = (0..m).collect();
        let bob_inputs: Vec<usize> = (0..m).map(|y| (m - y) % m).collect();
        let bob_shifts: Vec<i64> = (0..m).map(|y| if y == 0 { 0 } else { 1 }).collect();
        Self::new(scenario, vec![identity, bob_inputs], vec![1, -1], vec![vec![0; m], bob_shifts])
    }

    /// `r'_1 = [r_1 - s_1 + 1]_k`, `r'_i = [r_i - s_i]_k` for `i >= 2`.
    pub fn svetlichny_cglmp(n: usize, k: usize) -> Result<Self> {
        let scenario = Scenario::new(n, 2, k)?;
        let shifts = (0..n)
            .map(|i| (0..2).map(|s| -(s as i64) + i64::from(i == 0)).collect())
            .collect();
        Self::new(scenario, vec![vec![0, 1]; n], vec![1; n], shifts)
    }

    fn offset(&self, s: &[usize]) -> i64 {
        s.iter()
            .enumerate()
            .map(|(i, &si)| self.signs[i] * self.shifts[i][si])
            .sum()
    }

    fn check(&self, tensor: &ExpandedTensor) -> Result<()> {
        if tensor.scenario() != self.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario.to_string(),
                found: tensor.scenario().to_string(),
            });
        }
        Ok(())
    }

    /// Tensor keyed by the relabelled combination `sum_i sign_i * r'_i`.
    pub fn apply(&self, tensor: &ExpandedTensor) -> Result<ExpandedTensor> {
        self.check(tensor)?;
        let k = self.scenario.outcomes();
        let mut values = vec![0.0; tensor.len()];
        for s in self.scenario.settings_vectors() {
            let image: Vec<usize> = s.iter().enumerate().map(|(i, &si)| self.input_maps[i][si]).collect();
            let target = self.scenario.settings_index(&image)?;
            let offset = self.offset(&s);
            for rho in 0..k {
                values[target * k + rho] = tensor.get(&s, modulo(rho as i64 - offset, k))?;
            }
        }
        ExpandedTensor::from_values(self.scenario, values)
    }

    /// Inverse of [`Relabelling::apply`].
    pub fn revert(&self, relabelled: &ExpandedTensor) -> Result<ExpandedTensor> {
        self.check(relabelled)?;
        let k = self.scenario.outcomes();
        let mut values = Vec::with_capacity(relabelled.len());
        for s in self.scenario.settings_vectors() {
            let image: Vec<usize> = s.iter().enumerate().map(|(i, &si)| self.input_maps[i][si]).collect();
            let offset = self.offset(&s);
            for r in 0..k {
                values.push(relabelled.get(&image, modulo(r as i64 + offset, k))?);
            }
        }
        ExpandedTensor::from_values(self.scenario, values)
    }
}

/// Chained form, keyed by `(x, y, [A_x - B'_y]_k)`:
/// `sum_x <[A_x - B'_x]> + sum_{x>=1} <[B'_{x-1} - A_x]> + <[B'_{m-1} - A_0 - 1]>`.
pub fn bkp_form_tensor(m: usize, k: usize) -> Result<ExpandedTensor> {
    let scenario = Scenario::new(2, m, k)?;
    ExpandedTensor::from_fn(scenario, |s, d| {
        let (x, y) = (s[0], s[1]);
        let d = d as i64;
        let mut c = 0;
        if x == y {
            c += modulo(d, k);
        }
        if x >= 1 && y == x - 1 {
            c += modulo(-d, k);
        }
        if x == 0 && y == m - 1 {
            c += modulo(-d - 1, k);
        }
        c as f64
    })
}

/// Svetlichny-CGLMP form keyed by `(s, [sum r']_k)`:
/// `sum_s <[(-1)^{sum s} (sum r' + floor((sum s - 1) / 2))]_k>`.
pub fn svetlichny_cglmp_form_tensor(n: usize, k: usize) -> Result<ExpandedTensor> {
    let scenario = Scenario::new(n, 2, k)?;
    ExpandedTensor::from_fn(scenario, |s, rho| {
        let sum: usize = s.iter().sum();
        let sign = if sum.is_multiple_of(2) { 1 } else { -1 };
        modulo(sign * (rho as i64 + floor_div(sum as i64 - 1, 2)), k) as f64
    })
}

/// Relabelled tensor of a bipartite expression in chained-form coordinates.
pub fn reduce_to_bkp(expr: &BellExpression) -> Result<ExpandedTensor> {
    let scenario = expr.scenario();
    if scenario.parties() != 2 {
        return Err(Error::NotBipartite(scenario.parties()));
    }
    Relabelling::bkp(scenario.settings(), scenario.outcomes())?.apply(&expr.expand()?)
}

/// Relabelled tensor of a two-setting expression in Svetlichny-CGLMP coordinates.
pub fn reduce_to_svetlichny_cglmp(expr: &BellExpression) -> Result<ExpandedTensor> {
    let scenario = expr.scenario();
    if scenario.settings() != 2 {
        return Err(Error::NotTwoSettings(scenario.settings()));
    }
    Relabelling::svetlichny_cglmp(scenario.parties(), scenario.outcomes())?.apply(&expr.expand()?)
}
