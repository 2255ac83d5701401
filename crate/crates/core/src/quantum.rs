//! GHZ states measured in the equatorial plane.
//!
//! Party `i` measuring setting `s` at phase `phi[i][s]` on the `n`-qubit GHZ
//! state gives the full correlator `E_s = cos(sum_i phi[i][s_i])`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::tsirelson_bound_binary;
use crate::behavior::{settings_key, Behavior};
use crate::error::{Error, Result};
use crate::scenario::{BellExpression, CoefficientFunction, CorrelatorForm, Scenario};

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Measurement phases, `phi[i][s]` for party `i` and setting `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhaseDoc", into = "PhaseDoc")]
pub struct PhaseAssignment {
    n: usize,
    m: usize,
    phi: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PhaseDoc {
    n: usize,
    m: usize,
    phi: Vec<Vec<f64>>,
}

impl TryFrom<PhaseDoc> for PhaseAssignment {
    type Error = Error;

    fn try_from(doc: PhaseDoc) -> Result<Self> {
        let a = PhaseAssignment::new(doc.phi)?;
        if a.n != doc.n || a.m != doc.m {
            return Err(Error::DimensionMismatch(format!(
                "phi is {}x{}, header says {}x{}",
                a.n, a.m, doc.n, doc.m
            )));
        }
        Ok(a)
    }
}

impl From<PhaseAssignment> for PhaseDoc {
    fn from(a: PhaseAssignment) -> Self {
        PhaseDoc { n: a.n, m: a.m, phi: a.phi }
    }
}

impl PhaseAssignment {
    pub fn new(phi: Vec<Vec<f64>>) -> Result<Self> {
        let n = phi.len();
        let m = phi.first().map_or(0, Vec::len);
        if n < 2 || m < 2 || phi.iter().any(|row| row.len() != m) {
            return Err(Error::DimensionMismatch("phase matrix must be n x m with n, m >= 2".into()));
        }
        if phi.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phases"));
        }
        Ok(Self { n, m, phi })
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; m]; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| (0..m).map(|_| rng.random::<f64>() * TAU).collect()).collect())
    }

    fn from_flat(n: usize, m: usize, x: &[f64]) -> Self {
        Self { n, m, phi: x.chunks(m).map(<[f64]>::to_vec).collect() }
    }

    fn flat(&self) -> Vec<f64> {
        self.phi.iter().flatten().copied().collect()
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn settings(&self) -> usize {
        self.m
    }

    pub fn phases(&self) -> &[Vec<f64>] {
        &self.phi
    }

    /// Every phase reduced to `[0, 2 pi)`.
    pub fn canonical(&self) -> Self {
        let wrap = |v: f64| {
            let w = v.rem_euclid(TAU);
            if w >= TAU { 0.0 } else { w }
        };
        Self {
            n: self.n,
            m: self.m,
            phi: self.phi.iter().map(|row| row.iter().map(|&v| wrap(v)).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("phases serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.n, self.m, 2)
    }

    fn check_fits(&self, scenario: &Scenario) -> Result<()> {
        if self.n != scenario.parties() || self.m != scenario.settings() {
            return Err(Error::DimensionMismatch(format!(
                "phases are {}x{}, scenario {scenario} needs {}x{}",
                self.n,
                self.m,
                scenario.parties(),
                scenario.settings()
            )));
        }
        Ok(())
    }
}

/// Full correlators indexed like [`Scenario::settings_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct Correlators {
    scenario: Scenario,
    values: Vec<f64>,
}

impl Correlators {
    pub fn new(scenario: Scenario, values: Vec<f64>) -> Result<Self> {
        if scenario.num_settings_vectors() != Some(values.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} correlators for {scenario}",
                values.len()
            )));
        }
        Ok(Self { scenario, values })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: &[usize]) -> Result<f64> {
        Ok(self.values[self.scenario.settings_index(s)?])
    }
}

fn total_phases(phi: &[Vec<f64>], scenario: &Scenario) -> Vec<f64> {
    scenario
        .settings_vectors()
        .map(|s| s.iter().enumerate().map(|(i, &si)| phi[i][si]).sum())
        .collect()
}

pub fn ghz_correlators(angles: &PhaseAssignment) -> Result<Correlators> {
    let scenario = angles.scenario()?;
    let values = total_phases(&angles.phi, &scenario).into_iter().map(f64::cos).collect();
    Correlators::new(scenario, values)
}

/// Binary-outcome behavior with `P(r | s) = (1 + (-1)^{sum r} E_s) / 2^n`.
pub fn behavior_from_correlators(correlators: &Correlators) -> Result<Behavior> {
    let scenario = correlators.scenario;
    if scenario.outcomes() != 2 {
        return Err(Error::NotBinaryOutcome(scenario.outcomes()));
    }
    let n = scenario.parties();
    let width = 1usize
        .checked_shl(n as u32)
        .filter(|w| w.checked_mul(correlators.values.len()).is_some())
        .ok_or_else(|| Error::DimensionMismatch("full table too large".into()))?;
    let mut full = Vec::with_capacity(width * correlators.values.len());
    for (idx, &e) in correlators.values.iter().enumerate() {
        if !e.is_finite() || e.abs() > 1.0 + 1e-12 {
            return Err(Error::CorrelatorOutOfRange {
                settings: settings_key(&scenario.settings_from_index(idx)),
                value: e,
            });
        }
        let e = e.clamp(-1.0, 1.0);
        for r in 0..width {
            let parity = if r.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            full.push((1.0 + parity * e) / width as f64);
        }
    }
    Behavior::from_full(scenario, full)
}

pub fn ghz_behavior(angles: &PhaseAssignment) -> Result<Behavior> {
    behavior_from_correlators(&ghz_correlators(angles)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumValueReport {
    pub value: f64,
    pub angles: PhaseAssignment,
    pub target_bound: Option<f64>,
    /// `value - target_bound`.
    pub gap: Option<f64>,
}

impl QuantumValueReport {
    fn new(value: f64, angles: PhaseAssignment, target_bound: Option<f64>) -> Self {
        Self { value, angles, target_bound, gap: target_bound.map(|t| value - t) }
    }

    pub fn with_target(self, target: f64) -> Self {
        Self::new(self.value, self.angles, Some(target))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Closed-form quantum target when `f` is `f_I` with binary outcomes.
pub fn default_target(expr: &BellExpression) -> Option<f64> {
    let s = expr.scenario();
    let f_i = CoefficientFunction::f_i(s.settings(), s.outcomes()).ok()?;
    (s.outcomes() == 2 && *expr.function() == f_i)
        .then(|| tsirelson_bound_binary(s.parties(), s.settings()).ok())
        .flatten()
}

/// Value and gradient of the correlator form with respect to the flattened phases.
struct Objective {
    form: CorrelatorForm,
    settings: Vec<Vec<usize>>,
    n: usize,
    m: usize,
}

impl Objective {
    fn new(expr: &BellExpression) -> Result<Self> {
        let scenario = expr.scenario();
        Ok(Self {
            form: expr.correlator_form()?,
            settings: scenario.settings_vectors().collect(),
            n: scenario.parties(),
            m: scenario.settings(),
        })
    }

    fn theta(&self, x: &[f64], s: &[usize]) -> f64 {
        s.iter().enumerate().map(|(i, &si)| x[i * self.m + si]).sum()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.form.constant
            + self
                .settings
                .iter()
                .zip(&self.form.weights)
                .map(|(s, w)| w * self.theta(x, s).cos())
                .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.n * self.m];
        for (s, w) in self.settings.iter().zip(&self.form.weights) {
            if *w == 0.0 {
                continue;
            }
            let d = -w * self.theta(x, s).sin();
            for (i, &si) in s.iter().enumerate() {
                grad[i * self.m + si] += d;
            }
        }
        grad
    }

    /// BFGS with Armijo backtracking.
    fn descend(&self, mut x: Vec<f64>, max_iters: usize) -> (f64, Vec<f64>) {
        let d = x.len();
        let mut h = DMatrix::<f64>::identity(d, d);
        let mut fx = self.value(&x);
        let mut g = DVector::from_vec(self.gradient(&x));
        for _ in 0..max_iters {
            if g.norm() < 1e-12 {
                break;
            }
            let mut p = -(&h * &g);
            if p.dot(&g) >= 0.0 {
                h = DMatrix::identity(d, d);
                p = -g.clone();
            }
            let slope = p.dot(&g);
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-16 {
                let trial: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + step * b).collect();
                let ft = self.value(&trial);
                if ft <= fx + 1e-4 * step * slope {
                    accepted = Some((trial, ft));
                    break;
                }
                step *= 0.5;
            }
            let Some((trial, ft)) = accepted else { break };
            let g_new = DVector::from_vec(self.gradient(&trial));
            let s_vec = DVector::from_iterator(d, trial.iter().zip(&x).map(|(a, b)| a - b));
            let y_vec = &g_new - &g;
            let sy = s_vec.dot(&y_vec);
            if sy > 1e-14 {
                let rho = 1.0 / sy;
                let hy = &h * &y_vec;
                let yhy = y_vec.dot(&hy);
                h += (&s_vec * s_vec.transpose()) * (rho * rho * yhy + rho)
                    - (&hy * s_vec.transpose() + &s_vec * hy.transpose()) * rho;
            }
            let improvement = fx - ft;
            x = trial;
            fx = ft;
            g = g_new;
            if improvement.abs() < 1e-16 && g.norm() < 1e-9 {
                break;
            }
        }
        (fx, x)
    }
}

/// Exact gradient of the expression value with respect to every phase.
pub fn quantum_gradient(expr: &BellExpression, angles: &PhaseAssignment) -> Result<Vec<Vec<f64>>> {
    angles.check_fits(&expr.scenario())?;
    let obj = Objective::new(expr)?;
    let grad = obj.gradient(&angles.flat());
    Ok(grad.chunks(angles.m).map(<[f64]>::to_vec).collect())
}

/// Expression value on the GHZ behavior, with the gap to `target` or to the
/// built-in `f_I` bound when no target is given.
pub fn quantum_value(
    expr: &BellExpression,
    angles: &PhaseAssignment,
    target: Option<f64>,
) -> Result<QuantumValueReport> {
    angles.check_fits(&expr.scenario())?;
    let value = expr.correlator_form()?.evaluate(ghz_correlators(angles)?.values())?;
    Ok(QuantumValueReport::new(value, angles.clone(), target.or_else(|| default_target(expr))))
}

/// Multi-restart BFGS minimization of the GHZ value. `restarts = 0` evaluates
/// a single random starting point without descent.
pub fn optimize_phases(
    expr: &BellExpression,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<QuantumValueReport> {
    let obj = Objective::new(expr)?;
    let (n, m) = (obj.n, obj.m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..restarts.max(1))
        .map(|_| (0..n * m).map(|_| rng.random::<f64>() * TAU).collect())
        .collect();
    let target = default_target(expr);

    if restarts == 0 {
        let angles = PhaseAssignment::from_flat(n, m, &starts[0]).canonical();
        return quantum_value(expr, &angles, target);
    }

    let (_, _, x) = starts
        .into_par_iter()
        .enumerate()
        .map(|(idx, x0)| {
            let (v, x) = obj.descend(x0, max_iters);
            (v, idx, x)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    let angles = PhaseAssignment::from_flat(n, m, &x).canonical();
    quantum_value(expr, &angles, target)
}
