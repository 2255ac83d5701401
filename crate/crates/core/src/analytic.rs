//! Closed-form bounds.

use std::f64::consts::PI;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::scenario::Scenario;

fn check_party_setting(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidScenario { n, m, k: 2 });
    }
    Ok(())
}

/// Quantum lower bound for `n` parties from a bipartite quantum lower bound: `m^{n-2} * bipartite`.
pub fn tsirelson_bound_recursive(scenario: &Scenario, bipartite_quantum_bound: f64) -> f64 {
    (scenario.settings() as f64).powi(scenario.parties() as i32 - 2) * bipartite_quantum_bound
}

/// `m^{n-1} (1 - cos(pi / 2m))` for binary outcomes and `f_I`.
pub fn tsirelson_bound_binary(n: usize, m: usize) -> Result<f64> {
    check_party_setting(n, m)?;
    let m_f = m as f64;
    Ok(m_f.powi(n as i32 - 1) * (1.0 - (PI / (2.0 * m_f)).cos()))
}

/// Svetlichny bound from the bipartite local bound: `m^{n-2} * bipartite`.
pub fn svetlichny_bound_closed(scenario: &Scenario, bipartite_local_bound: f64) -> f64 {
    (scenario.settings() as f64).powi(scenario.parties() as i32 - 2) * bipartite_local_bound
}

/// `m^{n-2} (k - 1)`, the exact Svetlichny bound of `f_I` as an integer.
pub fn svetlichny_bound_f_i(scenario: &Scenario) -> Option<i64> {
    let m = i64::try_from(scenario.settings()).ok()?;
    let k = i64::try_from(scenario.outcomes()).ok()?;
    m.checked_pow(scenario.parties() as u32 - 2)?.checked_mul(k - 1)
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `omega_j = exp(i pi (2j + 1) / m)`.
pub fn omega(m: usize, j: usize) -> Complex<f64> {
    Complex::from_polar(1.0, PI * (2 * j + 1) as f64 / m as f64)
}

/// `eta csc(eta pi / 2m)` with `eta = gcd(2j + 1, m)`: the maximum of
/// `|sum_x A_x omega_j^x|` over sign vectors `A`.
pub fn lemma1_max(m: usize, j: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidScenario { n: 2, m, k: 2 });
    }
    if j >= m {
        return Err(Error::IndexOutOfRange(format!("j={j} for m={m}")));
    }
    let eta = gcd(2 * j + 1, m) as f64;
    Ok(eta / (eta * PI / (2.0 * m as f64)).sin())
}

/// `|sum_s g(s) omega_j^s|`.
pub fn weight_transform(g: &[f64], j: usize) -> f64 {
    let w = omega(g.len(), j);
    g.iter()
        .enumerate()
        .map(|(s, &gs)| w.powu(s as u32) * gs)
        .sum::<Complex<f64>>()
        .norm()
}

/// `max_j eta_j csc(eta_j pi / 2m) |sum_s g(s) omega_j^s|`.
pub fn diew_spectral_term(g: &[f64]) -> Result<f64> {
    let m = g.len();
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("g"));
    }
    (0..m).try_fold(0.0f64, |best, j| Ok(best.max(lemma1_max(m, j)? * weight_transform(g, j))))
}

/// Biseparable lower bound for binary outcomes and `f = g * r`:
/// `1/2 m^{n-2} (m sum_s g(s) - max_j eta_j csc(eta_j pi / 2m) |sum_s g(s) omega_j^s|)`.
/// Defined for `n >= 2` so the `m`-fold scaling in `n` holds uniformly.
pub fn diew_bound_binary(n: usize, m: usize, g: &[f64]) -> Result<f64> {
    check_party_setting(n, m)?;
    if g.len() != m {
        return Err(Error::DimensionMismatch(format!("g has {} entries, m={m}", g.len())));
    }
    let m_f = m as f64;
    let total: f64 = g.iter().sum();
    Ok(0.5 * m_f.powi(n as i32 - 2) * (m_f * total - diew_spectral_term(g)?))
}

/// `m^{n-2} (m - cot(pi / 2m))`, the biseparable bound of `f_I` for binary outcomes.
pub fn diew_bound_f_i(n: usize, m: usize) -> Result<f64> {
    check_party_setting(n, m)?;
    let m_f = m as f64;
    Ok(m_f.powi(n as i32 - 2) * (m_f - 1.0 / (PI / (2.0 * m_f)).tan()))
}

/// `g` for `f_I` with binary outcomes: `(1, 1, 0, ..., 0)`.
pub fn g_f_i(m: usize) -> Vec<f64> {
    (0..m).map(|s| if s < 2 { 1.0 } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn tsirelson_values() {
        let s = 2.0 - 2f64.sqrt();
        assert!((tsirelson_bound_binary(2, 2).unwrap() - s).abs() < EPS);
        assert!((tsirelson_bound_binary(3, 2).unwrap() - 2.0 * s).abs() < EPS);
        assert!(tsirelson_bound_binary(2, 1).is_err());
        let sc = Scenario::new(4, 2, 2).unwrap();
        assert!((tsirelson_bound_recursive(&sc, s) - 4.0 * s).abs() < EPS);
        assert_eq!(tsirelson_bound_recursive(&Scenario::new(5, 3, 4).unwrap(), 0.0), 0.0);
    }

    #[test]
    fn svetlichny_values() {
        assert_eq!(svetlichny_bound_closed(&Scenario::new(3, 2, 2).unwrap(), 1.0), 2.0);
        assert_eq!(svetlichny_bound_closed(&Scenario::new(4, 3, 3).unwrap(), 2.0), 18.0);
        assert_eq!(svetlichny_bound_closed(&Scenario::new(2, 5, 3).unwrap(), 2.0), 2.0);
        assert_eq!(svetlichny_bound_f_i(&Scenario::new(4, 3, 3).unwrap()), Some(18));
    }

    #[test]
    fn signed_sum_max_examples() {
        assert!((lemma1_max(2, 0).unwrap() - 2f64.sqrt()).abs() < EPS);
        assert!((lemma1_max(3, 0).unwrap() - 2.0).abs() < EPS);
        assert!((lemma1_max(3, 1).unwrap() - 3.0).abs() < EPS);
        assert!(lemma1_max(3, 3).is_err());
    }

    #[test]
    fn diew_examples() {
        for m in 2..=8 {
            for n in 2..=5 {
                let a = diew_bound_binary(n, m, &g_f_i(m)).unwrap();
                let b = diew_bound_f_i(n, m).unwrap();
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "n={n} m={m}: {a} vs {b}");
            }
        }
        let v = diew_bound_binary(3, 3, &g_f_i(3)).unwrap();
        assert!((v - 3.0 * (3.0 - 3f64.sqrt())).abs() < EPS);
        assert_eq!(diew_bound_binary(4, 5, &[0.0; 5]).unwrap(), 0.0);
        assert!(diew_bound_binary(3, 3, &[1.0, 2.0]).is_err());
    }
}
