//! The sign-twisted circulant matrix behind the biseparable bound.
//!
//! For weights `g` and a sign vector `A`, `M_{yz} = sum_x g([x+y+z']_m)
//! (-1)^{floor((x+y+z')/m)} A_x` with `z' = m-1-z`. It is normal, with
//! eigenvectors `(1, w_j, ..., w_j^{m-1})` for `w_j = exp(i pi (2j+1)/m)`.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;

use crate::analytic::omega;
use crate::error::{Error, Result};

pub const SPECTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpec {
    g: Vec<f64>,
    signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Closed-form eigenvalues, indexed by `j`.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Numerical singular values in decreasing order.
    pub singular_values: Vec<f64>,
}

impl CirculantSpec {
    pub fn new(g: Vec<f64>, signs: Vec<i8>) -> Result<Self> {
        let m = g.len();
        if m < 2 {
            return Err(Error::DimensionMismatch("circulant needs m >= 2".into()));
        }
        if signs.len() != m {
            return Err(Error::DimensionMismatch(format!("{} signs for m={m}", signs.len())));
        }
        if signs.iter().any(|&a| a != 1 && a != -1) {
            return Err(Error::DimensionMismatch("signs must be +1 or -1".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("g"));
        }
        Ok(Self { g, signs })
    }

    /// Sign vector number `mask`: bit `x` set means `A_x = -1`.
    pub fn from_mask(g: Vec<f64>, mask: u64) -> Result<Self> {
        let signs = (0..g.len()).map(|x| if mask >> x & 1 == 1 { -1 } else { 1 }).collect();
        Self::new(g, signs)
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.m();
        DMatrix::from_fn(m, m, |y, z| {
            let zp = m - 1 - z;
            (0..m)
                .map(|x| {
                    let t = x + y + zp;
                    let sign = if (t / m).is_multiple_of(2) { 1.0 } else { -1.0 };
                    self.g[t % m] * sign * f64::from(self.signs[x])
                })
                .sum()
        })
    }

    /// `lambda_j = (sum_x A_x w_j^x)(sum_s g(s) w_j^{m-1-s})`.
    pub fn eigenvalue(&self, j: usize) -> Complex<f64> {
        let m = self.m();
        let w = omega(m, j);
        let a: Complex<f64> = (0..m).map(|x| w.powu(x as u32) * f64::from(self.signs[x])).sum();
        let b: Complex<f64> = (0..m).map(|s| w.powu((m - 1 - s) as u32) * self.g[s]).sum();
        a * b
    }

    pub fn eigenvector(&self, j: usize) -> DVector<Complex<f64>> {
        let w = omega(self.m(), j);
        DVector::from_fn(self.m(), |x, _| w.powu(x as u32))
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Materializes the matrix, evaluates the closed-form spectrum and checks it
/// against numerical singular values and the eigenvector equations.
pub fn circulant_matrix(spec: &CirculantSpec) -> Result<(DMatrix<f64>, SpectralData)> {
    let m = spec.m();
    let matrix = spec.matrix();
    let eigenvalues: Vec<Complex<f64>> = (0..m).map(|j| spec.eigenvalue(j)).collect();
    let singular_values = sorted_desc(matrix.singular_values().iter().copied().collect());
    let moduli = sorted_desc(eigenvalues.iter().map(|l| l.norm()).collect());

    for (a, b) in moduli.iter().zip(&singular_values) {
        if (a - b).abs() > SPECTRAL_TOL {
            return Err(Error::SpectralMismatch(format!("|lambda| {a} vs singular value {b}")));
        }
    }
    let complex = matrix.map(|v| Complex::new(v, 0.0));
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let v = spec.eigenvector(j);
        let residual = (&complex * &v - v * lambda).norm();
        if residual > SPECTRAL_TOL {
            return Err(Error::SpectralMismatch(format!("eigenvector {j} residual {residual}")));
        }
    }
    Ok((matrix, SpectralData { eigenvalues, singular_values }))
}

/// Largest singular value over all `2^m` sign vectors, computed numerically.
pub fn max_singular_value_exhaustive(g: &[f64]) -> Result<f64> {
    let m = g.len();
    if m >= 63 {
        return Err(Error::DimensionMismatch(format!("2^{m} sign vectors")));
    }
    CirculantSpec::new(g.to_vec(), vec![1; m])?;
    Ok((0..1u64 << m)
        .into_par_iter()
        .map(|mask| {
            let spec = CirculantSpec::from_mask(g.to_vec(), mask).expect("validated above");
            spec.matrix().singular_values().max()
        })
        .reduce(|| 0.0, f64::max))
}
