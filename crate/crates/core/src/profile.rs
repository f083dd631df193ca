//! Pointwise access to radial functions, their Laplacians and dilations,
//! shared by sampled fields and closed-form power laws.

use crate::calculus;
use crate::error::{Error, Result};
use crate::field::RadialField;

pub trait RadialProfile: Sized {
    /// `d^order f/dr^order` at `r`.
    fn derivative_at(&self, r: f64, order: usize) -> Result<f64>;

    /// The radial Laplacian `Δf` in dimension `n` (positive convention).
    fn laplacian(&self, n: usize) -> Result<Self>;

    /// `weight · f + r f'`.
    fn dilation(&self, weight: f64) -> Result<Self>;

    fn value_at(&self, r: f64) -> Result<f64> {
        self.derivative_at(r, 0)
    }

    fn laplacian_power(&self, n: usize, j: usize) -> Result<Self>
    where
        Self: Clone,
    {
        let mut cur = self.clone();
        for _ in 0..j {
            cur = cur.laplacian(n)?;
        }
        Ok(cur)
    }
}

impl RadialProfile for RadialField {
    fn derivative_at(&self, r: f64, order: usize) -> Result<f64> {
        RadialField::derivative_at(self, r, order)
    }

    fn laplacian(&self, n: usize) -> Result<Self> {
        calculus::laplacian(self, n)
    }

    fn dilation(&self, weight: f64) -> Result<Self> {
        calculus::dilation_with_weight(self, weight)
    }
}

/// `Σ c_i r^{a_i}`; exact under differentiation, Laplacian and dilation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum {
    terms: Vec<(f64, f64)>,
}

impl PowerSum {
    /// Terms as `(coefficient, exponent)` pairs.
    pub fn new(terms: Vec<(f64, f64)>) -> Self {
        let mut s = Self { terms };
        s.prune();
        s
    }

    pub fn monomial(c: f64, a: f64) -> Self {
        Self::new(vec![(c, a)])
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    fn prune(&mut self) {
        self.terms.retain(|&(c, _)| c != 0.0);
    }
}

impl RadialProfile for PowerSum {
    fn derivative_at(&self, r: f64, order: usize) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("power laws are evaluated at r > 0, got {r}")));
        }
        Ok(self
            .terms
            .iter()
            .map(|&(c, a)| {
                let falling: f64 = (0..order).map(|i| a - i as f64).product();
                c * falling * r.powf(a - order as f64)
            })
            .sum())
    }

    fn laplacian(&self, n: usize) -> Result<Self> {
        let nf = n as f64;
        Ok(Self::new(
            self.terms
                .iter()
                .map(|&(c, a)| (-c * a * (a + nf - 2.0), a - 2.0))
                .collect(),
        ))
    }

    fn dilation(&self, weight: f64) -> Result<Self> {
        Ok(Self::new(
            self.terms.iter().map(|&(c, a)| (c * (weight + a), a)).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_laplacian_matches_definition() {
        // Δ r^4 in n = 3: −(12 r² + 2·4 r²) = −20 r²
        let p = PowerSum::monomial(1.0, 4.0).laplacian(3).unwrap();
        assert!((p.value_at(0.5).unwrap() + 20.0 * 0.25).abs() < 1e-14);
        // fundamental profile is harmonic
        let g = PowerSum::monomial(1.0, -1.0).laplacian(3).unwrap();
        assert!(g.terms().is_empty());
    }

    #[test]
    fn power_derivatives() {
        let p = PowerSum::new(vec![(2.0, 3.0), (1.0, -1.0)]);
        let r: f64 = 0.7;
        let d2 = p.derivative_at(r, 2).unwrap();
        assert!((d2 - (12.0 * r + 2.0 / r.powi(3))).abs() < 1e-12);
    }
}
