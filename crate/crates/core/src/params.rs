//! Problem parameters and sphere constants.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dimension `n`, polyharmonic order `k` and spectral parameter `lambda`
/// of `Δ^k u − λu = |u|^{2*−2}u`, together with the critical exponent
/// `2* = 2n/(n − 2k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: usize,
    k: usize,
    lambda: f64,
    two_star: f64,
}

impl ProblemParams {
    pub fn new(n: usize, k: usize, lambda: f64) -> Result<Self> {
        check_domain(n, k)?;
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        Ok(Self {
            n,
            k,
            lambda,
            two_star: (2 * n) as f64 / (n - 2 * k) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn two_star(&self) -> f64 {
        self.two_star
    }

    /// `(n − 2k)/2`, the scaling weight of the critical problem.
    pub fn conformal_weight(&self) -> f64 {
        (self.n - 2 * self.k) as f64 / 2.0
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn sphere(&self) -> SphereConstants {
        SphereConstants::new(self.n)
    }
}

/// Rejects `(n, k)` unless `n > 2k ≥ 2`.
pub fn check_domain(n: usize, k: usize) -> Result<()> {
    if k == 0 || n <= 2 * k {
        return Err(Error::Domain { n, k });
    }
    Ok(())
}

/// Area `ω_{n−1}` of the unit sphere of `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereConstants {
    pub omega: f64,
}

impl SphereConstants {
    pub fn new(n: usize) -> Self {
        Self {
            omega: sphere_area(n),
        }
    }
}

/// `ω_{n−1} = 2π^{n/2}/Γ(n/2)`, evaluated by the two-step recurrence
/// `ω_{n−1} = 2π/(n−2) · ω_{n−3}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n - 2) as f64 * sphere_area(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_half_integer(twice: usize) -> f64 {
        // Γ(m/2) from Γ(1/2) = √π, Γ(1) = 1 and Γ(x + 1) = xΓ(x).
        let (mut x, mut g) = if twice % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
        while 2.0 * x < twice as f64 - 0.5 {
            g *= x;
            x += 1.0;
        }
        g
    }

    #[test]
    fn sphere_area_matches_gamma_formula() {
        for n in 1..=12 {
            let expected = 2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n);
            let got = sphere_area(n);
            assert!(((got - expected) / expected).abs() < 1e-12, "n = {n}");
        }
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn critical_exponent() {
        let p = ProblemParams::new(5, 2, 0.0).unwrap();
        assert_eq!(p.two_star(), 10.0);
        let p = ProblemParams::new(7, 3, 1.0).unwrap();
        assert_eq!(p.two_star(), 14.0);
        let p = ProblemParams::new(7, 2, 1.0).unwrap();
        assert_eq!(p.two_star(), 14.0 / 3.0);
    }

    #[test]
    fn rejects_subcritical_dimensions() {
        assert!(matches!(ProblemParams::new(4, 2, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(ProblemParams::new(2, 1, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(ProblemParams::new(5, 0, 0.0), Err(Error::Domain { .. })));
        let msg = ProblemParams::new(4, 2, 0.0).unwrap_err().to_string();
        assert!(msg.contains("requires n > 2k"));
    }
}
