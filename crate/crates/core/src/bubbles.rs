//! The explicit bubbles `U(r) = ε (μ / (μ² + a_{n,k} r²))^{(n−2k)/2}`
//! solving `Δ^k U = |U|^{2*−2} U` on all of `ℝⁿ`.

use serde::Serialize;
use std::sync::Arc;

use crate::calculus::iterated_laplacian_budget;
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::grid::RadialGrid;
use crate::params::{check_domain, sphere_area, ProblemParams};
use crate::quadrature::gauss_legendre;

/// Truncation-error estimate (relative to `max |U|^{2*−1}`) above which a
/// residual is reported as inconclusive.
pub const RESIDUAL_INCONCLUSIVE: f64 = 1e-2;

/// Relative size of the discarded tail in [`bubble_integrals`].
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// `a_{n,k} = (Π_{j=−k}^{k−1} (n+2j))^{−1/k}`.
pub fn ank(n: usize, k: usize) -> Result<f64> {
    check_domain(n, k)?;
    let prod: f64 = (-(k as i64)..k as i64).map(|j| (n as i64 + 2 * j) as f64).product();
    Ok(prod.powf(-1.0 / k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleProfile {
    p: ProblemParams,
    mu: f64,
    eps: f64,
    ank: f64,
}

impl BubbleProfile {
    /// `eps` must be `±1` and `mu > 0`.
    pub fn new(p: ProblemParams, mu: f64, eps: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("bubble scale must be positive, got {mu}")));
        }
        if eps != 1.0 && eps != -1.0 {
            return Err(Error::invalid(format!("bubble sign must be +1 or -1, got {eps}")));
        }
        Ok(Self {
            p,
            mu,
            eps,
            ank: ank(p.n(), p.k())?,
        })
    }

    /// The normalized bubble `μ = 1, ε = +1`.
    pub fn standard(p: ProblemParams) -> Result<Self> {
        Self::new(p, 1.0, 1.0)
    }

    pub fn params(&self) -> &ProblemParams {
        &self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn ank(&self) -> f64 {
        self.ank
    }

    pub fn eval(&self, r: f64) -> f64 {
        let w = self.p.conformal_weight();
        self.eps * (self.mu / (self.mu * self.mu + self.ank * r * r)).powf(w)
    }

    /// Samples on `grid` as an even field.
    pub fn field(&self, grid: &Arc<RadialGrid>) -> Result<RadialField> {
        RadialField::from_fn(grid, Parity::Even, |r| self.eval(r))
    }

    /// `max |U|^{2*−1}`, attained at the origin.
    pub fn peak_nonlinearity(&self) -> f64 {
        self.eval(0.0).abs().powf(self.p.two_star() - 1.0)
    }
}

pub fn bubble_eval(b: &BubbleProfile, r: f64) -> f64 {
    b.eval(r)
}

/// `max |Δ^k U − |U|^{2*−2}U| / max |U|^{2*−1}` over the nodes in
/// `[r_lo, r_hi]`, with `Δ^k` taken numerically on `grid`.
///
/// Fails with [`Error::Inconclusive`] when the stencil error estimate in the
/// window exceeds [`RESIDUAL_INCONCLUSIVE`]; a grid should extend somewhat
/// beyond `r_hi` so that one-sided stencils stay out of the window.
pub fn bubble_residual(b: &BubbleProfile, grid: &Arc<RadialGrid>, r_lo: f64, r_hi: f64) -> Result<f64> {
    if !(r_lo <= r_hi) {
        return Err(Error::invalid(format!("empty window [{r_lo}, {r_hi}]")));
    }
    let p = b.params();
    let u = b.field(grid)?;
    let (lk, budget) = iterated_laplacian_budget(&u, p.n(), p.k())?;
    let scale = b.peak_nonlinearity();
    let q = p.two_star() - 2.0;
    let mut worst = 0.0f64;
    let mut trunc = 0.0f64;
    let mut seen = false;
    for (i, &r) in grid.nodes().iter().enumerate() {
        if r < r_lo || r > r_hi {
            continue;
        }
        seen = true;
        let v = u.values()[i];
        let res = (lk.values()[i] - v.abs().powf(q) * v).abs() / scale;
        worst = worst.max(res);
        trunc = trunc.max(budget[i] / scale);
    }
    if !seen {
        return Err(Error::invalid(format!("no grid node in [{r_lo}, {r_hi}]")));
    }
    if trunc > RESIDUAL_INCONCLUSIVE {
        return Err(Error::Inconclusive(format!(
            "stencil error estimate {trunc:.2e} exceeds {RESIDUAL_INCONCLUSIVE:e}; refine the grid"
        )));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleIntegrals {
    /// `∫ U^{2*}` over `ℝⁿ` for `μ = 1`.
    #[serde(rename = "massU2s")]
    pub mass_u2s: f64,
    /// `∫ U^{2*−1}` over `ℝⁿ` for `μ = 1`.
    #[serde(rename = "massU2sm1")]
    pub mass_u2sm1: f64,
    /// Truncation radius of the quadrature.
    pub radius: f64,
    /// Largest analytic tail bound, relative to its integral.
    pub tail_bound: f64,
}

/// Majorant of `ω ∫_R^∞ U^q r^{n−1} dr` from `U ≤ (a r²)^{−(n−2k)/2}`.
fn tail_majorant(p: &ProblemParams, a: f64, q: f64, radius: f64) -> f64 {
    let nf = p.n() as f64;
    let e = q * p.conformal_weight();
    sphere_area(p.n()) * a.powf(-e) * radius.powf(nf - 2.0 * e) / (2.0 * e - nf)
}

/// `ω ∫_0^R U^q r^{n−1} dr` on geometric panels.
fn truncated_mass(p: &ProblemParams, b: &BubbleProfile, q: f64, radius: f64) -> f64 {
    let (x, w) = gauss_legendre(24);
    let nf = p.n() as i32;
    let mut edges = vec![0.0];
    let mut e = 0.5f64.min(radius);
    while e < radius {
        edges.push(e);
        e *= 1.5;
    }
    edges.push(radius);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (t, wt) in x.iter().zip(&w) {
            let r = mid + half * t;
            total += wt * half * b.eval(r).powf(q) * r.powi(nf - 1);
        }
    }
    sphere_area(p.n()) * total
}

/// Both bubble masses with the radius chosen so that each tail majorant is
/// below [`TAIL_TOLERANCE`] relative to its integral.
pub fn bubble_integrals(p: &ProblemParams) -> Result<BubbleIntegrals> {
    let b = BubbleProfile::standard(*p)?;
    let mut radius = 10.0 / b.ank().sqrt();
    loop {
        match bubble_integrals_to(p, radius) {
            Err(Error::Resolution(_)) if radius < 1e12 => radius *= 4.0,
            other => return other,
        }
    }
}

/// Both bubble masses integrated on `[0, radius]`; errors with the required
/// radius when a tail majorant exceeds [`TAIL_TOLERANCE`].
pub fn bubble_integrals_to(p: &ProblemParams, radius: f64) -> Result<BubbleIntegrals> {
    if !(radius > 0.0) {
        return Err(Error::invalid("truncation radius must be positive"));
    }
    let b = BubbleProfile::standard(*p)?;
    let a = b.ank();
    let two_star = p.two_star();
    let nf = p.n() as f64;
    let mut masses = [0.0; 2];
    let mut worst = 0.0f64;
    for (slot, q) in [two_star, two_star - 1.0].into_iter().enumerate() {
        let mass = truncated_mass(p, &b, q, radius);
        let tail = tail_majorant(p, a, q, radius);
        let rel = tail / mass;
        if rel > TAIL_TOLERANCE {
            // tail ∝ R^{n−2e}: solve for the radius at which it meets the tolerance
            let e = q * p.conformal_weight();
            let need = radius * (rel / TAIL_TOLERANCE).powf(1.0 / (2.0 * e - nf));
            return Err(Error::Resolution(format!(
                "tail bound {rel:.2e} at R = {radius}; requires R >= {need:.4e}"
            )));
        }
        worst = worst.max(rel);
        masses[slot] = mass;
    }
    Ok(BubbleIntegrals {
        mass_u2s: masses[0],
        mass_u2sm1: masses[1],
        radius,
        tail_bound: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::grid::GridScheme;

    #[test]
    fn ank_values() {
        assert!((ank(3, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((ank(5, 2).unwrap() - 105f64.powf(-0.5)).abs() < 1e-15);
        assert!(ank(4, 2).is_err());
    }

    #[test]
    fn eval_examples() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let b = BubbleProfile::standard(p).unwrap();
        assert_eq!(b.eval(0.0), 1.0);
        assert!((b.eval(3f64.sqrt()) - 0.5f64.sqrt()).abs() < 1e-15);
        let p = ProblemParams::new(5, 2, 0.0).unwrap();
        let b = BubbleProfile::new(p, 2.0, -1.0).unwrap();
        assert!((b.eval(0.0) + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn short_radius_names_the_requirement() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let msg = bubble_integrals_to(&p, 10.0).unwrap_err().to_string();
        assert!(msg.contains("requires R >="), "{msg}");
    }

    #[test]
    fn laplacian_at_the_core() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let g = Arc::new(make_grid(200, GridScheme::Clustered, 4.0).unwrap());
        let u = BubbleProfile::standard(p).unwrap().field(&g).unwrap();
        let l = crate::iterated_laplacian(&u, &p, 1).unwrap();
        assert!((l.values()[0] - 1.0).abs() < 1e-6);
    }
}
