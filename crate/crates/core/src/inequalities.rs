//! Sobolev and Hardy quotients of radial fields and coercivity margins of
//! `Δ^k + h − V`.

use serde::Serialize;
use std::sync::Arc;

use crate::calculus::{hk_seminorm, weighted_integral};
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::grid::RadialGrid;
use crate::operator::{assemble_operator, HardyPotential};
use crate::params::{sphere_area, ProblemParams};
use crate::quadrature;

/// Sharp radial Hardy–Rellich constant `C_H(n,k)` in
/// `∫ φ²/|x|^{2k} ≤ C_H ∫ (Δ^{k/2}φ)²`, i.e. `Π_{j<k} ((n−2k+4j)/2)^{−2}`.
pub fn hardy_constant(n: usize, k: usize) -> Result<f64> {
    crate::params::check_domain(n, k)?;
    let inv: f64 = (0..k)
        .map(|j| {
            let f = (n as f64 - 2.0 * k as f64 + 4.0 * j as f64) / 2.0;
            f * f
        })
        .product();
    Ok(1.0 / inv)
}

fn seminorm_nonzero(f: &RadialField, p: &ProblemParams) -> Result<f64> {
    if f.sup_norm() == 0.0 {
        return Err(Error::invalid("quotient of the zero field"));
    }
    let s = hk_seminorm(f, p)?;
    if !(s > 0.0) {
        return Err(Error::precondition(format!("nonpositive seminorm {s:e}")));
    }
    Ok(s)
}

/// `‖f‖_{2*}² / ∫ (Δ^{k/2}f)²`.
pub fn sobolev_quotient(f: &RadialField, p: &ProblemParams) -> Result<f64> {
    let s = seminorm_nonzero(f, p)?;
    let two_star = p.two_star();
    let m = weighted_integral(&f.map(|_, v| v.abs().powf(two_star))?, p)?;
    Ok(m.powf(2.0 / two_star) / s)
}

/// `∫ f² |x|^{−2k} / ∫ (Δ^{k/2}f)²`.
///
/// The weighted integral is checked for convergence at the origin by fitting
/// a power law to the first two cells.
pub fn hardy_quotient(f: &RadialField, p: &ProblemParams) -> Result<f64> {
    let s = seminorm_nonzero(f, p)?;
    let grid = f.grid();
    let nodes = grid.nodes();
    let (n, k) = (p.n(), p.k());
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    if grid.is_ball() && nodes.len() >= 3 {
        let g = |i: usize| sq[i] * nodes[i].powi(n as i32 - 1 - 2 * k as i32);
        let (g1, g2) = (g(1), g(2));
        if g1 > 0.0 && g2 > 0.0 {
            let alpha = (g2 / g1).ln() / (nodes[2] / nodes[1]).ln();
            if alpha <= -1.0 {
                return Err(Error::precondition(format!(
                    "weighted integrand behaves like r^{alpha:.3} at the origin and diverges"
                )));
            }
        }
    }
    let parity = match f.parity() {
        Parity::None => Parity::None,
        _ => Parity::Even,
    };
    // ∫ f² r^{−2k} r^{n−1} dr is the n−2k dimensional moment of f²
    let h = sphere_area(n) * quadrature::integrate(grid, parity, &sq, n - 2 * k, grid.r_min(), grid.r_max())?;
    Ok(h / s)
}

pub fn mollify_potential(v: &HardyPotential, eps: f64) -> Result<HardyPotential> {
    v.mollified(eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    /// Smallest generalized eigenvalue of `Δ^k + h − V` against `Δ^k`.
    pub margin: f64,
    pub hardy_constant_used: f64,
    /// `1 / (2 C_H L)`.
    pub mu_threshold: f64,
    #[serde(rename = "L_bound")]
    pub l_bound: f64,
}

const POWER_SWEEPS: usize = 20_000;

/// Dominant eigenvalue of `x ↦ A⁻¹(Mx) − shift·x` by power iteration.
fn dominant(solve: &dyn Fn(&[f64]) -> Vec<f64>, m: &[f64], shift: f64, start: &[f64]) -> Result<f64> {
    let mut x = start.to_vec();
    let mut est = f64::NAN;
    let mut agree = 0;
    for _ in 0..POWER_SWEEPS {
        let mx: Vec<f64> = x.iter().zip(m).map(|(a, b)| a * b).collect();
        let y: Vec<f64> = solve(&mx).iter().zip(&x).map(|(a, b)| a - shift * b).collect();
        let xx: f64 = x.iter().map(|a| a * a).sum();
        let next = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / xx;
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|a| a / norm).collect();
        if (next - est).abs() <= 1e-9 * next.abs().max(1e-300) {
            agree += 1;
            if agree >= 3 {
                return Ok(next);
            }
        } else {
            agree = 0;
        }
        est = next;
    }
    Err(Error::NotConverged {
        iterations: POWER_SWEEPS,
        detail: format!("power iteration for the coercivity margin stuck near {est}"),
    })
}

/// Coercivity of `Δ^k + h − V` relative to the `Δ^k` form on the ball grid.
/// The margin is `1 + min σ(A⁻¹(h − V))`, so `h = 0, V = 0` gives exactly 1.
/// `L = max(1, ‖h‖_∞)`.
pub fn coercivity_margin(p: &ProblemParams, h: &RadialField, v: &HardyPotential, grid: &Arc<RadialGrid>) -> Result<CoercivityReport> {
    if h.len() != grid.len() || h.nodes() != grid.nodes() {
        return Err(Error::invalid("h must be sampled on the coercivity grid"));
    }
    let p0 = p.with_lambda(0.0);
    let op = assemble_operator(&p0, v, grid)?;
    let lu = op.principal_matrix().lu()?;
    let m: Vec<f64> = (0..grid.len())
        .map(|i| if op.is_interior(i) { h.values()[i] - op.potential_nodes()[i] } else { 0.0 })
        .collect();
    let c_h = hardy_constant(p.n(), p.k())?;
    let l_bound = h.sup_norm().max(1.0);
    let margin = if m.iter().all(|x| *x == 0.0) {
        1.0
    } else {
        let solve = |b: &[f64]| lu.solve(b);
        let start = op.interior_mask();
        let e1 = dominant(&solve, &m, 0.0, &start)?;
        let lowest = if e1 <= 0.0 {
            e1
        } else {
            e1 + dominant(&solve, &m, e1, &start)?
        };
        1.0 + lowest
    };
    Ok(CoercivityReport {
        margin,
        hardy_constant_used: c_h,
        mu_threshold: 1.0 / (2.0 * c_h * l_bound),
        l_bound,
    })
}
