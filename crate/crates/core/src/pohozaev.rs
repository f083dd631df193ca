//! Pohozaev–Pucci–Serrin machinery for radial functions: the commutator
//! `Δ^p(r v') = 2p Δ^p v + r (Δ^p v)'`, the boundary forms `B^{(l)}` and
//! `S(u)`, and the full identity
//!
//! `∫ (Δ^k u − c|u|^{2*−2}u) T(u) dx = ∮ ((x,ν)(|Δ^{k/2}u|²/2 − c|u|^{2*}/2*) + S(u)) dσ`.
//!
//! Boundary terms are evaluated with the outward orientation of the ball
//! `B_r` (`(x,ν) = r`, `∂_ν = d/dr`); on an annulus the inner sphere enters
//! with the opposite sign, so the right-hand side is `F(outer) − F(inner)`.

use serde::Serialize;

use crate::calculus::{differentiate, iterated_laplacian_budget, laplacian, weighted_integral_range};
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::operator::{assemble_operator, HardyPotential};
use crate::params::{sphere_area, ProblemParams};
use crate::profile::{PowerSum, RadialProfile};

/// Worst residuals of `Δ^p(r v') = 2pΔ^p v + r(Δ^p v)'` and of its gradient
/// form `∂_r Δ^p(r v') = (2p+1) ∂_r Δ^p v + r ∂_r²Δ^p v` over the nodes,
/// each relative to the largest term of the identity or of `Δ^{p−1}v`,
/// `Δ^{p−1}(r v')`, whichever is larger. The outermost `4p` nodes, where
/// every stencil of the composition is one-sided, are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorResidual {
    pub identity: f64,
    /// Involves `2p + 2` derivatives, so its rounding floor sits well above
    /// that of `identity`.
    pub gradient: f64,
}

/// The larger of the two [`CommutatorResidual`] components.
pub fn deltap_identity_residual(v: &RadialField, p_order: usize, n: usize) -> Result<f64> {
    let c = commutator_residual(v, p_order, n)?;
    Ok(c.identity.max(c.gradient))
}

pub fn commutator_residual(v: &RadialField, p_order: usize, n: usize) -> Result<CommutatorResidual> {
    if v.parity() == Parity::Odd {
        return Err(Error::precondition("the commutator identity needs an even or parity-free field"));
    }
    let rv = differentiate(v, 1)?.map(|r, d| r * d)?.with_parity(v.parity());
    let mut lhs = rv;
    let mut lp = v.clone();
    // magnitude of the last Laplacian's inputs: the roundoff floor when Δ^p v ≡ 0
    let mut floor = 0.0f64;
    for _ in 0..p_order {
        floor = lhs.sup_norm().max(lp.sup_norm());
        lhs = laplacian(&lhs, n)?;
        lp = laplacian(&lp, n)?;
    }
    let dlp = differentiate(&lp, 1)?;
    let d2lp = differentiate(&lp, 2)?;
    let dlhs = differentiate(&lhs, 1)?;
    let nodes = v.nodes();
    let two_p = 2.0 * p_order as f64;
    let keep = nodes.len().saturating_sub(4 * p_order).max(1);
    let rel = |a: &[f64], b: &[f64]| {
        let (a, b) = (&a[..keep], &b[..keep]);
        let scale = a.iter().chain(b).fold(floor, |m, x| m.max(x.abs()));
        let worst = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    };
    let rhs: Vec<f64> = (0..nodes.len())
        .map(|i| two_p * lp.values()[i] + nodes[i] * dlp.values()[i])
        .collect();
    let grad_rhs: Vec<f64> = (0..nodes.len())
        .map(|i| (two_p + 1.0) * dlp.values()[i] + nodes[i] * d2lp.values()[i])
        .collect();
    Ok(CommutatorResidual {
        identity: rel(lhs.values(), &rhs),
        gradient: rel(dlhs.values(), &grad_rhs),
    })
}

/// Radial integrand of `B^{(l)}(U, V)` at `r` with `∂_ν = d/dr`.
fn bilinear_density<P: RadialProfile + Clone>(u: &P, v: &P, l: usize, r: f64, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..l {
        let lu = u.laplacian_power(n, l - i - 1)?;
        let lv = v.laplacian_power(n, i)?;
        total += -lu.derivative_at(r, 1)? * lv.value_at(r)? + lu.value_at(r)? * lv.derivative_at(r, 1)?;
    }
    Ok(total)
}

/// `∮_{∂B_r} B^{(l)}(U, V) dσ` with the outward normal of `B_r`.
pub fn boundary_bilinear<P: RadialProfile + Clone>(u: &P, v: &P, l: usize, r: f64, p: &ProblemParams) -> Result<f64> {
    let n = p.n();
    Ok(sphere_area(n) * r.powi(n as i32 - 1) * bilinear_density(u, v, l, r, n)?)
}

/// The boundary integrand of the identity on `∂B_r`, split into its terms
/// (already multiplied by the sphere area `ω_{n−1} r^{n−1}`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTerms {
    pub radius: f64,
    /// `(x,ν) |Δ^{k/2}u|²/2`.
    pub gradient: f64,
    /// `−(x,ν) c |u|^{2*}/2*`.
    pub nonlinear: f64,
    /// The summands of `S(u)`: `i = 0..E(k/2)`, then the odd-`k` term.
    pub s_terms: Vec<f64>,
}

impl BoundaryTerms {
    pub fn total(&self) -> f64 {
        self.gradient + self.nonlinear + self.s_terms.iter().sum::<f64>()
    }
}

pub fn boundary_terms<P: RadialProfile + Clone>(u: &P, c: f64, r: f64, p: &ProblemParams) -> Result<BoundaryTerms> {
    let (n, k) = (p.n(), p.k());
    let area = sphere_area(n) * r.powi(n as i32 - 1);
    let tu = u.dilation(p.conformal_weight())?;
    let half = k / 2;
    let lh = u.laplacian_power(n, half)?;
    let sq = if k % 2 == 0 {
        lh.value_at(r)?.powi(2)
    } else {
        lh.derivative_at(r, 1)?.powi(2)
    };
    let two_star = p.two_star();
    let uv = u.value_at(r)?;
    let mut s_terms = Vec::with_capacity(half + k % 2);
    for i in 0..half {
        let a = u.laplacian_power(n, k - i - 1)?;
        let b = tu.laplacian_power(n, i)?;
        let term = -a.derivative_at(r, 1)? * b.value_at(r)? + a.value_at(r)? * b.derivative_at(r, 1)?;
        s_terms.push(area * term);
    }
    if k % 2 == 1 {
        let b = tu.laplacian_power(n, half)?;
        s_terms.push(-area * lh.derivative_at(r, 1)? * b.value_at(r)?);
    }
    Ok(BoundaryTerms {
        radius: r,
        gradient: area * r * sq / 2.0,
        nonlinear: -area * r * c * uv.abs().powf(two_star) / two_star,
        s_terms,
    })
}

/// `∮_{∂B_r} ((x,ν)(|Δ^{k/2}u|²/2 − c|u|^{2*}/2*) + S(u)) dσ`.
pub fn pohozaev_boundary<P: RadialProfile + Clone>(u: &P, c: f64, r: f64, p: &ProblemParams) -> Result<f64> {
    Ok(boundary_terms(u, c, r, p)?.total())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PohozaevRadii {
    pub outer: f64,
    pub inner: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PohozaevTerm {
    pub name: String,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PohozaevReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Ten times the propagated stencil error of the volume integral.
    pub tolerance: f64,
    pub terms: Vec<PohozaevTerm>,
    pub radii: PohozaevRadii,
}

impl PohozaevReport {
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`, or `0` when both vanish.
    pub fn relative_residual(&self) -> f64 {
        let m = self.lhs.abs().max(self.rhs.abs());
        if m > 0.0 {
            self.residual / m
        } else {
            0.0
        }
    }
}

fn named_terms(t: &BoundaryTerms, sign: f64, k: usize, out: &mut Vec<PohozaevTerm>) {
    let mut push = |name: String, value: f64| {
        out.push(PohozaevTerm {
            name,
            radius: t.radius,
            value: sign * value,
        })
    };
    push("gradient".into(), t.gradient);
    push("nonlinear".into(), t.nonlinear);
    for (i, v) in t.s_terms.iter().enumerate() {
        if i < k / 2 {
            push(format!("S[{i}]"), *v);
        } else {
            push("S[odd]".into(), *v);
        }
    }
}

/// Both sides of the identity on `B_outer` or on the annulus
/// `inner < r < outer`.
pub fn pohozaev_residual(u: &RadialField, c: f64, outer: f64, inner: Option<f64>, p: &ProblemParams) -> Result<PohozaevReport> {
    let grid = u.grid();
    match inner {
        None if !(grid.is_ball() && u.parity() == Parity::Even) => {
            return Err(Error::precondition(
                "a field that is not even on a ball may be singular at the origin; give an inner radius",
            ))
        }
        Some(a) if !(a > 0.0 && a < outer) => {
            return Err(Error::invalid(format!("inner radius {a} must lie in (0, {outer})")));
        }
        _ => {}
    }
    let n = p.n();
    let (lk, budget) = iterated_laplacian_budget(u, n, p.k())?;
    let tu = crate::calculus::dilation_generator(u, p)?;
    let q = p.two_star() - 2.0;
    let nodes = u.nodes();
    let integrand: Vec<f64> = (0..nodes.len())
        .map(|i| {
            let v = u.values()[i];
            (lk.values()[i] - c * v.abs().powf(q) * v) * tu.values()[i]
        })
        .collect();
    let err: Vec<f64> = (0..nodes.len()).map(|i| budget[i] * tu.values()[i].abs()).collect();
    let lo = inner.unwrap_or(0.0);
    let f = RadialField::new(grid.clone(), integrand, u.parity())?;
    let lhs = weighted_integral_range(&f, n, lo, outer)?;
    let e = RadialField::new(grid.clone(), err, u.parity())?;
    let tolerance = 10.0 * weighted_integral_range(&e, n, lo, outer)?.abs();

    let mut terms = Vec::new();
    let out = boundary_terms(u, c, outer, p)?;
    let mut rhs = out.total();
    named_terms(&out, 1.0, p.k(), &mut terms);
    if let Some(a) = inner {
        let t = boundary_terms(u, c, a, p)?;
        rhs -= t.total();
        named_terms(&t, -1.0, p.k(), &mut terms);
    }
    Ok(PohozaevReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        tolerance,
        terms,
        radii: PohozaevRadii { outer, inner },
    })
}

/// `D_r = ∮_{∂B_r} ((x,ν)|Δ^{k/2}Γ|²/2 + S(Γ)) dσ` for `Γ = |x|^{2k−n}`,
/// evaluated exactly on the power law.
pub fn dkn(p: &ProblemParams, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("D_r needs 0 < r < 1, got {r}")));
    }
    let gamma = PowerSum::monomial(1.0, 2.0 * p.k() as f64 - p.n() as f64);
    pohozaev_boundary(&gamma, 0.0, r, p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eq34Report {
    /// `lhs = λ ∫_{B_δ} u T(u)`, `rhs` the boundary integral with `c = 1`.
    pub report: PohozaevReport,
    /// Scaled PDE residual of the input.
    pub pde_residual: f64,
    /// `ν = ‖u‖_∞^{−2/(n−2k)}`.
    pub nu: f64,
    /// `∫_{B_δ} u T(u) dx / ν^{n−2k}`.
    pub scaled_energy: f64,
}

/// `λ ∫_{B_δ} u T(u) dx` against the boundary terms on `∂B_δ`, for a
/// numerical solution `u` of `Δ^k u − λu = |u|^{2*−2}u` whose scaled
/// residual must not exceed `tol`.
pub fn eq34_check(u: &RadialField, p: &ProblemParams, delta: f64, tol: f64) -> Result<Eq34Report> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let op = assemble_operator(p, &HardyPotential::zero(), u.grid())?;
    let pde_residual = crate::bvp::scaled_residual(&op, u.values());
    if pde_residual > tol {
        return Err(Error::precondition(format!(
            "input is not a solution: scaled residual {pde_residual:.2e} exceeds {tol:.2e}"
        )));
    }
    let n = p.n();
    let tu = crate::calculus::dilation_generator(u, p)?;
    let utu = RadialField::new(
        u.grid().clone(),
        u.values().iter().zip(tu.values()).map(|(a, b)| a * b).collect(),
        Parity::Even,
    )?;
    let energy = weighted_integral_range(&utu, n, 0.0, delta)?;
    let lhs = p.lambda() * energy;
    let bt = boundary_terms(u, 1.0, delta, p)?;
    let rhs = bt.total();
    let mut terms = Vec::new();
    named_terms(&bt, 1.0, p.k(), &mut terms);
    // the identity holds for the continuum operator; the stencil error of
    // Δ^k u against T(u) bounds how well a discrete solution can satisfy it
    let (_, budget) = iterated_laplacian_budget(u, n, p.k())?;
    let err = RadialField::new(
        u.grid().clone(),
        budget.iter().zip(tu.values()).map(|(b, t)| b * t.abs()).collect(),
        Parity::Even,
    )?;
    let truncation = weighted_integral_range(&err, n, 0.0, delta)?.abs();
    let sup = u.sup_norm();
    let nu = if sup > 0.0 {
        sup.powf(-2.0 / (n - 2 * p.k()) as f64)
    } else {
        f64::INFINITY
    };
    let scaled_energy = if sup > 0.0 {
        energy / nu.powi((n - 2 * p.k()) as i32)
    } else {
        0.0
    };
    Ok(Eq34Report {
        report: PohozaevReport {
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            tolerance: 10.0 * (tol * lhs.abs().max(rhs.abs()) + truncation),
            terms,
            radii: PohozaevRadii {
                outer: delta,
                inner: None,
            },
        },
        pde_residual,
        nu,
        scaled_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_profile_boundary_vanishes_for_k1() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let g = PowerSum::monomial(1.0, -1.0);
        let t = boundary_terms(&g, 0.0, 0.7, &p).unwrap();
        let expect = sphere_area(3) * 0.7f64.powi(2) * 0.5 * 0.7f64.powi(-3);
        assert!((t.gradient - expect).abs() < 1e-13);
        assert!((t.s_terms[0] + expect).abs() < 1e-13);
        assert_eq!(t.s_terms.len(), 1);
    }

    #[test]
    fn term_counts() {
        for k in 1..=4 {
            let p = ProblemParams::new(2 * k + 3, k, 0.0).unwrap();
            let t = boundary_terms(&PowerSum::monomial(1.0, 2.0), 0.0, 0.5, &p).unwrap();
            assert_eq!(t.s_terms.len(), k / 2 + k % 2);
        }
    }

    #[test]
    fn dkn_vanishes() {
        for k in 1..=3 {
            let p = ProblemParams::new(2 * k + 1, k, 0.0).unwrap();
            assert!(dkn(&p, 0.5).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn bilinear_of_fundamental_profile() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let u = PowerSum::monomial(1.0, -1.0);
        let one = PowerSum::monomial(1.0, 0.0);
        let got = boundary_bilinear(&u, &one, 1, 1.0, &p).unwrap();
        assert!((got - 4.0 * std::f64::consts::PI).abs() < 1e-13);
        assert_eq!(boundary_bilinear(&u, &one, 0, 1.0, &p).unwrap(), 0.0);
    }
}
