//! Green's functions of `Δ^k − λ − V` on the unit ball: the fundamental
//! solution, Boggio's centre-pole formula, discrete inversion of the
//! banded operator, pointwise bound certificates and the weighted
//! regularity constant.
//!
//! Radial tables cannot hold an off-centre point source. A pole at radius
//! `x > 0` is the unit mass spread uniformly over the sphere `|y| = x`, so a
//! column is the spherical mean of `G(·, y)` over that sphere. For `k = 1`,
//! `n = 3`, `V = 0` this mean is `(1/4π)(1/max(r, x) − 1)`.

use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::grid::RadialGrid;
use crate::operator::DiscreteOperator;
use crate::params::{check_domain, sphere_area, ProblemParams};
use crate::profile::{PowerSum, RadialProfile};
use crate::quadrature::adaptive_integrate;

/// Nodes within this many local spacings of a pole are left out of ratio
/// certificates.
pub const EXCLUDED_BAND: f64 = 3.0;

/// Relative operator residual below which a field counts as a kernel element.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConstants {
    pub cnk: f64,
    pub akn: f64,
}

impl KernelConstants {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let c = cnk(n, k)?;
        Ok(Self {
            cnk: c,
            akn: c / boggio_tail_integral(n, k),
        })
    }
}

/// `C_{n,k}` with `Γ(x, y) = C_{n,k} |x − y|^{2k−n}`.
pub fn cnk(n: usize, k: usize) -> Result<f64> {
    check_domain(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let prod: f64 = (1..k)
        .map(|i| {
            let i = i as f64;
            (nf - 2.0 * kf + 2.0 * (i - 1.0)) * (2.0 * kf - 2.0 * i)
        })
        .product();
    Ok(1.0 / ((nf - 2.0) * sphere_area(n) * prod))
}

pub fn fundamental_solution(n: usize, k: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("fundamental solution needs rho > 0, got {rho}")));
    }
    Ok(cnk(n, k)? * rho.powi(2 * k as i32 - n as i32))
}

/// `−∂_ρ Δ^{k−1} Γ` at distance `rho` from the pole, evaluated exactly on
/// the power law; equals `ρ^{1−n}/ω_{n−1}`.
pub fn kernel_flux(n: usize, k: usize, rho: f64) -> Result<f64> {
    let g = PowerSum::monomial(cnk(n, k)?, 2.0 * k as f64 - n as f64);
    Ok(-g.laplacian_power(n, k - 1)?.derivative_at(rho, 1)?)
}

/// `∫_1^∞ (v²−1)^{k−1} v^{1−n} dv` by binomial expansion.
fn boggio_tail_integral(n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..k {
        let sign = if (k - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom / (n as f64 - 2.0 * j as f64 - 2.0);
        binom = binom * (k - 1 - j) as f64 / (j + 1) as f64;
    }
    total
}

/// `∫_1^X (v²−1)^{k−1} v^{1−n} dv`, adaptively in `t = ln v`.
pub fn boggio_integral(n: usize, k: usize, x: f64) -> f64 {
    let f = |t: f64| {
        let v = t.exp();
        (v * v - 1.0).powi(k as i32 - 1) * v.powi(2 - n as i32)
    };
    let scale = boggio_tail_integral(n, k);
    adaptive_integrate(&f, 0.0, x.ln(), 1e-15 * scale)
}

/// Boggio's Green function of `Δ^k` on the unit ball with pole at the centre,
/// `A_{k,n} r^{2k−n} ∫_1^{1/r} (v²−1)^{k−1} v^{1−n} dv`.
pub fn boggio_center(n: usize, k: usize, r: f64) -> Result<f64> {
    let kc = KernelConstants::new(n, k)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid(format!("Boggio's formula needs 0 < r < 1, got {r}")));
    }
    Ok(kc.akn * r.powi(2 * k as i32 - n as i32) * boggio_integral(n, k, 1.0 / r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenProvenance {
    Boggio,
    Discrete,
    Neumann,
}

/// One pole of a [`GreenTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct GreenColumn {
    /// Radius of the pole sphere; `0` for the centre.
    pub pole: f64,
    /// Node carrying the discrete delta, if any.
    pub pole_node: Option<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GreenTable {
    provenance: GreenProvenance,
    params: ProblemParams,
    mu: f64,
    grid: Arc<RadialGrid>,
    weights: Vec<f64>,
    columns: Vec<GreenColumn>,
}

/// JSON sidecar written next to a table CSV.
#[derive(Debug, Clone, Serialize)]
pub struct GreenSidecar {
    pub provenance: GreenProvenance,
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub mu: f64,
    pub poles: Vec<f64>,
    pub worst_constants: Option<BoundReport>,
}

impl GreenTable {
    pub fn provenance(&self) -> GreenProvenance {
        self.provenance
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// `ω_{n−1}`-scaled quadrature weights of the nodes.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn columns(&self) -> &[GreenColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &GreenColumn {
        &self.columns[i]
    }

    /// Column `i` as a field (parity-free: columns have a kink at the pole).
    pub fn field(&self, i: usize) -> Result<RadialField> {
        RadialField::new(self.grid.clone(), self.columns[i].values.clone(), Parity::None)
    }

    /// Worst `|G(x_p; r_q) − G(x_q; r_p)| / max(|·|, |·|)` over pairs of
    /// node poles, skipping pairs closer than the excluded band.
    pub fn symmetry_defect(&self) -> f64 {
        let nodes = self.grid.nodes();
        let mut worst = 0.0f64;
        for a in &self.columns {
            for b in &self.columns {
                let (Some(p), Some(q)) = (a.pole_node, b.pole_node) else {
                    continue;
                };
                if p >= q || in_band(&self.grid, nodes[p], nodes[q]) {
                    continue;
                }
                let (x, y) = (a.values[q], b.values[p]);
                let m = x.abs().max(y.abs());
                if m > 0.0 {
                    worst = worst.max((x - y).abs() / m);
                }
            }
        }
        worst
    }

    /// CSV with header `pole,r,G`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "pole,r,G")?;
        for c in &self.columns {
            for (r, g) in self.grid.nodes().iter().zip(&c.values) {
                writeln!(out, "{:.16e},{r:.16e},{g:.16e}", c.pole)?;
            }
        }
        Ok(())
    }

    pub fn sidecar(&self, worst: Option<BoundReport>) -> GreenSidecar {
        GreenSidecar {
            provenance: self.provenance,
            n: self.params.n(),
            k: self.params.k(),
            lambda: self.params.lambda(),
            mu: self.mu,
            poles: self.columns.iter().map(|c| c.pole).collect(),
            worst_constants: worst,
        }
    }
}

fn in_band(grid: &RadialGrid, x: f64, y: f64) -> bool {
    let h = grid.spacing_at(x).max(grid.spacing_at(y));
    (x - y).abs() < EXCLUDED_BAND * h
}

/// Boggio's centre-pole kernel sampled on a ball grid inside the unit ball.
pub fn boggio_table(p: &ProblemParams, grid: &Arc<RadialGrid>) -> Result<GreenTable> {
    if !grid.is_ball() || grid.r_max() > 1.0 + 1e-14 {
        return Err(Error::invalid("Boggio tables need a ball grid with r_max <= 1"));
    }
    let values = grid
        .nodes()
        .iter()
        .map(|&r| boggio_center(p.n(), p.k(), r.min(1.0)))
        .collect::<Result<Vec<_>>>()?;
    let omega = sphere_area(p.n());
    let weights = crate::quadrature::node_weights(grid, Parity::Even, p.n(), 0.0, grid.r_max())?
        .into_iter()
        .map(|w| omega * w)
        .collect();
    Ok(GreenTable {
        provenance: GreenProvenance::Boggio,
        params: p.with_lambda(0.0),
        mu: 0.0,
        grid: grid.clone(),
        weights,
        columns: vec![GreenColumn {
            pole: 0.0,
            pole_node: None,
            values,
        }],
    })
}

/// Green column for one pole; `pole_radius = 0` puts the delta on the first
/// node (the centre pole).
pub fn discrete_green(op: &DiscreteOperator, pole_radius: f64) -> Result<GreenTable> {
    discrete_green_poles(op, &[pole_radius])
}

/// One column per pole from a single factorization. Each delta sits on the
/// node nearest its pole with unit mass under the weighted quadrature.
pub fn discrete_green_poles(op: &DiscreteOperator, poles: &[f64]) -> Result<GreenTable> {
    let grid = op.grid().clone();
    let weights = op.weights()?;
    let lu = op.matrix().lu()?;
    let mut columns = Vec::with_capacity(poles.len());
    for &pole in poles {
        if !(0.0..1.0).contains(&pole) {
            return Err(Error::invalid(format!("pole radius must lie in [0, 1), got {pole}")));
        }
        let node = if pole == 0.0 { 0 } else { grid.nearest(pole) };
        if !op.is_interior(node) {
            return Err(Error::invalid(format!(
                "pole {pole} falls on boundary row {node}; refine the grid or move the pole"
            )));
        }
        let mut rhs = vec![0.0; grid.len()];
        rhs[node] = 1.0 / weights[node];
        let values = lu.solve(&rhs);
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                r: grid.nodes()[index],
            });
        }
        columns.push(GreenColumn {
            pole: if pole == 0.0 { 0.0 } else { grid.nodes()[node] },
            pole_node: Some(node),
            values,
        });
    }
    Ok(GreenTable {
        provenance: GreenProvenance::Discrete,
        params: *op.params(),
        mu: op.potential().mu(),
        grid,
        weights,
        columns,
    })
}

/// Largest `|(op·G)_i|` over interior rows away from the pole, relative to
/// the row magnitudes `Σ_j |A_ij G_j|`.
pub fn reproducing_defect(op: &DiscreteOperator, table: &GreenTable) -> Result<f64> {
    let a = op.matrix();
    let mut worst = 0.0f64;
    for c in table.columns() {
        let ag = a.matvec(&c.values);
        let abs: Vec<f64> = c.values.iter().map(|v| v.abs()).collect();
        let mag = a.abs_matvec(&abs);
        for i in 0..op.len() {
            if Some(i) == c.pole_node || mag[i] == 0.0 {
                continue;
            }
            worst = worst.max(ag[i].abs() / mag[i]);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeRatio {
    pub l: usize,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub mu: f64,
    /// `sup |G| / [(max/min)^γ |x−y|^{2k−n}]`.
    pub worst_ratio: f64,
    pub derivative_ratios: Vec<DerivativeRatio>,
    pub pairs: usize,
    pub excluded: usize,
}

impl BoundReport {
    pub fn is_finite(&self) -> bool {
        self.worst_ratio.is_finite() && self.derivative_ratios.iter().all(|d| d.worst.is_finite())
    }
}

/// `y`-derivatives of a column, taken separately on each side of the pole.
fn piecewise_derivative(grid: &RadialGrid, values: &[f64], pole: usize, l: usize, even: bool) -> Vec<Option<f64>> {
    let nodes = grid.nodes();
    let mut out = vec![None; nodes.len()];
    let pieces = [(0, pole + 1, true), (pole, nodes.len(), false)];
    for (lo, hi, ball) in pieces {
        if hi - lo < 12 {
            continue;
        }
        let Ok(g) = RadialGrid::from_nodes(nodes[lo..hi].to_vec(), ball) else {
            continue;
        };
        let parity = if ball && even { Parity::Even } else { Parity::None };
        let Ok(f) = RadialField::new(Arc::new(g), values[lo..hi].to_vec(), parity) else {
            continue;
        };
        if let Ok(d) = crate::calculus::differentiate(&f, l) {
            for (j, v) in d.values().iter().enumerate() {
                if lo + j != pole {
                    out[lo + j] = Some(*v);
                }
            }
        }
    }
    out
}

/// Empirical constants of the pointwise bounds
/// `|∂^l G(x, y)| ≤ C (max/min)^{γ+l} |x−y|^{2k−n−l}` over all pole/node
/// pairs, for `l = 0` and `l = 1..=min(2k−1, 2)`.
pub fn green_bound_certificate(table: &GreenTable, gamma: f64, mu: f64) -> Result<BoundReport> {
    let p = table.params();
    let (n, k) = (p.n() as f64, p.k() as f64);
    if !(gamma > 0.0 && gamma < n - 2.0 * k) {
        return Err(Error::precondition(format!("gamma must lie in (0, n - 2k), got {gamma}")));
    }
    if table.mu() > mu * (1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "table built with mu = {} exceeds the declared mu = {mu}",
            table.mu()
        )));
    }
    let grid = table.grid();
    let nodes = grid.nodes();
    let l_max = (2 * p.k() - 1).min(2);
    let smooth_inner = table.mu() == 0.0;
    let mut worst = 0.0f64;
    let mut deriv = vec![0.0f64; l_max];
    let mut pairs = 0;
    let mut excluded = 0;
    for c in table.columns() {
        let x = c.pole;
        if x <= 0.0 {
            return Err(Error::precondition("bound certificates need off-centre poles"));
        }
        let derivs: Vec<Vec<Option<f64>>> = match c.pole_node {
            Some(pn) => (1..=l_max)
                .map(|l| piecewise_derivative(grid, &c.values, pn, l, smooth_inner))
                .collect(),
            None => vec![vec![None; nodes.len()]; l_max],
        };
        for (j, &y) in nodes.iter().enumerate() {
            if in_band(grid, x, y) {
                excluded += 1;
                continue;
            }
            pairs += 1;
            let q = x.max(y) / x.min(y);
            let d = (x - y).abs();
            worst = worst.max(c.values[j].abs() / (q.powf(gamma) * d.powf(2.0 * k - n)));
            for (l, dl) in derivs.iter().enumerate() {
                if let Some(v) = dl[j] {
                    let lf = (l + 1) as f64;
                    let bound = q.powf(gamma + lf) * d.powf(2.0 * k - n - lf);
                    deriv[l] = deriv[l].max(v.abs() / bound);
                }
            }
        }
    }
    Ok(BoundReport {
        gamma,
        mu,
        worst_ratio: worst,
        derivative_ratios: deriv
            .into_iter()
            .enumerate()
            .map(|(l, worst)| DerivativeRatio { l: l + 1, worst })
            .collect(),
        pairs,
        excluded,
    })
}

/// Empirical `C₀` with `|x|^γ |φ(x)| ≤ C₀ ‖φ‖_{L^p(B_δ)}` for `|x| ≤ δ/2`.
///
/// `φ` must be an approximate kernel element of `op` on the rows with
/// `r ≤ δ`: the relative operator residual there is checked against
/// [`KERNEL_RESIDUAL_TOL`].
pub fn weighted_regularity_check(
    op: &DiscreteOperator,
    field: &RadialField,
    gamma: f64,
    p_exp: f64,
    delta: f64,
) -> Result<f64> {
    let p = op.params();
    if !(gamma > 0.0 && gamma < (p.n() - 2 * p.k()) as f64) {
        return Err(Error::precondition(format!("gamma must lie in (0, n - 2k), got {gamma}")));
    }
    if !(p_exp >= 1.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid("need p >= 1 and 0 < delta <= 1"));
    }
    if field.grid().nodes() != op.grid().nodes() {
        return Err(Error::invalid("field and operator live on different grids"));
    }
    let u = field.values();
    if u.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let a = op.matrix();
    let au = a.matvec(u);
    let mag = a.abs_matvec(&u.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let nodes = op.grid().nodes();
    for i in 0..op.len() {
        if nodes[i] > delta || !op.is_interior(i) || mag[i] == 0.0 {
            continue;
        }
        let rel = au[i].abs() / mag[i];
        if rel > KERNEL_RESIDUAL_TOL {
            return Err(Error::precondition(format!(
                "field is not a kernel element: relative residual {rel:.2e} at r = {}",
                nodes[i]
            )));
        }
    }
    let pw = field.map(|_, v| v.abs().powf(p_exp))?.with_parity(Parity::None);
    let norm = crate::calculus::weighted_integral_range(&pw, p.n(), 0.0, delta)?.powf(1.0 / p_exp);
    let sup = nodes
        .iter()
        .zip(u)
        .filter(|(r, _)| **r <= 0.5 * delta)
        .map(|(r, v)| r.powf(gamma) * v.abs())
        .fold(0.0, f64::max);
    Ok(sup / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cnk_values() {
        assert!((cnk(3, 1).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((cnk(5, 2).unwrap() - 1.0 / (16.0 * PI * PI)).abs() < 1e-17);
        assert!((cnk(7, 2).unwrap() - 1.0 / (32.0 * PI.powi(3))).abs() < 1e-18);
        assert!(cnk(4, 2).is_err());
    }

    #[test]
    fn fundamental_solution_values() {
        let c = 1.0 / (4.0 * PI);
        assert!((fundamental_solution(3, 1, 1.0).unwrap() - c).abs() < 1e-16);
        assert!((fundamental_solution(3, 1, 0.5).unwrap() - 2.0 * c).abs() < 1e-16);
        assert!(fundamental_solution(3, 1, 0.0).is_err());
    }

    #[test]
    fn boggio_tail_matches_quadrature() {
        for (n, k) in [(3, 1), (5, 2), (7, 3), (9, 2)] {
            let f = |t: f64| {
                let v = t.exp();
                (v * v - 1.0).powi(k as i32 - 1) * v.powi(2 - n as i32)
            };
            let quad = adaptive_integrate(&f, 0.0, 60.0, 1e-15);
            let exact = boggio_tail_integral(n, k);
            assert!((quad - exact).abs() < 1e-12 * exact, "({n},{k})");
        }
    }

    #[test]
    fn boggio_vanishes_at_the_boundary() {
        assert_eq!(boggio_center(5, 2, 1.0).unwrap(), 0.0);
        assert!(boggio_center(5, 2, 0.0).is_err());
    }

    #[test]
    fn flux_is_unit() {
        for k in 1..=3 {
            let n = 2 * k + 1;
            let got = kernel_flux(n, k, 0.3).unwrap();
            let exact = 0.3f64.powi(1 - n as i32) / sphere_area(n);
            assert!((got / exact - 1.0).abs() < 1e-13);
        }
    }
}
