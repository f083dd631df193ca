//! The banded radial operator `Δ^k − λ − V` on the unit ball with
//! Dirichlet rows `u = u' = … = u^{(k−1)} = 0` at `r = 1`.

use std::fmt;
use std::sync::Arc;

use crate::calculus::laplacian_matrix;
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::grid::RadialGrid;
use crate::linalg::{BandMatrix, SparseRows};
use crate::params::{sphere_area, ProblemParams};
use crate::quadrature;
use crate::stencil::{fd_weights, fold_row, points_for_order, window};

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A potential `V` with `|V(r)| ≤ μ r^{−2k}`, optionally cut off near the
/// origin by `η(r/ε)`.
#[derive(Clone)]
pub struct HardyPotential {
    mu: f64,
    profile: Option<Profile>,
    mollification_eps: f64,
    label: String,
}

impl fmt::Debug for HardyPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HardyPotential")
            .field("mu", &self.mu)
            .field("profile", &self.label)
            .field("mollification_eps", &self.mollification_eps)
            .finish()
    }
}

/// Smooth monotone transition: `0` for `t ≤ 1`, `1` for `t ≥ 2`.
pub fn eta(t: f64) -> f64 {
    if t <= 1.0 {
        0.0
    } else if t >= 2.0 {
        1.0
    } else {
        let psi = |s: f64| (-1.0 / s).exp();
        let a = psi(t - 1.0);
        a / (a + psi(2.0 - t))
    }
}

impl HardyPotential {
    pub fn zero() -> Self {
        Self {
            mu: 0.0,
            profile: None,
            mollification_eps: 0.0,
            label: "zero".into(),
        }
    }

    /// The extremal member `V(r) = μ r^{−2k}`.
    pub fn inverse_power(mu: f64, k: usize) -> Result<Self> {
        if !(mu >= 0.0) {
            return Err(Error::invalid("mu must be nonnegative"));
        }
        let e = 2 * k as i32;
        Ok(Self {
            mu,
            profile: Some(Arc::new(move |r: f64| mu * r.powi(-e))),
            mollification_eps: 0.0,
            label: format!("{mu} r^-{e}"),
        })
    }

    /// An arbitrary profile declared to satisfy the bound with constant `mu`.
    pub fn custom(mu: f64, label: impl Into<String>, profile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(mu >= 0.0) {
            return Err(Error::invalid("mu must be nonnegative"));
        }
        Ok(Self {
            mu,
            profile: Some(Arc::new(profile)),
            mollification_eps: 0.0,
            label: label.into(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mollification_eps(&self) -> f64 {
        self.mollification_eps
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_none()
    }

    /// `V_ε(r) = η(r/ε) V(r)`; replaces any earlier cutoff.
    pub fn mollified(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid("mollification radius must be positive"));
        }
        Ok(Self {
            mollification_eps: eps,
            ..self.clone()
        })
    }

    /// The uncut profile `V(r)`.
    pub fn base(&self, r: f64) -> f64 {
        self.profile.as_ref().map_or(0.0, |p| p(r))
    }

    pub fn eval(&self, r: f64) -> f64 {
        let v = self.base(r);
        if self.mollification_eps > 0.0 {
            eta(r / self.mollification_eps) * v
        } else {
            v
        }
    }

    /// Largest `|V(r_i)| r_i^{2k}` over the nodes.
    pub fn hardy_ratio(&self, grid: &RadialGrid, k: usize) -> f64 {
        grid.nodes()
            .iter()
            .map(|&r| self.eval(r).abs() * r.powi(2 * k as i32))
            .fold(0.0, f64::max)
    }

    /// Verifies `|V(r_i)| r_i^{2k} ≤ μ` at every node.
    pub fn check_bound(&self, grid: &RadialGrid, k: usize) -> Result<()> {
        let worst = self.hardy_ratio(grid, k);
        if worst > self.mu * (1.0 + 1e-12) {
            return Err(Error::precondition(format!(
                "potential violates |V| r^2k <= mu: found {worst:e} > {:e}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Sampled `Δ^k − λ − V` with Dirichlet rows at `r = 1`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    params: ProblemParams,
    grid: Arc<RadialGrid>,
    potential: HardyPotential,
    v_nodes: Vec<f64>,
    /// `Δ^k` on interior rows, boundary functionals on the last `k` rows.
    base: SparseRows,
}

/// Builds the operator on a ball grid with `r_max = 1`.
pub fn assemble_operator(p: &ProblemParams, v: &HardyPotential, grid: &Arc<RadialGrid>) -> Result<DiscreteOperator> {
    if !grid.is_ball() || (grid.r_max() - 1.0).abs() > 1e-14 {
        return Err(Error::invalid("the operator lives on the unit ball: use a ball grid with r_max = 1"));
    }
    let k = p.k();
    let min = 4 * k + 2;
    if grid.len() < min.max(points_for_order(2 * k)) {
        return Err(Error::GridTooSmall {
            got: grid.len(),
            min: min.max(points_for_order(2 * k)),
        });
    }
    v.check_bound(grid, k)?;
    let lap = laplacian_matrix(grid, Parity::Even, p.n())?;
    let mut base = lap.clone();
    for _ in 1..k {
        base = lap.compose(&base);
    }
    let n_nodes = grid.len();
    let last = n_nodes - 1;
    for j in 0..k {
        let row = if j == 0 {
            vec![(last, 1.0)]
        } else {
            let taps = window(grid, Parity::Even, last, points_for_order(j))?;
            let xs: Vec<f64> = taps.iter().map(|t| t.pos).collect();
            let w = fd_weights(1.0, &xs, j);
            fold_row(&taps, &w[j])
        };
        base.set_row(last - j, row);
    }
    let v_nodes = grid.nodes().iter().map(|&r| v.eval(r)).collect();
    Ok(DiscreteOperator {
        params: *p,
        grid: grid.clone(),
        potential: v.clone(),
        v_nodes,
        base,
    })
}

impl DiscreteOperator {
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &HardyPotential {
        &self.potential
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Number of Dirichlet rows (`k`).
    pub fn boundary_rows(&self) -> usize {
        self.params.k()
    }

    pub fn is_interior(&self, i: usize) -> bool {
        i < self.len() - self.boundary_rows()
    }

    /// `1` on interior rows, `0` on boundary rows.
    pub fn interior_mask(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| if self.is_interior(i) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Potential samples `V(r_i)`.
    pub fn potential_nodes(&self) -> &[f64] {
        &self.v_nodes
    }

    /// The same stencils with a different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            params: self.params.with_lambda(lambda),
            ..self.clone()
        }
    }

    /// Interior diagonal shift `−λ − V(r_i)`.
    fn shift(&self) -> Vec<f64> {
        let lambda = self.params.lambda();
        (0..self.len())
            .map(|i| {
                if self.is_interior(i) {
                    -lambda - self.v_nodes[i]
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Banded matrix of the full operator, boundary rows included.
    pub fn matrix(&self) -> BandMatrix {
        let mut band = self.base.to_band();
        band.add_diagonal(&self.shift());
        band
    }

    /// Banded `Δ^k` with boundary rows and no shift.
    pub fn principal_matrix(&self) -> BandMatrix {
        self.base.to_band()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.base.apply(u);
        for (o, (s, x)) in out.iter_mut().zip(self.shift().iter().zip(u)) {
            *o += s * x;
        }
        out
    }

    /// Quadrature weights of `∫ g dx` for even fields: `ω_{n−1} w_i`.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let omega = sphere_area(self.params.n());
        Ok(quadrature::node_weights(&self.grid, Parity::Even, self.params.n(), 0.0, 1.0)?
            .into_iter()
            .map(|w| omega * w)
            .collect())
    }

    /// `Δ^k u − λu − Vu` sampled as a field, boundary rows zeroed.
    pub fn residual_field(&self, u: &RadialField) -> Result<RadialField> {
        let mut r = self.apply(u.values());
        for (i, v) in r.iter_mut().enumerate() {
            if !self.is_interior(i) {
                *v = 0.0;
            }
        }
        RadialField::new(self.grid.clone(), r, Parity::Even)
    }
}
