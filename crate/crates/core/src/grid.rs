//! Radial grids on `(0, r_max]` (balls) and `[r_in, r_out]` (annuli).
//!
//! Ball grids never contain the origin. The clustered scheme is the image of
//! a cell-centred uniform grid `s_i = (i − ½)/(N − ½)` under the odd map
//! `s ↦ r_max · sinh(β m(s)) / sinh β` with `m(s) = s/5 + 4/5 · sin(πs/2)`,
//! so reflecting the nodes through the origin yields a smooth extended grid.
//! This is what makes even-parity ghost stencils near `r = 0` behave like
//! interior stencils. The `sin` component refines the grid towards `r_max`
//! without letting the spacing collapse quadratically there, which would
//! wreck one-sided high-order stencils in floating point.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Smallest grid accepted by [`make_grid`]: `4k + 2` for `k = 1`.
pub const MIN_GRID_POINTS: usize = 6;

/// Clustering strength used by [`make_grid`] for the clustered scheme.
pub const DEFAULT_STRETCH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScheme {
    Uniform,
    Clustered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    scheme: GridScheme,
    r_max: f64,
    /// `None` for ball grids (reflection through the origin is available),
    /// `Some(r_in)` for annulus grids whose first node is `r_in`.
    inner: Option<f64>,
    stretch: f64,
}

/// Builds a ball grid with `n_points` nodes in `(0, r_max]`.
pub fn make_grid(n_points: usize, scheme: GridScheme, r_max: f64) -> Result<RadialGrid> {
    match scheme {
        GridScheme::Uniform => RadialGrid::uniform(n_points, r_max),
        GridScheme::Clustered => RadialGrid::clustered(n_points, r_max, DEFAULT_STRETCH),
    }
}

fn check_size(n_points: usize, r_max: f64) -> Result<()> {
    if n_points < MIN_GRID_POINTS {
        return Err(Error::GridTooSmall {
            got: n_points,
            min: MIN_GRID_POINTS,
        });
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
    }
    Ok(())
}

/// The clustered map `s ↦ sinh(β m(s)) / sinh β` on `[0, 1]`.
pub(crate) fn cluster_map(s: f64, stretch: f64) -> f64 {
    let t = 0.2 * s + 0.8 * (FRAC_PI_2 * s).sin();
    if stretch < 1e-8 {
        t
    } else {
        (stretch * t).sinh() / stretch.sinh()
    }
}

impl RadialGrid {
    /// `r_i = i · r_max / N`, `i = 1..=N`.
    pub fn uniform(n_points: usize, r_max: f64) -> Result<Self> {
        check_size(n_points, r_max)?;
        let h = r_max / n_points as f64;
        let mut nodes: Vec<f64> = (1..=n_points).map(|i| i as f64 * h).collect();
        nodes[n_points - 1] = r_max;
        Ok(Self {
            nodes,
            scheme: GridScheme::Uniform,
            r_max,
            inner: None,
            stretch: 0.0,
        })
    }

    /// Clustered ball grid; larger `stretch` packs more nodes near the origin.
    pub fn clustered(n_points: usize, r_max: f64, stretch: f64) -> Result<Self> {
        check_size(n_points, r_max)?;
        if !(stretch >= 0.0) || !stretch.is_finite() {
            return Err(Error::invalid("stretch must be finite and nonnegative"));
        }
        let denom = n_points as f64 - 0.5;
        let mut nodes: Vec<f64> = (1..=n_points)
            .map(|i| r_max * cluster_map((i as f64 - 0.5) / denom, stretch))
            .collect();
        nodes[n_points - 1] = r_max;
        let grid = Self {
            nodes,
            scheme: GridScheme::Clustered,
            r_max,
            inner: None,
            stretch,
        };
        grid.check_monotone()?;
        Ok(grid)
    }

    /// Clustered ball grid whose stretch is the smallest one placing at least
    /// `core_nodes` nodes inside `(0, core_radius]`.
    pub fn clustered_resolving(
        n_points: usize,
        r_max: f64,
        core_radius: f64,
        core_nodes: usize,
    ) -> Result<Self> {
        check_size(n_points, r_max)?;
        if core_nodes >= n_points / 2 {
            return Err(Error::invalid("core node count must be below half the grid"));
        }
        let count = |stretch: f64| {
            let denom = n_points as f64 - 0.5;
            (1..=n_points)
                .filter(|&i| r_max * cluster_map((i as f64 - 0.5) / denom, stretch) <= core_radius)
                .count()
        };
        if count(0.0) >= core_nodes {
            return Self::clustered(n_points, r_max, 0.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while count(hi) < core_nodes {
            lo = hi;
            hi *= 1.5;
            if hi > 200.0 {
                return Err(Error::Resolution(format!(
                    "cannot place {core_nodes} of {n_points} nodes inside r <= {core_radius:e}"
                )));
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if count(mid) >= core_nodes {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Self::clustered(n_points, r_max, hi)
    }

    /// Grid on the closed annulus `[r_in, r_out]` (both radii are nodes).
    /// The clustered scheme uses Chebyshev–Gauss–Lobatto points.
    pub fn annulus(n_points: usize, scheme: GridScheme, r_in: f64, r_out: f64) -> Result<Self> {
        check_size(n_points, r_out)?;
        if !(r_in > 0.0 && r_in < r_out) {
            return Err(Error::invalid(format!(
                "annulus needs 0 < r_in < r_out, got [{r_in}, {r_out}]"
            )));
        }
        let m = (n_points - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_points)
            .map(|i| {
                let s = i as f64 / m;
                let t = match scheme {
                    GridScheme::Uniform => s,
                    GridScheme::Clustered => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
                };
                r_in + (r_out - r_in) * t
            })
            .collect();
        nodes[0] = r_in;
        nodes[n_points - 1] = r_out;
        Ok(Self {
            nodes,
            scheme,
            r_max: r_out,
            inner: Some(r_in),
            stretch: 0.0,
        })
    }

    /// Rebuilds a grid from explicit nodes (e.g. read back from CSV).
    /// `ball` selects whether the origin closes the interval on the left.
    pub fn from_nodes(nodes: Vec<f64>, ball: bool) -> Result<Self> {
        let n_points = nodes.len();
        let r_max = nodes.last().copied().unwrap_or(0.0);
        check_size(n_points, r_max)?;
        let h = r_max / n_points as f64;
        let uniform = ball
            && nodes
                .iter()
                .enumerate()
                .all(|(i, &r)| (r - (i + 1) as f64 * h).abs() <= 1e-12 * r_max);
        let grid = Self {
            inner: if ball { None } else { Some(nodes[0]) },
            nodes,
            scheme: if uniform { GridScheme::Uniform } else { GridScheme::Clustered },
            r_max,
            stretch: 0.0,
        };
        grid.check_monotone()?;
        Ok(grid)
    }

    fn check_monotone(&self) -> Result<()> {
        let ok = self.nodes[0] > 0.0 && self.nodes.windows(2).all(|w| w[1] > w[0]);
        if ok {
            Ok(())
        } else {
            Err(Error::Resolution(
                "grid nodes are not strictly increasing (stretch too large for the node count)"
                    .into(),
            ))
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    /// Ball grids admit reflection through the origin.
    pub fn is_ball(&self) -> bool {
        self.inner.is_none()
    }

    /// Left end of the represented interval: `0` for balls, `r_in` for annuli.
    pub fn r_min(&self) -> f64 {
        self.inner.unwrap_or(0.0)
    }

    /// Index of the node nearest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x < r);
        if idx == 0 {
            0
        } else if idx >= self.nodes.len() {
            self.nodes.len() - 1
        } else if (self.nodes[idx] - r) < (r - self.nodes[idx - 1]) {
            idx
        } else {
            idx - 1
        }
    }

    /// Local node spacing around `r`.
    pub fn spacing_at(&self, r: f64) -> f64 {
        let i = self.nearest(r);
        let n = self.nodes.len();
        if i + 1 < n {
            self.nodes[i + 1] - self.nodes[i]
        } else {
            self.nodes[i] - self.nodes[i - 1]
        }
    }

    /// Number of nodes in `(0, r]`.
    pub fn count_within(&self, r: f64) -> usize {
        self.nodes.partition_point(|&x| x <= r)
    }
}
