//! Radial functions sampled on a [`RadialGrid`].

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::{adaptive_eval, Estimate};

/// Behaviour of a field under reflection `r ↦ −r`.
///
/// `Even` fields extend smoothly through the origin (all odd derivatives
/// vanish there), `Odd` fields are their radial derivatives, and `None`
/// marks fields with no usable symmetry, such as kernels singular at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    /// Parity of the `order`-th derivative.
    pub fn derivative(self, order: usize) -> Parity {
        match (self, order % 2) {
            (p, 0) => p,
            (Parity::Even, _) => Parity::Odd,
            (Parity::Odd, _) => Parity::Even,
            (Parity::None, _) => Parity::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    parity: Parity,
    /// Estimated absolute rounding error per node, grown by differentiation.
    noise: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                r: grid.nodes()[index],
            });
        }
        let noise = vec![0.0; values.len()];
        Ok(Self {
            grid,
            values,
            parity,
            noise,
        })
    }

    pub(crate) fn with_noise(mut self, noise: Vec<f64>) -> Self {
        debug_assert_eq!(noise.len(), self.values.len());
        self.noise = noise;
        self
    }

    /// Propagated rounding-error estimate per node (zero for sampled data).
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, parity: Parity, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values, parity)
    }

    pub fn zeros(grid: &Arc<RadialGrid>, parity: Parity) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            parity,
            noise: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map `(r, f(r)) ↦ g`; parity is kept.
    pub fn map(&self, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| g(r, v))
            .collect();
        Self::new(self.grid.clone(), values, self.parity)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            parity: self.parity,
            noise: self.noise.iter().map(|v| a.abs() * v).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Node index of the largest `|f|`.
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let lo = self.grid.r_min();
        let hi = self.grid.r_max();
        let slack = 1e-12 * hi;
        if r.is_finite() && r >= lo - slack && r <= hi + slack {
            Ok(())
        } else {
            Err(Error::invalid(format!("radius {r} outside [{lo}, {hi}]")))
        }
    }

    /// Interpolated value at an arbitrary radius in the grid range.
    pub fn value_at(&self, r: f64) -> Result<f64> {
        self.derivative_at(r, 0)
    }

    /// `d^order f/dr^order` at `r`, from a local high-order stencil.
    pub fn derivative_at(&self, r: f64, order: usize) -> Result<f64> {
        Ok(self.estimate_at(r, &[(order, 1.0)])?.value)
    }

    /// `Σ c_d f^{(d)}(r)` with its error budget.
    pub(crate) fn estimate_at(&self, r: f64, combo: &[(usize, f64)]) -> Result<Estimate> {
        self.check_radius(r)?;
        let center = self.grid.nearest(r) as isize;
        adaptive_eval(&self.grid, self.parity, &self.values, &self.noise, r, center, combo)
    }

    /// CSV with header `r,value` and 17 significant digits per entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads a field written by [`RadialField::write_csv`]. `ball` says
    /// whether the samples live on a ball (origin on the left) or an annulus.
    pub fn read_csv<R: BufRead>(input: R, parity: Parity, ball: bool) -> Result<Self> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "r,value" => {}
            _ => return Err(Error::Parse("expected header \"r,value\"".into())),
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad row {}: {line:?}", lineno + 2)))
            };
            nodes.push(next()?);
            values.push(next()?);
        }
        let grid = RadialGrid::from_nodes(nodes, ball)?;
        Self::new(Arc::new(grid), values, parity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridScheme};

    #[test]
    fn csv_round_trip_is_exact() {
        let g = Arc::new(make_grid(40, GridScheme::Clustered, 1.0).unwrap());
        let f = RadialField::from_fn(&g, Parity::Even, |r| (1.0 + r * r).ln() / 3.0).unwrap();
        let text = f.to_csv_string();
        assert!(text.starts_with("r,value\n"));
        let back = RadialField::read_csv(text.as_bytes(), Parity::Even, true).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.nodes(), f.nodes());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = Arc::new(make_grid(10, GridScheme::Uniform, 1.0).unwrap());
        let err = RadialField::from_fn(&g, Parity::None, |r| 1.0 / (r - 0.5)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 4, .. }));
    }

    #[test]
    fn interpolation_through_the_origin() {
        let g = Arc::new(make_grid(60, GridScheme::Clustered, 1.0).unwrap());
        let f = RadialField::from_fn(&g, Parity::Even, |r| r.cos()).unwrap();
        assert!((f.value_at(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(f.derivative_at(0.0, 1).unwrap().abs() < 1e-10);
        assert!((f.value_at(0.37).unwrap() - 0.37f64.cos()).abs() < 1e-10);
    }
}
