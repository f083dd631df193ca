//! Radial differential calculus under the positive convention
//! `Δ = −Σ ∂_ii`, i.e. `Δg = −(g'' + (n−1)/r · g')` on radial `g`.

use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::grid::RadialGrid;
use crate::linalg::SparseRows;
use crate::params::{sphere_area, ProblemParams};
use crate::quadrature;
use crate::stencil::{adaptive_apply, derivative_matrix, Estimate};

/// Relative stencil error estimate above which a Laplacian is declared
/// unresolved.
pub const LAPLACIAN_RESOLUTION_TOL: f64 = 1e-3;

pub fn differentiate(f: &RadialField, order: usize) -> Result<RadialField> {
    let est = adaptive_apply(f.grid(), f.parity(), f.values(), f.noise(), |_| vec![(order, 1.0)])?;
    field_from(f, &est, f.parity().derivative(order))
}

fn field_from(f: &RadialField, est: &[Estimate], parity: Parity) -> Result<RadialField> {
    let values = est.iter().map(|e| e.value).collect();
    let noise = est.iter().map(|e| e.noise).collect();
    Ok(RadialField::new(f.grid().clone(), values, parity)?.with_noise(noise))
}

/// Sparse matrix of one radial Laplacian `−(D² + (n−1)/r D¹)` with
/// nearest-neighbour stencils, for operator assembly.
pub(crate) fn laplacian_matrix(grid: &RadialGrid, parity: Parity, n: usize) -> Result<SparseRows> {
    let d2 = derivative_matrix(grid, parity, 2)?;
    let mut d1 = derivative_matrix(grid, parity, 1)?;
    let inv_r: Vec<f64> = grid.nodes().iter().map(|r| (n as f64 - 1.0) / r).collect();
    d1.scale_rows(&inv_r);
    Ok(d2.add(&d1).scaled(-1.0))
}

fn check_laplacian_parity(f: &RadialField) -> Result<()> {
    if f.parity() == Parity::Odd {
        return Err(Error::precondition("the radial Laplacian needs an even or parity-free field"));
    }
    Ok(())
}

fn laplacian_estimates(f: &RadialField, n: usize) -> Result<Vec<Estimate>> {
    check_laplacian_parity(f)?;
    let c = n as f64 - 1.0;
    adaptive_apply(f.grid(), f.parity(), f.values(), f.noise(), |r| {
        vec![(2, -1.0), (1, -c / r)]
    })
}

/// One Laplacian without the resolution check.
pub(crate) fn laplacian(f: &RadialField, n: usize) -> Result<RadialField> {
    let est = laplacian_estimates(f, n)?;
    field_from(f, &est, f.parity())
}

/// `Δ^j f` together with the largest truncation estimate of the last
/// application relative to the stencil magnitudes.
pub(crate) fn iterated_laplacian_with_estimate(f: &RadialField, n: usize, j: usize) -> Result<(RadialField, f64)> {
    let mut cur = f.clone();
    let mut rel = 0.0;
    for _ in 0..j {
        let est = laplacian_estimates(&cur, n)?;
        let scale = est.iter().fold(0.0f64, |m, e| m.max(e.magnitude));
        let trunc = est.iter().fold(0.0f64, |m, e| m.max(e.trunc + e.noise));
        rel = if scale > 0.0 { trunc / scale } else { 0.0 };
        cur = field_from(&cur, &est, cur.parity())?;
    }
    Ok((cur, rel))
}

/// `Δ^j f` with the per-node error budget (truncation plus rounding) of the
/// last application.
pub(crate) fn iterated_laplacian_budget(f: &RadialField, n: usize, j: usize) -> Result<(RadialField, Vec<f64>)> {
    let mut cur = f.clone();
    let mut budget = vec![0.0; f.len()];
    for _ in 0..j {
        let est = laplacian_estimates(&cur, n)?;
        budget = est.iter().map(|e| e.trunc + e.noise).collect();
        cur = field_from(&cur, &est, cur.parity())?;
    }
    Ok((cur, budget))
}

/// `Δ^j f`, refusing grids on which the stencil error estimate exceeds
/// [`LAPLACIAN_RESOLUTION_TOL`] relative to the stencil magnitudes.
///
/// The check applies to even fields only; parity-free fields are typically
/// singular kernels whose nodes next to the singularity are never resolved.
pub fn iterated_laplacian(f: &RadialField, p: &ProblemParams, j: usize) -> Result<RadialField> {
    if j > p.k() {
        return Err(Error::invalid(format!("Laplacian power {j} exceeds k = {}", p.k())));
    }
    check_laplacian_parity(f)?;
    let (out, rel) = iterated_laplacian_with_estimate(f, p.n(), j)?;
    if f.parity() == Parity::Even && rel > LAPLACIAN_RESOLUTION_TOL {
        return Err(Error::Resolution(format!(
            "Laplacian power {j} has estimated relative truncation error {rel:.2e}"
        )));
    }
    Ok(out)
}

/// `T(f) = (n−2k)/2 · f + r f'`.
pub fn dilation_generator(f: &RadialField, p: &ProblemParams) -> Result<RadialField> {
    dilation_with_weight(f, p.conformal_weight())
}

pub(crate) fn dilation_with_weight(f: &RadialField, weight: f64) -> Result<RadialField> {
    let d = differentiate(f, 1)?;
    let nodes = f.nodes();
    let values = (0..nodes.len())
        .map(|i| weight * f.values()[i] + nodes[i] * d.values()[i])
        .collect();
    let noise = (0..nodes.len())
        .map(|i| weight.abs() * f.noise()[i] + nodes[i] * d.noise()[i])
        .collect();
    Ok(RadialField::new(f.grid().clone(), values, f.parity())?.with_noise(noise))
}

/// `∫ f dx` over the grid's ball or annulus.
pub fn weighted_integral(f: &RadialField, p: &ProblemParams) -> Result<f64> {
    let g = f.grid();
    weighted_integral_range(f, p.n(), g.r_min(), g.r_max())
}

/// `ω_{n−1} ∫_a^b f(r) r^{n−1} dr`.
pub fn weighted_integral_range(f: &RadialField, n: usize, a: f64, b: f64) -> Result<f64> {
    Ok(sphere_area(n) * quadrature::integrate(f.grid(), f.parity(), f.values(), n, a, b)?)
}

/// The field whose square integrates to the `H_k²` seminorm:
/// `Δ^{k/2} f` for even `k`, `(Δ^{(k−1)/2} f)'` for odd `k`.
pub fn half_laplacian(f: &RadialField, p: &ProblemParams) -> Result<RadialField> {
    let k = p.k();
    let base = iterated_laplacian(f, p, k / 2)?;
    if k % 2 == 0 {
        Ok(base)
    } else {
        differentiate(&base, 1)
    }
}

/// `∫ (Δ^{k/2} f)² dx`.
pub fn hk_seminorm(f: &RadialField, p: &ProblemParams) -> Result<f64> {
    let h = half_laplacian(f, p)?;
    let sq = h.map(|_, v| v * v)?.with_parity(match f.parity() {
        Parity::None => Parity::None,
        _ => Parity::Even,
    });
    weighted_integral(&sq, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridScheme, RadialGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<RadialGrid> {
        Arc::new(make_grid(n, GridScheme::Clustered, 1.0).unwrap())
    }

    #[test]
    fn polynomial_derivatives() {
        let g = Arc::new(make_grid(20, GridScheme::Uniform, 1.0).unwrap());
        let f = RadialField::from_fn(&g, Parity::Even, |r| r * r).unwrap();
        let d = differentiate(&f, 1).unwrap();
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * r).abs() < 1e-10);
        }
        let f = RadialField::from_fn(&g, Parity::Even, |r| r.powi(4)).unwrap();
        let d = differentiate(&f, 3).unwrap();
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - 24.0 * r).abs() < 1e-8);
        }
    }

    #[test]
    fn second_derivative_of_sine() {
        let g = Arc::new(make_grid(100, GridScheme::Uniform, 2.0).unwrap());
        let f = RadialField::from_fn(&g, Parity::Odd, f64::sin).unwrap();
        let d = differentiate(&f, 2).unwrap();
        let i = g.nearest(1.0);
        assert!((d.values()[i] + 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn order_limit_is_reported() {
        let g = grid(80);
        let f = RadialField::zeros(&g, Parity::Even);
        let msg = differentiate(&f, 12).unwrap_err().to_string();
        assert!(msg.contains("maximum supported order 9"));
    }

    #[test]
    fn laplacian_of_r_squared() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let f = RadialField::from_fn(&grid(60), Parity::Even, |r| r * r).unwrap();
        let l = iterated_laplacian(&f, &p, 1).unwrap();
        assert!(l.values().iter().all(|v| (v + 6.0).abs() < 1e-9));
    }

    #[test]
    fn fundamental_profile_is_polyharmonic() {
        let p = ProblemParams::new(5, 2, 0.0).unwrap();
        let g = Arc::new(make_grid(200, GridScheme::Uniform, 1.0).unwrap());
        let f = RadialField::from_fn(&g, Parity::None, |r| 1.0 / r).unwrap();
        let l = iterated_laplacian(&f, &p, 2).unwrap();
        for (r, v) in g.nodes().iter().zip(l.values()).filter(|(r, _)| **r >= 0.1) {
            // relative to the leading term f'''' = 24 r^-5
            assert!(v.abs() * r.powi(5) / 24.0 < 1e-6, "r = {r}: {v}");
        }
    }

    #[test]
    fn integrals_of_the_unit_ball() {
        let g = grid(50);
        let p3 = ProblemParams::new(3, 1, 0.0).unwrap();
        let one = RadialField::from_fn(&g, Parity::Even, |_| 1.0).unwrap();
        assert!((weighted_integral(&one, &p3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-8);
        let lin = RadialField::from_fn(&g, Parity::None, |r| r).unwrap();
        assert!((weighted_integral(&lin, &p3).unwrap() - PI).abs() < 1e-8);
        let p5 = ProblemParams::new(5, 1, 0.0).unwrap();
        let exact = 8.0 * PI * PI / 3.0 / 5.0;
        assert!((weighted_integral(&one, &p5).unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn seminorm_of_a_parabola() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let f = RadialField::from_fn(&grid(80), Parity::Even, |r| 1.0 - r * r).unwrap();
        let got = hk_seminorm(&f, &p).unwrap();
        assert!((got - 16.0 * PI / 5.0).abs() < 1e-9);
        let scaled = hk_seminorm(&f.scaled(3.0), &p).unwrap();
        assert!((scaled - 9.0 * got).abs() < 1e-12 * scaled);
    }

    #[test]
    fn dilation_of_the_fundamental_profile() {
        let p = ProblemParams::new(3, 1, 0.0).unwrap();
        let g = Arc::new(RadialGrid::annulus(160, GridScheme::Clustered, 0.2, 1.0).unwrap());
        let f = RadialField::from_fn(&g, Parity::None, |r| 1.0 / r).unwrap();
        let t = dilation_generator(&f, &p).unwrap();
        for (r, v) in g.nodes().iter().zip(t.values()) {
            assert!((v + 0.5 / r).abs() < 1e-9);
        }
    }
}
