//! Weighted radial quadrature `∫_a^b g(r) r^{n−1} dr` on grid samples.
//!
//! Each cell is integrated exactly against the local degree-7 interpolant
//! of `g` (eight nodes, reflected through the origin for even/odd fields)
//! with an 8-point Gauss–Legendre rule. For fields without parity the cell
//! `[0, r_1]` of a ball uses a power-law fit `g ≈ c r^σ` instead.

use crate::error::{Error, Result};
use crate::field::Parity;
use crate::grid::RadialGrid;
use crate::stencil::{fd_weights, fold_row, window_ext};

const INTERP_POINTS: usize = 8;
const GAUSS_POINTS: usize = 8;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫_a^b f` by recursive bisection of a 15-point Gauss–Legendre rule until
/// halves agree to `tol` (absolute).
pub fn adaptive_integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (x, w) = gauss_legendre(15);
    let rule = |lo: f64, hi: f64| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        x.iter().zip(&w).map(|(t, wt)| wt * f(mid + half * t)).sum::<f64>() * half
    };
    fn recurse(rule: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let mid = 0.5 * (lo + hi);
        let (l, r) = (rule(lo, mid), rule(mid, hi));
        if depth == 0 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        recurse(rule, lo, mid, l, 0.5 * tol, depth - 1) + recurse(rule, mid, hi, r, 0.5 * tol, depth - 1)
    }
    recurse(&rule, a, b, rule(a, b), tol, 40)
}

fn check_range(grid: &RadialGrid, a: f64, b: f64) -> Result<()> {
    let slack = 1e-12 * grid.r_max();
    if !(a <= b) || a < grid.r_min() - slack || b > grid.r_max() + slack {
        return Err(Error::invalid(format!(
            "integration range [{a}, {b}] not inside [{}, {}]",
            grid.r_min(),
            grid.r_max()
        )));
    }
    Ok(())
}

/// Adds the weights of `∫_{lo}^{hi} g r^{n−1} dr` over one cell, with the
/// interpolation window anchored at extended index `left`.
fn add_cell(
    grid: &RadialGrid,
    parity: Parity,
    n_dim: usize,
    left: isize,
    lo: f64,
    hi: f64,
    out: &mut [f64],
) -> Result<()> {
    if hi <= lo {
        return Ok(());
    }
    let taps = window_ext(grid, parity, left, INTERP_POINTS)?;
    let xs: Vec<f64> = taps.iter().map(|t| t.pos).collect();
    let (gx, gw) = gauss_legendre(GAUSS_POINTS);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for (t, wt) in gx.iter().zip(&gw) {
        let r = mid + half * t;
        let lag = fd_weights(r, &xs, 0);
        let scale = wt * half * r.powi(n_dim as i32 - 1);
        for (c, v) in fold_row(&taps, &lag[0]) {
            out[c] += scale * v;
        }
    }
    Ok(())
}

/// Linear weights `w` with `Σ w_i g_i ≈ ∫_a^b g(r) r^{n−1} dr`.
///
/// For parity-free fields on a ball the cell `[0, r_1]` is treated as
/// constant; [`integrate`] replaces that cell by a power-law fit.
pub fn node_weights(grid: &RadialGrid, parity: Parity, n_dim: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    let mut w = range_weights(grid, parity, n_dim, a, b)?;
    if grid.is_ball() && parity == Parity::None {
        let r0 = grid.nodes()[0];
        let (lo, hi) = (a.max(0.0), b.min(r0));
        if hi > lo {
            w[0] += (hi.powi(n_dim as i32) - lo.powi(n_dim as i32)) / n_dim as f64;
        }
    }
    Ok(w)
}

/// Weights for every cell except the parity-free first cell of a ball.
fn range_weights(grid: &RadialGrid, parity: Parity, n_dim: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    check_range(grid, a, b)?;
    let nodes = grid.nodes();
    let mut w = vec![0.0; nodes.len()];
    if grid.is_ball() && parity != Parity::None {
        add_cell(grid, parity, n_dim, -1, a.max(0.0), b.min(nodes[0]), &mut w)?;
    }
    for i in 0..nodes.len() - 1 {
        let lo = a.max(nodes[i]);
        let hi = b.min(nodes[i + 1]);
        if hi > lo {
            add_cell(grid, parity, n_dim, i as isize, lo, hi, &mut w)?;
        }
    }
    Ok(w)
}

/// `∫_a^b g(r) r^{n−1} dr` from the samples `values` of `g`.
pub fn integrate(grid: &RadialGrid, parity: Parity, values: &[f64], n_dim: usize, a: f64, b: f64) -> Result<f64> {
    let w = range_weights(grid, parity, n_dim, a, b)?;
    let mut total: f64 = w.iter().zip(values).map(|(w, v)| w * v).sum();
    if grid.is_ball() && parity == Parity::None {
        let nodes = grid.nodes();
        let (lo, hi) = (a.max(0.0), b.min(nodes[0]));
        if hi > lo {
            total += power_cell(nodes[0], nodes[1], values[0], values[1], n_dim, lo, hi)?;
        }
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index,
            r: grid.nodes()[index],
        });
    }
    Ok(total)
}

/// `∫_lo^hi c r^{σ+n−1} dr` with `c r^σ` through `(r0, g0)` and `(r1, g1)`.
fn power_cell(r0: f64, r1: f64, g0: f64, g1: f64, n_dim: usize, lo: f64, hi: f64) -> Result<f64> {
    let nf = n_dim as f64;
    if g0 == 0.0 || g0.signum() != g1.signum() {
        return Ok(g0 * (hi.powf(nf) - lo.powf(nf)) / nf);
    }
    let sigma = (g1 / g0).ln() / (r1 / r0).ln();
    let e = sigma + nf;
    if e <= 0.0 {
        return Err(Error::Resolution(format!(
            "integrand behaves like r^{sigma:.3} at the origin; the weighted integral diverges"
        )));
    }
    let c = g0 / r0.powf(sigma);
    Ok(c * (hi.powf(e) - lo.powf(e)) / e)
}
