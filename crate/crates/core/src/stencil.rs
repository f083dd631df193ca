//! Finite-difference weights on arbitrary node sets (Fornberg's recurrence)
//! and stencil windows that respect field parity at the origin.

use crate::error::{Error, Result};
use crate::field::Parity;
use crate::grid::RadialGrid;
use crate::linalg::SparseRows;

/// Design order of the differentiation stencils: a derivative of order `d`
/// uses at least `d + ACCURACY_ORDER` points.
pub const ACCURACY_ORDER: usize = 8;

/// Highest derivative order the stencil machinery will build.
pub const MAX_DERIVATIVE_ORDER: usize = 9;

/// Weights `c[d][j]` such that `f^{(d)}(z) ≈ Σ_j c[d][j] f(x_j)` for
/// `d = 0..=max_order`.
pub fn fd_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=mn).rev() {
                    c[d][i] = c1 * (d as f64 * c[d - 1][i - 1] - c5 * c[d][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for d in (1..=mn).rev() {
                c[d][j] = (c4 * c[d][j] - d as f64 * c[d - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One stencil point: grid node, its (possibly reflected) abscissa and the
/// sign picked up by reflection.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tap {
    pub node: usize,
    pub pos: f64,
    pub sign: f64,
}

/// Number of stencil points for a derivative of the given order.
pub(crate) fn points_for_order(order: usize) -> usize {
    let np = order + ACCURACY_ORDER;
    if np % 2 == 0 {
        np + 1
    } else {
        np
    }
}

fn reflects(grid: &RadialGrid, parity: Parity) -> bool {
    grid.is_ball() && parity != Parity::None
}

/// A window of `np` consecutive points of the (reflected) grid, centred on
/// node `center` where possible.
pub(crate) fn window(grid: &RadialGrid, parity: Parity, center: usize, np: usize) -> Result<Vec<Tap>> {
    window_ext(grid, parity, center as isize, np)
}

/// Like [`window`], with `center` an index into the reflected grid
/// (`-1` is the mirror image of node 0).
pub(crate) fn window_ext(grid: &RadialGrid, parity: Parity, center: isize, np: usize) -> Result<Vec<Tap>> {
    let n = grid.len() as isize;
    let reflect = reflects(grid, parity);
    let available = if reflect { 2 * n } else { n };
    if (np as isize) > available {
        return Err(Error::GridTooSmall {
            got: grid.len(),
            min: if reflect { np.div_ceil(2) } else { np },
        });
    }
    let lo = if reflect { -n } else { 0 };
    let hi = n - np as isize;
    let start = (center - (np as isize - 1) / 2).clamp(lo, hi);
    let sign = match parity {
        Parity::Odd => -1.0,
        _ => 1.0,
    };
    let nodes = grid.nodes();
    Ok((start..start + np as isize)
        .map(|e| {
            if e >= 0 {
                Tap {
                    node: e as usize,
                    pos: nodes[e as usize],
                    sign: 1.0,
                }
            } else {
                let node = (-e - 1) as usize;
                Tap {
                    node,
                    pos: -nodes[node],
                    sign,
                }
            }
        })
        .collect())
}

/// Widest node stride tried by the adaptive evaluators.
pub(crate) const MAX_STRIDE: usize = 6;

/// Relative rounding error assumed for every sample.
const ROUNDOFF: f64 = 4.0 * f64::EPSILON;

/// `np` taps spaced `stride` nodes apart around extended index `center`,
/// shifted inwards at the ends; `None` if the grid is too short.
pub(crate) fn strided_window(
    grid: &RadialGrid,
    parity: Parity,
    center: isize,
    np: usize,
    stride: usize,
) -> Option<Vec<Tap>> {
    let n = grid.len() as isize;
    let reflect = reflects(grid, parity);
    let lo = if reflect { -n } else { 0 };
    let span = (stride * (np - 1)) as isize;
    if span > n - 1 - lo {
        return None;
    }
    let start = (center - span / 2).clamp(lo, n - 1 - span);
    let sign = match parity {
        Parity::Odd => -1.0,
        _ => 1.0,
    };
    let nodes = grid.nodes();
    Some(
        (0..np as isize)
            .map(|j| {
                let e = start + j * stride as isize;
                if e >= 0 {
                    Tap {
                        node: e as usize,
                        pos: nodes[e as usize],
                        sign: 1.0,
                    }
                } else {
                    let node = (-e - 1) as usize;
                    Tap {
                        node,
                        pos: -nodes[node],
                        sign,
                    }
                }
            })
            .collect(),
    )
}

/// A stencil evaluation with its error budget: `noise` is propagated
/// rounding error, `trunc` the gap to the next-lower-order stencil.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate {
    pub value: f64,
    pub noise: f64,
    pub trunc: f64,
    /// `Σ |w_j f_j|`, the scale against which cancellation happens.
    pub magnitude: f64,
}

fn combo_eval(
    r: f64,
    taps: &[Tap],
    combo: &[(usize, f64)],
    max_order: usize,
    values: &[f64],
    noise: &[f64],
) -> (f64, f64, f64) {
    let xs: Vec<f64> = taps.iter().map(|t| t.pos).collect();
    let w = fd_weights(r, &xs, max_order);
    let (mut v, mut nz, mut mag) = (0.0, 0.0, 0.0);
    for (j, tap) in taps.iter().enumerate() {
        let wj: f64 = combo.iter().map(|&(d, c)| c * w[d][j]).sum::<f64>() * tap.sign;
        let fj = values[tap.node];
        v += wj * fj;
        mag += (wj * fj).abs();
        nz += wj.abs() * (noise[tap.node] + ROUNDOFF * fj.abs());
    }
    (v, nz, mag)
}

/// Evaluates `Σ c_d f^{(d)}(r)` for `combo = [(d, c_d), ..]`, choosing the
/// node stride that minimises truncation plus propagated rounding error.
pub(crate) fn adaptive_eval(
    grid: &RadialGrid,
    parity: Parity,
    values: &[f64],
    noise: &[f64],
    r: f64,
    center: isize,
    combo: &[(usize, f64)],
) -> Result<Estimate> {
    let max_order = combo.iter().map(|c| c.0).max().unwrap_or(0);
    if max_order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderTooHigh {
            requested: max_order,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let np = points_for_order(max_order);
    let mut best: Option<(f64, Estimate)> = None;
    for stride in 1..=MAX_STRIDE {
        let (Some(hi), Some(lo)) = (
            strided_window(grid, parity, center, np, stride),
            strided_window(grid, parity, center, np - 2, stride),
        ) else {
            break;
        };
        let (v, nz, mag) = combo_eval(r, &hi, combo, max_order, values, noise);
        let (v_lo, _, _) = combo_eval(r, &lo, combo, max_order, values, noise);
        let est = Estimate {
            value: v,
            noise: nz,
            trunc: (v - v_lo).abs(),
            magnitude: mag,
        };
        let score = est.noise + est.trunc;
        if best.as_ref().map_or(true, |(b, _)| score < *b) {
            best = Some((score, est));
        }
    }
    best.map(|(_, e)| e).ok_or(Error::GridTooSmall {
        got: grid.len(),
        min: if reflects(grid, parity) { np.div_ceil(2) } else { np },
    })
}

/// [`adaptive_eval`] at every node; `combo_at(r)` gives the coefficients.
pub(crate) fn adaptive_apply(
    grid: &RadialGrid,
    parity: Parity,
    values: &[f64],
    noise: &[f64],
    combo_at: impl Fn(f64) -> Vec<(usize, f64)>,
) -> Result<Vec<Estimate>> {
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| adaptive_eval(grid, parity, values, noise, r, i as isize, &combo_at(r)))
        .collect()
}

/// Accumulates `weights` over `taps` into a row keyed by node index.
pub(crate) fn fold_row(taps: &[Tap], weights: &[f64]) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(taps.len());
    for (tap, &w) in taps.iter().zip(weights) {
        let w = w * tap.sign;
        match row.iter_mut().find(|(c, _)| *c == tap.node) {
            Some(entry) => entry.1 += w,
            None => row.push((tap.node, w)),
        }
    }
    row.sort_by_key(|(c, _)| *c);
    row
}

/// Sparse matrix of `d^order/dr^order` on `grid` for fields of the given parity.
pub(crate) fn derivative_matrix(grid: &RadialGrid, parity: Parity, order: usize) -> Result<SparseRows> {
    derivative_matrix_with(grid, parity, order, points_for_order(order))
}

pub(crate) fn derivative_matrix_with(
    grid: &RadialGrid,
    parity: Parity,
    order: usize,
    np: usize,
) -> Result<SparseRows> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderTooHigh {
            requested: order,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let nodes = grid.nodes();
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &r) in nodes.iter().enumerate() {
        let taps = window(grid, parity, i, np)?;
        let xs: Vec<f64> = taps.iter().map(|t| t.pos).collect();
        let w = fd_weights(r, &xs, order);
        rows.push(fold_row(&taps, &w[order]));
    }
    Ok(SparseRows::new(grid.len(), rows))
}
