//! Sparse row matrices for stencil algebra and a banded LU factorisation
//! with partial pivoting.

use crate::error::{Error, Result};

/// Row-compressed sparse matrix; each row holds `(column, value)` pairs
/// sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    n_cols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        Self { n_cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn set_row(&mut self, i: usize, row: Vec<(usize, f64)>) {
        self.rows[i] = row;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, w)| w * x[c]).sum())
            .collect()
    }

    /// `self · other`.
    pub fn compose(&self, other: &SparseRows) -> SparseRows {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: Vec<(usize, f64)> = Vec::new();
                for &(mid, w) in row {
                    for &(c, v) in other.row(mid) {
                        match acc.binary_search_by_key(&c, |e| e.0) {
                            Ok(pos) => acc[pos].1 += w * v,
                            Err(pos) => acc.insert(pos, (c, w * v)),
                        }
                    }
                }
                acc
            })
            .collect();
        SparseRows::new(other.n_cols, rows)
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&mut self, scale: &[f64]) {
        for (row, &s) in self.rows.iter_mut().zip(scale) {
            for e in row.iter_mut() {
                e.1 *= s;
            }
        }
    }

    /// `self + other` for matrices of equal shape.
    pub fn add(&self, other: &SparseRows) -> SparseRows {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut acc = a.clone();
                for &(c, v) in b {
                    match acc.binary_search_by_key(&c, |e| e.0) {
                        Ok(pos) => acc[pos].1 += v,
                        Err(pos) => acc.insert(pos, (c, v)),
                    }
                }
                acc
            })
            .collect();
        SparseRows::new(self.n_cols, rows)
    }

    pub fn scaled(&self, s: f64) -> SparseRows {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| (c, v * s)).collect())
            .collect();
        SparseRows::new(self.n_cols, rows)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn to_band(&self) -> BandMatrix {
        let (kl, ku) = self.bandwidths();
        let mut band = BandMatrix::zeros(self.rows.len(), kl, ku);
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                band.add(i, c, v);
            }
        }
        band
    }
}

/// Square band matrix; row `i` stores columns `i − kl ..= i + ku`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.data[s] += v;
    }

    pub fn add_diagonal(&mut self, diag: &[f64]) {
        for (i, &d) in diag.iter().enumerate() {
            self.add(i, i, d);
        }
    }

    /// Replaces row `i` by the given entries (which must fit the band).
    pub fn set_row(&mut self, i: usize, row: &[(usize, f64)]) {
        let w = self.kl + self.ku + 1;
        self.data[i * w..(i + 1) * w].iter_mut().for_each(|v| *v = 0.0);
        for &(c, v) in row {
            self.add(i, c, v);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// `|A|·x`, the row magnitudes used for relative residuals.
    pub fn abs_matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs() * x[j]).sum()
            })
            .collect()
    }

    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for (j, yj) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yj += self.get(i, j) * xi;
            }
        }
        y
    }

    pub fn lu(&self) -> Result<BandLu> {
        BandLu::factor(self)
    }
}

/// `P·A = L·U` for a band matrix; `U` has upper bandwidth `ku + kl`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width_u: usize,
    upper: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let ku = a.ku;
        let w = 2 * kl + ku + 1;
        // work row i holds columns i − kl ..= i + ku + kl at offset c + kl − i
        let mut work = vec![0.0; n * w];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                work[i * w + (j + kl - i)] = a.get(i, j);
            }
        }
        let at = |i: usize, c: usize| i * w + (c + kl - i);
        let mut mult = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = work[at(j, j)].abs();
            for i in j + 1..=last {
                let v = work[at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || best <= scale * 1e-300 || !best.is_finite() {
                return Err(Error::Singular { column: j });
            }
            piv[j] = p;
            let cmax = (j + ku + kl).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    work.swap(at(j, c), at(p, c));
                }
            }
            let pivot = work[at(j, j)];
            for i in j + 1..=last {
                let m = work[at(i, j)] / pivot;
                mult[j * kl + (i - j - 1)] = m;
                if m != 0.0 {
                    for c in j + 1..=cmax {
                        work[at(i, c)] -= m * work[at(j, c)];
                    }
                }
                work[at(i, j)] = 0.0;
            }
        }
        let width_u = ku + kl + 1;
        let mut upper = vec![0.0; n * width_u];
        for i in 0..n {
            let cmax = (i + ku + kl).min(n - 1);
            for c in i..=cmax {
                upper[i * width_u + (c - i)] = work[at(i, c)];
            }
        }
        Ok(Self {
            n,
            kl,
            width_u,
            upper,
            mult,
            piv,
        })
    }

    fn u(&self, i: usize, c: usize) -> f64 {
        self.upper[i * self.width_u + (c - i)]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for j in 0..n {
            x.swap(j, self.piv[j]);
            let xj = x[j];
            if xj != 0.0 {
                for t in 0..self.kl {
                    if j + 1 + t < n {
                        x[j + 1 + t] -= self.mult[j * self.kl + t] * xj;
                    }
                }
            }
        }
        for j in (0..n).rev() {
            let cmax = (j + self.width_u - 1).min(n - 1);
            let mut s = x[j];
            for c in j + 1..=cmax {
                s -= self.u(j, c) * x[c];
            }
            x[j] = s / self.u(j, j);
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for j in 0..n {
            let lo = j.saturating_sub(self.width_u - 1);
            let mut s = z[j];
            for i in lo..j {
                s -= self.u(i, j) * z[i];
            }
            z[j] = s / self.u(j, j);
        }
        for j in (0..n).rev() {
            let mut s = 0.0;
            for t in 0..self.kl {
                if j + 1 + t < n {
                    s += self.mult[j * self.kl + t] * z[j + 1 + t];
                }
            }
            z[j] -= s;
            z.swap(j, self.piv[j]);
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                a.add(i, j, rng.gen_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
            }
        }
        a
    }

    #[test]
    fn lu_solves_random_band_systems() {
        for (seed, &(kl, ku)) in [(0, 0), (1, 2), (3, 1), (4, 4), (0, 5)].iter().enumerate() {
            let a = random_band(40, kl, ku, seed as u64);
            let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.matvec(&x);
            let lu = a.lu().unwrap();
            let got = lu.solve(&b);
            let err = got.iter().zip(&x).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "kl={kl} ku={ku} err={err}");
            let bt = a.transpose_matvec(&x);
            let got = lu.solve_transpose(&bt);
            let err = got.iter().zip(&x).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "transpose kl={kl} ku={ku} err={err}");
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        assert!(matches!(a.lu(), Err(Error::Singular { column: 2 })));
    }

    #[test]
    fn sparse_compose_matches_dense_product() {
        let a = SparseRows::new(3, vec![vec![(0, 1.0), (1, 2.0)], vec![(2, 3.0)], vec![(0, -1.0)]]);
        let b = SparseRows::new(3, vec![vec![(1, 1.0)], vec![(0, 2.0), (2, 1.0)], vec![(2, 4.0)]]);
        let c = a.compose(&b);
        let x = [1.0, 2.0, 3.0];
        assert_eq!(c.apply(&x), a.apply(&b.apply(&x)));
    }
}
