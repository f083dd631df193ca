//! Monte-Carlo estimates of the Neumann-series iterates
//! `Γ_{i+1}(x, y) = ∫_B Γ_i(x, z) f_z(y) dz` with `f_z(y) = −h Γ(z, y)`,
//! checked against their Giraud majorants.
//!
//! `Γ_i` is an `(i−1)`-fold integral over chains `x → z_1 → … → y`; each
//! chain point is drawn from a mixture of the uniform law on the ball and
//! radially uniform laws centred on the previous point and on `y`, which
//! cancels the kernel singularities in the importance weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::cnk;
use crate::params::{check_domain, sphere_area};

/// Minimum chain samples per pair.
pub const MIN_SAMPLES: usize = 100_000;

/// Largest relative standard error accepted before a report is inconclusive.
pub const MAX_REL_STDERR: f64 = 0.05;

/// Radius of the singular mixture components.
const SINGULAR_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GiraudRegime {
    /// `|x−y|^{2ki−n}` for `2ki < n`.
    Power,
    /// `1 + |ln |x−y||` for `2ki = n`.
    Log,
    /// Bounded for `2ki > n`.
    Constant,
}

impl GiraudRegime {
    pub fn of(n: usize, k: usize, i: usize) -> Self {
        match (2 * k * i).cmp(&n) {
            std::cmp::Ordering::Less => GiraudRegime::Power,
            std::cmp::Ordering::Equal => GiraudRegime::Log,
            std::cmp::Ordering::Greater => GiraudRegime::Constant,
        }
    }
}

/// The majorant of `|Γ_i|` at distance `d`.
pub fn giraud_bound(n: usize, k: usize, i: usize, d: f64) -> f64 {
    match GiraudRegime::of(n, k, i) {
        GiraudRegime::Power => d.powi((2 * k * i) as i32 - n as i32),
        GiraudRegime::Log => 1.0 + d.ln().abs(),
        GiraudRegime::Constant => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEstimate {
    pub distance: f64,
    pub value: f64,
    pub stderr: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiraudReport {
    pub n: usize,
    pub k: usize,
    pub i: usize,
    pub h: f64,
    pub regime: GiraudRegime,
    pub exponent: i64,
    /// `sup |Γ_i(x,y)| / bound_i(|x−y|)` over the pairs.
    pub constant: f64,
    pub max_rel_stderr: f64,
    pub samples_per_pair: usize,
    pub seed: u64,
    pub pairs: Vec<PairEstimate>,
}

type Point = Vec<f64>;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn direction(rng: &mut ChaCha8Rng, n: usize) -> Point {
    loop {
        let v: Point = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-12 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let r = rng.gen::<f64>().powf(1.0 / n as f64);
    direction(rng, n).into_iter().map(|x| r * x).collect()
}

/// Random pairs in the unit ball with `|x − y|` log-uniform in `[d_min, d_max]`.
pub fn random_pairs(n: usize, count: usize, d_min: f64, d_max: f64, seed: u64) -> Result<Vec<(Point, Point)>> {
    if !(d_min > 0.0 && d_min <= d_max && d_max < 2.0) {
        return Err(Error::invalid("need 0 < d_min <= d_max < 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = uniform_in_ball(&mut rng, n);
        let d = d_min * (d_max / d_min).powf(rng.gen::<f64>());
        let y: Point = x.iter().zip(direction(&mut rng, n)).map(|(a, b)| a + d * b).collect();
        if norm(&y) < 1.0 {
            out.push((x, y));
        }
    }
    Ok(out)
}

struct Mixture {
    n: usize,
    ball_density: f64,
    radial_norm: f64,
}

impl Mixture {
    fn new(n: usize) -> Self {
        let omega = sphere_area(n);
        Self {
            n,
            ball_density: n as f64 / omega,
            radial_norm: 1.0 / (SINGULAR_RADIUS * omega),
        }
    }

    fn radial(&self, z: &[f64], c: &[f64]) -> f64 {
        let d = dist(z, c);
        if d < SINGULAR_RADIUS {
            self.radial_norm * d.powi(1 - self.n as i32)
        } else {
            0.0
        }
    }

    fn density(&self, z: &[f64], a: &[f64], y: &[f64]) -> f64 {
        let inside = if norm(z) < 1.0 { self.ball_density } else { 0.0 };
        (inside + self.radial(z, a) + self.radial(z, y)) / 3.0
    }

    fn sample(&self, rng: &mut ChaCha8Rng, a: &[f64], y: &[f64]) -> Point {
        let pick = rng.gen_range(0..3);
        if pick == 0 {
            return uniform_in_ball(rng, self.n);
        }
        let c = if pick == 1 { a } else { y };
        let r = SINGULAR_RADIUS * rng.gen::<f64>();
        c.iter().zip(direction(rng, self.n)).map(|(c, u)| c + r * u).collect()
    }
}

/// Mean and standard error of one chain estimator.
fn estimate_pair(n: usize, k: usize, i: usize, h: f64, x: &[f64], y: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let c = cnk(n, k).expect("checked domain");
    let e = 2 * k as i32 - n as i32;
    let kernel = |a: &[f64], b: &[f64]| c * dist(a, b).powi(e);
    let mix = Mixture::new(n);
    let factor = (-h).powi(i as i32);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let mut w = factor;
        let mut prev: Point = x.to_vec();
        for _ in 1..i {
            let z = mix.sample(rng, &prev, y);
            if norm(&z) >= 1.0 {
                w = 0.0;
                break;
            }
            w *= kernel(&prev, &z) / mix.density(&z, &prev, y);
            prev = z;
        }
        if w != 0.0 {
            w *= kernel(&prev, y);
        }
        sum += w;
        sq += w * w;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sq / m - mean * mean).max(0.0);
    (mean, (var / m).sqrt())
}

/// Estimates `Γ_i` at each pair with `h ≡ h_bound` and reports the empirical
/// Giraud constant. `i = 1` is evaluated exactly. Pairs are processed in
/// parallel, each with its own stream of a ChaCha generator seeded by `seed`.
pub fn neumann_iterate(
    n: usize,
    k: usize,
    h_bound: f64,
    i: usize,
    sample_pairs: &[(Point, Point)],
    samples: usize,
    seed: u64,
) -> Result<GiraudReport> {
    check_domain(n, k)?;
    if i == 0 {
        return Err(Error::invalid("iterate index starts at 1"));
    }
    if samples < MIN_SAMPLES && i > 1 {
        return Err(Error::invalid(format!("at least {MIN_SAMPLES} samples per pair are required")));
    }
    for (x, y) in sample_pairs {
        if x.len() != n || y.len() != n {
            return Err(Error::invalid(format!("sample points must have {n} coordinates")));
        }
        if norm(x) >= 1.0 || norm(y) >= 1.0 || dist(x, y) == 0.0 {
            return Err(Error::invalid("sample pairs must be distinct points of the open unit ball"));
        }
    }
    let estimates: Vec<PairEstimate> = sample_pairs
        .par_iter()
        .enumerate()
        .map(|(idx, (x, y))| {
            let d = dist(x, y);
            let (value, stderr) = if i == 1 {
                (-h_bound * cnk(n, k).expect("checked domain") * d.powi(2 * k as i32 - n as i32), 0.0)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(idx as u64);
                estimate_pair(n, k, i, h_bound, x, y, samples, &mut rng)
            };
            PairEstimate {
                distance: d,
                value,
                stderr,
                ratio: value.abs() / giraud_bound(n, k, i, d),
            }
        })
        .collect();
    let constant = estimates.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let max_rel_stderr = estimates
        .iter()
        .map(|e| if e.value == 0.0 { 0.0 } else { e.stderr / e.value.abs() })
        .fold(0.0, f64::max);
    if max_rel_stderr > MAX_REL_STDERR {
        return Err(Error::Inconclusive(format!(
            "Monte-Carlo relative standard error {max_rel_stderr:.3} exceeds {MAX_REL_STDERR}"
        )));
    }
    Ok(GiraudReport {
        n,
        k,
        i,
        h: h_bound,
        regime: GiraudRegime::of(n, k, i),
        exponent: (2 * k * i) as i64 - n as i64,
        constant,
        max_rel_stderr,
        samples_per_pair: if i == 1 { 0 } else { samples },
        seed,
        pairs: estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(GiraudRegime::of(3, 1, 1), GiraudRegime::Power);
        assert_eq!(GiraudRegime::of(3, 1, 2), GiraudRegime::Constant);
        assert_eq!(GiraudRegime::of(4, 1, 2), GiraudRegime::Log);
        assert_eq!(GiraudRegime::of(5, 1, 2), GiraudRegime::Power);
    }

    #[test]
    fn first_iterate_is_exact() {
        let pairs = random_pairs(3, 10, 0.01, 1.0, 7).unwrap();
        let rep = neumann_iterate(3, 1, 1.0, 1, &pairs, 0, 0).unwrap();
        let c = cnk(3, 1).unwrap();
        assert!((rep.constant - c).abs() < 1e-15);
    }

    #[test]
    fn pair_generator_respects_the_ball() {
        for (x, y) in random_pairs(5, 50, 0.01, 1.0, 3).unwrap() {
            let d = dist(&x, &y);
            assert!(norm(&x) < 1.0 && norm(&y) < 1.0 && (0.01..=1.0).contains(&d));
        }
    }
}
