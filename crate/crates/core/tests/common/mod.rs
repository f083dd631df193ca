//! Shooting oracles for the second-order radial problem
//! `u'' + (n−1)/r u' + λu + |u|^{q}u = 0`, `u(0) = a`, `u'(0) = 0`.
//! Independent of the finite-difference machinery in the crate.

#![allow(dead_code)]

// Frozen outputs of the oracles below; tests/oracles.rs recomputes them.
pub const SHOT_EIGENVALUE_N3: f64 = 9.869604401089;
pub const SHOT_EIGENVALUE_N5: f64 = 20.190728556426;
/// `λ/λ₁` of the n = 3 solution with `u(0) = 10⁴`.
pub const SHOT_THRESHOLD_N3: f64 = 0.25000001;
/// `u(0)` of the n = 5 solutions at `λ = 0.5λ₁` and `λ = 0.02λ₁`.
pub const SHOT_HEIGHT_N5: [f64; 2] = [19.02405918, 820.12008338];

/// First zero of the shot solution, or `None` if it stays positive up to `r_max`.
pub fn first_zero(n: usize, lambda: f64, a: f64, nonlinear: bool, r_max: f64) -> Option<f64> {
    let nf = n as f64;
    let q = if nonlinear { 4.0 / (nf - 2.0) } else { 0.0 };
    let c = if nonlinear { 1.0 } else { 0.0 };
    let src = |u: f64| lambda * u + c * u.abs().powf(q) * u;
    let nu = if nonlinear { a.powf(-2.0 / (nf - 2.0)).min(1.0) } else { 1.0 };
    // series start away from the coordinate singularity
    let mut r = 1e-4 * nu;
    let mut u = a - src(a) * r * r / (2.0 * nf);
    let mut v = -src(a) * r / nf;
    let rhs = |r: f64, u: f64, v: f64| (v, -(nf - 1.0) / r * v - src(u));
    while r < r_max {
        let h = 2e-4 * (r + nu);
        let (k1u, k1v) = rhs(r, u, v);
        let (k2u, k2v) = rhs(r + h / 2.0, u + h / 2.0 * k1u, v + h / 2.0 * k1v);
        let (k3u, k3v) = rhs(r + h / 2.0, u + h / 2.0 * k2u, v + h / 2.0 * k2v);
        let (k4u, k4v) = rhs(r + h, u + h * k3u, v + h * k3v);
        let un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if un <= 0.0 {
            // cubic Hermite root on [r, r+h]
            let (mut lo, mut hi) = (0.0, 1.0);
            let herm = |t: f64| {
                let (t2, t3) = (t * t, t * t * t);
                (2.0 * t3 - 3.0 * t2 + 1.0) * u
                    + (t3 - 2.0 * t2 + t) * h * v
                    + (-2.0 * t3 + 3.0 * t2) * un
                    + (t3 - t2) * h * vn
            };
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if herm(m) > 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            return Some(r + h * 0.5 * (lo + hi));
        }
        r += h;
        u = un;
        v = vn;
    }
    None
}

/// `λ` in `(lo, hi)` at which the shot solution of height `a` first vanishes at `r = 1`.
fn bisect_lambda(n: usize, a: f64, nonlinear: bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        match first_zero(n, m, a, nonlinear, 1.0 + 1e-9) {
            // zero inside the ball: λ too large
            Some(z) if z < 1.0 => hi = m,
            _ => lo = m,
        }
    }
    0.5 * (lo + hi)
}

/// Principal Dirichlet eigenvalue of the radial Laplacian on the unit `n`-ball.
pub fn shot_eigenvalue(n: usize) -> f64 {
    bisect_lambda(n, 1.0, false, 1.0, 100.0)
}

/// `λ` carrying a positive solution with `u(0) = a`.
pub fn shot_branch_lambda(n: usize, a: f64) -> f64 {
    bisect_lambda(n, a, true, 1e-9, shot_eigenvalue(n))
}

/// Height `u(0)` of the positive solution at `λ`, searched on `[a_lo, a_hi]`
/// along which `λ(a)` decreases.
pub fn shot_height(n: usize, lambda: f64, mut a_lo: f64, mut a_hi: f64) -> f64 {
    for _ in 0..60 {
        let m = (a_lo * a_hi).sqrt();
        if shot_branch_lambda(n, m) > lambda {
            a_lo = m;
        } else {
            a_hi = m;
        }
    }
    (a_lo * a_hi).sqrt()
}
