mod common;

use common::*;
use std::f64::consts::PI;

#[test]
fn eigenvalues_reproduce() {
    assert!((shot_eigenvalue(3) - SHOT_EIGENVALUE_N3).abs() < 1e-9);
    assert!((SHOT_EIGENVALUE_N3 - PI * PI).abs() < 1e-9);
    // j_{3/2,1}², the first zero of tan x = x, squared
    assert!((shot_eigenvalue(5) - SHOT_EIGENVALUE_N5).abs() < 1e-9);
    assert!((SHOT_EIGENVALUE_N5 - 4.493409457909064f64.powi(2)).abs() < 1e-9);
}

#[test]
fn threshold_reproduces() {
    let l1 = shot_eigenvalue(3);
    assert!((shot_branch_lambda(3, 1e4) / l1 - SHOT_THRESHOLD_N3).abs() < 1e-7);
    // λ(a) approaches λ₁/4 from above
    let lam: Vec<f64> = [1e2, 1e3].iter().map(|&a| shot_branch_lambda(3, a) / l1).collect();
    assert!(lam[0] > lam[1] && lam[1] > 0.25);
}

#[test]
fn heights_reproduce() {
    let l1 = shot_eigenvalue(5);
    for (f, h) in [0.5, 0.02].iter().zip(SHOT_HEIGHT_N5) {
        let a = shot_height(5, f * l1, 1e-2, 1e6);
        assert!((a / h - 1.0).abs() < 1e-6, "{a} vs {h}");
    }
}

#[test]
fn zero_of_the_eigenfunction() {
    // sin(πr)/r vanishes first at r = 1
    let z = first_zero(3, PI * PI, 1.0, false, 2.0).unwrap();
    assert!((z - 1.0).abs() < 1e-10);
}
