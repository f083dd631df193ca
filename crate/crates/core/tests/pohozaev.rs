use std::f64::consts::PI;
use std::sync::Arc;

use polyharmonic::bubbles::BubbleProfile;
use polyharmonic::bvp::solve_from_bubbles;
use polyharmonic::params::sphere_area;
use polyharmonic::pohozaev::{
    boundary_bilinear, boundary_terms, commutator_residual, deltap_identity_residual, dkn, eq34_check, pohozaev_boundary, pohozaev_residual,
};
use polyharmonic::{make_grid, GridScheme, Parity, PowerSum, ProblemParams, RadialField, RadialGrid};
use proptest::prelude::*;

fn uniform(points: usize) -> Arc<RadialGrid> {
    Arc::new(make_grid(points, GridScheme::Uniform, 1.0).unwrap())
}

fn clustered(points: usize) -> Arc<RadialGrid> {
    Arc::new(make_grid(points, GridScheme::Clustered, 1.0).unwrap())
}

fn params(n: usize, k: usize) -> ProblemParams {
    ProblemParams::new(n, k, 0.0).unwrap()
}

/// `Δ Σ c r^a = Σ −c a (a+n−2) r^{a−2}`, applied `j` times.
fn power_laplacian(terms: &[(f64, f64)], n: usize, j: usize) -> Vec<(f64, f64)> {
    let mut t = terms.to_vec();
    for _ in 0..j {
        t = t.iter().map(|&(c, a)| (-c * a * (a + n as f64 - 2.0), a - 2.0)).collect();
    }
    t
}

fn eval(terms: &[(f64, f64)], r: f64) -> f64 {
    terms.iter().map(|(c, a)| c * r.powf(*a)).sum()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn random_power_sum() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, prop::sample::select(vec![0.0, 2.0, 3.0, 4.0, 6.0, -1.0])), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bilinear_form_is_antisymmetric(a in random_power_sum(), b in random_power_sum(), l in 1usize..=3, r in 0.2f64..1.0) {
        let p = params(7, 3);
        let (u, v) = (PowerSum::new(a), PowerSum::new(b));
        let uv = boundary_bilinear(&u, &v, l, r, &p).unwrap();
        let vu = boundary_bilinear(&v, &u, l, r, &p).unwrap();
        prop_assert!((uv + vu).abs() <= 1e-8 * (1.0 + uv.abs()));
    }

    #[test]
    fn bilinear_form_is_the_green_formula(a in random_power_sum(), b in random_power_sum(), l in 1usize..=2) {
        // ∫_{a<|x|<b} (Δ^l U V − U Δ^l V) dx = B(b) − B(a)
        let (n, lo, hi) = (5, 0.3, 0.9);
        let p = params(n, 2);
        let (lu, lv) = (power_laplacian(&a, n, l), power_laplacian(&b, n, l));
        let w = sphere_area(n);
        let vol = simpson(|r| w * r.powi(n as i32 - 1) * (eval(&lu, r) * eval(&b, r) - eval(&a, r) * eval(&lv, r)), lo, hi, 2000);
        let (u, v) = (PowerSum::new(a.clone()), PowerSum::new(b.clone()));
        let surf = boundary_bilinear(&u, &v, l, hi, &p).unwrap() - boundary_bilinear(&u, &v, l, lo, &p).unwrap();
        prop_assert!((vol - surf).abs() <= 1e-8 * (1.0 + vol.abs()), "{vol} vs {surf}");
    }
}

#[test]
fn commutator_identity_on_monomials() {
    let grid = uniform(40);
    let r2 = RadialField::from_fn(&grid, Parity::Even, |r| r * r).unwrap();
    for n in [3, 5, 7] {
        assert!(deltap_identity_residual(&r2, 1, n).unwrap() < 1e-9);
    }
    let r4 = RadialField::from_fn(&grid, Parity::Even, |r| r.powi(4)).unwrap();
    assert!(deltap_identity_residual(&r4, 1, 3).unwrap() < 1e-8);
}

#[test]
fn commutator_identity_on_the_bubble() {
    let b = BubbleProfile::standard(params(5, 2)).unwrap();
    for points in [40, 60, 80] {
        let u = RadialField::from_fn(&uniform(points), Parity::Even, |r| b.eval(r)).unwrap();
        let res = commutator_residual(&u, 2, 5).unwrap();
        assert!(res.identity < 1e-6 && res.gradient < 1e-5, "{points}: {res:?}");
    }
}

#[test]
fn bilinear_examples() {
    let p = params(3, 1);
    let gamma = PowerSum::monomial(1.0, -1.0);
    let one = PowerSum::monomial(1.0, 0.0);
    assert!((boundary_bilinear(&gamma, &one, 1, 1.0, &p).unwrap() - 4.0 * PI).abs() < 1e-12);
    assert_eq!(boundary_bilinear(&one, &PowerSum::monomial(3.0, 0.0), 1, 0.5, &p).unwrap(), 0.0);
    assert_eq!(boundary_bilinear(&gamma, &one, 0, 0.5, &p).unwrap(), 0.0);
}

#[test]
fn boundary_examples() {
    for n in [3, 5, 7] {
        let p = params(n, 1);
        let gamma = PowerSum::monomial(1.0, 2.0 - n as f64);
        for r in [0.25, 0.5, 0.9] {
            assert!(pohozaev_boundary(&gamma, 0.0, r, &p).unwrap().abs() < 1e-10);
        }
    }
    let zero = RadialField::zeros(&clustered(100), Parity::Even);
    assert_eq!(pohozaev_boundary(&zero, 1.0, 0.5, &params(5, 2)).unwrap(), 0.0);
    // Δ(1−r²)² = 4n − 4(n+2)r², which is −8 at r = 1 for n = 5
    let u = PowerSum::new(vec![(1.0, 0.0), (-2.0, 2.0), (1.0, 4.0)]);
    let t = boundary_terms(&u, 0.0, 1.0, &params(5, 2)).unwrap();
    assert!((t.gradient - 32.0 * sphere_area(5)).abs() < 1e-10);
}

#[test]
fn s_term_counts() {
    let u = PowerSum::new(vec![(1.0, 0.0), (-1.0, 2.0)]);
    for (n, k) in [(3, 1), (5, 2), (7, 3), (9, 4)] {
        let t = boundary_terms(&u, 0.0, 0.5, &params(n, k)).unwrap();
        assert_eq!(t.s_terms.len(), k / 2 + k % 2);
    }
}

#[test]
fn identity_on_the_ball() {
    let grid = clustered(400);
    let u = RadialField::from_fn(&grid, Parity::Even, |r| 1.0 - r * r).unwrap();
    let rep = pohozaev_residual(&u, 0.0, 1.0, None, &params(3, 1)).unwrap();
    assert!(rep.residual < 1e-6, "{rep:?}");
    assert_eq!(rep.residual, (rep.lhs - rep.rhs).abs());
    let sum: f64 = rep.terms.iter().map(|t| t.value).sum();
    assert!((sum - rep.rhs).abs() <= 1e-12 * rep.rhs.abs().max(1e-300));
}

#[test]
fn annuli_add() {
    let grid = uniform(200);
    let p = params(5, 2);
    let u = RadialField::from_fn(&grid, Parity::Even, |r| (1.0 - r * r).powi(2) * (1.0 + r * r)).unwrap();
    let whole = pohozaev_residual(&u, 0.0, 0.8, Some(0.2), &p).unwrap();
    let a = pohozaev_residual(&u, 0.0, 0.5, Some(0.2), &p).unwrap();
    let b = pohozaev_residual(&u, 0.0, 0.8, Some(0.5), &p).unwrap();
    let scale = whole.lhs.abs().max(whole.rhs.abs());
    assert!((a.lhs + b.lhs - whole.lhs).abs() < 1e-8 * scale);
    assert!((a.rhs + b.rhs - whole.rhs).abs() < 1e-8 * scale);
}

#[test]
fn bubble_on_an_annulus() {
    let grid = clustered(400);
    let b = BubbleProfile::standard(params(3, 1)).unwrap();
    let u = RadialField::from_fn(&grid, Parity::Even, |r| b.eval(r)).unwrap();
    let rep = pohozaev_residual(&u, 1.0, 0.8, Some(0.2), &params(3, 1)).unwrap();
    assert!(rep.residual < 1e-5, "{rep:?}");
}

#[test]
fn dkn_vanishes() {
    assert!(dkn(&params(3, 1), 0.5).unwrap().abs() < 1e-8);
    let p = params(5, 2);
    let scaled: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&r| dkn(&p, r).unwrap() / r.powi(-1)).collect();
    for s in &scaled {
        assert!((s - scaled[0]).abs() < 1e-8 && s.abs() < 1e-7);
    }
    assert!(dkn(&params(7, 3), 0.5).unwrap().abs() < 1e-6);
    assert!(dkn(&p, 1.0).is_err());
}

#[test]
fn eq34_on_the_trivial_solution() {
    let zero = RadialField::zeros(&clustered(200), Parity::Even);
    let rep = eq34_check(&zero, &ProblemParams::new(3, 1, 3.0).unwrap(), 0.5, 1e-10).unwrap();
    assert_eq!((rep.report.lhs, rep.report.rhs), (0.0, 0.0));
}

#[test]
fn eq34_on_a_solution() {
    let p = ProblemParams::new(3, 1, 3.0).unwrap();
    let sol = solve_from_bubbles(&p, 400, 1e-10).unwrap();
    let rep = eq34_check(&sol.field, &p, 0.5, 1e-10).unwrap();
    assert!(rep.report.relative_residual() < 1e-4, "{:?}", rep.report);
    let noisy = sol.field.map(|r, v| v + 1e-3 * r.sin()).unwrap();
    assert!(eq34_check(&noisy, &p, 0.5, 1e-10).is_err());
}
