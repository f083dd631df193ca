use std::f64::consts::PI;
use std::sync::Arc;

use polyharmonic::bubbles::{ank, bubble_integrals, bubble_residual, BubbleProfile};
use polyharmonic::bvp::bubble_seed;
use polyharmonic::inequalities::sobolev_quotient;
use polyharmonic::{make_grid, GridScheme, Parity, ProblemParams, RadialField, RadialGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIMS: [(usize, usize); 4] = [(3, 1), (5, 1), (5, 2), (7, 3)];

proptest! {
    #[test]
    fn dilations_stay_in_the_family(which in 0usize..4, mu in 0.05f64..20.0, r in 0.0f64..50.0) {
        let (n, k) = DIMS[which];
        let p = ProblemParams::new(n, k, 0.0).unwrap();
        let unit = BubbleProfile::standard(p).unwrap();
        let scaled = BubbleProfile::new(p, mu, 1.0).unwrap();
        let expect = mu.powf(-p.conformal_weight()) * unit.eval(r / mu);
        prop_assert!((scaled.eval(r) - expect).abs() <= 1e-13 * expect.abs());
    }

    #[test]
    fn profile_decreases(which in 0usize..4, r in 0.0f64..20.0, dr in 1e-3f64..1.0) {
        let (n, k) = DIMS[which];
        let b = BubbleProfile::standard(ProblemParams::new(n, k, 0.0).unwrap()).unwrap();
        prop_assert!(b.eval(r + dr) < b.eval(r));
    }
}

#[test]
fn ank_of_seventh_dimension() {
    assert!((ank(7, 3).unwrap() - 10395f64.powf(-1.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn residual_is_scale_invariant() {
    for (n, k) in DIMS {
        let p = ProblemParams::new(n, k, 0.0).unwrap();
        // grid and window dilate with the bubble
        let res: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&mu| {
                let grid = Arc::new(RadialGrid::clustered(600, 15.0 * mu, 2.0).unwrap());
                bubble_residual(&BubbleProfile::new(p, mu, 1.0).unwrap(), &grid, 0.05 * mu, 10.0 * mu).unwrap()
            })
            .collect();
        let hi = res.iter().cloned().fold(0.0, f64::max);
        let lo = res.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi < 1e-5, "({n},{k}) {res:?}");
        assert!(hi / lo < 2.0 || hi < 1e-10, "({n},{k}) {res:?}");
    }
}

#[test]
fn masses_of_the_three_dimensional_bubble() {
    let m = bubble_integrals(&ProblemParams::new(3, 1, 0.0).unwrap()).unwrap();
    assert!((m.mass_u2s / (3.0 * 3f64.sqrt() * PI * PI / 4.0) - 1.0).abs() < 1e-6);
    // 4π·3√3 ∫ t²(1+t²)^{-5/2} dt with the integral equal to 1/3
    assert!((m.mass_u2sm1 / (4.0 * 3f64.sqrt() * PI) - 1.0).abs() < 1e-6);
    for (n, k) in DIMS {
        let m = bubble_integrals(&ProblemParams::new(n, k, 0.0).unwrap()).unwrap();
        assert!(m.mass_u2s > 0.0 && m.mass_u2s.is_finite());
        assert!(m.mass_u2sm1 > 0.0 && m.mass_u2sm1.is_finite());
    }
}

#[test]
fn truncated_bubble_beats_random_fields() {
    let grid = Arc::new(make_grid(400, GridScheme::Clustered, 1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (n, k) in [(3, 1), (5, 2)] {
        let p = ProblemParams::new(n, k, 0.0).unwrap();
        let bubble = sobolev_quotient(&bubble_seed(&p, &grid, 0.05).unwrap(), &p).unwrap();
        for _ in 0..20 {
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = RadialField::from_fn(&grid, Parity::Even, |r| {
                (1.0 - r * r).powi(k as i32) * c.iter().rev().fold(0.0, |acc, a| acc * r * r + a)
            })
            .unwrap();
            let q = sobolev_quotient(&f, &p).unwrap();
            assert!(q.is_finite() && q > 0.0);
            assert!(bubble > q, "({n},{k}) bubble {bubble} vs {q}");
        }
    }
}
