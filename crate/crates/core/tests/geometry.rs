use estkit_core::geometry::{
    effective_sparsity, expected_gaussian_norm, mean_width_mc, sparse_width_scale, width_draw,
};
use estkit_core::rng::{gaussian_vec, rng_from};
use estkit_core::sets::make_set;
use estkit_core::vector::{dot, norm2};
use estkit_core::{FeasibleSet, SetDescriptor, SetKind};
use proptest::prelude::*;

fn set(kind: SetKind, n: usize) -> FeasibleSet {
    make_set(SetDescriptor::new(kind, n)).unwrap()
}

#[test]
fn ball_width_is_twice_the_gaussian_norm() {
    let ball = set(SetKind::EuclideanBall { radius: 1.0 }, 16);
    let est = mean_width_mc(&ball, 20_000, 5).unwrap();
    let exact = 2.0 * expected_gaussian_norm(16);
    assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{} vs {exact}", est.mean);
}

#[test]
fn gaussian_norm_closed_form_matches_known_values() {
    // E‖g‖ for n = 1 is √(2/π), for n = 2 it is √(π/2)
    assert!((expected_gaussian_norm(1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    assert!((expected_gaussian_norm(2) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
}

#[test]
fn same_seed_same_estimate() {
    let k = set(SetKind::L1Ball { radius: 1.0 }, 32);
    assert_eq!(mean_width_mc(&k, 500, 9).unwrap(), mean_width_mc(&k, 500, 9).unwrap());
    assert_ne!(mean_width_mc(&k, 500, 9).unwrap().mean, mean_width_mc(&k, 500, 10).unwrap().mean);
}

#[test]
fn l1_ball_width_is_of_sparse_order() {
    let n = 256;
    let k = set(SetKind::L1Ball { radius: 1.0 }, n);
    let w = mean_width_mc(&k, 2000, 3).unwrap().mean;
    // w(B₁ⁿ) = 2 E‖g‖∞ ≈ 2√(2 log n)
    let scale = sparse_width_scale(1, n);
    assert!(w > 0.5 * scale && w < 2.5 * scale, "{w} vs {scale}");
}

#[test]
fn effective_sparsity_of_flat_vectors_is_the_support_size() {
    let mut x = vec![0.0; 10];
    x[..4].iter_mut().for_each(|v| *v = -2.0);
    assert!((effective_sparsity(&x).unwrap() - 4.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn width_is_monotone_per_draw(seed in any::<u64>()) {
        let n = 12;
        let chain = [
            set(SetKind::SparseUnitSet { s: 2 }, n),
            set(SetKind::SparseHull { s: 2, radius: 1.0 }, n),
            set(SetKind::EuclideanBall { radius: 1.0 }, n),
        ];
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, n);
        let g = gaussian_vec(&mut rng_from(seed), n);
        let w: Vec<f64> = chain.iter().map(|k| width_draw(k, &g).unwrap()).collect();
        prop_assert!(w[0] <= w[1] + 1e-12 && w[1] <= w[2] + 1e-12, "{w:?}");
        prop_assert!(width_draw(&l1, &g).unwrap() <= w[2] + 1e-12);
    }

    #[test]
    fn width_is_translation_invariant(seed in any::<u64>()) {
        let n = 6;
        let mut rng = rng_from(seed);
        let points: Vec<Vec<f64>> = (0..5).map(|_| gaussian_vec(&mut rng, n)).collect();
        let shift = gaussian_vec(&mut rng, n);
        let moved: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect();
        let k = set(SetKind::FiniteSet { points }, n);
        let km = set(SetKind::FiniteSet { points: moved }, n);
        let g = gaussian_vec(&mut rng, n);
        let (a, b) = (width_draw(&k, &g).unwrap(), width_draw(&km, &g).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn width_is_hull_invariant(seed in any::<u64>(), s in 1usize..5) {
        let n = 16;
        let k = set(SetKind::SparseUnitSet { s }, n);
        let hull = k.convex_hull_descriptor().unwrap();
        let g = gaussian_vec(&mut rng_from(seed), n);
        let (a, b) = (width_draw(&k, &g).unwrap(), width_draw(&hull, &g).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn symmetric_finite_set_width_equals_hull_width(seed in any::<u64>()) {
        let n = 5;
        let mut rng = rng_from(seed);
        let half: Vec<Vec<f64>> = (0..4).map(|_| gaussian_vec(&mut rng, n)).collect();
        let points: Vec<Vec<f64>> = half.iter().flat_map(|p| [p.clone(), p.iter().map(|v| -v).collect()]).collect();
        let k = set(SetKind::FiniteSet { points: points.clone() }, n);
        let hull = k.convex_hull_descriptor().unwrap();
        let g = gaussian_vec(&mut rng, n);
        let direct = points.iter().map(|p| dot(&g, p)).fold(f64::NEG_INFINITY, f64::max)
            - points.iter().map(|p| dot(&g, p)).fold(f64::INFINITY, f64::min);
        prop_assert!((width_draw(&k, &g).unwrap() - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        prop_assert!((width_draw(&hull, &g).unwrap() - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn ball_draw_is_twice_the_norm(seed in any::<u64>(), radius in 0.1f64..5.0) {
        let n = 9;
        let k = set(SetKind::EuclideanBall { radius }, n);
        let g = gaussian_vec(&mut rng_from(seed), n);
        prop_assert!((width_draw(&k, &g).unwrap() - 2.0 * radius * norm2(&g)).abs() <= 1e-12 * radius * norm2(&g));
    }
}
