use estkit_core::observations::{
    link_constants, observe_linear, observe_link, observe_single_bit, sample_entries, sample_sensing_matrix,
    LinkFunction, LinkKind, NoiseSpec, RowDistribution, RowKind,
};
use estkit_core::rng::{gaussian_vec, rng_from};
use estkit_core::signals::{low_rank_matrix, MatrixScale};
use estkit_core::vector::{dot, norm1, norm2};
use proptest::prelude::*;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

#[test]
fn rows_are_isotropic() {
    let (m, n) = (20_000, 6);
    for kind in [RowKind::Gaussian, RowKind::Rademacher, RowKind::UniformSphereScaled] {
        let a = sample_sensing_matrix(&RowDistribution::new(kind, n), m, 4);
        let g = a.gram_cols();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let v = g[(i, j)] / m as f64;
                assert!((v - target).abs() < 5.0 * (2.0 / m as f64).sqrt(), "{kind:?} ({i},{j}) = {v}");
            }
        }
    }
}

#[test]
fn sensing_matrices_are_deterministic() {
    let d = RowDistribution::gaussian(5);
    assert_eq!(sample_sensing_matrix(&d, 7, 1), sample_sensing_matrix(&d, 7, 1));
    assert_ne!(sample_sensing_matrix(&d, 7, 1), sample_sensing_matrix(&d, 7, 2));
}

#[test]
fn sign_link_constant_is_exact() {
    let (lambda, _) = link_constants(&LinkFunction::sign(), 1.0).unwrap();
    assert!((lambda - SQRT_2_OVER_PI).abs() < 1e-10);
    // sign(ρz) does not depend on ρ
    let (lambda3, _) = link_constants(&LinkFunction::sign(), 3.0).unwrap();
    assert!((lambda3 - SQRT_2_OVER_PI).abs() < 1e-10);
}

#[test]
fn linear_link_constant_is_the_magnitude() {
    let (lambda, _) = link_constants(&LinkFunction::linear(), 2.5).unwrap();
    assert!((lambda - 2.5).abs() < 1e-10);
}

#[test]
fn binary_link_bucket_means_follow_the_link() {
    let n = 4;
    let link = LinkFunction { kind: LinkKind::Tanh { scale: 1.0 }, binary: true, noise_sigma: 0.0 };
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    let a = RowDistribution::gaussian(n).sample(200_000, &mut rng_from(8));
    let y = observe_link(&a, &x, &link, 9).unwrap();
    assert!(y.iter().all(|v| *v == 1.0 || *v == -1.0));
    for (lo, hi) in [(-1.0, -0.8), (0.2, 0.4), (0.9, 1.1)] {
        let bucket: Vec<f64> = (0..a.rows()).filter(|&i| (lo..hi).contains(&a[(i, 0)])).map(|i| y[i]).collect();
        let mean = bucket.iter().sum::<f64>() / bucket.len() as f64;
        let mid = (lo + hi) / 2.0;
        let target = f64::tanh(mid);
        let se = 1.0 / (bucket.len() as f64).sqrt();
        assert!((mean - target).abs() < 4.0 * se + 0.03, "bucket {mid}: {mean} vs {target}");
    }
}

#[test]
fn single_bit_observations_are_signs() {
    let a = RowDistribution::gaussian(3).sample(50, &mut rng_from(1));
    let x = [0.3, -1.0, 2.0];
    let y = observe_single_bit(&a, &x).unwrap();
    let z = a.mul_vec(&x);
    assert!(y.iter().zip(&z).all(|(s, v)| *s == if *v >= 0.0 { 1.0 } else { -1.0 }));
    assert!(observe_single_bit(&a, &[0.0; 3]).is_err());
}

#[test]
fn full_sampling_caps_the_rate() {
    let x = low_rank_matrix(&mut rng_from(2), 5, 6, 2, MatrixScale::MaxEntry).unwrap();
    let s = sample_entries(&x, 100, &NoiseSpec::None, 3).unwrap();
    assert!(s.capped);
    assert_eq!(s.p, 1.0);
    assert!(s.mask.iter().all(|&k| k));
    assert_eq!(s.y, x);
}

#[test]
fn entry_sampling_rate_is_close_to_p() {
    let x = low_rank_matrix(&mut rng_from(2), 60, 60, 2, MatrixScale::MaxEntry).unwrap();
    let s = sample_entries(&x, 1800, &NoiseSpec::None, 3).unwrap();
    let kept = s.mask.iter().filter(|&&k| k).count() as f64;
    assert!((kept - 1800.0).abs() < 5.0 * (3600.0f64 * 0.5 * 0.5).sqrt());
    assert!(!s.capped);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_respects_the_budget(seed in any::<u64>(), eps in 0.0f64..2.0, sigma in 0.0f64..10.0, m in 1usize..40) {
        let n = 5;
        let a = RowDistribution::gaussian(n).sample(m, &mut rng_from(seed));
        let x = gaussian_vec(&mut rng_from(seed ^ 1), n);
        for noise in [NoiseSpec::IidBounded { sigma, eps }, NoiseSpec::Adversarial { eps }] {
            let (y, nu) = observe_linear(&a, &x, &noise, seed).unwrap();
            prop_assert!(norm1(&nu) / m as f64 <= eps);
            let ax = a.mul_vec(&x);
            prop_assert!(y.iter().zip(&ax).zip(&nu).all(|((yi, ai), ni)| (yi - ai - ni).abs() <= 1e-12 * (1.0 + ai.abs())));
        }
    }

    #[test]
    fn observations_are_deterministic_in_the_seed(seed in any::<u64>()) {
        let a = RowDistribution::gaussian(4).sample(9, &mut rng_from(seed));
        let x = [1.0, 0.0, -0.5, 0.25];
        let noise = NoiseSpec::Uniform { bound: 0.3 };
        prop_assert_eq!(observe_linear(&a, &x, &noise, seed).unwrap(), observe_linear(&a, &x, &noise, seed).unwrap());
    }

    #[test]
    fn sphere_rows_have_norm_root_n(seed in any::<u64>(), n in 1usize..30) {
        let row = RowDistribution::new(RowKind::UniformSphereScaled, n).sample_row(&mut rng_from(seed));
        prop_assert!((norm2(&row) - (n as f64).sqrt()).abs() < 1e-10);
        prop_assert!(dot(&row, &row).is_finite());
    }
}
