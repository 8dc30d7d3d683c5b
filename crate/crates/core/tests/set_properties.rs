use estkit_core::rng::{gaussian_vec, rng_from};
use estkit_core::sets::make_set;
use estkit_core::vector::{dist2, dot};
use estkit_core::{Error, FeasibleSet, Matrix, SetDescriptor, SetKind};
use proptest::prelude::*;

const N: usize = 8;

fn sets() -> Vec<FeasibleSet> {
    let mut rng = rng_from(99);
    let raw = Matrix::gaussian(&mut rng, N, 12);
    let norms: Vec<f64> = (0..12).map(|j| estkit_core::vector::norm2(&raw.column(j))).collect();
    let dictionary = Matrix::from_fn(N, 12, |i, j| 0.9 * raw[(i, j)] / norms[j]);
    let points: Vec<Vec<f64>> = (0..6).map(|_| gaussian_vec(&mut rng, N)).collect();
    let kinds = vec![
        SetKind::EuclideanBall { radius: 1.5 },
        SetKind::L1Ball { radius: 2.0 },
        SetKind::Hypercube { halfwidth: 0.7 },
        SetKind::SparseCone { s: 3 },
        SetKind::SparseUnitSet { s: 2 },
        SetKind::ConvexSparse { s: 3, radius: 1.2 },
        SetKind::SparseHull { s: 3, radius: 0.8 },
        SetKind::DictionaryHull { dictionary, radius: 1.0 },
        SetKind::FiniteSet { points },
        SetKind::LowRankCone { rank: 1, d1: 2, d2: 4 },
        SetKind::NuclearBall { radius: 1.0, d1: 2, d2: 4 },
    ];
    kinds.into_iter().map(|k| make_set(SetDescriptor::new(k, N)).unwrap()).collect()
}

fn scaled(x: &[f64], t: f64) -> Vec<f64> {
    x.iter().map(|v| v * t).collect()
}

fn any_set() -> impl Strategy<Value = (usize, u64)> {
    (0..sets().len(), any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_dominates_unit_gauge_points((idx, seed) in any_set()) {
        let set = &sets()[idx];
        prop_assume!(set.is_convex() && !set.is_cone());
        let mut rng = rng_from(seed);
        let x = gaussian_vec(&mut rng, N);
        let g = set.gauge(&x).unwrap();
        prop_assume!(g.is_finite() && g > 0.0);
        let x = scaled(&x, 1.0 / g);
        for _ in 0..10 {
            let eta = gaussian_vec(&mut rng, N);
            let h = set.support(&eta).unwrap().value;
            prop_assert!(dot(&eta, &x) <= h + 1e-9 * (1.0 + h.abs()), "{} > {}", dot(&eta, &x), h);
        }
    }

    #[test]
    fn argmax_attains_support((idx, seed) in any_set()) {
        let set = &sets()[idx];
        let mut rng = rng_from(seed);
        let eta = gaussian_vec(&mut rng, N);
        match set.support(&eta) {
            Ok(s) => {
                prop_assert!((dot(&eta, &s.argmax) - s.value).abs() <= 1e-9 * (1.0 + s.value.abs()));
                prop_assert!(set.contains(&s.argmax, 1e-9));
            }
            Err(e) => prop_assert!(set.is_cone() && e == Error::Unbounded),
        }
    }

    #[test]
    fn projection_beats_competitors((idx, seed) in any_set()) {
        let set = &sets()[idx];
        let mut rng = rng_from(seed);
        let x = scaled(&gaussian_vec(&mut rng, N), 2.0);
        let p = set.project(&x).unwrap();
        let d = dist2(&x, &p);
        for _ in 0..100 {
            let z = set.project(&scaled(&gaussian_vec(&mut rng, N), 3.0)).unwrap();
            prop_assert!(d <= dist2(&x, &z) + 1e-9);
        }
    }

    #[test]
    fn projection_is_idempotent((idx, seed) in any_set()) {
        let set = &sets()[idx];
        let mut rng = rng_from(seed);
        let x = scaled(&gaussian_vec(&mut rng, N), 2.0);
        let p = set.project(&x).unwrap();
        let pp = set.project(&p).unwrap();
        prop_assert!(dist2(&p, &pp) <= 1e-12 * (1.0 + estkit_core::vector::norm2(&p)));
    }

    #[test]
    fn gauge_is_positively_homogeneous((idx, seed) in any_set()) {
        let set = &sets()[idx];
        let mut rng = rng_from(seed);
        let x = gaussian_vec(&mut rng, N);
        let g = set.gauge(&x).unwrap();
        for a in [0.5, 2.0, 10.0] {
            let ga = set.gauge(&scaled(&x, a)).unwrap();
            if g.is_finite() {
                prop_assert!((ga - a * g).abs() <= 1e-9 * (a * g).abs().max(1e-300));
            } else {
                prop_assert!(ga.is_infinite());
            }
        }
    }
}
