use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tomo5::experiment::nearest_rank;
use tomo5::linalg::psd_project;
use tomo5::measurement::{random_hermitian, sample_haar_pure, sample_noise, GellMannBasis};
use tomo5::recovery::extract_pure;
use tomo5::{build_scheme, chebyshev_u_family, default_alpha, forward_map, HermitianMatrix, MeasurementScheme};

fn five(d: usize) -> MeasurementScheme {
    let s = build_scheme(&chebyshev_u_family(), d, default_alpha(d)).unwrap();
    MeasurementScheme::from_five_basis(&s, &[0, 1, 2, 3, 4]).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_map_is_linear(d in 2usize..7, seed: u64, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let m = five(d);
        let mut r = rng(seed);
        let x = random_hermitian(d, &mut r);
        let y = random_hermitian(d, &mut r);
        let lhs = forward_map(&m, &x.scale(a).add_scaled(b, &y)).unwrap();
        let mx = forward_map(&m, &x).unwrap();
        let my = forward_map(&m, &y).unwrap();
        for (k, v) in lhs.as_flat().iter().enumerate() {
            let rhs = a * mx.as_flat()[k] + b * my.as_flat()[k];
            prop_assert!((v - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn row_sums_equal_trace(d in 2usize..9, seed: u64) {
        let m = five(d);
        let x = random_hermitian(d, &mut rng(seed));
        let t = forward_map(&m, &x).unwrap();
        for i in 0..t.rows() {
            let s: f64 = t.row(i).iter().sum();
            prop_assert!((s - x.trace()).abs() <= 1e-10);
        }
    }

    #[test]
    fn matrix_rep_agrees_with_forward_map(d in 2usize..8, seed: u64) {
        let m = five(d);
        let x = random_hermitian(d, &mut rng(seed));
        let via_matrix = m.apply_coords(&m.coords().to_coords(&x));
        let direct = forward_map(&m, &x).unwrap();
        for (p, q) in via_matrix.iter().zip(direct.as_flat()) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn gell_mann_round_trip_is_isometric(d in 1usize..10, seed: u64) {
        let g = GellMannBasis::new(d);
        let x = random_hermitian(d, &mut rng(seed));
        let c = g.to_coords(&x);
        prop_assert_eq!(c.len(), d * d);
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - x.hs_norm()).abs() <= 1e-12 * (1.0 + norm));
        prop_assert!((&g.from_coords(&c) - &x).hs_norm() <= 1e-12 * (1.0 + norm));
    }

    #[test]
    fn psd_projection_is_idempotent_and_orthogonal(d in 1usize..8, seed: u64) {
        let x = random_hermitian(d, &mut rng(seed));
        let p = psd_project(&x).unwrap();
        prop_assert!(p.eigenvalues().unwrap().iter().all(|&l| l >= -1e-12));
        let pp = psd_project(&p).unwrap();
        prop_assert!((&pp - &p).hs_norm() <= 1e-12 * (1.0 + p.hs_norm()));
        // X − P(X) is negative semidefinite and orthogonal to P(X)
        let r = &x - &p;
        prop_assert!(r.hs_inner(&p).abs() <= 1e-11 * (1.0 + x.hs_norm().powi(2)));
        let top = r.eigenvalues().unwrap()[0];
        prop_assert!(top <= 1e-12 * (1.0 + x.hs_norm()), "largest eigenvalue of X − P(X): {top:e}");
    }

    #[test]
    fn haar_states_are_rank_one_projectors(d in 1usize..9, seed: u64) {
        let s = sample_haar_pure(d, &mut rng(seed));
        prop_assert!((s.trace() - 1.0).abs() <= 1e-12);
        let ev = s.eigenvalues().unwrap();
        prop_assert!((ev[0] - 1.0).abs() <= 1e-12);
        prop_assert!(ev[1..].iter().all(|l| l.abs() <= 1e-12));
    }

    #[test]
    fn noise_has_exact_norm(l in 1usize..6, m in 1usize..12, eps in 1e-8f64..1.0, seed: u64) {
        let f = sample_noise(l, m, eps, &mut rng(seed));
        prop_assert!((f.hs_norm() - eps).abs() <= 1e-13 * eps);
    }

    #[test]
    fn extracted_vector_reproduces_pure_state(d in 1usize..8, seed: u64, scale in 0.1f64..10.0) {
        let s = sample_haar_pure(d, &mut rng(seed));
        let (v, gap) = extract_pure(&s.scale(scale)).unwrap();
        prop_assert!(gap <= 1e-12);
        prop_assert!((&HermitianMatrix::outer(&v) - s.as_hermitian()).hs_norm() <= 1e-10);
        let lead = v.iter().find(|z| z.norm() > 1e-6).unwrap();
        prop_assert!(lead.im.abs() <= 1e-12 && lead.re > 0.0);
    }

    #[test]
    fn nearest_rank_matches_counting_definition(
        mut values in prop::collection::vec(-100.0f64..100.0, 1..300),
        permille in 0u32..=1000,
    ) {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        // smallest v with #{x ≤ v}·1000 ≥ permille·n, in exact integer arithmetic
        let naive = values
            .iter()
            .copied()
            .find(|&v| values.iter().filter(|&&x| x <= v).count() * 1000 >= permille as usize * n)
            .unwrap();
        let p = f64::from(permille) / 1000.0;
        prop_assert_eq!(nearest_rank(&values, p), naive);
    }
}
