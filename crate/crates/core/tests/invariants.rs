use blocktri::almostnormal::{
    certify, conic_fit, hermitian_case_c, leading_form_residual, leading_part_decomposition, lemma31_residual,
    unitary_case_c, unitary_identities_residual, ConicCoefficients, LeadingVariant, RealConic,
};
use blocktri::generators::{arrow_hermitian_plus_rank_one, gaussian_matrix, haar_unitary, random_unit_vector};
use blocktri::interchange::{parse_matrix_market, to_matrix_market};
use blocktri::lanczos::block_lanczos;
use blocktri::matcore::{antihermitian_part, c64, commutator, hermitian_part, qr, svd, ComplexMatrix};
use blocktri::structure::{block_profile, off_profile_residual, BlockProfile};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    gaussian_matrix(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    hermitian_part(&random(n, n, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs_and_is_orthonormal(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>()) {
        let m = random(rows, cols, seed);
        let s = svd(&m, 1e-10).unwrap();
        let scale = m.frobenius_norm();
        prop_assert!((&s.reconstruct() - &m).frobenius_norm() <= 1e-13 * scale.max(1.0));
        prop_assert!(s.left_vectors.orthonormality_defect() <= 1e-13);
        prop_assert!(s.right_vectors.orthonormality_defect() <= 1e-13);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rank_of_products(n in 3usize..9, k in 1usize..3, seed in any::<u64>()) {
        let m = &random(n, k, seed) * &random(k, n, seed ^ 1);
        prop_assert_eq!(svd(&m, 1e-10).unwrap().numerical_rank, k);
    }

    #[test]
    fn qr_reconstructs(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let m = random(rows, cols, seed);
        let (q, r) = qr(&m);
        prop_assert!(q.orthonormality_defect() <= 1e-13);
        prop_assert!((&(&q * &r) - &m).frobenius_norm() <= 1e-13 * m.frobenius_norm().max(1.0));
        for i in 0..rows {
            for j in 0..i.min(cols) {
                prop_assert!(r[(i, j)].norm() <= 1e-14 * m.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn commutator_identities(n in 1usize..10, seed in any::<u64>()) {
        let a = random(n, n, seed);
        let d = commutator(&a).unwrap();
        let bound = 1e-13 * a.frobenius_norm().powi(2);
        prop_assert!(d.hermitian_defect() <= bound);
        prop_assert!(d.trace().norm() <= bound);
        let (h, k) = (hermitian_part(&a).unwrap(), antihermitian_part(&a).unwrap());
        let alt = (&(&h * &k) - &(&k * &h)).scale_real(2.0);
        prop_assert!((&d - &alt).frobenius_norm() <= 1e-12 * a.frobenius_norm().powi(2));
    }

    #[test]
    fn lemma31_holds_for_random_matrices(n in 2usize..12, j in 1usize..5, seed in any::<u64>()) {
        prop_assert!(lemma31_residual(&random(n, n, seed), j).unwrap() <= 1e-12);
    }

    #[test]
    fn lanczos_reduces_random_hermitian(n in 2usize..16, width in 1usize..4, seed in any::<u64>()) {
        let h = random_hermitian(n, seed);
        let z = random(n, width.min(n), seed ^ 7);
        let red = block_lanczos(&h, &z, 1e-10).unwrap();
        let hn = h.frobenius_norm();
        prop_assert_eq!(red.block_sizes.iter().sum::<usize>(), n);
        prop_assert!(red.unitarity_residual() <= 1e-11 * (n as f64).sqrt());
        prop_assert!(red.similarity_residual(&h) <= 1e-10 * hn);
        let profile = BlockProfile::from_sizes(red.block_sizes.clone());
        prop_assert!(off_profile_residual(&red.trid, &profile).unwrap() <= 1e-10 * hn);
        prop_assert!(red.trid.hermitian_defect() <= 1e-12 * hn);
        // widths never grow inside a run
        let starts = red.run_starts();
        for b in 1..red.block_sizes.len() {
            if !starts.contains(&b) {
                prop_assert!(red.block_sizes[b] <= red.block_sizes[b - 1]);
            }
        }
    }

    #[test]
    fn detected_profile_covers_the_matrix(n in 2usize..12, seed in any::<u64>()) {
        let h = random_hermitian(n, seed);
        let red = block_lanczos(&h, &random(n, 2.min(n), seed ^ 3), 1e-10).unwrap();
        let p = block_profile(&red.trid, 1e-10).unwrap();
        prop_assert!(p.off_profile_norm <= 1e-10 * (n * n) as f64 * red.trid.frobenius_norm());
        prop_assert!(p.max_block <= red.block_sizes.iter().copied().max().unwrap());
    }

    #[test]
    fn matrix_market_round_trip(rows in 1usize..7, cols in 0usize..7, seed in any::<u64>(), scale in -200i32..200) {
        let m = random(rows, cols, seed).scale_real(10f64.powi(scale));
        let back = parse_matrix_market(&to_matrix_market(&m)).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        prop_assert!((&back - &m).max_abs() <= 1e-15 * m.max_abs());
    }

    #[test]
    fn hermitian_case_c_is_antihermitian_and_certifies(n in 3usize..20, seed in 0u64..1000) {
        let inst = arrow_hermitian_plus_rank_one(n, seed).unwrap();
        let c = hermitian_case_c(&inst.left, &inst.right).unwrap();
        prop_assert!((&c + &c.adjoint()).frobenius_norm() <= 1e-15);
        prop_assert!(inst.certificate.as_ref().unwrap().residual <= 1e-12);
        prop_assert!(inst.certificate.as_ref().unwrap().range_dim <= 4);
    }

    #[test]
    fn unitary_case_identities(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(n, &mut rng);
        prop_assert!(u.orthonormality_defect() <= 1e-13);
        let x = random_unit_vector(n, &mut rng);
        let y = random_unit_vector(n, &mut rng);
        let a = &u + &(&x * &y.adjoint());
        if let Ok(c) = unitary_case_c(&u, &x, &y, 1e-6) {
            let (r1, r2) = unitary_identities_residual(&a, &c);
            prop_assert!(r1 <= 1e-10 && r2 <= 1e-10, "{} {}", r1, r2);
            prop_assert!(certify(&a, &c, 2, 1e-10).unwrap().residual <= 1e-10);
        }
    }

    #[test]
    fn conic_fit_recovers_ellipses(
        cx in -1.0f64..1.0, cy in -1.0f64..1.0, ra in 0.5f64..2.0, rb in 0.5f64..2.0, phi in 0.0f64..3.0, seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Complex64> = (0..12)
            .map(|_| {
                let t: f64 = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
                let (x, y) = (ra * t.cos(), rb * t.sin());
                c64(cx + x * phi.cos() - y * phi.sin(), cy + x * phi.sin() + y * phi.cos())
            })
            .collect();
        let c = conic_fit(&pts, 1e-9).unwrap();
        for p in &pts {
            prop_assert!(c.eval(*p).norm() <= 1e-9 * c.coefficient_norm());
        }
        prop_assert!((c.a02 - c.a20.conj()).norm() == 0.0);
        prop_assert!(c.a11.im == 0.0 && c.a00.im == 0.0);
    }

    #[test]
    fn leading_decompositions_reproduce_the_form(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, seed in any::<u64>()
    ) {
        let coeffs = ConicCoefficients::from_real(RealConic { a, b, c, d: 0.3, e: -0.2, f: -1.0 });
        let q = coeffs.a20 + coeffs.a02 - coeffs.a11;
        prop_assume!(q.norm() > 1e-6 * coeffs.quadratic_scale());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Complex64> = (0..20).map(|_| c64(rand::Rng::random_range(&mut rng, -2.0..2.0), rand::Rng::random_range(&mut rng, -2.0..2.0))).collect();
        for v in [LeadingVariant::First, LeadingVariant::Second] {
            let part = leading_part_decomposition(&coeffs, v).unwrap();
            prop_assert!(leading_form_residual(&coeffs, &part, v, &samples) <= 1e-12);
        }
    }
}
