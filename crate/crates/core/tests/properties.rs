use proptest::prelude::*;

use biortho::canonical::canonical_form;
use biortho::families::PairFamily;
use biortho::frames::{classify_sweep, classify_sweep_random_onb, frame_operators};
use biortho::io::{pair_to_json, parse_pair, PairFile};
use biortho::ladder::{build_ladder_set, verify_number_operators};
use biortho::numerics::{
    complex_gaussian, polar_left, random_unitary, seeded_rng, sqrtm_psd, svd, ComplexMatrix, C64,
};
use biortho::pair::{biorthogonality_residual, TruncatedPair};

fn gaussian(d: usize, seed: u64) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(complex_gaussian(d, d, &mut seeded_rng(seed))).unwrap()
}

fn random_pair(d: usize, kappa: f64, seed: u64) -> TruncatedPair {
    PairFamily::RandomRegular { kappa, seed }
        .generate(d)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polar_factors_reproduce_input(d in 1usize..12, seed in any::<u64>()) {
        let m = gaussian(d, seed);
        let p = polar_left(&m).unwrap();
        let scale = m.frobenius_norm();
        prop_assert!((&(&p.unitary * &p.positive) - &m).frobenius_norm() <= 1e-12 * d as f64 * scale);
        prop_assert!(p.unitary.unitarity_defect() <= 1e-12 * d as f64);
        prop_assert!(p.positive.hermiticity_defect() <= 1e-13 * scale);
        prop_assert!(p.spectrum.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn square_root_of_gram_matches_polar_factor(d in 1usize..10, seed in any::<u64>()) {
        // |M| = (M^H M)^{1/2} computed two independent ways
        let m = gaussian(d, seed);
        let k = svd(&m).unwrap().condition_number();
        prop_assume!(k < 1e4);
        let h = polar_left(&m).unwrap().positive;
        let oracle = sqrtm_psd(&(&m.adjoint() * &m)).unwrap();
        prop_assert!((&h - &oracle).frobenius_norm() <= 1e-12 * d as f64 * k * k * h.frobenius_norm());
        // and squaring the square root returns the Gram matrix
        let gram = &m.adjoint() * &m;
        prop_assert!((&(&oracle * &oracle) - &gram).frobenius_norm() <= 1e-12 * d as f64 * gram.frobenius_norm());
    }

    #[test]
    fn determinant_modulus_is_product_of_singular_values(d in 1usize..9, seed in any::<u64>()) {
        let m = gaussian(d, seed);
        let det = m.as_dmatrix().determinant().norm();
        let prod: f64 = svd(&m).unwrap().singular_values.iter().product();
        prop_assert!((det - prod).abs() <= 1e-11 * d as f64 * prod.max(1e-300));
    }

    #[test]
    fn unitary_rotation_preserves_biorthogonality_and_conjugates_tf(
        d in 2usize..10, kappa in 1.0f64..200.0, seed in any::<u64>(), g_seed in any::<u64>()
    ) {
        let p = random_pair(d, kappa, seed);
        let g = random_unitary(d, g_seed);
        let q = TruncatedPair::new(&g * p.phi(), &g * p.psi(), "").unwrap();
        prop_assert!(biorthogonality_residual(&q) <= 1e-12 * d as f64 * kappa);
        let tf = canonical_form(&p, None).unwrap().tf;
        let tf_rot = canonical_form(&q, None).unwrap().tf;
        let expected = &(&g * &tf) * &g.adjoint();
        prop_assert!((&tf_rot - &expected).frobenius_norm() <= 1e-10 * d as f64 * kappa * tf.frobenius_norm());
    }

    #[test]
    fn bessel_bounds_multiply_to_kappa_squared(d in 2usize..12, kappa in 1.0f64..500.0, seed in any::<u64>()) {
        let p = random_pair(d, kappa, seed);
        let fd = frame_operators(&p).unwrap();
        let k = canonical_form(&p, None).unwrap().kappa();
        prop_assert!(fd.r_phi * fd.r_psi >= 1.0 - 1e-12);
        prop_assert!((fd.r_phi * fd.r_psi - k * k).abs() <= 1e-9 * k * k);
        let swapped = frame_operators(&p.swapped()).unwrap();
        prop_assert_eq!(&swapped.s_phi, &fd.s_psi);
    }

    #[test]
    fn number_operator_factorizes(d in 2usize..12, kappa in 1.0f64..100.0, seed in any::<u64>()) {
        let p = random_pair(d, kappa, seed);
        let ls = build_ladder_set(&canonical_form(&p, None).unwrap()).unwrap();
        let nr = verify_number_operators(&ls, &p).unwrap();
        let tol = 1e-12 * d as f64 * kappa * kappa;
        prop_assert!(nr.product_ba <= tol);
        prop_assert!(nr.product_adag_bdag <= tol);
        prop_assert!(nr.adjoint_pairing <= tol * 10.0);
        prop_assert!(nr.eigenvalue_deviation <= 1e-8);
    }

    #[test]
    fn pair_file_round_trip_is_bit_exact(
        (dim, count, phi, psi) in (1usize..6).prop_flat_map(|dim| (Just(dim), 1..=dim)).prop_flat_map(|(dim, count)| {
            let n = dim * count * 2;
            let entry = prop_oneof![
                any::<f64>().prop_filter("finite", |x| x.is_finite()),
                Just(-0.0),
                Just(f64::MIN_POSITIVE / 8.0),
                Just(f64::MAX),
            ];
            (Just(dim), Just(count), prop::collection::vec(entry.clone(), n), prop::collection::vec(entry, n))
        }),
        label in "[a-z =:.@-]{0,12}"
    ) {
        let to_rows = |v: &[f64]| -> Vec<Vec<[f64; 2]>> {
            (0..dim)
                .map(|i| (0..count).map(|j| [v[2 * (i * count + j)], v[2 * (i * count + j) + 1]]).collect())
                .collect()
        };
        let file = PairFile {
            schema_version: 1,
            dim,
            count,
            phi: to_rows(&phi),
            psi: to_rows(&psi),
            label: Some(label),
        };
        // zero columns are rejected by construction; skip those draws
        let Ok(pair) = file.clone().into_pair() else { return Ok(()); };
        let back = parse_pair(pair_to_json(&pair).as_bytes()).unwrap();
        let bits = |m: &ComplexMatrix| m.iter().flat_map(|z: &C64| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.phi()), bits(pair.phi()));
        prop_assert_eq!(bits(back.psi()), bits(pair.psi()));
        prop_assert_eq!(back.label(), pair.label());
    }

    #[test]
    fn family_specs_round_trip(alpha in -3.0f64..3.0, kappa in 1.0f64..1e6, eps in -0.99f64..0.99, seed in any::<u64>()) {
        for fam in [
            PairFamily::DiagPower { alpha },
            PairFamily::DiagExp { beta: alpha },
            PairFamily::BoundedPerturbation { eps, seed },
            PairFamily::RandomRegular { kappa, seed },
        ] {
            prop_assert_eq!(fam.to_string().parse::<PairFamily>().unwrap(), fam);
        }
    }

    #[test]
    fn family_spec_parser_never_panics(s in "\\PC{0,40}") {
        let _ = s.parse::<PairFamily>();
    }

    #[test]
    fn pair_parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_pair(&bytes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn classification_ignores_the_measuring_basis(seed in any::<u64>(), which in 0usize..5) {
        let fam = [
            PairFamily::DiagPower { alpha: 0.0 },
            PairFamily::DiagPower { alpha: 1.0 },
            PairFamily::DiagPower { alpha: -1.0 },
            PairFamily::DiagMixed,
            PairFamily::BoundedPerturbation { eps: 0.3, seed: 0 },
        ][which];
        let dims = [8, 16, 32, 64];
        let a = classify_sweep(&fam, &dims, 0.05).unwrap();
        let b = classify_sweep_random_onb(&fam, &dims, 0.05, seed).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        for (x, y) in a.sigma_max_trace.iter().zip(&b.sigma_max_trace) {
            prop_assert!((x - y).abs() <= 1e-12 * x);
        }
    }
}

#[test]
fn regular_families_are_biorthogonal_at_every_dim() {
    let families = [
        PairFamily::Identity,
        PairFamily::DiagPower { alpha: 1.0 },
        PairFamily::DiagPower { alpha: -0.5 },
        PairFamily::DiagExp { beta: 0.1 },
        PairFamily::DiagMixed,
        PairFamily::BoundedPerturbation { eps: 0.3, seed: 1 },
        PairFamily::RandomRegular {
            kappa: 100.0,
            seed: 2,
        },
    ];
    for fam in families {
        for d in [2, 4, 8, 16, 32, 64] {
            let p = fam.generate(d).unwrap();
            assert!(biorthogonality_residual(&p) <= 1e-12, "{fam} d={d}");
            assert!(
                biortho::pair::regularity_check(&p).unwrap().is_regular(),
                "{fam} d={d}"
            );
        }
    }
}

#[test]
fn shifted_family_is_exactly_non_regular() {
    for d in [2, 4, 8, 16, 32, 64] {
        let p = PairFamily::ShiftedNonRegular.generate(d).unwrap();
        assert!(biorthogonality_residual(&p) <= 1e-15);
        let v = biortho::pair::regularity_check(&p).unwrap();
        assert!(!v.is_regular());
        let w = v.witness_psi.unwrap();
        assert_eq!(w[0], C64::new(1.0, 0.0));
        assert!((0..p.count()).all(|k| p.psi()[(0, k)] == C64::new(0.0, 0.0)));
    }
}

#[test]
fn diag_power_canonical_form_is_diagonal() {
    let p = PairFamily::DiagPower { alpha: 1.5 }.generate(6).unwrap();
    let cf = canonical_form(&p, None).unwrap();
    let expected: Vec<f64> = (0..6).map(|k| ((k + 1) as f64).powf(1.5)).collect();
    assert!(
        (&cf.tf - &ComplexMatrix::from_real_diagonal(&expected)).frobenius_norm()
            <= 1e-13 * 6f64.powf(1.5)
    );
    assert!((&cf.f - &ComplexMatrix::identity(6)).max_abs() <= 1e-13);
}

#[test]
fn bounded_perturbation_is_well_conditioned() {
    for eps in [0.1, 0.3, 0.5] {
        for d in [4, 16, 32] {
            let p = PairFamily::BoundedPerturbation { eps, seed: 7 }
                .generate(d)
                .unwrap();
            let k = canonical_form(&p, None).unwrap().kappa();
            assert!(
                k <= (1.0 + eps) / (1.0 - eps) + 1e-12,
                "eps={eps} d={d} kappa={k}"
            );
        }
    }
}
