use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stoq_core::distances::{check_hellinger_kl, check_tensorization, split_hellinger, JointDistribution};
use stoq_core::dyadic::build_sampler;
use stoq_core::extension::{
    extension_operator, extension_operator_compressed, sym_projector, ExtensionLayout, SeparableIsometry,
};
use stoq_core::permutation::{factorial, rank_lexicographic, unrank_lexicographic};
use stoq_core::product_value::{omega_plus_alternating, product_value};
use stoq_core::random::{
    random_bosonic_mixed, random_bosonic_pure, random_circuit, random_nonneg_contraction, random_product_witness,
    random_verifier,
};
use stoq_core::rounding::{condition_step, direct_round, tested_value};
use stoq_core::tensor::{copy_permutation, embed_on_tested, lambda_max, tensor, RealOperator, RegisterLayout};
use stoq_core::verifier::{acceptance_matrix, circuit_permutation, hermitian_overlap};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn unranking_round_trips(n in 1usize..7, seed in any::<u64>()) {
        let rank = seed % factorial(n).unwrap();
        let p = unrank_lexicographic(n, rank).unwrap();
        prop_assert_eq!(rank_lexicographic(&p), rank);
        prop_assert!(p.compose(&p.inverse()).is_identity());
    }

    #[test]
    fn copy_permutations_are_orthogonal(d in 2usize..4, r in 1usize..5, seed in any::<u64>()) {
        let rank = seed % factorial(r).unwrap();
        let tau = unrank_lexicographic(r, rank).unwrap();
        let u = copy_permutation(&tau, d);
        let ut = copy_permutation(&tau.inverse(), d);
        prop_assert_eq!(u.transpose(), ut);
    }

    #[test]
    fn circuits_are_bijections(bits in 1usize..8, gates in 0usize..20, seed in any::<u64>()) {
        let c = random_circuit(&mut rng(seed), bits, gates).unwrap();
        prop_assert!(circuit_permutation(&c).unwrap().is_bijection());
    }

    #[test]
    fn acceptance_matrix_in_unit_interval(seed in any::<u64>()) {
        let v = random_verifier(&mut rng(seed), 7).unwrap();
        let h = hermitian_overlap(&v).unwrap();
        prop_assert!(h.matrix().iter().all(|&x| x >= 0.0));
        let m = acceptance_matrix(&v).unwrap();
        let eig = m.matrix().clone().symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&x| x >= -1e-9 && x <= 1.0 + 1e-9));
    }

    #[test]
    fn hellinger_kl_holds(seed in any::<u64>(), n in 2usize..6) {
        let layout = RegisterLayout::new(vec![n]).unwrap();
        let mut r = rng(seed);
        let p = stoq_core::random::random_distribution(&mut r, &layout, 0.3).unwrap();
        let q = stoq_core::random::random_distribution(&mut r, &layout, 0.3).unwrap();
        prop_assert!(check_hellinger_kl(&p, &q).unwrap().holds);
    }

    #[test]
    fn tensorization_holds(seed in any::<u64>(), m in 2usize..5) {
        let layout = RegisterLayout::uniform(2, m).unwrap();
        let p = stoq_core::random::random_distribution(&mut rng(seed), &layout, 0.2).unwrap();
        let delta = (0..m - 1).map(|i| split_hellinger(&p, i)).fold(0.0, f64::max);
        prop_assert!(check_tensorization(&p, delta).unwrap().holds);
    }

    #[test]
    fn projector_is_idempotent(d in 2usize..4, r in 1usize..5) {
        let p = sym_projector(d, r).unwrap();
        let p2 = p.mul(&p).unwrap();
        prop_assert!(p2.max_abs_diff(&p) < 1e-12);
        prop_assert_eq!(p.transpose(), p);
    }

    #[test]
    fn compressed_and_full_extension_agree(seed in any::<u64>(), r in 1usize..4, d in 2usize..4) {
        let layout = RegisterLayout::new(vec![d, 2]).unwrap();
        let m = random_nonneg_contraction(&mut rng(seed), &layout, 1.0).unwrap();
        let full = extension_operator(&m, r).unwrap();
        let v = SeparableIsometry::new(&ExtensionLayout::uniform(&[d, 2], r).unwrap()).unwrap().dense();
        let conj = v.transpose() * full.matrix() * &v;
        let comp = extension_operator_compressed(&m, r).unwrap();
        prop_assert!((conj - comp.matrix()).amax() < 1e-12);
        prop_assert!((lambda_max(&full).unwrap() - lambda_max(&comp).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn product_witness_lifts(seed in any::<u64>(), r in 1usize..4) {
        let layout = RegisterLayout::new(vec![2, 3]).unwrap();
        let mut g = rng(seed);
        let m = random_nonneg_contraction(&mut g, &layout, 1.0).unwrap();
        let w = random_product_witness(&mut g, &layout).unwrap();
        let lifted = stoq_core::extension::lift_product_witness(&w, r).unwrap();
        let e = extension_operator(&m, r).unwrap();
        prop_assert!((e.quadratic_form(&lifted) - product_value(&m, &w).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn alternating_is_below_lambda(seed in any::<u64>()) {
        let layout = RegisterLayout::new(vec![2, 2, 2]).unwrap();
        let m = random_nonneg_contraction(&mut rng(seed), &layout, 1.0).unwrap();
        let res = omega_plus_alternating(&m, 5, seed).unwrap();
        prop_assert!(res.value <= lambda_max(&m).unwrap() + 1e-9);
        for h in &res.histories {
            for w in h.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn dyadic_sampler_invariants(r in 1usize..6, eta in 0.01f64..0.99) {
        let s = build_sampler(r, eta).unwrap();
        prop_assert!(s.is_inverse_invariant());
        prop_assert!(s.tv_within_eta());
        prop_assert_eq!(s.total_variation(), s.total_variation_closed_form());
        prop_assert!(s.b() < s.n());
    }

    #[test]
    fn conditioning_preserves_value(seed in any::<u64>(), mixed in any::<bool>()) {
        let layout = ExtensionLayout::new(vec![2, 3], vec![3]).unwrap();
        let mut g = rng(seed);
        let state = if mixed {
            random_bosonic_mixed(&mut g, &layout, 2).unwrap()
        } else {
            random_bosonic_pure(&mut g, &layout, false).unwrap()
        };
        let m = random_nonneg_contraction(&mut g, &RegisterLayout::new(vec![2, 3]).unwrap(), 1.0).unwrap();
        let v = tested_value(&state, &m).unwrap();
        let outcomes = condition_step(&state, 0).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.weight).sum();
        let avg: f64 = outcomes.iter().map(|o| o.weight * tested_value(&o.residual, &m).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((avg - v).abs() < 1e-9);
    }

    #[test]
    fn direct_round_bound(seed in any::<u64>()) {
        let layout = ExtensionLayout::new(vec![3, 2], vec![2]).unwrap();
        let mut g = rng(seed);
        let state = random_bosonic_pure(&mut g, &layout, false).unwrap();
        let m = random_nonneg_contraction(&mut g, &RegisterLayout::new(vec![3, 2]).unwrap(), 1.0).unwrap();
        prop_assert!(direct_round(&state, &m).unwrap().bound_holds);
    }
}

#[test]
fn embed_matches_routing_conjugation() {
    // M on registers (0, 2) of three equals routing M ⊗ I into place
    let layout = RegisterLayout::new(vec![2, 3]).unwrap();
    let m = random_nonneg_contraction(&mut rng(3), &layout, 1.0).unwrap();
    let full = RegisterLayout::new(vec![2, 2, 3]).unwrap();
    let embedded = embed_on_tested(&m, &full, &[0, 2]).unwrap();
    let padded = tensor(&m, &RealOperator::identity(RegisterLayout::new(vec![2]).unwrap()));
    // padded acts on (A, C, B); swap the last two registers
    let n = full.total_dim();
    let mut p = DMatrix::zeros(n, n);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..3 {
                p[(full.index_of(&[a, b, c]), a * 6 + c * 2 + b)] = 1.0;
            }
        }
    }
    let routed = &p * padded.matrix() * p.transpose();
    assert!((routed - embedded.matrix()).amax() < 1e-15);
}

#[test]
fn joint_distribution_product_of_marginals() {
    let p = JointDistribution::product(&[vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
    let q = p.product_of_marginals();
    for (a, b) in p.probs().iter().zip(q.probs()) {
        assert!((a - b).abs() < 1e-15);
    }
}
