use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use detpower::sampling::{random_povm, random_pure_state, random_unitary};
use detpower::state::sequence_operator;
use detpower::*;

fn distribution(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, m).prop_map(|v| {
        let t: f64 = v.iter().sum();
        v.into_iter().map(|x| x / t).collect()
    })
}

fn pair() -> impl Strategy<Value = (ClassicalDistribution, ClassicalDistribution)> {
    (2usize..=6).prop_flat_map(|m| (distribution(m), distribution(m))).prop_map(|(a, b)| {
        (ClassicalDistribution::new(a).unwrap(), ClassicalDistribution::new(b).unwrap())
    })
}

fn quick() -> SearchOptions {
    SearchOptions {
        restarts: 8,
        ..SearchOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_convex((p, q) in pair()) {
        let vals: Vec<f64> = (0..=50).map(|i| phi(i as f64 / 50.0, &p, &q).unwrap()).collect();
        for w in vals.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-10);
        }
        prop_assert!(vals[0].abs() < 1e-12 && vals[50].abs() < 1e-12);
    }

    #[test]
    fn chernoff_is_symmetric_and_below_stein((p, q) in pair()) {
        let c = chernoff_exponent(&p, &q).unwrap().value;
        prop_assert!((c - chernoff_exponent(&q, &p).unwrap().value).abs() <= 1e-10);
        prop_assert!(c <= relative_entropy(&p, &q).unwrap() + 1e-12);
        prop_assert!(c <= relative_entropy(&q, &p).unwrap() + 1e-12);
        prop_assert!(c >= 0.0);
    }

    #[test]
    fn hoeffding_decreases_in_rate((p, q) in pair(), r1 in 0.0f64..0.5, dr in 0.0f64..0.5) {
        let a = hoeffding_exponent(&p, &q, r1).unwrap().value;
        let b = hoeffding_exponent(&p, &q, r1 + dr).unwrap().value;
        prop_assert!(b <= a + 1e-10);
        let stein = relative_entropy(&p, &q).unwrap();
        prop_assert!((hoeffding_exponent(&p, &q, 0.0).unwrap().value - stein).abs() <= 1e-6);
    }

    #[test]
    fn exponents_ignore_outcome_order((p, q) in pair(), seed in any::<u64>()) {
        let m = p.len();
        let mut perm: Vec<usize> = (0..m).collect();
        // rotation by a seed-dependent offset
        perm.rotate_left((seed as usize) % m);
        let pp = ClassicalDistribution::new(perm.iter().map(|&i| p.probs()[i]).collect()).unwrap();
        let qp = ClassicalDistribution::new(perm.iter().map(|&i| q.probs()[i]).collect()).unwrap();
        let c = chernoff_exponent(&p, &q).unwrap().value;
        prop_assert!((c - chernoff_exponent(&pp, &qp).unwrap().value).abs() <= 1e-8);
        prop_assert!((relative_entropy(&p, &q).unwrap() - relative_entropy(&pp, &qp).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn induced_distribution_is_normalized(seed in any::<u64>(), d in 2usize..=3, m in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(d, m, &mut rng);
        let rho = random_pure_state(d, &mut rng);
        let probs = induced_distribution(&p, &rho).unwrap();
        let total: f64 = probs.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(probs.probs().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn sequence_operators_resolve_identity(seed in any::<u64>(), m in 2usize..=3, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(2, m, &mut rng);
        let dim = 1 << n;
        let mut total = ComplexMatrix::zeros(dim);
        for idx in 0..m.pow(n as u32) {
            let seq = detpower::finite::index_sequence(m, n, idx);
            total = total.add(&sequence_operator(&p, &seq).unwrap());
        }
        prop_assert!(total.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-12);
    }

    #[test]
    fn brute_force_matches_likelihood_ratio(seed in any::<u64>(), m in 2usize..=4, n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(2, m, &mut rng);
        let a: Vec<_> = (0..n).map(|_| random_pure_state(2, &mut rng)).collect();
        let b: Vec<_> = (0..n).map(|_| random_pure_state(2, &mut rng)).collect();
        let pa = sequence_distribution(&p, &ProductInput::new(a).unwrap()).unwrap();
        let pb = sequence_distribution(&p, &ProductInput::new(b).unwrap()).unwrap();
        let ml = ml_error_probability(&pa, &pb).unwrap();
        prop_assert_eq!(brute_force_grouping(&pa, &pb).unwrap().p_err, ml.p_err);
        prop_assert!((0.0..=0.5).contains(&ml.p_err));
    }

    #[test]
    fn more_uses_never_hurt(p in 0.05f64..0.95, q in 0.05f64..0.95, n in 1usize..=6) {
        prop_assume!((p - q).abs() > 1e-3);
        let povm = Povm::commuting_qubit(p, q).unwrap();
        let err = |n: usize| {
            let a = sequence_distribution(&povm, &ProductInput::iid(&DensityMatrix::basis(2, 0), n).unwrap()).unwrap();
            let b = sequence_distribution(&povm, &ProductInput::iid(&DensityMatrix::basis(2, 1), n).unwrap()).unwrap();
            ml_error_probability(&a, &b).unwrap().p_err
        };
        prop_assert!(err(n + 1) <= err(n) + 1e-12);
    }

    #[test]
    fn commuting_closed_form_matches_chernoff(p in 0.02f64..0.98, q in 0.02f64..0.98) {
        prop_assume!((p - q).abs() > 1e-3);
        let c = chernoff_exponent(
            &ClassicalDistribution::new(vec![p, 1.0 - p]).unwrap(),
            &ClassicalDistribution::new(vec![q, 1.0 - q]).unwrap(),
        ).unwrap().value;
        prop_assert!((commuting_zeta(p, q).unwrap() - c).abs() <= 1e-9);
        prop_assert!((commuting_zeta(p, q).unwrap() - commuting_zeta(q, p).unwrap()).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detector_exponents_are_unitarily_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(2, 3, &mut rng);
        let u = random_unitary(2, &mut rng);
        let opts = quick();
        let zc = zeta_chernoff(&p, &opts).unwrap().value;
        let zs = zeta_stein(&p, &opts).unwrap().value;
        prop_assert!(zc <= zs + 1e-12);
        for q in [p.conjugated(&u), p.permuted(&[1, 2, 0])] {
            prop_assert!((zeta_chernoff(&q, &opts).unwrap().value - zc).abs() <= 1e-8);
            prop_assert!((zeta_stein(&q, &opts).unwrap().value - zs).abs() <= 1e-8);
        }
    }

    #[test]
    fn single_shot_is_unitarily_invariant(seed in any::<u64>(), m in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(2, m, &mut rng);
        let u = random_unitary(2, &mut rng);
        let a = single_shot_power(&p).unwrap().value;
        let b = single_shot_power(&p.conjugated(&u)).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8);
        prop_assert!((0.0..=0.5).contains(&a));
    }

    #[test]
    fn mixing_respects_bounds(p1 in 0.05f64..0.95, q1 in 0.05f64..0.95, p2 in 0.05f64..0.95, q2 in 0.05f64..0.95, w in 0.0f64..=1.0) {
        prop_assume!((p1 - q1).abs() > 0.01 && (p2 - q2).abs() > 0.01);
        let e = Povm::commuting_qubit(p1, q1).unwrap();
        let g = Povm::commuting_qubit(p2, q2).unwrap();
        let opts = quick();
        let (ze, zg) = (zeta_chernoff(&e, &opts).unwrap().value, zeta_chernoff(&g, &opts).unwrap().value);
        let zm = zeta_chernoff(&mix_povms(&e, &g, w).unwrap(), &opts).unwrap().value;
        let b = mixing_bounds((-ze).exp(), (-zg).exp(), ze, zg, w).unwrap();
        prop_assert!(b.lower - 1e-9 <= zm && zm <= b.upper + 1e-9);
    }
}
