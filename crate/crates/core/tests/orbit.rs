use looptheta::exact_arith::SymplecticSpace;
use looptheta::linalg::q;
use looptheta::loop_symplectic::ParabolicSplit;
use looptheta::orbit::{compare_orbit_invariants, crossing_tensor, image_f_r, is_quasi_basis, is_negligible, standard_form_tensor, t_invariant, tprime_invariant};
use looptheta::sampling::{random_nonzero_vec, random_orthogonal_series, random_symplectic_series, random_tensor};
use looptheta::weil_phase::QuadraticSpace;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(kind: usize) -> QuadraticSpace {
    match kind {
        0 => QuadraticSpace::diagonal(&[1, 1]),
        1 => QuadraticSpace::diagonal(&[1, -3]),
        2 => QuadraticSpace::hyperbolic(),
        _ => QuadraticSpace::diagonal(&[2, 1, -1]),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_under_orthogonal_series(seed in any::<u64>(), n in 1usize..=2, kind in 0usize..4, depth in 1i32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let vs = space(kind);
        let r = random_tensor(&mut rng, s, &vs, depth);
        let h = random_orthogonal_series(&mut rng, &vs, 3);
        let rh = r.act_v(&h).unwrap().project_x();
        prop_assert_eq!(compare_orbit_invariants(&r, &rh), Ok(()));
        prop_assert_eq!(tprime_invariant(&r).is_zero(), tprime_invariant(&rh).is_zero());
    }

    #[test]
    fn divisors_under_symplectic_series(seed in any::<u64>(), n in 1usize..=2, kind in 0usize..4, depth in 1i32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let vs = space(kind);
        let r = random_tensor(&mut rng, s, &vs, depth);
        let g = random_symplectic_series(&mut rng, s, 2);
        let rg = r.act(&g).unwrap().project_x();
        let (m, mg) = (image_f_r(&r), image_f_r(&rg));
        prop_assert_eq!(m.elementary_divisors(), mg.elementary_divisors());
    }

    #[test]
    fn quasi_bases_exist(seed in any::<u64>(), n in 1usize..=3, kind in 0usize..4, depth in 1i32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let r = random_tensor(&mut rng, s, &space(kind), depth);
        let m = image_f_r(&r);
        prop_assert!(is_quasi_basis(&m, &m.module_generators(s)));
        prop_assert!(t_invariant(&r).is_symmetric());
        prop_assert!(tprime_invariant(&r).is_antisymmetric());
    }

    #[test]
    fn standard_forms_are_not_negligible(seed in any::<u64>(), n in 2usize..=3, a in 0usize..=3, kind in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = a.min(n);
        let sigma = a / 2;
        let tau = a - sigma;
        let rho = n - a;
        let exps: Vec<u32> = [sigma, tau, rho].iter().flat_map(|&len| (0..len).map(move |i| (len - i) as u32)).collect();
        let vs = space(kind);
        let vecs: Vec<_> = exps.iter().map(|_| random_nonzero_vec(&mut rng, vs.m)).collect();
        let r = standard_form_tensor(ParabolicSplit::new(SymplecticSpace::new(n), a), &vs, sigma, tau, rho, &exps, &vecs).unwrap();
        prop_assert!(tprime_invariant(&r).is_zero());
        prop_assert!(!is_negligible(&r));
    }

    #[test]
    fn crossings_are_negligible(ke in 1u32..=3, kf in 1u32..=3, i in 1usize..=2, c in -3i64..=3) {
        let s = SymplecticSpace::new(2);
        let vs = QuadraticSpace::diagonal(&[1, 1, 2]);
        let v1 = vec![q(1), q(c), q(0)];
        let v2 = vec![q(0), q(1), q(1)];
        let r = crossing_tensor(s, &vs, i, ke, kf, &v1, &v2).unwrap();
        prop_assert!(!tprime_invariant(&r).is_zero());
        prop_assert!(is_negligible(&r));
    }
}
