use looptheta::exact_arith::SymplecticSpace;
use looptheta::linalg::is_zero_mat;
use looptheta::loop_symplectic::{block_decompose, decompose_u, decompose_u_ordered, make_unipotent, FactorOrder, LoopMatrix, ParabolicSplit};
use looptheta::sampling::{random_symplectic_series, random_u_params};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(seed: u64, n: usize, a: usize) -> (ChaCha8Rng, ParabolicSplit) {
    (ChaCha8Rng::seed_from_u64(seed), ParabolicSplit::new(SymplecticSpace::new(n), a.min(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_round_trips(seed in any::<u64>(), n in 1usize..=3, a in 0usize..=3) {
        let (mut rng, sp) = setup(seed, n, a);
        let (p, z, m) = random_u_params(&mut rng, sp, 2);
        let u = LoopMatrix::mul_all(&[&make_unipotent(&p).unwrap(), &make_unipotent(&z).unwrap(), &make_unipotent(&m).unwrap()]).unwrap();
        let (qp, q0, qm) = decompose_u(&u, sp).unwrap();
        let back = LoopMatrix::mul_all(&[&make_unipotent(&qp).unwrap(), &make_unipotent(&q0).unwrap(), &make_unipotent(&qm).unwrap()]).unwrap();
        prop_assert_eq!(back.normalized(), u.normalized());
    }

    #[test]
    fn unipotents_have_no_c_block(seed in any::<u64>(), n in 1usize..=3, a in 0usize..=3) {
        let (mut rng, sp) = setup(seed, n, a);
        let (p, z, m) = random_u_params(&mut rng, sp, 2);
        for pack in [p, z, m] {
            let g = make_unipotent(&pack).unwrap();
            prop_assert!(g.is_symplectic().unwrap());
            prop_assert!(is_zero_mat(&block_decompose(&g, 3).unwrap().c));
        }
    }

    #[test]
    fn either_factor_order_recomposes(seed in any::<u64>(), n in 1usize..=3, a in 0usize..=3) {
        let (mut rng, sp) = setup(seed, n, a);
        let (p, z, m) = random_u_params(&mut rng, sp, 2);
        let u = LoopMatrix::mul_all(&[&make_unipotent(&m).unwrap(), &make_unipotent(&z).unwrap(), &make_unipotent(&p).unwrap()]).unwrap();
        let (rp, r0, rm) = decompose_u_ordered(&u, sp, FactorOrder::MinusZeroPlus).unwrap();
        let back = LoopMatrix::mul_all(&[&make_unipotent(&rm).unwrap(), &make_unipotent(&r0).unwrap(), &make_unipotent(&rp).unwrap()]).unwrap();
        prop_assert_eq!(back.normalized(), u.normalized());
        let (sp_, s0, sm) = decompose_u_ordered(&u, sp, FactorOrder::PlusZeroMinus).unwrap();
        let fwd = LoopMatrix::mul_all(&[&make_unipotent(&sp_).unwrap(), &make_unipotent(&s0).unwrap(), &make_unipotent(&sm).unwrap()]).unwrap();
        prop_assert_eq!(fwd.normalized(), u.normalized());
    }

    #[test]
    fn symplectic_closure(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let g = random_symplectic_series(&mut rng, s, 2);
        let h = random_symplectic_series(&mut rng, s, 2);
        let gh = g.mul(&h).unwrap();
        prop_assert!(gh.is_symplectic().unwrap());
        let inv = gh.symplectic_inverse();
        prop_assert!(inv.is_symplectic().unwrap());
        prop_assert_eq!(gh.mul(&inv).unwrap().normalized(), LoopMatrix::identity(s));
    }
}
