use looptheta::exact_arith::{project_x, project_y, residue_form, ModuleVector, SymplecticSpace};
use looptheta::linalg::q;
use looptheta::sampling::random_module_vector;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn form_is_antisymmetric(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let w = random_module_vector(&mut rng, s, -5, 5);
        let w2 = random_module_vector(&mut rng, s, -5, 5);
        prop_assert_eq!(residue_form(&w, &w2).unwrap(), -residue_form(&w2, &w).unwrap());
    }

    #[test]
    fn halves_are_lagrangian(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let w = random_module_vector(&mut rng, s, -5, 5);
        let w2 = random_module_vector(&mut rng, s, -5, 5);
        prop_assert!(residue_form(&project_x(&w), &project_x(&w2)).unwrap().is_zero());
        prop_assert!(residue_form(&project_y(&w), &project_y(&w2)).unwrap().is_zero());
    }

    #[test]
    fn projections_split_identity(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(n);
        let w = random_module_vector(&mut rng, s, -5, 5);
        let (x, y) = (project_x(&w), project_y(&w));
        prop_assert_eq!(x.add(&y), w);
        prop_assert_eq!(project_x(&x), x.clone());
        prop_assert_eq!(project_y(&y), y.clone());
        prop_assert!(project_x(&y).is_zero());
    }

    #[test]
    fn form_is_bilinear(seed in any::<u64>(), c in -5i64..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SymplecticSpace::new(2);
        let [a, b, w] = [0; 3].map(|_| random_module_vector(&mut rng, s, -3, 3));
        let lhs = residue_form(&a.scale(&q(c)).add(&b), &w).unwrap();
        prop_assert_eq!(lhs, q(c) * residue_form(&a, &w).unwrap() + residue_form(&b, &w).unwrap());
    }
}

#[test]
fn monomials_have_duals() {
    let s = SymplecticSpace::new(3);
    for idx in 0..s.dim() {
        for k in -4..=-1 {
            let w = ModuleVector::monomial(s, idx, k, q(1)).unwrap();
            let dual_idx = if idx < s.n { idx + s.n } else { idx - s.n };
            let d = ModuleVector::monomial(s, dual_idx, -k - 1, q(1)).unwrap();
            let v = residue_form(&w, &d).unwrap();
            assert!(v == q(1) || v == q(-1));
        }
    }
}
