use looptheta::linalg::{q, Q};
use looptheta::metaplectic::{cocycle_check, hilbert_from_weil, product_formula, required_places, tame_symbol, weil_index, LaurentUnit, Place};
use looptheta::sampling::{random_laurent_unit, random_rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn legendre(a: &BigInt, p: u64) -> i8 {
    let r = a.modpow(&BigInt::from((p - 1) / 2), &BigInt::from(p));
    if r.is_one() {
        1
    } else {
        -1
    }
}

/// Classical Hilbert symbol at an odd prime from valuations and Legendre symbols.
fn hilbert_classical(a: &Q, b: &Q, p: u64) -> i8 {
    let split = |x: &Q| {
        let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
        let pp = BigInt::from(p);
        let mut v = 0i64;
        while (&n % &pp).is_zero() {
            n /= &pp;
            v += 1;
        }
        while (&d % &pp).is_zero() {
            d /= &pp;
            v -= 1;
        }
        // u = n / d, a unit; its residue class is n * d^{-1}.
        let pm = BigInt::from(p);
        let dinv = d.modpow(&BigInt::from(p - 2), &pm);
        (v, ((n * dinv) % &pm + &pm) % &pm)
    };
    let (al, u) = split(a);
    let (be, v) = split(b);
    let eps = ((p - 1) / 2) as i64;
    let sign = if (al * be * eps).rem_euclid(2) == 1 { -1 } else { 1 };
    let lu = if be.rem_euclid(2) == 1 { legendre(&u, p) } else { 1 };
    let lv = if al.rem_euclid(2) == 1 { legendre(&v, p) } else { 1 };
    sign * lu * lv
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tame_symbol_is_bimultiplicative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a1, a2, b] = [0; 3].map(|_| random_laurent_unit(&mut rng, false));
        prop_assert_eq!(tame_symbol(&a1.mul(&a2), &b), tame_symbol(&a1, &b) * tame_symbol(&a2, &b));
        prop_assert_eq!(tame_symbol(&b, &a1.mul(&a2)), tame_symbol(&b, &a1) * tame_symbol(&b, &a2));
        prop_assert_eq!(tame_symbol(&a1, &b) * tame_symbol(&b, &a1), q(1));
    }

    #[test]
    fn steinberg(seed in any::<u64>(), unit in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_laurent_unit(&mut rng, false);
        if unit {
            a = LaurentUnit::new(0, q(1), a.unit_part.clone()).unwrap();
        }
        if let Some(b) = a.one_minus() {
            prop_assert_eq!(tame_symbol(&a, &b), q(1));
        }
    }

    #[test]
    fn symbol_is_a_cocycle(seed in any::<u64>(), place in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a, b, c] = [0; 3].map(|_| random_laurent_unit(&mut rng, false));
        let pl = [Place::Real, Place::Finite(3), Place::Finite(5), Place::Finite(13)][place];
        prop_assert!(cocycle_check(&a, &b, &c, pl).unwrap());
    }

    #[test]
    fn weil_index_conjugation(seed in any::<u64>(), p in prop::sample::select(vec![3u64, 5, 7, 11, 13])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_rational(&mut rng, 200);
        let g = weil_index(&a, Place::Finite(p)).unwrap().to_complex();
        let gm = weil_index(&-&a, Place::Finite(p)).unwrap().to_complex();
        prop_assert!((g.norm() - 1.0).abs() < 1e-12);
        prop_assert!((g * gm - 1.0).norm() < 1e-12);
    }

    #[test]
    fn hilbert_symbol_from_weil_indices(seed in any::<u64>(), p in prop::sample::select(vec![3u64, 5, 7, 11])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_rational(&mut rng, 100);
        let b = random_rational(&mut rng, 100);
        let h = hilbert_from_weil(&a, &b, p).unwrap();
        prop_assert_eq!(h, hilbert_classical(&a, &b, p));
        let c = random_rational(&mut rng, 100);
        prop_assert_eq!(hilbert_from_weil(&(&a * &c), &b, p).unwrap(), h * hilbert_from_weil(&c, &b, p).unwrap());
    }

    #[test]
    fn product_over_places_is_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_laurent_unit(&mut rng, true);
        let b = random_laurent_unit(&mut rng, true);
        let rep = product_formula(&a, &b, &required_places(&a, &b).unwrap()).unwrap();
        prop_assert!((rep.product - 1.0).norm() <= 1e-10, "{:?}", rep);
    }
}

#[test]
fn classical_oracle_sanity() {
    assert_eq!(hilbert_classical(&q(3), &q(3), 3), -1);
    assert_eq!(hilbert_classical(&q(2), &q(3), 3), -1);
    assert_eq!(hilbert_classical(&q(1), &q(3), 3), 1);
    assert_eq!(hilbert_classical(&q(5), &q(7), 3), 1);
}
